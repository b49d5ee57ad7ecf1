#include "submax/instance_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace submax {

namespace {

constexpr const char* kMagic = "submax-instance v1";

double parse_double(const std::string& token) {
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("instance parse: bad float '" + token + "'");
  }
  return value;
}

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(std::string("instance parse: missing ") + what);
  }
  return line;
}

Eigen::MatrixXd read_matrix(std::istream& in, int rows, int cols, const char* what) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    std::istringstream row(expect_line(in, what));
    std::string token;
    for (int j = 0; j < cols; ++j) {
      if (!(row >> token)) {
        throw std::runtime_error(std::string("instance parse: short row in ") + what);
      }
      m(i, j) = parse_double(token);
    }
  }
  return m;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void save_instance(std::ostream& out, const DiversityInstance& inst) {
  const int d = inst.gv.dim();
  out << kMagic << '\n';
  out << "n " << inst.gv.count() << '\n';
  out << "d " << d << '\n';
  out << "D " << format_double(inst.gv.norm_bound()) << '\n';
  out << "lambda " << format_double(inst.lambda) << '\n';
  if (inst.base.isIdentity(0.0)) {
    out << "B identity\n";
  } else {
    out << "B dense\n";
    write_matrix(out, inst.base);
  }
  out << "vectors\n";
  write_matrix(out, inst.gv.matrix());
}

void save_instance(const std::string& path, const DiversityInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_instance(out, inst);
  if (!out) throw std::runtime_error("write failed: " + path);
}

DiversityInstance load_instance(std::istream& in) {
  if (expect_line(in, "header") != kMagic) {
    throw std::runtime_error("instance parse: bad header (expected '" +
                             std::string(kMagic) + "')");
  }
  auto read_field = [&](const char* key) {
    std::istringstream line(expect_line(in, key));
    std::string name, token;
    if (!(line >> name >> token) || name != key) {
      throw std::runtime_error(std::string("instance parse: expected field ") + key);
    }
    return token;
  };
  const int n = std::stoi(read_field("n"));
  const int d = std::stoi(read_field("d"));
  const double norm_bound = parse_double(read_field("D"));
  const double lambda = parse_double(read_field("lambda"));
  const std::string base_kind = read_field("B");

  Eigen::MatrixXd base;
  if (base_kind == "identity") {
    base = Eigen::MatrixXd::Identity(d, d);
  } else if (base_kind == "dense") {
    base = read_matrix(in, d, d, "B");
  } else {
    throw std::runtime_error("instance parse: unknown base kind '" + base_kind + "'");
  }
  if (expect_line(in, "vectors") != "vectors") {
    throw std::runtime_error("instance parse: expected 'vectors'");
  }
  Eigen::MatrixXd vectors = read_matrix(in, n, d, "vectors");
  return DiversityInstance{GroundVectors(std::move(vectors), norm_bound),
                           std::move(base), lambda};
}

DiversityInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_instance(in);
}

}  // namespace submax
