#include "submax/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "submax/common.hpp"

namespace submax {

namespace {

constexpr double kNormSlack = 1e-9;  // relative slack on ||u|| <= D checks

void check_distinct(const std::vector<int>& chain) {
  std::unordered_set<int> seen;
  for (int i : chain) {
    if (!seen.insert(i).second) {
      throw std::invalid_argument("duplicate index " + std::to_string(i) +
                                  " in chain");
    }
  }
}

}  // namespace

GroundVectors::GroundVectors(Eigen::MatrixXd vectors, double norm_bound)
    : vectors_(std::move(vectors)), norm_bound_(norm_bound) {
  if (vectors_.rows() < 1 || vectors_.cols() < 1) {
    throw std::invalid_argument("GroundVectors: need n >= 1 and d >= 1");
  }
  if (!(norm_bound_ > 0.0)) {
    throw std::invalid_argument("GroundVectors: norm bound D must be positive");
  }
  const double limit = norm_bound_ * (1.0 + kNormSlack);
  for (int i = 0; i < count(); ++i) {
    if (vectors_.row(i).norm() > limit) {
      throw std::invalid_argument("GroundVectors: ||u_" + std::to_string(i) +
                                  "|| exceeds the norm bound");
    }
  }
}

Eigen::VectorXd GroundVectors::vector(int i) const {
  check_index(i);
  return vectors_.row(i).transpose();
}

void GroundVectors::set_vector(int i, const Eigen::VectorXd& z) {
  check_index(i);
  if (z.size() != dim()) {
    throw std::invalid_argument("GroundVectors::set_vector: dimension mismatch");
  }
  if (z.norm() > norm_bound_ * (1.0 + kNormSlack)) {
    throw std::invalid_argument("GroundVectors::set_vector: ||z|| exceeds D");
  }
  vectors_.row(i) = z.transpose();
}

void GroundVectors::check_index(int i) const {
  if (i < 0 || i >= count()) {
    throw std::out_of_range("index " + std::to_string(i) + " out of range [0," +
                            std::to_string(count()) + ")");
  }
}

DiversityFamily::DiversityFamily(Eigen::MatrixXd base, double lambda)
    : base_(std::move(base)), lambda_(lambda), current_(base_) {
  if (base_.rows() != base_.cols()) {
    throw std::invalid_argument("DiversityFamily: B must be square");
  }
  if (lambda_ < 0.0) {
    throw std::invalid_argument("DiversityFamily: lambda must be >= 0");
  }
}

void DiversityFamily::add(const GroundVectors& gv, int j) {
  gv.check_index(j);
  if (gv.dim() != current_.rows()) {
    throw std::invalid_argument("DiversityFamily::add: dimension mismatch");
  }
  if (lambda_ == 0.0) return;
  current_.noalias() -= 2.0 * lambda_ * gv.row(j).transpose() * gv.row(j);
}

Eigen::MatrixXd DiversityFamily::h_of(const GroundVectors& gv,
                                      const std::vector<int>& s) const {
  Eigen::MatrixXd h = base_;
  for (int j : s) {
    gv.check_index(j);
    h.noalias() -= 2.0 * lambda_ * gv.row(j).transpose() * gv.row(j);
  }
  return h;
}

double DiversityFamily::frobenius_bound(const GroundVectors& gv) const {
  return base_.norm() + 2.0 * lambda_ * gv.matrix().rowwise().squaredNorm().sum();
}

MarginalOracle DiversityFamily::oracle(const GroundVectors& gv) const {
  MarginalOracle oracle;
  // Capture by value; the closure must stay valid after *this goes away.
  const Eigen::MatrixXd base = base_;
  const double lambda = lambda_;
  const Eigen::MatrixXd vectors = gv.matrix();
  oracle.evaluate = [base, lambda, vectors](const std::vector<int>& s) {
    Eigen::MatrixXd h = base;
    for (int j : s) {
      if (j < 0 || j >= vectors.rows()) {
        throw std::out_of_range("oracle: index out of range");
      }
      h.noalias() -= 2.0 * lambda * vectors.row(j).transpose() * vectors.row(j);
    }
    return h;
  };
  oracle.frobenius_bound = frobenius_bound(gv);
  // Every h(S) is PSD iff the extreme set S = [n] yields a PSD matrix
  // (each selected element subtracts a PSD rank-1 term).
  const Eigen::MatrixXd h_full =
      base - 2.0 * lambda * vectors.transpose() * vectors;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(
      0.5 * (h_full + h_full.transpose()), Eigen::EigenvaluesOnly);
  oracle.psd = eigs.eigenvalues().minCoeff() >= -1e-12;
  return oracle;
}

double DiversityFamily::max_monotone_lambda(const Eigen::MatrixXd& base,
                                            const GroundVectors& gv) {
  const int n = gv.count();
  // Gram of the vectors; <u_i,u_j>^2 are the squared entries.
  const Eigen::MatrixXd gram = gv.matrix() * gv.matrix().transpose();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double numer = quadratic_form(base, gv.vector(i));
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) denom += gram(i, j) * gram(i, j);
    }
    if (denom <= 0.0) continue;  // no interaction, any lambda keeps i nonnegative
    best = std::min(best, numer / (2.0 * denom));
  }
  return best;
}

void diversity_step(DiversityFamily& family, const GroundVectors& gv, int j) {
  family.add(gv, j);
}

Matroid make_partition_matroid(const std::vector<int>& block_of,
                               const std::vector<int>& capacity) {
  for (int b : block_of) {
    if (b < 0 || b >= static_cast<int>(capacity.size())) {
      throw std::invalid_argument("make_partition_matroid: bad block id");
    }
  }
  int rank = 0;
  std::vector<int> block_sizes(capacity.size(), 0);
  for (int b : block_of) block_sizes[b]++;
  for (std::size_t b = 0; b < capacity.size(); ++b) {
    rank += std::min(capacity[b], block_sizes[b]);
  }
  Matroid m;
  m.rank = rank;
  m.independent = [block_of, capacity](const std::vector<int>& s) {
    std::vector<int> used(capacity.size(), 0);
    for (int i : s) {
      if (i < 0 || i >= static_cast<int>(block_of.size())) return false;
      if (++used[block_of[i]] > capacity[block_of[i]]) return false;
    }
    return true;
  };
  return m;
}

double marginal_gain(const GroundVectors& gv, const MarginalOracle& oracle,
                     const std::vector<int>& s, int i) {
  gv.check_index(i);
  if (std::find(s.begin(), s.end(), i) != s.end()) {
    throw std::invalid_argument("marginal_gain: index " + std::to_string(i) +
                                " already in S");
  }
  return quadratic_form(oracle.evaluate(s), gv.vector(i));
}

double evaluate_f(const GroundVectors& gv, const MarginalOracle& oracle,
                  const std::vector<int>& chain) {
  check_distinct(chain);
  double total = 0.0;
  std::vector<int> prefix;
  prefix.reserve(chain.size());
  for (int i : chain) {
    total += marginal_gain(gv, oracle, prefix, i);
    prefix.push_back(i);
  }
  return total;
}

ValidationReport validate_instance(const GroundVectors& gv,
                                   const MarginalOracle& oracle,
                                   int sample_budget, std::uint64_t seed) {
  ValidationReport report;
  Rng rng(substream(seed, 0x7a11da7eULL));
  const int n = gv.count();
  for (int trial = 0; trial < sample_budget; ++trial) {
    // Random S subset T subset [n] and an element outside T.
    std::vector<int> small, large;
    const double p_small = rng.next_double() * 0.4;
    const double p_extra = rng.next_double() * 0.4;
    int probe = -1;
    for (int i = 0; i < n; ++i) {
      const double roll = rng.next_double();
      if (roll < p_small) {
        small.push_back(i);
        large.push_back(i);
      } else if (roll < p_small + p_extra) {
        large.push_back(i);
      } else if (probe < 0 || rng.next_double() < 0.25) {
        probe = i;
      }
    }
    if (probe < 0) continue;
    ++report.samples;

    const Eigen::MatrixXd h_small = oracle.evaluate(small);
    const Eigen::MatrixXd h_large = oracle.evaluate(large);
    const Eigen::VectorXd u = gv.vector(probe);
    const double gain_small = quadratic_form(h_small, u);
    const double gain_large = quadratic_form(h_large, u);

    if (gain_small < -1e-10 || gain_large < -1e-10) {
      ++report.monotonicity_violations;
    }
    if (gain_large > gain_small + 1e-10) {
      ++report.submodularity_violations;
    }
    if (oracle.psd) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(
          0.5 * (h_large + h_large.transpose()), Eigen::EigenvaluesOnly);
      if (eigs.eigenvalues().minCoeff() < -1e-8) ++report.psd_violations;
    }
    if (h_large.norm() > oracle.frobenius_bound * (1.0 + 1e-12)) {
      ++report.frobenius_violations;
    }
  }
  return report;
}

MarginalOracle DiversityInstance::oracle() const {
  return family().oracle(gv);
}

double DiversityInstance::value(const std::vector<int>& s) const {
  check_distinct(s);
  double total = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    total += quadratic_form(base, gv.vector(s[a]));
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      const double ip = gv.row(s[a]).dot(gv.row(s[b]));
      total -= 2.0 * lambda * ip * ip;
    }
  }
  return total;
}

DiversityInstance make_diversity_instance(int n, int d, std::uint64_t seed,
                                          double lambda_scale,
                                          double norm_bound, BaseKind base_kind) {
  if (n < 1 || d < 1) {
    throw std::invalid_argument("make_diversity_instance: need n, d >= 1");
  }
  if (lambda_scale < 0.0) {
    throw std::invalid_argument("make_diversity_instance: lambda_scale >= 0");
  }
  if (!(norm_bound > 0.0)) {
    throw std::invalid_argument("make_diversity_instance: D > 0 required");
  }
  Rng rng(substream(seed, 0x9e17ULL));

  Eigen::MatrixXd vectors(n, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = rng.next_gaussian();
    const double norm = v.norm();
    const double target = (0.7 + 0.3 * rng.next_double()) * norm_bound;
    if (norm > 0.0) v *= target / norm;
    vectors.row(i) = v.transpose();
  }
  GroundVectors gv(std::move(vectors), norm_bound);

  Eigen::MatrixXd base;
  if (base_kind == BaseKind::Identity) {
    base = Eigen::MatrixXd::Identity(d, d);
  } else {
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) g(i, j) = rng.next_gaussian();
    }
    base = g * g.transpose() / static_cast<double>(d);
    base += 0.1 * Eigen::MatrixXd::Identity(d, d);
  }

  double lambda = 0.0;
  if (lambda_scale > 0.0) {
    const double cap = DiversityFamily::max_monotone_lambda(base, gv);
    if (std::isfinite(cap)) lambda = lambda_scale * cap;
  }
  return DiversityInstance{std::move(gv), std::move(base), lambda};
}

}  // namespace submax
