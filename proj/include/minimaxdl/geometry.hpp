#ifndef MINIMAXDL_GEOMETRY_HPP_
#define MINIMAXDL_GEOMETRY_HPP_

#include "minimaxdl/model.hpp"

#include <cstdint>
#include <string>

namespace minimaxdl {

inline bool is_on_oblique_manifold(const Matrix& D, double tol = kManifoldTol) {
  require(tol > 0.0, ErrorKind::parameter, "tol > 0");
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    if (!(std::abs(D.col(j).norm() - 1.0) <= tol)) return false;
  }
  return true;
}

// The open Frobenius ball {D : ||D - D0||_F < r} around a reference dictionary.
struct NeighborhoodSpec {
  DictionaryMatrix D0;
  double r;

  NeighborhoodSpec(DictionaryMatrix d0, double radius) : D0(std::move(d0)), r(radius) {
    require(r > 0.0, ErrorKind::parameter, "r > 0");
    require(r <= 2.0 * std::sqrt(static_cast<double>(D0.cols())), ErrorKind::parameter,
            "r <= 2 sqrt(p)");
  }
};

inline bool in_neighborhood(const DictionaryMatrix& D, const NeighborhoodSpec& spec) {
  require(D.rows() == spec.D0.rows() && D.cols() == spec.D0.cols(),
          ErrorKind::dimension_mismatch, "D and D0 have the same shape");
  return (D.matrix() - spec.D0.matrix()).norm() < spec.r;
}

// Random unit-column dictionary strictly inside the neighborhood: D0 plus a
// Gaussian perturbation of Frobenius norm fraction * r, columns renormalized.
// The fraction is halved until the result lands inside.
inline DictionaryMatrix random_neighbor(const NeighborhoodSpec& spec, Rng& rng,
                                        double fraction = 0.5) {
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::parameter, "0 < fraction < 1");
  const Matrix& D0 = spec.D0.matrix();
  Matrix delta(D0.rows(), D0.cols());
  for (Eigen::Index j = 0; j < delta.cols(); ++j)
    for (Eigen::Index i = 0; i < delta.rows(); ++i) delta(i, j) = rng.normal();
  delta /= delta.norm();
  for (int attempt = 0; attempt < 64; ++attempt, fraction *= 0.5) {
    Matrix candidate = D0 + fraction * spec.r * delta;
    bool nonzero = true;
    for (Eigen::Index j = 0; j < candidate.cols(); ++j) {
      const double n = candidate.col(j).norm();
      nonzero = nonzero && n > 0.0;
      if (n > 0.0) candidate.col(j) /= n;
    }
    if (nonzero && (candidate - D0).norm() < spec.r) return DictionaryMatrix(candidate);
  }
  return spec.D0;
}

enum class RipMethod { exact, monte_carlo };

inline const char* to_string(RipMethod m) {
  return m == RipMethod::exact ? "exact" : "monte_carlo";
}

struct RipEstimate {
  int s = 0;
  double delta = 0.0;
  RipMethod method = RipMethod::exact;
  std::uint64_t supports_checked = 0;
  Support extremal_support;  // support attaining delta
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

namespace detail {

// max(lambda_max - 1, 1 - lambda_min) of the Gram matrix of D restricted to S.
inline double support_rip_deviation(const Matrix& D, const Support& S) {
  const auto k = static_cast<Eigen::Index>(S.size());
  Matrix sub(D.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) sub.col(i) = D.col(S[static_cast<std::size_t>(i)]);
  const Matrix gram = sub.transpose() * sub;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return std::max(ev(ev.size() - 1) - 1.0, 1.0 - ev(0));
}

}  // namespace detail

// Smallest delta with (1-delta)||z||^2 <= ||Dz||^2 <= (1+delta)||z||^2 for all
// s-sparse z, by enumerating every s-subset in colex order.
inline RipEstimate rip_constant_exact(const DictionaryMatrix& D, int s,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
  const int p = D.cols();
  require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
  const std::uint64_t count = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(s));
  require(count <= cap, ErrorKind::parameter, "C(p,s) <= enumeration cap",
          "C(" + std::to_string(p) + "," + std::to_string(s) + ") = " + std::to_string(count) +
              " exceeds the enumeration cap " + std::to_string(cap) +
              "; use rip_constant_monte_carlo");
  RipEstimate est;
  est.s = s;
  est.method = RipMethod::exact;
  est.delta = -std::numeric_limits<double>::infinity();
  for_each_subset_colex(p, s, [&](const Support& S) {
    const double dev = detail::support_rip_deviation(D.matrix(), S);
    if (dev > est.delta) {
      est.delta = dev;
      est.extremal_support = S;
    }
    ++est.supports_checked;
    return true;
  });
  est.delta = std::max(est.delta, 0.0);
  return est;
}

// Lower estimate of the RIP constant from `trials` uniformly sampled supports.
inline RipEstimate rip_constant_monte_carlo(const DictionaryMatrix& D, int s,
                                            std::uint64_t trials, Rng& rng) {
  const int p = D.cols();
  require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
  require(trials >= 1, ErrorKind::parameter, "trials >= 1");
  const CoefficientModel support_law = CoefficientModel::sparse_rademacher(p, s);
  RipEstimate est;
  est.s = s;
  est.method = RipMethod::monte_carlo;
  est.delta = -std::numeric_limits<double>::infinity();
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Support S = sample_support(support_law, rng);
    const double dev = detail::support_rip_deviation(D.matrix(), S);
    if (dev > est.delta) {
      est.delta = dev;
      est.extremal_support = S;
    }
  }
  est.supports_checked = trials;
  est.delta = std::max(est.delta, 0.0);
  return est;
}

// Euclidean projection onto the closed unit ball at the origin.
inline Vector project_unit_ball(const Vector& v) {
  const double n = v.norm();
  if (n <= 1.0) return v;
  return v / n;
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_GEOMETRY_HPP_
