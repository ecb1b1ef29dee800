#ifndef MINIMAXDL_BOUNDS_HPP_
#define MINIMAXDL_BOUNDS_HPP_

#include "minimaxdl/core.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace minimaxdl {

enum class BoundId { thm1, cor1, thm2, thm3_upper, ccrb };

inline const char* to_string(BoundId id) {
  switch (id) {
    case BoundId::thm1: return "thm1";
    case BoundId::cor1: return "cor1";
    case BoundId::thm2: return "thm2";
    case BoundId::thm3_upper: return "thm3_upper";
    case BoundId::ccrb: return "ccrb";
  }
  return "unknown";
}

inline BoundId parse_bound_id(const std::string& name) {
  if (name == "thm1") return BoundId::thm1;
  if (name == "cor1") return BoundId::cor1;
  if (name == "thm2") return BoundId::thm2;
  if (name == "thm3_upper" || name == "thm3") return BoundId::thm3_upper;
  if (name == "ccrb") return BoundId::ccrb;
  throw Error(ErrorKind::config, "bound in {thm1, cor1, thm2, thm3_upper, ccrb}",
              "unknown bound id '" + name + "'");
}

// Which term of min{first, second} determined the value. `first` is the
// neighborhood-radius term, `second` the sample-size term.
enum class Branch { first, second, none };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::first: return "first";
    case Branch::second: return "second";
    case Branch::none: return "none";
  }
  return "none";
}

struct Precondition {
  std::string name;
  bool satisfied = false;
};

// Values are in squared-Frobenius MSE units. Branch values already include the
// leading constant, so value == min(first_branch, second_branch).
struct BoundReport {
  BoundId id = BoundId::thm1;
  double value = 0.0;
  Branch active_branch = Branch::none;
  std::optional<double> first_branch;
  std::optional<double> second_branch;
  std::vector<Precondition> preconditions;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> params;
  std::optional<Matrix> matrix;  // ccrb only
};

inline constexpr double kThm1Constant = 1.0 / 320.0;
inline constexpr double kThm2Constant = 1.0 / 12960.0;
inline constexpr double kThm3NoiseLevel = 0.4;

// Largest SNR under which the Gaussian-sparse bound holds: m / (18 sqrt(80) s).
inline double low_snr_threshold(int m, int s) {
  require(m >= 1 && s >= 1, ErrorKind::parameter, "m >= 1 and s >= 1");
  return static_cast<double>(m) / (18.0 * std::sqrt(80.0) * s);
}

namespace detail {

class PreconditionList {
 public:
  void check(const std::string& name, bool ok) { items_.push_back({name, ok}); }

  // Throws on the first failed hypothesis.
  std::vector<Precondition> enforce() const {
    for (const auto& p : items_) {
      require(p.satisfied, ErrorKind::precondition, p.name);
    }
    return items_;
  }

 private:
  std::vector<Precondition> items_;
};

// p(m-1)/10 - 1, clamped at zero.
inline double packing_log_term(int m, int p, std::vector<std::string>& warnings) {
  const double v = static_cast<double>(p) * (m - 1) / 10.0 - 1.0;
  if (v <= 0.0) {
    warnings.emplace_back("p(m-1)/10 - 1 <= 0; clamped to 0");
    return 0.0;
  }
  return v;
}

inline void select_branch(BoundReport& rep, double first, double second) {
  rep.first_branch = first;
  rep.second_branch = second;
  if (first <= second) {
    rep.value = first;
    rep.active_branch = Branch::first;
  } else {
    rep.value = second;
    rep.active_branch = Branch::second;
  }
}

inline void check_common(PreconditionList& pre, int m, int p, double N, double r) {
  require(m >= 1 && p >= 1, ErrorKind::parameter, "m >= 1 and p >= 1");
  require(r > 0.0, ErrorKind::parameter, "r > 0");
  pre.check("p(m-1) >= 50", static_cast<double>(p) * (m - 1) >= 50.0);
  pre.check("r <= 2 sqrt(p)", r <= 2.0 * std::sqrt(static_cast<double>(p)));
  pre.check("N >= 1", N >= 1.0);
}

}  // namespace detail

// Lower bound for general coefficient covariance:
// (1/320) min{ r^2, sigma^2 / (N ||Sigma_x||_2) (p(m-1)/10 - 1) }.
inline BoundReport thm1_lower(int m, int p, double N, double sigma2, double sigma_x_norm,
                              double r) {
  require(sigma2 > 0.0, ErrorKind::parameter, "sigma^2 > 0");
  require(sigma_x_norm > 0.0, ErrorKind::parameter, "||Sigma_x||_2 > 0");
  detail::PreconditionList pre;
  detail::check_common(pre, m, p, N, r);
  BoundReport rep;
  rep.id = BoundId::thm1;
  rep.preconditions = pre.enforce();
  const double k = detail::packing_log_term(m, p, rep.warnings);
  detail::select_branch(rep, kThm1Constant * r * r,
                        kThm1Constant * sigma2 / (N * sigma_x_norm) * k);
  rep.params = {{"m", m}, {"p", p}, {"N", N}, {"sigma2", sigma2},
                {"sigma_x_norm", sigma_x_norm}, {"r", r}};
  return rep;
}

// Sparse-coefficient corollary: (1/320) min{ r^2, 2p/(SNR N m) (p(m-1)/10 - 1) }.
// rip_ok is the caller's assertion that delta_s <= 1/2.
inline BoundReport cor1_lower(int m, int p, double N, double snr, double r, bool rip_ok) {
  require(snr > 0.0, ErrorKind::parameter, "SNR > 0");
  detail::PreconditionList pre;
  detail::check_common(pre, m, p, N, r);
  pre.check("delta_s <= 1/2", rip_ok);
  BoundReport rep;
  rep.id = BoundId::cor1;
  rep.preconditions = pre.enforce();
  const double k = detail::packing_log_term(m, p, rep.warnings);
  detail::select_branch(rep, kThm1Constant * r * r,
                        kThm1Constant * (2.0 * p / (snr * N * m)) * k);
  rep.params = {{"m", m}, {"p", p}, {"N", N}, {"snr", snr}, {"r", r},
                {"rip_ok", rip_ok ? 1.0 : 0.0}};
  return rep;
}

// Gaussian-sparse low-SNR bound:
// (1/12960) min{ r^2/s, p/(SNR^2 N m^2) (p(m-1)/10 - 1) }.
inline BoundReport thm2_lower(int m, int p, int s, double N, double snr, double r) {
  require(snr > 0.0, ErrorKind::parameter, "SNR > 0");
  require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
  detail::PreconditionList pre;
  detail::check_common(pre, m, p, N, r);
  pre.check("SNR <= m/(18 sqrt(80) s)", snr <= low_snr_threshold(m, s));
  BoundReport rep;
  rep.id = BoundId::thm2;
  rep.preconditions = pre.enforce();
  const double k = detail::packing_log_term(m, p, rep.warnings);
  detail::select_branch(rep, kThm2Constant * r * r / s,
                        kThm2Constant * p / (snr * snr * N * static_cast<double>(m) * m) * k);
  rep.params = {{"m", m}, {"p", p}, {"s", s}, {"N", N}, {"snr", snr}, {"r", r}};
  return rep;
}

// MSE achieved by the thresholding scheme in the square case m = p, D0 = I:
// 4(p^2/N)[(1-r)^2/SNR + 1] + 2p exp(-p N 0.4^2 / (2 sigma^2)).
inline BoundReport thm3_upper(int p, double N, double r, int s, double sigma, double snr) {
  require(p >= 1, ErrorKind::parameter, "p >= 1");
  require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
  require(snr > 0.0, ErrorKind::parameter, "SNR > 0");
  require(sigma > 0.0, ErrorKind::parameter, "sigma > 0");
  require(r > 0.0, ErrorKind::parameter, "r > 0");
  detail::PreconditionList pre;
  pre.check("N >= 1", N >= 1.0);
  pre.check("r <= 2 sqrt(p)", r <= 2.0 * std::sqrt(static_cast<double>(p)));
  pre.check("r sqrt(s) <= 1/10", r * std::sqrt(static_cast<double>(s)) <= 0.1);
  pre.check("sigma <= 0.4", sigma <= kThm3NoiseLevel);
  BoundReport rep;
  rep.id = BoundId::thm3_upper;
  rep.preconditions = pre.enforce();
  const double pp = static_cast<double>(p);
  const double variance_term = 4.0 * (pp * pp / N) * ((1.0 - r) * (1.0 - r) / snr + 1.0);
  const double outage_term =
      2.0 * pp * std::exp(-pp * N * kThm3NoiseLevel * kThm3NoiseLevel / (2.0 * sigma * sigma));
  rep.value = variance_term + outage_term;
  rep.active_branch = Branch::none;
  rep.params = {{"p", p}, {"N", N}, {"r", r}, {"s", s}, {"sigma", sigma}, {"snr", snr}};
  return rep;
}

// Constrained Cramer-Rao bound for p = s = 1 and d = e_1:
// (1/(SNR^2 m^2 N)) (I - e_1 e_1^T).
inline Matrix ccrb_matrix(double snr, int m, double N) {
  require(snr > 0.0, ErrorKind::parameter, "SNR > 0");
  require(m >= 1, ErrorKind::parameter, "m >= 1");
  require(N >= 1.0, ErrorKind::parameter, "N >= 1");
  Matrix c = Matrix::Identity(m, m);
  c(0, 0) = 0.0;
  return c / (snr * snr * static_cast<double>(m) * m * N);
}

inline BoundReport ccrb_report(double snr, int m, double N) {
  BoundReport rep;
  rep.id = BoundId::ccrb;
  rep.matrix = ccrb_matrix(snr, m, N);
  rep.value = rep.matrix->trace();
  rep.active_branch = Branch::none;
  rep.preconditions = {{"p = s = 1", true}};
  rep.params = {{"snr", snr}, {"m", m}, {"N", N}};
  return rep;
}

// Scalar inputs shared by the N-invertible bounds.
struct BoundParams {
  int m = 0;
  int p = 0;
  int s = 1;
  double snr = 0.0;
  double sigma2 = 0.0;
  double sigma_x_norm = 0.0;
  double r = 0.0;
  bool rip_ok = true;
};

inline BoundReport evaluate_lower_bound(BoundId id, const BoundParams& q, double N) {
  switch (id) {
    case BoundId::thm1: return thm1_lower(q.m, q.p, N, q.sigma2, q.sigma_x_norm, q.r);
    case BoundId::cor1: return cor1_lower(q.m, q.p, N, q.snr, q.r, q.rip_ok);
    case BoundId::thm2: return thm2_lower(q.m, q.p, q.s, N, q.snr, q.r);
    default: break;
  }
  throw Error(ErrorKind::parameter, "bound in {thm1, cor1, thm2}",
              std::string("sample-size inversion is not defined for ") + to_string(id));
}

struct SampleSizeResult {
  std::uint64_t N = 1;
  bool degenerate = false;  // the radius term alone meets the target
  double value_at_N = 0.0;
  std::optional<double> value_at_N_minus_1;
};

// Smallest N with bound(N) <= target_eps.
inline SampleSizeResult required_sample_size(BoundId id, double target_eps, const BoundParams& q) {
  require(target_eps > 0.0 && std::isfinite(target_eps), ErrorKind::parameter,
          "target_eps > 0", "infeasible target: target_eps must be positive and finite");
  const BoundReport at_one = evaluate_lower_bound(id, q, 1.0);
  SampleSizeResult out;
  if (at_one.value <= target_eps) {
    out.N = 1;
    out.degenerate = *at_one.first_branch <= target_eps;
    out.value_at_N = at_one.value;
    return out;
  }
  constexpr double kMaxN = 4.0e18;
  const double guess = std::ceil(*at_one.second_branch / target_eps);
  require(guess < kMaxN, ErrorKind::parameter, "required N representable",
          "infeasible target: required sample size exceeds 4e18");
  auto value = [&](std::uint64_t n) {
    return evaluate_lower_bound(id, q, static_cast<double>(n)).value;
  };
  std::uint64_t n = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(guess));
  while (n > 2 && value(n - 1) <= target_eps) --n;
  while (value(n) > target_eps) ++n;
  out.N = n;
  out.value_at_N = value(n);
  out.value_at_N_minus_1 = value(n - 1);
  return out;
}

// Standard normal upper tail Q(x) = P{Z > x}.
inline double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Probability mass of N(0, sigma^2) on [-0.4, 0.4].
inline double truncated_noise_mass(double sigma) {
  require(sigma > 0.0, ErrorKind::parameter, "sigma > 0");
  return gaussian_tail(-kThm3NoiseLevel / sigma) - gaussian_tail(kThm3NoiseLevel / sigma);
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_BOUNDS_HPP_
