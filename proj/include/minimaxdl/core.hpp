#ifndef MINIMAXDL_CORE_HPP_
#define MINIMAXDL_CORE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <exception>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace minimaxdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

enum class ErrorKind {
  parameter,           // a numeric argument is outside its admissible range
  precondition,        // a theorem hypothesis does not hold
  dimension_mismatch,
  unsupported_model,
  construction_failure,
  numerical,
  config,              // malformed or incomplete configuration
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::unsupported_model: return "unsupported_model";
    case ErrorKind::construction_failure: return "construction_failure";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure in the library is reported through this type. `condition`
// names the violated requirement (e.g. "p(m-1) >= 50") so callers can report
// it without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string condition, const std::string& message)
      : std::runtime_error(message), kind_(kind), condition_(std::move(condition)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& condition() const noexcept { return condition_; }

 private:
  ErrorKind kind_;
  std::string condition_;
};

inline void require(bool ok, ErrorKind kind, const std::string& condition,
                    const std::string& message = {}) {
  if (!ok) {
    throw Error(kind, condition,
                message.empty() ? "violated: " + condition : message);
  }
}

// ---------------------------------------------------------------------------
// Seeds and random streams
// ---------------------------------------------------------------------------

// Per-trial / per-point seed derivation. Bit-exact contract:
//   z = master + 0x9E3779B97F4A7C15 * (index + 1)   (mod 2^64)
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Random stream built on std::mt19937_64, whose output sequence is fixed by
// the standard. The distributions are implemented here rather than taken
// from <random> because the library's distribution objects are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; exact by rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// ---------------------------------------------------------------------------
// Combinatorics
// ---------------------------------------------------------------------------

// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // result * num / i is exact at every step; guard the multiplication.
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g;
    const std::uint64_t d = i / g;
    const std::uint64_t nn = num / d;
    if (nn != 0 && r > std::numeric_limits<std::uint64_t>::max() / nn) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = r * nn;
  }
  return result;
}

using Support = std::vector<int>;

// Visits all k-subsets of {0..n-1} in colexicographic order. The callback
// receives the sorted subset; returning false stops the enumeration.
template <typename F>
void for_each_subset_colex(int n, int k, F&& visit) {
  if (k < 0 || k > n) return;
  Support c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    if (!visit(static_cast<const Support&>(c))) return;
    int i = 0;
    while (i < k && c[i] + 1 == (i + 1 < k ? c[i + 1] : n)) ++i;
    if (i == k) return;
    ++c[i];
    for (int j = 0; j < i; ++j) c[j] = j;
  }
}

// ---------------------------------------------------------------------------
// Work distribution
// ---------------------------------------------------------------------------

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return 1;
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
// assigned in contiguous blocks; body must write only to slot i of any shared
// output so results do not depend on scheduling.
template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Mean and standard error of a sample, summed in index order.
struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

inline SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

inline double spectral_norm_symmetric(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_CORE_HPP_
