#ifndef MINIMAXDL_MODEL_HPP_
#define MINIMAXDL_MODEL_HPP_

#include "minimaxdl/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace minimaxdl {

inline constexpr double kManifoldTol = 1e-10;

// m x p real matrix with unit-norm columns (a point on the oblique manifold).
class DictionaryMatrix {
 public:
  explicit DictionaryMatrix(Matrix entries, double tol = kManifoldTol)
      : entries_(std::move(entries)) {
    require(entries_.rows() > 0 && entries_.cols() > 0, ErrorKind::parameter,
            "m >= 1 and p >= 1");
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double err = std::abs(entries_.col(j).norm() - 1.0);
      require(err <= tol, ErrorKind::parameter, "unit-norm columns",
              "column " + std::to_string(j) + " has norm error " +
                  std::to_string(err));
    }
  }

  // Rescales every column to unit norm. Zero columns are rejected.
  static DictionaryMatrix normalized(Matrix entries) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double n = entries.col(j).norm();
      require(n > 0.0, ErrorKind::parameter, "nonzero columns");
      entries.col(j) /= n;
    }
    return DictionaryMatrix(std::move(entries));
  }

  static DictionaryMatrix identity(int m) {
    return DictionaryMatrix(Matrix::Identity(m, m));
  }

  // Columns drawn i.i.d. uniform on the unit sphere.
  static DictionaryMatrix random(int m, int p, Rng& rng) {
    Matrix a(m, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < m; ++i) a(i, j) = rng.normal();
    return normalized(std::move(a));
  }

  int rows() const { return static_cast<int>(entries_.rows()); }
  int cols() const { return static_cast<int>(entries_.cols()); }
  const Matrix& matrix() const { return entries_; }

 private:
  Matrix entries_;
};

enum class NonzeroLaw { rademacher, gaussian };

inline const char* to_string(NonzeroLaw law) {
  return law == NonzeroLaw::rademacher ? "rademacher" : "gaussian";
}

struct GeneralCovariance {
  Matrix sigma_x;
  Matrix factor;  // symmetric square root of sigma_x
};

struct SparseUniform {
  int s = 1;
  NonzeroLaw law = NonzeroLaw::rademacher;
  double sigma_a2 = 1.0;
};

// Distribution of the coefficient vector x.
class CoefficientModel {
 public:
  // Zero-mean Gaussian with covariance sigma_x (any psd matrix).
  static CoefficientModel general(const Matrix& sigma_x) {
    require(sigma_x.rows() == sigma_x.cols() && sigma_x.rows() > 0,
            ErrorKind::parameter, "sigma_x square");
    require((sigma_x - sigma_x.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
            ErrorKind::parameter, "sigma_x symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_x);
    require(es.eigenvalues().minCoeff() >= -1e-10, ErrorKind::parameter,
            "sigma_x positive semidefinite");
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    GeneralCovariance g{sigma_x, es.eigenvectors() * root.asDiagonal() *
                                     es.eigenvectors().transpose()};
    return CoefficientModel(static_cast<int>(sigma_x.rows()), std::move(g));
  }

  static CoefficientModel sparse(int p, int s, NonzeroLaw law, double sigma_a2 = 1.0) {
    require(p >= 1, ErrorKind::parameter, "p >= 1");
    require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
    require(sigma_a2 > 0.0, ErrorKind::parameter, "sigma_a^2 > 0");
    require(law == NonzeroLaw::gaussian || sigma_a2 == 1.0, ErrorKind::parameter,
            "rademacher nonzeros have sigma_a^2 = 1");
    return CoefficientModel(p, SparseUniform{s, law, sigma_a2});
  }

  static CoefficientModel sparse_rademacher(int p, int s) {
    return sparse(p, s, NonzeroLaw::rademacher, 1.0);
  }
  static CoefficientModel sparse_gaussian(int p, int s, double sigma_a2) {
    return sparse(p, s, NonzeroLaw::gaussian, sigma_a2);
  }

  int dimension() const { return p_; }
  bool is_sparse() const { return std::holds_alternative<SparseUniform>(variant_); }
  const SparseUniform& sparse_params() const {
    require(is_sparse(), ErrorKind::unsupported_model, "sparse-uniform model");
    return std::get<SparseUniform>(variant_);
  }
  const GeneralCovariance& general_params() const {
    require(!is_sparse(), ErrorKind::unsupported_model, "general-covariance model");
    return std::get<GeneralCovariance>(variant_);
  }
  std::optional<int> sparsity() const {
    if (is_sparse()) return sparse_params().s;
    return std::nullopt;
  }

 private:
  CoefficientModel(int p, std::variant<GeneralCovariance, SparseUniform> v)
      : p_(p), variant_(std::move(v)) {}

  int p_;
  std::variant<GeneralCovariance, SparseUniform> variant_;
};

// Additive white Gaussian noise with per-entry variance. Zero variance is
// accepted as the noiseless limit; snr() rejects it.
struct NoiseModel {
  double variance = 1.0;

  explicit NoiseModel(double v) : variance(v) {
    require(v >= 0.0 && std::isfinite(v), ErrorKind::parameter, "sigma^2 >= 0");
  }
};

struct ObservationBatch {
  Matrix Y;                                   // m x N
  std::optional<Matrix> X;                    // p x N
  std::optional<std::vector<Support>> supports;
  std::optional<std::size_t> dict_index;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(Y.cols()); }
};

// Uniform s-subset of {0..p-1} via partial Fisher-Yates; returned sorted.
inline Support sample_support(const CoefficientModel& model, Rng& rng) {
  require(model.is_sparse(), ErrorKind::unsupported_model,
          "sparse-uniform model", "support sampling needs a sparse-uniform model");
  const int p = model.dimension();
  const int s = model.sparse_params().s;
  Support pool(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) pool[i] = i;
  for (int i = 0; i < s; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p - i)));
    std::swap(pool[i], pool[j]);
  }
  Support out(pool.begin(), pool.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline Vector sample_coefficients(const CoefficientModel& model, Rng& rng,
                                  Support* support_out) {
  const int p = model.dimension();
  Vector x = Vector::Zero(p);
  if (model.is_sparse()) {
    const SparseUniform& sp = model.sparse_params();
    Support support = sample_support(model, rng);
    const double scale = std::sqrt(sp.sigma_a2);
    for (int j : support) {
      x(j) = sp.law == NonzeroLaw::rademacher ? rng.rademacher() : scale * rng.normal();
    }
    if (support_out) *support_out = std::move(support);
  } else {
    Vector z(p);
    for (int i = 0; i < p; ++i) z(i) = rng.normal();
    x = model.general_params().factor * z;
  }
  return x;
}

}  // namespace detail

inline Vector sample_coefficients(const CoefficientModel& model, Rng& rng) {
  return detail::sample_coefficients(model, rng, nullptr);
}

// Draws N observations y_k = D x_k + n_k. Per sample, the coefficient vector is
// drawn first and then the m noise entries, all from one stream seeded with
// `seed`.
inline ObservationBatch generate_batch(const DictionaryMatrix& D, const CoefficientModel& cm,
                                       const NoiseModel& nm, std::size_t N,
                                       std::uint64_t seed) {
  require(cm.dimension() == D.cols(), ErrorKind::dimension_mismatch,
          "model dimension p equals D.cols");
  const int m = D.rows();
  const int p = D.cols();
  const auto n = static_cast<Eigen::Index>(N);
  Rng rng(seed);
  ObservationBatch batch;
  batch.seed = seed;
  batch.Y.resize(m, n);
  batch.X = Matrix(p, n);
  if (cm.is_sparse()) batch.supports = std::vector<Support>(N);
  const double noise_scale = std::sqrt(nm.variance);
  for (Eigen::Index k = 0; k < n; ++k) {
    Support* support = cm.is_sparse() ? &(*batch.supports)[static_cast<std::size_t>(k)] : nullptr;
    const Vector x = detail::sample_coefficients(cm, rng, support);
    batch.X->col(k) = x;
    Vector y = D.matrix() * x;
    for (int i = 0; i < m; ++i) y(i) += noise_scale * rng.normal();
    batch.Y.col(k) = y;
  }
  return batch;
}

inline Matrix coefficient_covariance(const CoefficientModel& model) {
  if (!model.is_sparse()) return model.general_params().sigma_x;
  const SparseUniform& sp = model.sparse_params();
  const int p = model.dimension();
  return (static_cast<double>(sp.s) / p) * sp.sigma_a2 * Matrix::Identity(p, p);
}

// Tr(D Sigma_x D^T) / (m sigma^2) = E||Dx||^2 / E||n||^2.
inline double snr(const DictionaryMatrix& D, const CoefficientModel& cm, const NoiseModel& nm) {
  require(cm.dimension() == D.cols(), ErrorKind::dimension_mismatch,
          "model dimension p equals D.cols");
  require(nm.variance > 0.0, ErrorKind::parameter, "sigma^2 > 0",
          "SNR is undefined for sigma^2 = 0");
  const Matrix cov = coefficient_covariance(cm);
  const double signal = (D.matrix() * cov * D.matrix().transpose()).trace();
  return signal / (D.rows() * nm.variance);
}

struct SnrInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v, double rel_tol = 1e-12) const {
    return v >= lower * (1.0 - rel_tol) && v <= upper * (1.0 + rel_tol);
  }
};

// Range of the SNR over all dictionaries with RIP constant delta_s.
inline SnrInterval snr_sandwich(double delta_s, int s, double sigma_a2, double sigma2, int m) {
  require(delta_s >= 0.0 && delta_s < 1.0, ErrorKind::parameter, "0 <= delta_s < 1");
  require(s >= 1 && m >= 1, ErrorKind::parameter, "s >= 1 and m >= 1");
  require(sigma2 > 0.0 && sigma_a2 > 0.0, ErrorKind::parameter, "sigma^2 > 0 and sigma_a^2 > 0");
  const double base = s * sigma_a2 / (m * sigma2);
  return {(1.0 - delta_s) * base, (1.0 + delta_s) * base};
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_MODEL_HPP_
