#ifndef MINIMAXDL_LEARNERS_HPP_
#define MINIMAXDL_LEARNERS_HPP_

#include "minimaxdl/geometry.hpp"
#include "minimaxdl/infotheory.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace minimaxdl {

struct LearnedDictionary {
  Matrix D_hat;  // columns have norm <= 1, not necessarily = 1
  std::optional<std::uint64_t> coeff_mismatch_count;
  std::uint64_t clipped_columns = 0;
};

inline constexpr double kDecodeThreshold = 0.5;

// Entrywise three-level quantizer: 1 above the threshold, -1 below its
// negative, 0 in between.
inline Matrix threshold_decode(const Matrix& Y, double threshold = kDecodeThreshold) {
  return Y.unaryExpr([threshold](double y) {
    if (y > threshold) return 1.0;
    if (y < -threshold) return -1.0;
    return 0.0;
  });
}

namespace detail {

inline std::uint64_t project_columns(Matrix& D) {
  std::uint64_t clipped = 0;
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    if (D.col(j).norm() > 1.0) {
      D.col(j) = project_unit_ball(D.col(j));
      ++clipped;
    }
  }
  return clipped;
}

}  // namespace detail

// Thresholding dictionary learner for the square case D0 = I: decode the
// coefficients entrywise, correlate them with the observations, rescale by
// p/(N s), then project every column onto the unit ball. Ground-truth
// coefficients, when given, only feed the mismatch diagnostic.
inline LearnedDictionary algorithm1(const Matrix& Y, int s,
                                    const std::optional<Matrix>& true_X = std::nullopt,
                                    double threshold = kDecodeThreshold) {
  const auto p = Y.rows();
  const auto N = Y.cols();
  require(N >= 1, ErrorKind::parameter, "N >= 1");
  require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
  const Matrix X_hat = threshold_decode(Y, threshold);
  LearnedDictionary out;
  out.D_hat = (static_cast<double>(p) / (static_cast<double>(N) * s)) * (Y * X_hat.transpose());
  out.clipped_columns = detail::project_columns(out.D_hat);
  if (true_X) {
    require(true_X->rows() == p && true_X->cols() == N, ErrorKind::dimension_mismatch,
            "ground-truth X is p x N with p = m");
    out.coeff_mismatch_count =
        static_cast<std::uint64_t>((X_hat.array() != true_X->array()).count());
  }
  return out;
}

// Least-squares dictionary given the true coefficients, columns clipped to
// the unit ball.
inline LearnedDictionary oracle_ls(const Matrix& Y, const Matrix& X) {
  require(Y.cols() == X.cols(), ErrorKind::dimension_mismatch, "Y and X have the same N");
  const auto p = X.rows();
  require(X.cols() >= p, ErrorKind::numerical, "X X^T invertible",
          "oracle least squares needs N >= p");
  const Matrix gram = X * X.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  require(lmax > 0.0 && es.eigenvalues().minCoeff() > 1e-12 * lmax, ErrorKind::numerical,
          "X X^T invertible", "oracle least squares: X X^T is rank deficient");
  LearnedDictionary out;
  out.D_hat = gram.llt().solve(X * Y.transpose()).transpose();
  out.clipped_columns = detail::project_columns(out.D_hat);
  return out;
}

struct MseEstimate {
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  std::uint64_t trials = 0;
};

// Average of ||D_hat - D_true||_F^2 over independent batches. Batch t is
// generated with seed derive_seed(master_seed, t); per-trial errors are
// stored by index and summed in index order, so the thread count does not
// change the result.
inline MseEstimate monte_carlo_mse(const Estimator& learner, const DictionaryMatrix& D_true,
                                   const CoefficientModel& cm, const NoiseModel& nm,
                                   std::size_t N, std::uint64_t trials,
                                   std::uint64_t master_seed, unsigned threads = 1) {
  require(trials >= 2, ErrorKind::parameter, "trials >= 2");
  std::vector<double> errors(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    const ObservationBatch batch = generate_batch(D_true, cm, nm, N, derive_seed(master_seed, t));
    const Matrix D_hat = learner(batch);
    errors[t] = (D_hat - D_true.matrix()).squaredNorm();
  });
  const SampleStats st = sample_stats(errors);
  return {st.mean, st.std_error, trials};
}

// Adapters turning the learners into batch estimators.
inline Estimator algorithm1_estimator(int s) {
  return [s](const ObservationBatch& b) { return algorithm1(b.Y, s).D_hat; };
}

inline Estimator oracle_ls_estimator() {
  return [](const ObservationBatch& b) {
    require(b.X.has_value(), ErrorKind::parameter, "batch carries ground-truth X");
    return oracle_ls(b.Y, *b.X).D_hat;
  };
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_LEARNERS_HPP_
