#ifndef MINIMAXDL_INFOTHEORY_HPP_
#define MINIMAXDL_INFOTHEORY_HPP_

#include "minimaxdl/packing.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace minimaxdl {

// Information quantities carry their unit in the type. KL divergences come
// out in nats; Fano's inequality is stated in bits.
struct Nats {
  double value = 0.0;
};
struct Bits {
  double value = 0.0;
};

inline Bits to_bits(Nats n) { return Bits{n.value / std::numbers::ln2}; }

enum class SideInfo { coefficients, supports };

inline const char* to_string(SideInfo s) {
  return s == SideInfo::coefficients ? "coefficients" : "supports";
}

struct MiBudget {
  SideInfo side_info = SideInfo::coefficients;
  double eta = 0.0;                // nats, the closed-form budget
  double computed_mi_upper = 0.0;  // nats
  double std_error = 0.0;          // nonzero only for Monte Carlo support averages
  bool exact = true;
  std::uint64_t supports_evaluated = 0;
  std::optional<double> pairwise_eta;     // 160 N ||Sigma_x||_2 eps / sigma^2
  std::optional<double> spectral_chain;   // rank-times-spectral-norm relaxation
  std::optional<double> chain_closed_form;  // 6480 N s^2 (sigma_a/sigma)^4 eps / p
  std::optional<double> snr;
};

// Upper bound on I(Y; l | X): the average pairwise KL divergence between the
// Gaussian observation laws, with the expectation over X taken analytically:
// (N / (2 sigma^2)) (1/L^2) sum_{l,l'} Tr{(D_l - D_l')^T (D_l - D_l') Sigma_x}.
inline MiBudget mi_upper_given_X(const DictionaryEnsemble& ens, const Matrix& sigma_x, double N,
                                 double sigma2) {
  require(sigma2 > 0.0, ErrorKind::parameter, "sigma^2 > 0");
  require(N >= 0.0, ErrorKind::parameter, "N >= 0");
  require(sigma_x.rows() == ens.D0.cols() && sigma_x.cols() == ens.D0.cols(),
          ErrorKind::dimension_mismatch, "Sigma_x is p x p");
  const std::size_t L = ens.size();
  require(L >= 1, ErrorKind::parameter, "ensemble not empty");
  double total = 0.0;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b < L; ++b) {
      const Matrix diff = ens.members[a] - ens.members[b];
      total += 2.0 * (diff * sigma_x * diff.transpose()).trace();
    }
  }
  const double sigma_norm = spectral_norm_symmetric(sigma_x);
  MiBudget out;
  out.side_info = SideInfo::coefficients;
  out.computed_mi_upper = N / (2.0 * sigma2) * total / (static_cast<double>(L) * L);
  out.eta = kEnsembleSpread * N * sigma_norm * ens.epsilon / sigma2;
  out.pairwise_eta = 0.5 * out.eta;
  out.supports_evaluated = 0;
  return out;
}

// sigma_a^2 D_S D_S^T + sigma^2 I.
inline Matrix conditional_cov(const Matrix& D, const Support& S, double sigma_a2, double sigma2) {
  require(!S.empty() && static_cast<Eigen::Index>(S.size()) <= D.cols(), ErrorKind::parameter,
          "1 <= |S| <= p");
  for (std::size_t i = 0; i < S.size(); ++i) {
    require(S[i] >= 0 && S[i] < D.cols(), ErrorKind::parameter, "support indices in [0, p)");
    for (std::size_t j = 0; j < i; ++j)
      require(S[i] != S[j], ErrorKind::parameter, "support indices distinct");
  }
  require(sigma_a2 >= 0.0 && sigma2 >= 0.0, ErrorKind::parameter, "variances >= 0");
  Matrix sub(D.rows(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t i = 0; i < S.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = D.col(S[i]);
  Matrix cov = sigma_a2 * sub * sub.transpose();
  cov.diagonal().array() += sigma2;
  return cov;
}

struct SupportAveraging {
  enum class Mode { automatic, exact, monte_carlo };
  Mode mode = Mode::automatic;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 0;
  std::uint64_t exact_cap = 10'000;  // automatic mode enumerates up to this many supports

  static SupportAveraging exact_enumeration(std::uint64_t cap = 10'000) {
    return {Mode::exact, 0, 0, cap};
  }
  static SupportAveraging monte_carlo(std::uint64_t trials, std::uint64_t seed) {
    return {Mode::monte_carlo, trials, seed, 0};
  }
};

namespace detail {

struct SupportTerms {
  double trace_term = 0.0;     // (1/L^2) sum Tr{[S_l^-1 - S_l'^-1][S_l' - S_l]}
  double spectral_term = 0.0;  // (1/L^2) sum ||S_l^-1 - S_l'^-1||_2 ||S_l' - S_l||_2
};

inline SupportTerms support_terms(const DictionaryEnsemble& ens, const Support& S,
                                  double sigma_a2, double sigma2) {
  const std::size_t L = ens.size();
  const Eigen::Index m = ens.D0.rows();
  std::vector<Matrix> cov(L), prec(L);
  for (std::size_t l = 0; l < L; ++l) {
    cov[l] = conditional_cov(ens.members[l], S, sigma_a2, sigma2);
    Eigen::LLT<Matrix> llt(cov[l]);
    require(llt.info() == Eigen::Success, ErrorKind::numerical,
            "conditional covariance positive definite");
    prec[l] = llt.solve(Matrix::Identity(m, m));
  }
  SupportTerms t;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b < L; ++b) {
      const Matrix dprec = prec[a] - prec[b];
      const Matrix dcov = cov[b] - cov[a];
      t.trace_term += 2.0 * (dprec * dcov).trace();
      t.spectral_term += 2.0 * spectral_norm_symmetric(dprec) * spectral_norm_symmetric(dcov);
    }
  }
  const double norm = static_cast<double>(L) * static_cast<double>(L);
  t.trace_term /= norm;
  t.spectral_term /= norm;
  return t;
}

}  // namespace detail

// Upper bound on I(Y; l | supp X):
// N E_S{ (1/L^2) sum_{l,l'} Tr{[Sigma_{S,l}^-1 - Sigma_{S,l'}^-1][Sigma_{S,l'} - Sigma_{S,l}]} },
// with the expectation over the uniform s-subset S either enumerated or
// sampled. eta = 12960 N SNR^2 m^2 eps / p with SNR = s sigma_a^2 / (m sigma^2),
// the exact SNR of any unit-column dictionary under this model.
inline MiBudget mi_upper_given_support(const DictionaryEnsemble& ens, int s, double sigma_a2,
                                       double sigma2, double N,
                                       SupportAveraging avg = SupportAveraging{}) {
  const int m = ens.D0.rows();
  const int p = ens.D0.cols();
  require(s >= 1 && s <= p, ErrorKind::parameter, "1 <= s <= p");
  require(sigma2 > 0.0, ErrorKind::parameter, "sigma^2 > 0",
          "sigma^2 = 0 makes the conditional covariance singular");
  require(sigma_a2 > 0.0, ErrorKind::parameter, "sigma_a^2 > 0");
  require(ens.size() >= 1, ErrorKind::parameter, "ensemble not empty");
  const std::uint64_t count = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(s));

  bool exact = false;
  switch (avg.mode) {
    case SupportAveraging::Mode::exact:
      require(count <= avg.exact_cap, ErrorKind::parameter, "C(p,s) <= enumeration cap");
      exact = true;
      break;
    case SupportAveraging::Mode::automatic: exact = count <= avg.exact_cap; break;
    case SupportAveraging::Mode::monte_carlo: exact = false; break;
  }

  MiBudget out;
  out.side_info = SideInfo::supports;
  out.exact = exact;
  std::vector<double> trace_terms;
  std::vector<double> spectral_terms;
  auto accumulate = [&](const Support& S) {
    const auto t = detail::support_terms(ens, S, sigma_a2, sigma2);
    trace_terms.push_back(t.trace_term);
    spectral_terms.push_back(t.spectral_term);
  };
  if (exact) {
    trace_terms.reserve(count);
    for_each_subset_colex(p, s, [&](const Support& S) {
      accumulate(S);
      return true;
    });
  } else {
    require(avg.trials >= 1, ErrorKind::parameter, "trials >= 1");
    Rng rng(avg.seed);
    const CoefficientModel law = CoefficientModel::sparse_rademacher(p, s);
    for (std::uint64_t t = 0; t < avg.trials; ++t) accumulate(sample_support(law, rng));
  }
  const SampleStats trace_stats = sample_stats(trace_terms);
  const SampleStats spectral_stats = sample_stats(spectral_terms);
  out.supports_evaluated = trace_terms.size();
  out.computed_mi_upper = N * trace_stats.mean;
  out.std_error = exact ? 0.0 : N * trace_stats.std_error;
  out.spectral_chain = 2.0 * s * N * spectral_stats.mean;
  const double snr = s * sigma_a2 / (m * sigma2);
  const double ratio2 = sigma_a2 / sigma2;
  out.snr = snr;
  out.eta = 12960.0 * N * snr * snr * static_cast<double>(m) * m * ens.epsilon / p;
  out.chain_closed_form = 6480.0 * N * static_cast<double>(s) * s * ratio2 * ratio2 * ens.epsilon / p;
  return out;
}

// Fano's inequality: every detector has error probability at least
// 1 - (I + 1)/log2(L) when I bounds the (conditional) mutual information.
inline double fano_error_lower_bound(Bits mi_upper, std::uint64_t L) {
  require(L >= 2, ErrorKind::parameter, "L >= 2");
  require(mi_upper.value >= 0.0, ErrorKind::parameter, "mutual information >= 0");
  const double log2L = std::log2(static_cast<double>(L));
  return std::max(0.0, 1.0 - (mi_upper.value + 1.0) / log2L);
}

inline double fano_error_lower_bound(Nats mi_upper, std::uint64_t L) {
  return fano_error_lower_bound(to_bits(mi_upper), L);
}

inline constexpr double kTieRelTol = 1e-12;

// Index of the ensemble member nearest to D_hat in Frobenius norm. Distances
// within a relative 1e-12 of the minimum count as ties, broken uniformly at
// random.
inline std::size_t min_distance_detect(const Matrix& D_hat, const DictionaryEnsemble& ens,
                                       Rng& rng) {
  require(ens.size() >= 1, ErrorKind::parameter, "ensemble not empty");
  require(D_hat.rows() == ens.D0.rows() && D_hat.cols() == ens.D0.cols(),
          ErrorKind::dimension_mismatch, "estimate has the ensemble's shape");
  std::vector<double> dist(ens.size());
  for (std::size_t l = 0; l < ens.size(); ++l) dist[l] = (ens.members[l] - D_hat).squaredNorm();
  const double best = *std::min_element(dist.begin(), dist.end());
  const double cutoff = best + kTieRelTol * std::max(best, 1e-300);
  std::vector<std::size_t> tied;
  for (std::size_t l = 0; l < dist.size(); ++l)
    if (dist[l] <= cutoff) tied.push_back(l);
  if (tied.size() == 1) return tied.front();
  return tied[rng.uniform_index(tied.size())];
}

using Estimator = std::function<Matrix(const ObservationBatch&)>;

struct ErrorProbability {
  double p_e_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
};

// Monte Carlo estimate of P{detector(estimator(Y)) != l} with l uniform on the
// ensemble. Trial t uses its own stream seeded with derive_seed(master_seed, t):
// first the index l, then the batch seed, then the tie-break draws.
inline ErrorProbability empirical_error_probability(const DictionaryEnsemble& ens,
                                                    const Estimator& estimator,
                                                    const CoefficientModel& cm,
                                                    const NoiseModel& nm, std::size_t N,
                                                    std::uint64_t trials,
                                                    std::uint64_t master_seed,
                                                    unsigned threads = 1) {
  require(trials >= 1, ErrorKind::parameter, "trials >= 1");
  require(ens.size() >= 1, ErrorKind::parameter, "ensemble not empty");
  std::vector<DictionaryMatrix> members;
  members.reserve(ens.size());
  for (std::size_t l = 0; l < ens.size(); ++l) members.push_back(ens.member(l));
  std::vector<std::uint8_t> wrong(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng rng(derive_seed(master_seed, t));
    const std::size_t l = rng.uniform_index(ens.size());
    ObservationBatch batch = generate_batch(members[l], cm, nm, N, rng.next_u64());
    batch.dict_index = l;
    const Matrix D_hat = estimator(batch);
    wrong[t] = min_distance_detect(D_hat, ens, rng) != l ? 1 : 0;
  });
  ErrorProbability out;
  out.trials = trials;
  for (auto w : wrong) out.errors += w;
  out.p_e_hat = static_cast<double>(out.errors) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.p_e_hat * (1.0 - out.p_e_hat) / static_cast<double>(trials));
  return out;
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_INFOTHEORY_HPP_
