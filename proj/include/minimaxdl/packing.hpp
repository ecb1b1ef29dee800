#ifndef MINIMAXDL_PACKING_HPP_
#define MINIMAXDL_PACKING_HPP_

#include "minimaxdl/geometry.hpp"

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace minimaxdl {

// ---------------------------------------------------------------------------
// Binary packing codes
// ---------------------------------------------------------------------------

using SignVector = std::vector<std::int8_t>;  // entries in {-1, +1}

struct PackingCode {
  int d = 0;
  std::vector<SignVector> vectors;
  std::optional<int> min_hamming;  // nullopt when there are no pairs
  int attempts = 0;

  std::size_t size() const { return vectors.size(); }
};

struct PackingCheck {
  std::optional<int> min_hamming;
  bool distinct = true;
  bool separated = true;  // every pair differs in at least d/10 positions
};

// Exponent bound on P{sum of k i.i.d. zero-mean variables bounded by a >= t}.
inline double hoeffding_tail(std::uint64_t k, double a, double t) {
  require(k >= 1, ErrorKind::parameter, "k >= 1");
  require(a > 0.0, ErrorKind::parameter, "a > 0");
  require(t >= 0.0, ErrorKind::parameter, "t >= 0");
  return std::exp(-(t * t) / (2.0 * static_cast<double>(k) * a * a));
}

inline constexpr double kPackingRate = 0.16;  // (1 - 2/10)^2 / 4

inline bool packing_admissible(int d, std::uint64_t P) {
  return d >= 1 && P >= 1 && std::log(static_cast<double>(P)) / d < kPackingRate;
}

// Union bound over all pairs on the probability that P i.i.d. Rademacher
// vectors violate the d/10 separation: exp(-d 0.8^2 / 2 + 2 log P).
inline double packing_failure_bound(int d, std::uint64_t P) {
  return std::exp(-d * 0.64 / 2.0 + 2.0 * std::log(static_cast<double>(P)));
}

namespace detail {

inline std::vector<std::uint64_t> pack_signs(const SignVector& v) {
  std::vector<std::uint64_t> words((v.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0) words[i / 64] |= (std::uint64_t{1} << (i % 64));
  }
  return words;
}

inline int hamming(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  int h = 0;
  for (std::size_t w = 0; w < a.size(); ++w) h += std::popcount(a[w] ^ b[w]);
  return h;
}

inline std::optional<int> min_pairwise_hamming(const std::vector<SignVector>& vectors) {
  std::vector<std::vector<std::uint64_t>> packed;
  packed.reserve(vectors.size());
  for (const auto& v : vectors) packed.push_back(pack_signs(v));
  std::optional<int> best;
  for (std::size_t i = 0; i < packed.size(); ++i) {
    for (std::size_t j = i + 1; j < packed.size(); ++j) {
      const int h = hamming(packed[i], packed[j]);
      if (!best || h < *best) best = h;
    }
  }
  return best;
}

}  // namespace detail

// Brute-force minimum over all pairs.
inline PackingCheck verify_packing(const PackingCode& code) {
  PackingCheck check;
  check.min_hamming = detail::min_pairwise_hamming(code.vectors);
  if (check.min_hamming) {
    check.distinct = *check.min_hamming > 0;
    check.separated = 10 * static_cast<long long>(*check.min_hamming) >= code.d;
  }
  return check;
}

// Draws P i.i.d. Rademacher vectors and accepts the set when every pair is
// at Hamming distance >= d/10; otherwise redraws the whole set.
inline PackingCode build_packing(int d, std::uint64_t P, Rng& rng, int max_attempts = 100) {
  require(d >= 1, ErrorKind::parameter, "d >= 1");
  require(P >= 1, ErrorKind::parameter, "P >= 1");
  require(max_attempts >= 1, ErrorKind::parameter, "max_attempts >= 1");
  require(packing_admissible(d, P), ErrorKind::parameter, "log(P)/d < 0.16",
          "packing parameters inadmissible: log(" + std::to_string(P) + ")/" +
              std::to_string(d) + " = " +
              std::to_string(std::log(static_cast<double>(P)) / d) + " >= 0.16");
  PackingCode code;
  code.d = d;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    code.vectors.assign(P, SignVector(static_cast<std::size_t>(d)));
    for (auto& v : code.vectors)
      for (auto& e : v) e = static_cast<std::int8_t>(rng.rademacher());
    const PackingCheck check = verify_packing(code);
    if (check.separated) {
      code.min_hamming = check.min_hamming;
      code.attempts = attempt;
      return code;
    }
  }
  throw Error(ErrorKind::construction_failure, "min Hamming distance >= d/10",
              "packing construction failed after " + std::to_string(max_attempts) +
                  " attempts (per-attempt failure bound " +
                  std::to_string(packing_failure_bound(d, P)) + ")");
}

// ---------------------------------------------------------------------------
// Dictionary ensembles
// ---------------------------------------------------------------------------

inline constexpr double kEnsembleSpread = 320.0;    // epsilon' = 320 epsilon
inline constexpr double kMinSeparation = 8.0;       // pairwise >= 8 epsilon
inline constexpr double kMinBlockCount = 50.0;      // p(m-1) >= 50

// Orthogonal m x m matrix U with U e_1 = d (d a unit vector): the Householder
// reflection exchanging e_1 and d, or the identity when d = e_1.
inline Matrix householder_frame(const Vector& d) {
  const auto m = d.size();
  Matrix U = Matrix::Identity(m, m);
  const double tail = d.tail(m - 1).squaredNorm();
  if (tail <= 1e-28 && d(0) > 0.0) return U;
  Vector v = -d;
  // v = e_1 - d with the first entry computed without cancellation.
  v(0) = d(0) > 0.0 ? tail / (1.0 + d(0)) : 1.0 - d(0);
  U -= (2.0 / v.squaredNorm()) * v * v.transpose();
  return U;
}

inline std::vector<Matrix> reference_frames(const DictionaryMatrix& D0) {
  std::vector<Matrix> frames;
  frames.reserve(static_cast<std::size_t>(D0.cols()));
  for (int j = 0; j < D0.cols(); ++j) frames.push_back(householder_frame(D0.matrix().col(j)));
  return frames;
}

struct EnsembleCertificate {
  std::optional<double> min_pairwise_sq;  // nullopt for a single member
  std::optional<double> max_pairwise_sq;
  double max_col_norm_err = 0.0;
  double max_radius = 0.0;          // max ||D_l - D0||_F
  double max_member_sq_distance = 0.0;
  double orthogonality_err = 0.0;   // max |<d_{0,j}, d_{2,l,j}>|
  double perturbation_norm_err = 0.0;
  double epsilon = 0.0;
  double radius = 0.0;
  bool pairwise_ok = true;
  bool norms_ok = true;
  bool radius_ok = true;
  bool orthogonality_ok = true;
  bool pass = true;
};

// Finite set of dictionaries D_l = sqrt(1 - eps'/(4p)) D0 + sqrt(eps') D_{2,l}.
// Members are stored as plain matrices so that damaged ensembles read from
// disk can still be certified (and fail).
struct DictionaryEnsemble {
  DictionaryMatrix D0;
  double epsilon = 0.0;
  double epsilon_prime = 0.0;
  std::vector<Matrix> members;
  std::vector<Matrix> perturbations;  // D_{2,l}; empty when loaded from disk
  std::optional<double> radius;
  std::uint64_t seed = 0;
  std::optional<EnsembleCertificate> certificate;

  std::size_t size() const { return members.size(); }
  DictionaryMatrix member(std::size_t l) const { return DictionaryMatrix(members.at(l)); }
};

inline EnsembleCertificate verify_ensemble(const DictionaryEnsemble& ens,
                                           const NeighborhoodSpec& spec);

// log2 of the largest ensemble the construction supports, (m-1)p/5.
inline double max_ensemble_log2(int m, int p) { return (m - 1) * static_cast<double>(p) / 5.0; }

inline DictionaryEnsemble build_ensemble(const DictionaryMatrix& D0, double epsilon,
                                         std::uint64_t L_requested, Rng& rng,
                                         std::optional<double> radius = std::nullopt,
                                         int max_attempts = 100, std::uint64_t seed = 0) {
  const int m = D0.rows();
  const int p = D0.cols();
  require(m >= 2, ErrorKind::parameter, "m >= 2");
  require(static_cast<double>(p) * (m - 1) >= kMinBlockCount, ErrorKind::precondition,
          "p(m-1) >= 50");
  require(epsilon > 0.0, ErrorKind::parameter, "epsilon > 0");
  require(L_requested >= 1, ErrorKind::parameter, "L >= 1");
  require(std::log2(static_cast<double>(L_requested)) <= max_ensemble_log2(m, p),
          ErrorKind::parameter, "L <= 2^((m-1)p/5)");
  if (radius) {
    require(*radius > 0.0 && *radius <= 2.0 * std::sqrt(static_cast<double>(p)),
            ErrorKind::parameter, "0 < r <= 2 sqrt(p)");
    require(epsilon <= (*radius) * (*radius) / kEnsembleSpread, ErrorKind::precondition,
            "epsilon <= r^2/320");
  }
  const double eps_prime = kEnsembleSpread * epsilon;
  require(eps_prime <= 4.0 * p, ErrorKind::parameter, "320 epsilon <= 4p");

  const int rows1 = m - 1;
  const int d = rows1 * p;
  const PackingCode code = build_packing(d, L_requested, rng, max_attempts);
  const double entry = 1.0 / std::sqrt(4.0 * d);
  const std::vector<Matrix> frames = reference_frames(D0);
  const double keep = std::sqrt(1.0 - eps_prime / (4.0 * p));
  const double push = std::sqrt(eps_prime);

  DictionaryEnsemble ens{D0, epsilon, eps_prime, {}, {}, radius, seed, std::nullopt};
  ens.members.reserve(L_requested);
  ens.perturbations.reserve(L_requested);
  for (const SignVector& b : code.vectors) {
    // D_{1,l}: the code word reshaped column-major into (m-1) x p.
    Matrix D2(m, p);
    Vector lifted(m);
    for (int j = 0; j < p; ++j) {
      lifted(0) = 0.0;
      for (int i = 0; i < rows1; ++i) lifted(i + 1) = entry * b[static_cast<std::size_t>(j * rows1 + i)];
      D2.col(j) = frames[static_cast<std::size_t>(j)] * lifted;
    }
    ens.members.push_back(keep * D0.matrix() + push * D2);
    ens.perturbations.push_back(std::move(D2));
  }
  const double r = radius.value_or(2.0 * std::sqrt(static_cast<double>(p)));
  ens.certificate = verify_ensemble(ens, NeighborhoodSpec(D0, r));
  return ens;
}

inline EnsembleCertificate verify_ensemble(const DictionaryEnsemble& ens,
                                           const NeighborhoodSpec& spec) {
  const int m = ens.D0.rows();
  const int p = ens.D0.cols();
  require(spec.D0.rows() == m && spec.D0.cols() == p, ErrorKind::dimension_mismatch,
          "neighborhood reference has the ensemble's shape");
  EnsembleCertificate cert;
  cert.epsilon = ens.epsilon;
  cert.radius = spec.r;
  const double keep = std::sqrt(1.0 - ens.epsilon_prime / (4.0 * p));
  const double push = std::sqrt(ens.epsilon_prime);
  const double perturbation_norm = 1.0 / std::sqrt(4.0 * p);

  for (const Matrix& D : ens.members) {
    require(D.rows() == m && D.cols() == p, ErrorKind::dimension_mismatch,
            "members have the reference shape");
    for (int j = 0; j < p; ++j) {
      cert.max_col_norm_err = std::max(cert.max_col_norm_err, std::abs(D.col(j).norm() - 1.0));
    }
    const double dist = (D - spec.D0.matrix()).norm();
    cert.max_radius = std::max(cert.max_radius, dist);
    cert.max_member_sq_distance =
        std::max(cert.max_member_sq_distance, (D - ens.D0.matrix()).squaredNorm());
    // Recover D_{2,l} from the member itself.
    const Matrix D2 = (D - keep * ens.D0.matrix()) / push;
    for (int j = 0; j < p; ++j) {
      cert.orthogonality_err =
          std::max(cert.orthogonality_err, std::abs(ens.D0.matrix().col(j).dot(D2.col(j))));
      cert.perturbation_norm_err =
          std::max(cert.perturbation_norm_err, std::abs(D2.col(j).norm() - perturbation_norm));
    }
  }
  for (std::size_t a = 0; a < ens.members.size(); ++a) {
    for (std::size_t b = a + 1; b < ens.members.size(); ++b) {
      const double sq = (ens.members[a] - ens.members[b]).squaredNorm();
      cert.min_pairwise_sq = cert.min_pairwise_sq ? std::min(*cert.min_pairwise_sq, sq) : sq;
      cert.max_pairwise_sq = cert.max_pairwise_sq ? std::max(*cert.max_pairwise_sq, sq) : sq;
    }
  }
  if (cert.min_pairwise_sq) {
    cert.pairwise_ok =
        *cert.min_pairwise_sq >= kMinSeparation * ens.epsilon * (1.0 - 1e-9) &&
        *cert.max_pairwise_sq <= kEnsembleSpread * ens.epsilon * (1.0 + 1e-9);
  }
  cert.norms_ok = cert.max_col_norm_err <= 1e-10;
  cert.radius_ok = cert.max_radius < spec.r;
  cert.orthogonality_ok = cert.orthogonality_err <= 1e-10;
  cert.pass = cert.pairwise_ok && cert.norms_ok && cert.radius_ok && cert.orthogonality_ok;
  return cert;
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_PACKING_HPP_
