// Standalone acceptance run: one PASS/FAIL line per criterion, nonzero exit
// status if any criterion fails.
#include "minimaxdl/cli.hpp"
#include "minimaxdl/minimaxdl.hpp"

#include "fixtures.hpp"

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

using namespace minimaxdl;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool rel_close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

DictionaryMatrix lemma_d0(std::uint64_t seed) {
  Rng rng(seed);
  return DictionaryMatrix::random(6, 10, rng);
}

DictionaryEnsemble lemma_ensemble(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  return build_ensemble(lemma_d0(derive_seed(seed, 0)), 1.0 / 320, 64, rng);
}

Verdict bound_formulas() {
  Verdict v;
  const double r_max = 2 * std::sqrt(10.0);
  const double thm1 = thm1_lower(6, 10, 100, 1.0, 1.0, r_max).value;
  const double cor1 = cor1_lower(6, 10, 100, 1.0, r_max, true).value;
  const double thm2 = thm2_lower(6, 10, 2, 100, 0.01, 1.0).value;
  const double thm3 = thm3_upper(20, 100, 0.05, 2, 0.1, 10.0).value;
  const Matrix ccrb = ccrb_matrix(1.0, 2, 1);
  v.check(rel_close(thm1, 1.25e-4, 1e-12), "thm1 = " + fmt(thm1));
  v.check(rel_close(cor1, 1.0 / 2400, 1e-12), "cor1 = " + fmt(cor1));
  v.check(rel_close(thm2, 0.5 / 12960, 1e-12), "thm2 = " + fmt(thm2));
  v.check(rel_close(thm3, 17.444, 1e-12), "thm3 = " + fmt(thm3));
  Matrix want = Matrix::Zero(2, 2);
  want(1, 1) = 0.25;
  v.check((ccrb - want).cwiseAbs().maxCoeff() <= 1e-12 * 0.25, "ccrb != diag(0, 1/4)");
  v.note("thm1 " + fmt(thm1) + ", cor1 " + fmt(cor1) + ", thm2 " + fmt(thm2) + ", thm3 " + fmt(thm3) +
         ", ccrb diag(" + fmt(ccrb(0, 0)) + ", " + fmt(ccrb(1, 1)) + ")");
  return v;
}

int pairwise_hamming_bruteforce(const std::vector<SignVector>& code) {
  int best = std::numeric_limits<int>::max();
  for (std::size_t a = 0; a < code.size(); ++a)
    for (std::size_t b = a + 1; b < code.size(); ++b) {
      int d = 0;
      for (std::size_t i = 0; i < code[a].size(); ++i) d += code[a][i] != code[b][i];
      best = std::min(best, d);
    }
  return best;
}

Verdict packing_certificate() {
  Verdict v;
  Rng rng(1);
  const PackingCode code = build_packing(50, 1000, rng, 100);
  const PackingCheck check = verify_packing(code);
  const int brute = pairwise_hamming_bruteforce(code.vectors);
  v.check(code.vectors.size() == 1000, "code size");
  v.check(code.attempts <= 100, "attempts");
  v.check(check.min_hamming && *check.min_hamming >= 5, "verify_packing min Hamming >= 5");
  v.check(brute >= 5 && check.min_hamming && brute == *check.min_hamming, "brute-force min Hamming");
  v.note("min Hamming " + std::to_string(brute) + " after " + std::to_string(code.attempts) + " attempt(s)");
  return v;
}

Verdict ensemble_certificate(const DictionaryEnsemble& ens) {
  Verdict v;
  const double eps = ens.epsilon;
  const double eps_prime = 320 * eps;
  const Matrix& D0 = ens.D0.matrix();
  double col_err = 0.0, radius_sq = 0.0, orth = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t l = 0; l < ens.size(); ++l) {
    const Matrix& D = ens.members[l];
    for (Eigen::Index j = 0; j < D.cols(); ++j) col_err = std::max(col_err, std::abs(D.col(j).norm() - 1.0));
    radius_sq = std::max(radius_sq, (D - D0).squaredNorm());
    orth = std::max(orth, (D0.transpose() * ens.perturbations[l]).diagonal().cwiseAbs().maxCoeff());
    for (std::size_t k = l + 1; k < ens.size(); ++k) {
      const double d = (D - ens.members[k]).squaredNorm();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  v.check(ens.size() == 64, "L' = 64");
  v.check(col_err <= 1e-10, "unit columns (err " + fmt(col_err) + ")");
  v.check(radius_sq <= eps_prime / 2, "||D_l - D0||^2 = " + fmt(radius_sq) + " > eps'/2");
  v.check(lo >= 8 * eps * (1 - 1e-9) && hi <= 320 * eps * (1 + 1e-9), "pairwise range");
  v.check(orth <= 1e-10, "diag(D0^T D2) (err " + fmt(orth) + ")");
  v.check(ens.certificate && ens.certificate->pass, "library certificate");
  v.note("pairwise sq in [" + fmt(lo) + ", " + fmt(hi) + "] vs [" + fmt(8 * eps) + ", " + fmt(320 * eps) +
         "], max sq radius " + fmt(radius_sq) + ", col err " + fmt(col_err) + ", diag err " + fmt(orth));
  return v;
}

Verdict mi_budget(const DictionaryEnsemble& ens) {
  Verdict v;
  const int s = 2, p = 10;
  const double N = 100, sigma2 = 1.0;
  const Matrix sigma_x = (static_cast<double>(s) / p) * Matrix::Identity(p, p);
  const double mi = mi_upper_given_X(ens, sigma_x, N, sigma2).computed_mi_upper;
  const double norm = static_cast<double>(s) / p;
  const double eta = 320 * N * norm * ens.epsilon / sigma2;
  const double tight = 160 * N * norm * ens.epsilon / sigma2;
  v.check(mi <= eta + 1e-10, "mi <= 320 N ||S|| eps / sigma^2");
  v.check(mi <= tight + 1e-10, "mi <= 160 N ||S|| eps / sigma^2");
  v.note("mi " + fmt(mi) + " nats, eta " + fmt(eta) + ", pairwise eta " + fmt(tight));
  return v;
}

double brute_force_support_mi(const DictionaryEnsemble& ens, int s, double sa2, double sigma2, double N) {
  const int m = ens.D0.rows(), p = ens.D0.cols();
  const std::size_t L = ens.size();
  double total = 0.0;
  int supports = 0;
  for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
    if (std::popcount(mask) != s) continue;
    ++supports;
    std::vector<Matrix> cov(L), inv(L);
    for (std::size_t l = 0; l < L; ++l) {
      cov[l] = sigma2 * Matrix::Identity(m, m);
      for (int j = 0; j < p; ++j)
        if (mask >> j & 1u) cov[l] += sa2 * ens.members[l].col(j) * ens.members[l].col(j).transpose();
      inv[l] = cov[l].fullPivLu().inverse();
    }
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t k = 0; k < L; ++k) total += ((inv[l] - inv[k]) * (cov[k] - cov[l])).trace();
  }
  return N * total / (static_cast<double>(L) * L) / supports;
}

Verdict support_mi() {
  Verdict v;
  const int m = 6, p = 10, s = 2;
  const double N = 100, sigma_a2 = 1.0;
  const DictionaryMatrix D0 = fixtures::low_coherence_6x10();
  const double delta = rip_constant_exact(D0, s).delta;
  v.check(delta <= 0.5, "delta_s = " + fmt(delta) + " > 1/2");
  const double snr_target = 0.9 * low_snr_threshold(m, s);
  const double sigma2 = s * sigma_a2 / (m * snr_target);
  Rng rng(21);
  const auto ens = build_ensemble(D0, 1.0 / 320, 64, rng);
  const MiBudget b = mi_upper_given_support(ens, s, sigma_a2, sigma2, N, SupportAveraging::exact_enumeration());
  const double eta = 12960 * N * snr_target * snr_target * m * m * ens.epsilon / p;
  v.check(b.exact && b.supports_evaluated == 45, "exact enumeration");
  v.check(b.computed_mi_upper <= eta, "mi " + fmt(b.computed_mi_upper) + " > eta " + fmt(eta));

  Rng small_rng(22);
  const auto small = build_ensemble(lemma_d0(23), 1.0 / 320, 4, small_rng);
  const MiBudget got = mi_upper_given_support(small, 1, sigma_a2, sigma2, N, SupportAveraging::exact_enumeration());
  const double oracle = brute_force_support_mi(small, 1, sigma_a2, sigma2, N);
  v.check(std::abs(got.computed_mi_upper - oracle) <= 1e-10 * std::max(1.0, oracle), "brute-force oracle");
  v.note("delta_2 " + fmt(delta) + ", SNR " + fmt(snr_target) + ", mi " + fmt(b.computed_mi_upper) + " <= eta " +
         fmt(eta) + "; L'=4 s=1: " + fmt(got.computed_mi_upper) + " vs oracle " + fmt(oracle));
  return v;
}

Verdict fano_consistency(const DictionaryEnsemble& ens) {
  Verdict v;
  const int p = 10, s = 2;
  const double sigma2 = 1.0;
  const std::size_t N = 100;
  const std::uint64_t trials = 2000;
  const auto cm = CoefficientModel::sparse_rademacher(p, s);
  const Matrix sigma_x = coefficient_covariance(cm);
  const double mi = mi_upper_given_X(ens, sigma_x, static_cast<double>(N), sigma2).computed_mi_upper;
  const double floor = fano_error_lower_bound(Nats{mi}, ens.size());
  const Matrix d0 = ens.D0.matrix();
  const std::vector<std::pair<std::string, Estimator>> estimators = {
      {"constant_d0", [&](const ObservationBatch&) { return d0; }},
      {"oracle", [&](const ObservationBatch& b) { return ens.members.at(*b.dict_index); }},
      {"oracle_ls", oracle_ls_estimator()},
  };
  v.note("mi " + fmt(mi) + " nats, Fano floor " + fmt(floor));
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    const auto& [name, est] = estimators[i];
    const ErrorProbability pe =
        empirical_error_probability(ens, est, cm, NoiseModel(sigma2), N, trials, derive_seed(11, i));
    v.check(pe.p_e_hat + 3 * pe.std_error >= floor, name);
    v.note(name + " p_e " + fmt(pe.p_e_hat) + " +/- " + fmt(pe.std_error));
  }
  return v;
}

Verdict thresholding_sandwich() {
  Verdict v;
  const int p = 20, m = 20, s = 2;
  const double r = 0.05, sigma = 0.1, sigma_a2 = 1.0;
  const auto D = DictionaryMatrix::identity(p);
  const auto cm = CoefficientModel::sparse_rademacher(p, s);
  const NoiseModel nm(sigma * sigma);
  const double snr_value = snr(D, cm, nm);
  const auto learner = algorithm1_estimator(s);
  const MseEstimate at100 = monte_carlo_mse(learner, D, cm, nm, 100, 200, 7);
  const MseEstimate at400 = monte_carlo_mse(learner, D, cm, nm, 400, 200, 8);
  const double upper = thm3_upper(p, 100, r, s, sigma, snr_value).value;
  const double lower = cor1_lower(m, p, 100, snr_value, r, true).value;
  const double ratio = at400.mse_mean / at100.mse_mean;
  v.check(at100.mse_mean <= upper, "MSE(100) <= thm3");
  v.check(at100.mse_mean >= lower, "MSE(100) >= cor1");
  v.check(ratio >= 0.125 && ratio <= 0.5, "MSE ratio");
  v.note("cor1 " + fmt(lower) + " <= MSE(100) " + fmt(at100.mse_mean) + " <= thm3 " + fmt(upper) +
         ", MSE(400)/MSE(100) " + fmt(ratio));
  return v;
}

Verdict coefficient_recovery() {
  Verdict v;
  const int p = 20, s = 2;
  const std::size_t N = 10000;
  const double r = 0.1 / std::sqrt(static_cast<double>(s));
  Rng rng(31);
  const auto D = random_neighbor(NeighborhoodSpec(DictionaryMatrix::identity(p), r), rng, 0.99);
  const auto cm = CoefficientModel::sparse_rademacher(p, s);
  Matrix X(p, static_cast<Eigen::Index>(N)), Y(p, static_cast<Eigen::Index>(N));
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    X.col(k) = sample_coefficients(cm, rng);
    Vector n(p);
    for (int i = 0; i < p; ++i) {
      double z;
      do z = 0.4 * rng.normal();
      while (std::abs(z) >= 0.4);
      n(i) = z;
    }
    Y.col(k) = D.matrix() * X.col(k) + n;
  }
  const Matrix X_hat = threshold_decode(Y);
  const auto mismatches = (X_hat.array() != X.array()).count();
  const double dist = (D.matrix() - Matrix::Identity(p, p)).norm();
  v.check(dist * std::sqrt(static_cast<double>(s)) <= 0.1, "r sqrt(s) <= 1/10");
  v.check(mismatches == 0, std::to_string(mismatches) + " mismatches");
  v.note("||D - I||_F sqrt(s) " + fmt(dist * std::sqrt(2.0)) + ", " + std::to_string(mismatches) +
         " mismatches over " + std::to_string(N) + " samples");
  return v;
}

Verdict rip_oracle() {
  Verdict v;
  Matrix W(2, 3);
  W << 1, 0, 1 / std::sqrt(2.0), 0, 1, 1 / std::sqrt(2.0);
  const double worked = rip_constant_exact(DictionaryMatrix(W), 2).delta;
  v.check(std::abs(worked - 1 / std::sqrt(2.0)) <= 1e-12, "worked example " + fmt(worked));

  Rng gen(41);
  const auto D = DictionaryMatrix::random(5, 8, gen);
  const int s = 3;
  const std::uint64_t trials = 4000;
  Rng mc_rng(42), replay(42);
  const RipEstimate mc = rip_constant_monte_carlo(D, s, trials, mc_rng);
  std::set<Support> seen;
  const auto law = CoefficientModel::sparse_rademacher(8, s);
  for (std::uint64_t t = 0; t < trials; ++t) seen.insert(sample_support(law, replay));
  const double exact = rip_constant_exact(D, s).delta;
  v.check(seen.size() == binomial(8, 3), "full coverage (" + std::to_string(seen.size()) + " of 56)");
  v.check(std::abs(mc.delta - exact) <= 1e-12, "Monte Carlo vs exact");

  int contained = 0;
  Rng rng(43);
  for (int t = 0; t < 100; ++t) {
    const int m = 4 + static_cast<int>(rng.uniform_index(5));
    const int p = m + static_cast<int>(rng.uniform_index(6));
    const int k = 2;
    const auto Dt = DictionaryMatrix::random(m, p, rng);
    const double sa2 = 0.1 + 2 * rng.uniform();
    const double s2 = 0.1 + 2 * rng.uniform();
    const double delta = rip_constant_exact(Dt, k).delta;
    const double value = snr(Dt, CoefficientModel::sparse_gaussian(p, k, sa2), NoiseModel(s2));
    contained += delta < 1.0 && snr_sandwich(delta, k, sa2, s2, m).contains(value);
  }
  v.check(contained == 100, "sandwich held for " + std::to_string(contained) + "/100");
  v.note("worked " + fmt(worked) + ", MC " + fmt(mc.delta) + " vs exact " + fmt(exact) + ", sandwich " +
         std::to_string(contained) + "/100");
  return v;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "minimaxdl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

// Runs the packing, ensemble, Fano and MSE commands into `dir`, returning
// the files each produced.
std::vector<fs::path> run_pipeline(const fs::path& dir, const fs::path& configs, const std::string& threads) {
  fs::create_directories(dir);
  std::vector<fs::path> files;
  const auto step = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), {"--out", out.string(), "--threads", threads});
    if (invoke(args) != 0) throw std::runtime_error("command failed: " + args[0] + " " + args[1]);
    files.push_back(out);
  };
  step({"packing", "build", "--config", (configs / "packing.json").string()}, dir / "packing.json");
  step({"ensemble", "build", "--config", (configs / "ensemble.json").string()}, dir / "ensemble");
  step({"simulate", "fano", "--config", (configs / "fano.json").string()}, dir / "fano.json");
  step({"simulate", "mse", "--config", (configs / "mse.json").string()}, dir / "mse.csv");
  // Expand the ensemble directory into its files.
  const fs::path ens = dir / "ensemble";
  files.erase(files.begin() + 1);
  std::vector<fs::path> members;
  for (const auto& e : fs::directory_iterator(ens)) members.push_back(e.path());
  std::sort(members.begin(), members.end());
  files.insert(files.end(), members.begin(), members.end());
  return files;
}

Verdict determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "minimaxdl_acceptance";
  fs::remove_all(root);
  const fs::path configs = root / "configs";
  fs::create_directories(configs);
  write_json(configs / "packing.json", {{"d", 50}, {"P", 1000}, {"max_attempts", 100}, {"seed", 1}});
  write_json(configs / "ensemble.json", {{"m", 6}, {"p", 10}, {"epsilon", 1.0 / 320}, {"L", 64}, {"seed", 2}});
  write_json(configs / "fano.json", {{"m", 6}, {"p", 10}, {"s", 2}, {"sigma2", 1.0}, {"epsilon", 1.0 / 320},
                                     {"L", 64}, {"N", 100}, {"trials", 2000}, {"estimator", "oracle_ls"},
                                     {"seed", 11}});
  write_json(configs / "mse.json", {{"m", 20}, {"p", 20}, {"s", 2}, {"nonzero_law", "rademacher"},
                                    {"sigma", 0.1}, {"r", 0.05}, {"learners", {"algorithm1"}}, {"N", {100, 400}},
                                    {"trials", 200}, {"seed", 7}});
  const auto a = run_pipeline(root / "a", configs, "1");
  const auto b = run_pipeline(root / "b", configs, "1");
  const auto c = run_pipeline(root / "c", configs, "2");
  v.check(a.size() == b.size() && a.size() == c.size(), "same file set");
  std::size_t identical = 0;
  for (std::size_t i = 0; i < std::min({a.size(), b.size(), c.size()}); ++i) {
    const std::string ta = read_text(a[i]);
    const bool same = ta == read_text(b[i]) && ta == read_text(c[i]);
    v.check(same, a[i].filename().string() + " differs");
    identical += same;
  }
  v.note(std::to_string(identical) + " files byte-identical across 3 runs (1, 1 and 2 threads)");
  fs::remove_all(root);
  return v;
}

}  // namespace

int main() {
  std::optional<DictionaryEnsemble> ens;
  const auto shared_ensemble = [&]() -> const DictionaryEnsemble& {
    if (!ens) ens = lemma_ensemble(2);
    return *ens;
  };
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"bound-formula oracle", bound_formulas},
      {"packing certificate", packing_certificate},
      {"ensemble certificate", [&] { return ensemble_certificate(shared_ensemble()); }},
      {"MI budget given coefficients", [&] { return mi_budget(shared_ensemble()); }},
      {"MI given supports", support_mi},
      {"Fano consistency", [&] { return fano_consistency(shared_ensemble()); }},
      {"thresholding sandwich", thresholding_sandwich},
      {"coefficient recovery", coefficient_recovery},
      {"RIP oracle", rip_oracle},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("[%s] criterion %zu (%s): %s [%.2fs]\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
