#ifndef MINIMAXDL_CLI_HPP_
#define MINIMAXDL_CLI_HPP_

#include "minimaxdl/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace minimaxdl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Read-only view of a JSON config that names the missing or malformed field
// in every error.
class Config {
 public:
  Config() : j_(json::object()) {}
  explicit Config(json j) : j_(std::move(j)) {
    require(j_.is_object(), ErrorKind::config, "config is a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <typename T>
  T get(const std::string& key) const {
    require(has(key), ErrorKind::config, key, "missing required field '" + key + "'");
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::config, key, "field '" + key + "': " + e.what());
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  // Accepts a scalar or a list.
  template <typename T>
  std::vector<T> get_list(const std::string& key) const {
    require(has(key), ErrorKind::config, key, "missing required field '" + key + "'");
    if (j_.at(key).is_array()) return get<std::vector<T>>(key);
    return {get<T>(key)};
  }

  const json& raw() const { return j_; }

 private:
  json j_;
};

inline Config load_config(const std::string& path) {
  require(!path.empty(), ErrorKind::config, "--config", "missing required option --config");
  try {
    return Config(read_json(path));
  } catch (const Error& e) {
    throw Error(ErrorKind::config, "--config", e.what());
  }
}

// ---------------------------------------------------------------------------
// Bound evaluation
// ---------------------------------------------------------------------------

inline bool read_rip_ok(const Config& c) {
  if (c.has("rip_ok")) return c.get<bool>("rip_ok");
  if (c.has("delta_s")) return c.get<double>("delta_s") <= 0.5;
  throw Error(ErrorKind::config, "rip_ok", "missing required field 'rip_ok' (or 'delta_s')");
}

inline double read_sigma(const Config& c) {
  if (c.has("sigma")) return c.get<double>("sigma");
  return std::sqrt(c.get<double>("sigma2"));
}

inline BoundReport evaluate_bound(const Config& c) {
  const BoundId id = parse_bound_id(c.get<std::string>("bound"));
  // Fields are read in declaration order so the first missing one is reported.
  switch (id) {
    case BoundId::thm1: {
      const int m = c.get<int>("m");
      const int p = c.get<int>("p");
      const double N = c.get<double>("N");
      const double sigma2 = c.get<double>("sigma2");
      const double sigma_x_norm = c.get<double>("sigma_x_norm");
      return thm1_lower(m, p, N, sigma2, sigma_x_norm, c.get<double>("r"));
    }
    case BoundId::cor1: {
      const int m = c.get<int>("m");
      const int p = c.get<int>("p");
      const double N = c.get<double>("N");
      const double snr_value = c.get<double>("snr");
      const double r = c.get<double>("r");
      return cor1_lower(m, p, N, snr_value, r, read_rip_ok(c));
    }
    case BoundId::thm2: {
      const int m = c.get<int>("m");
      const int p = c.get<int>("p");
      const int s = c.get<int>("s");
      const double N = c.get<double>("N");
      const double snr_value = c.get<double>("snr");
      return thm2_lower(m, p, s, N, snr_value, c.get<double>("r"));
    }
    case BoundId::thm3_upper: {
      const int p = c.get<int>("p");
      const double N = c.get<double>("N");
      const double r = c.get<double>("r");
      const int s = c.get<int>("s");
      const double sigma = read_sigma(c);
      return thm3_upper(p, N, r, s, sigma, c.get<double>("snr"));
    }
    case BoundId::ccrb: {
      const double snr_value = c.get<double>("snr");
      const int m = c.get<int>("m");
      return ccrb_report(snr_value, m, c.get<double>("N"));
    }
  }
  throw Error(ErrorKind::config, "bound", "unknown bound");
}

inline BoundParams read_bound_params(const Config& c, BoundId id) {
  BoundParams q;
  q.m = c.get<int>("m");
  q.p = c.get<int>("p");
  q.r = c.get<double>("r");
  switch (id) {
    case BoundId::thm1:
      q.sigma2 = c.get<double>("sigma2");
      q.sigma_x_norm = c.get<double>("sigma_x_norm");
      break;
    case BoundId::cor1:
      q.snr = c.get<double>("snr");
      q.rip_ok = read_rip_ok(c);
      break;
    case BoundId::thm2:
      q.snr = c.get<double>("snr");
      q.s = c.get<int>("s");
      break;
    default:
      throw Error(ErrorKind::config, "bound in {thm1, cor1, thm2}",
                  "sample-size inversion supports thm1, cor1 and thm2");
  }
  return q;
}

inline std::string csv_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::string bound_report_csv(const BoundReport& r) {
  std::string header = "bound_id,value,active_branch,first_branch,second_branch";
  std::string row = std::string(to_string(r.id)) + "," + format_double(r.value) + "," +
                    to_string(r.active_branch) + "," + csv_cell(r.first_branch) + "," +
                    csv_cell(r.second_branch);
  for (const auto& [k, v] : r.params) {
    header += "," + k;
    row += "," + format_double(v);
  }
  return header + "\n" + row + "\n";
}

// ---------------------------------------------------------------------------
// Dictionaries named in configs
// ---------------------------------------------------------------------------

// "identity" (first p columns of I_m), "random" (uniform unit columns), or
// {"csv": path}.
inline DictionaryMatrix dictionary_from_config(const json& spec, int m, int p, Rng& rng) {
  if (spec.is_object()) {
    require(spec.contains("csv"), ErrorKind::config, "dictionary.csv");
    DictionaryMatrix D(read_matrix_csv(spec.at("csv").get<std::string>()));
    require(D.rows() == m && D.cols() == p, ErrorKind::config, "dictionary shape m x p");
    return D;
  }
  const std::string kind = spec.get<std::string>();
  if (kind == "identity") {
    require(m >= p, ErrorKind::config, "identity dictionary needs m >= p");
    return DictionaryMatrix(Matrix::Identity(m, p));
  }
  if (kind == "random") return DictionaryMatrix::random(m, p, rng);
  throw Error(ErrorKind::config, "dictionary in {identity, random, {csv}}",
              "unknown dictionary '" + kind + "'");
}

// ---------------------------------------------------------------------------
// MSE sweeps
// ---------------------------------------------------------------------------

enum class LearnerId { algorithm1, oracle_ls };

inline LearnerId parse_learner(const std::string& s) {
  if (s == "algorithm1") return LearnerId::algorithm1;
  if (s == "oracle_ls") return LearnerId::oracle_ls;
  throw Error(ErrorKind::config, "learner in {algorithm1, oracle_ls}", "unknown learner '" + s + "'");
}

inline const char* to_string(LearnerId l) {
  return l == LearnerId::algorithm1 ? "algorithm1" : "oracle_ls";
}

struct SweepConfig {
  int m = 0;
  int p = 0;
  int s = 1;
  NonzeroLaw law = NonzeroLaw::rademacher;
  double sigma_a2 = 1.0;
  std::vector<double> noise_variances;  // one per SNR point
  std::optional<double> r;
  json dictionary = "identity";
  bool perturb = false;  // draw the true dictionary inside X(D0, r)
  std::vector<LearnerId> learners;
  std::vector<std::uint64_t> sample_sizes;
  std::uint64_t trials = 100;
  std::uint64_t master_seed = 0;
};

// A flat record; keys appear in the fixed CSV column order.
struct ResultRow {
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string& at(const std::string& key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return v;
    throw Error(ErrorKind::parameter, key, "no column '" + key + "'");
  }
};

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "N",      "learner",     "mse_mean",    "mse_stderr", "thm3_upper", "cor1_lower",
      "thm2_lower", "snr",     "sigma2",      "point_index", "master_seed", "version", "status"};
  return cols;
}

inline constexpr const char* kSweepHelp =
    "CSV columns (fixed order): N, learner, mse_mean, mse_stderr, thm3_upper, cor1_lower, "
    "thm2_lower, snr, sigma2, point_index, master_seed, version, status. Bound columns are "
    "empty where the bound's hypotheses do not hold. Point seeds are "
    "derive_seed(master_seed, point_index) (splitmix64 finalizer of master + "
    "0x9E3779B97F4A7C15*(index+1)). Points are ordered SNR-major, then N, then learner.";

inline SweepConfig parse_sweep_config(const Config& c, std::optional<std::uint64_t> seed_override) {
  SweepConfig cfg;
  cfg.m = c.get<int>("m");
  cfg.p = c.get<int>("p");
  cfg.s = c.get<int>("s");
  cfg.law = parse_nonzero_law(c.get_or<std::string>("nonzero_law", "rademacher"));
  cfg.sigma_a2 = c.get_or<double>("sigma_a2", 1.0);
  require(cfg.m >= 1 && cfg.p >= 1, ErrorKind::config, "m >= 1 and p >= 1");
  require(cfg.s >= 1 && cfg.s <= cfg.p, ErrorKind::config, "1 <= s <= p");
  require(cfg.law == NonzeroLaw::gaussian || cfg.sigma_a2 == 1.0, ErrorKind::config,
          "rademacher nonzeros have sigma_a2 = 1");
  if (c.has("snr")) {
    // SNR = s sigma_a^2 / (m sigma^2) for every unit-column dictionary.
    for (double snr : c.get_list<double>("snr")) {
      require(snr > 0.0, ErrorKind::config, "snr > 0");
      cfg.noise_variances.push_back(cfg.s * cfg.sigma_a2 / (cfg.m * snr));
    }
  } else {
    const double sigma2 = c.has("sigma") ? std::pow(c.get<double>("sigma"), 2) : c.get<double>("sigma2");
    require(sigma2 > 0.0, ErrorKind::config, "sigma2 > 0");
    cfg.noise_variances.push_back(sigma2);
  }
  if (c.has("r")) {
    cfg.r = c.get<double>("r");
    require(*cfg.r > 0.0 && *cfg.r <= 2.0 * std::sqrt(static_cast<double>(cfg.p)), ErrorKind::config,
            "0 < r <= 2 sqrt(p)");
  }
  if (c.has("dictionary")) cfg.dictionary = c.raw().at("dictionary");
  cfg.perturb = c.get_or<bool>("perturb", false);
  require(!cfg.perturb || cfg.r, ErrorKind::config, "r", "perturb = true needs field 'r'");
  std::vector<std::string> learner_names =
      c.has("learners") ? c.get_list<std::string>("learners") : c.get_list<std::string>("learner");
  for (const auto& name : learner_names) cfg.learners.push_back(parse_learner(name));
  cfg.sample_sizes = c.get_list<std::uint64_t>("N");
  cfg.trials = c.get<std::uint64_t>("trials");
  cfg.master_seed = seed_override.value_or(c.get_or<std::uint64_t>("seed", 0));

  require(!cfg.learners.empty(), ErrorKind::config, "learners not empty");
  require(!cfg.sample_sizes.empty(), ErrorKind::config, "N not empty");
  require(cfg.trials >= 2, ErrorKind::config, "trials >= 2");
  for (auto N : cfg.sample_sizes) require(N >= 1, ErrorKind::config, "N >= 1");
  for (auto learner : cfg.learners) {
    if (learner == LearnerId::algorithm1) {
      require(cfg.m == cfg.p, ErrorKind::config, "algorithm1 requires m = p");
    } else {
      for (auto N : cfg.sample_sizes)
        require(N >= static_cast<std::uint64_t>(cfg.p), ErrorKind::config,
                "oracle_ls requires N >= p");
    }
  }
  return cfg;
}

inline Estimator make_learner(LearnerId id, int s) {
  return id == LearnerId::algorithm1 ? algorithm1_estimator(s) : oracle_ls_estimator();
}

// Evaluates every (SNR, N, learner) point; one point's failure is recorded in
// its row and does not stop the sweep.
inline std::vector<ResultRow> run_sweep(const SweepConfig& cfg, unsigned threads = 1) {
  Rng dict_rng(derive_seed(cfg.master_seed, 0xD1C7));
  const DictionaryMatrix D0 = dictionary_from_config(cfg.dictionary, cfg.m, cfg.p, dict_rng);
  const DictionaryMatrix D = cfg.perturb ? random_neighbor(NeighborhoodSpec(D0, *cfg.r), dict_rng) : D0;
  const CoefficientModel cm = CoefficientModel::sparse(cfg.p, cfg.s, cfg.law, cfg.sigma_a2);

  std::optional<bool> rip_ok;
  if (binomial(cfg.p, cfg.s) <= kDefaultEnumerationCap) rip_ok = rip_constant_exact(D, cfg.s).delta <= 0.5;

  struct Point {
    double sigma2;
    std::uint64_t N;
    LearnerId learner;
  };
  std::vector<Point> points;
  for (double sigma2 : cfg.noise_variances)
    for (auto N : cfg.sample_sizes)
      for (auto learner : cfg.learners) points.push_back({sigma2, N, learner});

  std::vector<ResultRow> rows(points.size());
  parallel_for(points.size(), threads, [&](std::size_t idx) {
    const Point& pt = points[idx];
    std::map<std::string, std::string> f;
    f["N"] = std::to_string(pt.N);
    f["learner"] = to_string(pt.learner);
    f["sigma2"] = format_double(pt.sigma2);
    f["point_index"] = std::to_string(idx);
    f["master_seed"] = std::to_string(cfg.master_seed);
    f["version"] = kVersion;
    auto optional_bound = [](auto&& fn) -> std::string {
      try {
        return format_double(fn().value);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::precondition) return "";
        throw;
      }
    };
    try {
      const NoiseModel nm(pt.sigma2);
      const double snr_value = snr(D, cm, nm);
      f["snr"] = format_double(snr_value);
      const MseEstimate est = monte_carlo_mse(make_learner(pt.learner, cfg.s), D, cm, nm, pt.N,
                                              cfg.trials, derive_seed(cfg.master_seed, idx));
      f["mse_mean"] = format_double(est.mse_mean);
      f["mse_stderr"] = format_double(est.mse_stderr);
      const double N = static_cast<double>(pt.N);
      if (cfg.r) {
        const double r = *cfg.r;
        if (cfg.m == cfg.p && cfg.law == NonzeroLaw::rademacher)
          f["thm3_upper"] = optional_bound(
              [&] { return thm3_upper(cfg.p, N, r, cfg.s, std::sqrt(pt.sigma2), snr_value); });
        if (rip_ok)
          f["cor1_lower"] =
              optional_bound([&] { return cor1_lower(cfg.m, cfg.p, N, snr_value, r, *rip_ok); });
        if (cfg.law == NonzeroLaw::gaussian && rip_ok && *rip_ok)
          f["thm2_lower"] =
              optional_bound([&] { return thm2_lower(cfg.m, cfg.p, cfg.s, N, snr_value, r); });
      }
      f["status"] = "ok";
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      f["status"] = "error: " + msg;
    }
    ResultRow row;
    for (const auto& col : sweep_columns()) row.fields.emplace_back(col, f.count(col) ? f[col] : "");
    rows[idx] = std::move(row);
  });
  return rows;
}

inline std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.fields.size(); ++i) out += (i ? "," : "") + row.fields[i].second;
    out += '\n';
  }
  return out;
}

inline std::string gnuplot_script(const std::string& csv_path) {
  const std::string name = fs::path(csv_path).filename().string();
  return "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set logscale xy\n"
         "set xlabel 'N'\n"
         "set ylabel 'squared Frobenius error'\n"
         "set terminal pngcairo size 900,600\n"
         "set output '" + name + ".png'\n"
         "plot '" + name + "' using 1:3:4 with yerrorlines title 'mse', \\\n"
         "     '' using 1:5 with lines title 'thm3_upper', \\\n"
         "     '' using 1:6 with lines title 'cor1_lower', \\\n"
         "     '' using 1:7 with lines title 'thm2_lower'\n";
}

// ---------------------------------------------------------------------------
// Fano experiment
// ---------------------------------------------------------------------------

inline Estimator make_fano_estimator(const std::string& name, const DictionaryEnsemble& ens) {
  if (name == "constant_d0") {
    Matrix d0 = ens.D0.matrix();
    return [d0](const ObservationBatch&) { return d0; };
  }
  if (name == "oracle") {
    return [&ens](const ObservationBatch& b) {
      require(b.dict_index.has_value(), ErrorKind::parameter, "batch carries dict_index");
      return ens.members.at(*b.dict_index);
    };
  }
  if (name == "oracle_ls") return oracle_ls_estimator();
  throw Error(ErrorKind::config, "estimator in {constant_d0, oracle, oracle_ls}",
              "unknown estimator '" + name + "'");
}

inline json simulate_fano(const Config& c, std::optional<std::uint64_t> seed_override, unsigned threads) {
  const int m = c.get<int>("m");
  const int p = c.get<int>("p");
  const int s = c.get<int>("s");
  const double epsilon = c.get<double>("epsilon");
  const auto L = c.get<std::uint64_t>("L");
  const double sigma2 = c.get<double>("sigma2");
  const auto N = c.get<std::uint64_t>("N");
  const auto trials = c.get<std::uint64_t>("trials");
  const std::string estimator_name = c.get_or<std::string>("estimator", "constant_d0");
  const NonzeroLaw law = parse_nonzero_law(c.get_or<std::string>("nonzero_law", "rademacher"));
  const double sigma_a2 = c.get_or<double>("sigma_a2", 1.0);
  const std::uint64_t seed = seed_override.value_or(c.get_or<std::uint64_t>("seed", 0));
  std::optional<double> r;
  if (c.has("r")) r = c.get<double>("r");
  require(sigma2 > 0.0, ErrorKind::config, "sigma2 > 0");
  require(trials >= 1, ErrorKind::config, "trials >= 1");
  require(L >= 2, ErrorKind::config, "L >= 2");
  require(estimator_name != "oracle_ls" || N >= static_cast<std::uint64_t>(p), ErrorKind::config,
          "oracle_ls requires N >= p");
  const CoefficientModel cm = CoefficientModel::sparse(p, s, law, sigma_a2);

  Rng d0_rng(derive_seed(seed, 0));
  const DictionaryMatrix D0 =
      dictionary_from_config(c.has("D0") ? c.raw().at("D0") : json("random"), m, p, d0_rng);
  Rng ens_rng(derive_seed(seed, 1));
  const DictionaryEnsemble ens =
      build_ensemble(D0, epsilon, L, ens_rng, r, c.get_or<int>("max_attempts", 100), seed);
  const MiBudget mi = mi_upper_given_X(ens, coefficient_covariance(cm), static_cast<double>(N), sigma2);
  const double floor = fano_error_lower_bound(Nats{mi.computed_mi_upper}, L);
  const ErrorProbability pe =
      empirical_error_probability(ens, make_fano_estimator(estimator_name, ens), cm, NoiseModel(sigma2),
                                  N, trials, derive_seed(seed, 2), threads);
  return json{{"L", L},
              {"eta", mi.eta},
              {"pairwise_eta", *mi.pairwise_eta},
              {"mi_upper", mi.computed_mi_upper},
              {"mi_upper_bits", to_bits(Nats{mi.computed_mi_upper}).value},
              {"fano_floor", floor},
              {"p_e_hat", pe.p_e_hat},
              {"stderr", pe.std_error},
              {"errors", pe.errors},
              {"estimator", estimator_name},
              {"certificate_pass", ens.certificate->pass},
              {"params", c.raw()},
              {"master_seed", seed},
              {"version", kVersion}};
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dir;
  bool csv = false;
  unsigned threads = 0;
  bool gnuplot = false;
};

inline unsigned effective_threads(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MINIMAXDL_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

inline void emit(const Options& opt, const std::string& content, std::ostream& out) {
  if (opt.out.empty()) {
    out << content;
  } else {
    atomic_write(opt.out, content);
  }
}

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::parameter:
    case ErrorKind::precondition:
    case ErrorKind::dimension_mismatch:
    case ErrorKind::unsupported_model:
    case ErrorKind::config: return kExitConfig;
    default: return kExitRuntime;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"minimaxdl: minimax bounds, proof ensembles and learners for dictionary learning"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* cmd, bool needs_config = true) {
    auto* cfg = cmd->add_option("--config", opt.config, "JSON parameter file");
    if (needs_config) cfg->required();
    cmd->add_option("--seed", opt.seed, "master seed (overrides the config's seed)");
    cmd->add_option("--out", opt.out, "output path (default: stdout)");
    cmd->add_flag("--csv", opt.csv, "emit CSV instead of JSON");
    cmd->add_option("--threads", opt.threads, "worker threads (fallback: MINIMAXDL_THREADS)");
    cmd->add_flag("--gnuplot", opt.gnuplot, "write a gnuplot script next to the CSV output");
  };

  auto* bounds = app.add_subcommand("bounds", "evaluate closed-form bounds")->require_subcommand(1);
  auto* bounds_eval = bounds->add_subcommand("eval", "evaluate one bound; writes a BoundReport");
  add_common(bounds_eval);
  auto* bounds_n = bounds->add_subcommand("sample-size", "smallest N with bound(N) <= target_eps");
  add_common(bounds_n);

  auto* packing = app.add_subcommand("packing", "binary packing codes")->require_subcommand(1);
  auto* packing_build = packing->add_subcommand("build", "draw and verify a packing code");
  add_common(packing_build);

  auto* ensemble = app.add_subcommand("ensemble", "dictionary ensembles")->require_subcommand(1);
  auto* ensemble_build = ensemble->add_subcommand("build", "construct an ensemble directory");
  add_common(ensemble_build);
  auto* ensemble_verify = ensemble->add_subcommand("verify", "certify an ensemble directory");
  add_common(ensemble_verify, false);
  ensemble_verify->add_option("--dir", opt.dir, "ensemble directory")->required();

  auto* rip = app.add_subcommand("rip", "restricted isometry constants")->require_subcommand(1);
  auto* rip_estimate = rip->add_subcommand("estimate", "exact or sampled RIP constant");
  add_common(rip_estimate);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiments")->require_subcommand(1);
  auto* simulate_mse = simulate->add_subcommand("mse", "MSE sweep over N and SNR; writes CSV");
  add_common(simulate_mse);
  simulate_mse->footer(kSweepHelp);
  auto* simulate_fano_cmd = simulate->add_subcommand("fano", "detector error vs. the Fano floor; writes JSON");
  add_common(simulate_fano_cmd);

  if (argc >= 2) {
    const std::string first = argv[1];
    static const char* const kTop[] = {"bounds", "packing", "ensemble", "rip", "simulate"};
    const bool known = std::any_of(std::begin(kTop), std::end(kTop), [&](const char* t) { return first == t; });
    if (!known && !first.empty() && first[0] != '-') {
      err << "error: unknown subcommand '" << first << "'\n\n" << app.help();
      return kExitConfig;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Show the help of the deepest subcommand that was recognized.
    const CLI::App* deepest = &app;
    while (!deepest->get_subcommands().empty()) deepest = deepest->get_subcommands().front();
    err << "error: " << e.what() << "\n\n" << deepest->help();
    return kExitConfig;
  }

  const unsigned threads = effective_threads(opt.threads);
  try {
    if (bounds_eval->parsed()) {
      const BoundReport rep = evaluate_bound(load_config(opt.config));
      emit(opt, opt.csv ? bound_report_csv(rep) : json(rep).dump(2) + "\n", out);
    } else if (bounds_n->parsed()) {
      const Config c = load_config(opt.config);
      const BoundId id = parse_bound_id(c.get<std::string>("bound"));
      const double target = c.get<double>("target_eps");
      const SampleSizeResult res = required_sample_size(id, target, read_bound_params(c, id));
      json j{{"bound_id", to_string(id)},
             {"target_eps", target},
             {"N", res.N},
             {"degenerate", res.degenerate},
             {"value_at_N", res.value_at_N},
             {"value_at_N_minus_1", optional_number(res.value_at_N_minus_1)},
             {"params", c.raw()}};
      if (opt.csv) {
        emit(opt,
             "bound_id,target_eps,N,degenerate,value_at_N\n" + std::string(to_string(id)) + "," +
                 format_double(target) + "," + std::to_string(res.N) + "," +
                 (res.degenerate ? "true" : "false") + "," + format_double(res.value_at_N) + "\n",
             out);
      } else {
        emit(opt, j.dump(2) + "\n", out);
      }
    } else if (packing_build->parsed()) {
      const Config c = load_config(opt.config);
      const int d = c.get<int>("d");
      const auto P = c.get<std::uint64_t>("P");
      const std::uint64_t seed = opt.seed.value_or(c.get_or<std::uint64_t>("seed", 0));
      Rng rng(seed);
      const PackingCode code = build_packing(d, P, rng, c.get_or<int>("max_attempts", 100));
      json j(code);
      j["seed"] = seed;
      j["failure_bound_per_attempt"] = packing_failure_bound(d, P);
      j["verified_min_hamming"] = code.min_hamming ? json(*verify_packing(code).min_hamming) : json(nullptr);
      emit(opt, j.dump(2) + "\n", out);
    } else if (ensemble_build->parsed()) {
      const Config c = load_config(opt.config);
      const int m = c.get<int>("m");
      const int p = c.get<int>("p");
      const std::uint64_t seed = opt.seed.value_or(c.get_or<std::uint64_t>("seed", 0));
      const std::string dir = opt.out.empty() ? c.get<std::string>("output_path") : opt.out;
      std::optional<double> r;
      if (c.has("r")) r = c.get<double>("r");
      Rng d0_rng(derive_seed(seed, 0));
      const DictionaryMatrix D0 =
          dictionary_from_config(c.has("D0") ? c.raw().at("D0") : json("random"), m, p, d0_rng);
      Rng ens_rng(derive_seed(seed, 1));
      const DictionaryEnsemble ens = build_ensemble(D0, c.get<double>("epsilon"), c.get<std::uint64_t>("L"),
                                                    ens_rng, r, c.get_or<int>("max_attempts", 100), seed);
      write_ensemble(dir, ens);
      out << json(*ens.certificate).dump(2) << "\n";
      return ens.certificate->pass ? kExitOk : kExitRuntime;
    } else if (ensemble_verify->parsed()) {
      const DictionaryEnsemble ens = read_ensemble(opt.dir);
      const Config c = opt.config.empty() ? Config() : load_config(opt.config);
      const double r = c.has("r") ? c.get<double>("r")
                                  : ens.radius.value_or(2.0 * std::sqrt(static_cast<double>(ens.D0.cols())));
      const EnsembleCertificate cert = verify_ensemble(ens, NeighborhoodSpec(ens.D0, r));
      emit(opt, json(cert).dump(2) + "\n", out);
      return cert.pass ? kExitOk : kExitRuntime;
    } else if (rip_estimate->parsed()) {
      const Config c = load_config(opt.config);
      const int s = c.get<int>("s");
      const std::uint64_t seed = opt.seed.value_or(c.get_or<std::uint64_t>("seed", 0));
      Rng rng(seed);
      DictionaryMatrix D = [&] {
        const json spec = c.has("dictionary") ? c.raw().at("dictionary") : json("random");
        if (spec.is_object()) {
          DictionaryMatrix loaded(read_matrix_csv(spec.at("csv").get<std::string>()));
          return loaded;
        }
        return dictionary_from_config(spec, c.get<int>("m"), c.get<int>("p"), rng);
      }();
      const std::string method = c.get_or<std::string>("method", "exact");
      RipEstimate est;
      if (method == "exact") {
        est = rip_constant_exact(D, s, c.get_or<std::uint64_t>("cap", kDefaultEnumerationCap));
      } else if (method == "monte_carlo") {
        est = rip_constant_monte_carlo(D, s, c.get<std::uint64_t>("trials"), rng);
      } else {
        throw Error(ErrorKind::config, "method in {exact, monte_carlo}", "unknown method '" + method + "'");
      }
      json j(est);
      j["m"] = D.rows();
      j["p"] = D.cols();
      j["seed"] = seed;
      emit(opt, j.dump(2) + "\n", out);
    } else if (simulate_mse->parsed()) {
      const SweepConfig cfg = parse_sweep_config(load_config(opt.config), opt.seed);
      const std::string csv = rows_to_csv(run_sweep(cfg, threads));
      emit(opt, csv, out);
      if (opt.gnuplot) {
        require(!opt.out.empty(), ErrorKind::config, "--out", "--gnuplot needs --out");
        atomic_write(opt.out + ".gp", gnuplot_script(opt.out));
      }
    } else if (simulate_fano_cmd->parsed()) {
      const json j = simulate_fano(load_config(opt.config), opt.seed, threads);
      emit(opt, j.dump(2) + "\n", out);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    err << "error [config]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace minimaxdl::cli

#endif  // MINIMAXDL_CLI_HPP_
