#ifndef MINIMAXDL_IO_HPP_
#define MINIMAXDL_IO_HPP_

#include "minimaxdl/bounds.hpp"
#include "minimaxdl/infotheory.hpp"
#include "minimaxdl/learners.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace minimaxdl {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Text files
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to `path` through a temporary sibling and a rename.
inline void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "output path writable",
            "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    require(static_cast<bool>(out), ErrorKind::io, "output path writable",
            "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorKind::io, "output path writable",
          "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "input file readable",
          "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Headerless, row-major, "%.17g".
inline std::string matrix_to_csv(const Matrix& M) {
  std::string out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out += ',';
      out += format_double(M(i, j));
    }
    out += '\n';
  }
  return out;
}

inline Matrix matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      require(end != cell.c_str(), ErrorKind::io, "numeric CSV cells",
              "malformed CSV cell '" + cell + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    require(rows.empty() || rows.front().size() == row.size(), ErrorKind::io,
            "rectangular CSV", "CSV rows have different lengths");
    rows.push_back(std::move(row));
  }
  Matrix M(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

inline void write_matrix_csv(const fs::path& path, const Matrix& M) { atomic_write(path, matrix_to_csv(M)); }
inline Matrix read_matrix_csv(const fs::path& path) { return matrix_from_csv(read_text(path)); }

inline void write_json(const fs::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }
inline json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::io, "valid JSON", path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// JSON encodings
// ---------------------------------------------------------------------------

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& rows) {
  require(rows.is_array(), ErrorKind::config, "matrix is an array of rows");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    require(static_cast<Eigen::Index>(rows.at(i).size()) == c, ErrorKind::config,
            "rectangular matrix");
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rows.at(i).at(j).get<double>();
  }
  return M;
}

inline void to_json(json& j, const BoundReport& r) {
  j = json{{"bound_id", to_string(r.id)},
           {"value", r.value},
           {"active_branch", to_string(r.active_branch)},
           {"first_branch", optional_number(r.first_branch)},
           {"second_branch", optional_number(r.second_branch)}};
  json pre = json::array();
  for (const auto& p : r.preconditions) pre.push_back({{"name", p.name}, {"satisfied", p.satisfied}});
  j["preconditions"] = pre;
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  j["warnings"] = r.warnings;
  if (r.matrix) j["matrix"] = matrix_to_json(*r.matrix);
}

inline void to_json(json& j, const RipEstimate& e) {
  j = json{{"s", e.s},
           {"delta", e.delta},
           {"method", to_string(e.method)},
           {"supports_checked", e.supports_checked},
           {"extremal_support", e.extremal_support}};
}

inline void to_json(json& j, const EnsembleCertificate& c) {
  j = json{{"min_pairwise_sq", optional_number(c.min_pairwise_sq)},
           {"max_pairwise_sq", optional_number(c.max_pairwise_sq)},
           {"max_col_norm_err", c.max_col_norm_err},
           {"max_radius", c.max_radius},
           {"max_member_sq_distance", c.max_member_sq_distance},
           {"orthogonality_err", c.orthogonality_err},
           {"perturbation_norm_err", c.perturbation_norm_err},
           {"epsilon", c.epsilon},
           {"radius", c.radius},
           {"pairwise_ok", c.pairwise_ok},
           {"norms_ok", c.norms_ok},
           {"radius_ok", c.radius_ok},
           {"orthogonality_ok", c.orthogonality_ok},
           {"pass", c.pass}};
}

inline void to_json(json& j, const MiBudget& b) {
  j = json{{"side_info", to_string(b.side_info)},
           {"eta", b.eta},
           {"computed_mi_upper", b.computed_mi_upper},
           {"std_error", b.std_error},
           {"exact", b.exact},
           {"supports_evaluated", b.supports_evaluated},
           {"pairwise_eta", optional_number(b.pairwise_eta)},
           {"spectral_chain", optional_number(b.spectral_chain)},
           {"chain_closed_form", optional_number(b.chain_closed_form)},
           {"snr", optional_number(b.snr)}};
}

inline std::string sign_string(const SignVector& v) {
  std::string s;
  s.reserve(v.size());
  for (auto e : v) s += e > 0 ? '+' : '-';
  return s;
}

inline void to_json(json& j, const PackingCode& c) {
  json vectors = json::array();
  for (const auto& v : c.vectors) vectors.push_back(sign_string(v));
  j = json{{"d", c.d},
           {"P", c.size()},
           {"min_hamming", c.min_hamming ? json(*c.min_hamming) : json(nullptr)},
           {"attempts", c.attempts},
           {"vectors", vectors}};
}

inline json model_descriptor(const CoefficientModel& cm) {
  if (cm.is_sparse()) {
    const auto& sp = cm.sparse_params();
    return json{{"kind", "sparse_uniform"}, {"p", cm.dimension()}, {"s", sp.s},
                {"law", to_string(sp.law)}, {"sigma_a2", sp.sigma_a2}};
  }
  return json{{"kind", "general_covariance"}, {"p", cm.dimension()},
              {"sigma_x", matrix_to_json(cm.general_params().sigma_x)}};
}

inline NonzeroLaw parse_nonzero_law(const std::string& s) {
  if (s == "rademacher") return NonzeroLaw::rademacher;
  if (s == "gaussian") return NonzeroLaw::gaussian;
  throw Error(ErrorKind::config, "nonzero_law in {rademacher, gaussian}",
              "unknown nonzero_law '" + s + "'");
}

inline CoefficientModel model_from_descriptor(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sparse_uniform") {
    return CoefficientModel::sparse(j.at("p").get<int>(), j.at("s").get<int>(),
                                    parse_nonzero_law(j.at("law").get<std::string>()),
                                    j.at("sigma_a2").get<double>());
  }
  if (kind == "general_covariance") return CoefficientModel::general(matrix_from_json(j.at("sigma_x")));
  throw Error(ErrorKind::io, "known model kind", "unknown model kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Observation batch directory: Y.csv, X.csv, supports.json, meta.json
// ---------------------------------------------------------------------------

struct StoredBatch {
  ObservationBatch batch;
  CoefficientModel model;
  NoiseModel noise;
};

inline void write_batch(const fs::path& dir, const ObservationBatch& batch,
                        const CoefficientModel& cm, const NoiseModel& nm) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "Y.csv", batch.Y);
  if (batch.X) write_matrix_csv(dir / "X.csv", *batch.X);
  write_json(dir / "supports.json", batch.supports ? json(*batch.supports) : json(nullptr));
  json meta{{"m", batch.Y.rows()},
            {"p", cm.dimension()},
            {"N", batch.size()},
            {"s", cm.sparsity() ? json(*cm.sparsity()) : json(nullptr)},
            {"sigma2", nm.variance},
            {"seed", batch.seed},
            {"dict_index", batch.dict_index ? json(*batch.dict_index) : json(nullptr)},
            {"model", model_descriptor(cm)},
            {"version", kVersion}};
  write_json(dir / "meta.json", meta);
}

inline StoredBatch read_batch(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  ObservationBatch batch;
  const auto m = meta.at("m").get<Eigen::Index>();
  const auto N = meta.at("N").get<Eigen::Index>();
  batch.Y = N > 0 ? read_matrix_csv(dir / "Y.csv") : Matrix(m, 0);
  if (fs::exists(dir / "X.csv")) {
    batch.X = N > 0 ? read_matrix_csv(dir / "X.csv") : Matrix(meta.at("p").get<Eigen::Index>(), 0);
  }
  const json supports = read_json(dir / "supports.json");
  if (!supports.is_null()) batch.supports = supports.get<std::vector<Support>>();
  batch.seed = meta.at("seed").get<std::uint64_t>();
  if (!meta.at("dict_index").is_null()) batch.dict_index = meta.at("dict_index").get<std::size_t>();
  require(batch.Y.rows() == m && batch.Y.cols() == N, ErrorKind::io, "Y matches meta shape");
  return {std::move(batch), model_from_descriptor(meta.at("model")),
          NoiseModel(meta.at("sigma2").get<double>())};
}

// ---------------------------------------------------------------------------
// Ensemble directory: D0.csv, member_####.csv, certificate.json, meta.json
// ---------------------------------------------------------------------------

inline std::string member_filename(std::size_t l) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%04zu.csv", l);
  return buf;
}

inline void write_ensemble(const fs::path& dir, const DictionaryEnsemble& ens) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "D0.csv", ens.D0.matrix());
  for (std::size_t l = 0; l < ens.size(); ++l) write_matrix_csv(dir / member_filename(l), ens.members[l]);
  if (ens.certificate) write_json(dir / "certificate.json", json(*ens.certificate));
  json meta{{"m", ens.D0.rows()},
            {"p", ens.D0.cols()},
            {"epsilon", ens.epsilon},
            {"epsilon_prime", ens.epsilon_prime},
            {"L", ens.size()},
            {"seed", ens.seed},
            {"r", optional_number(ens.radius)},
            {"version", kVersion}};
  write_json(dir / "meta.json", meta);
}

inline DictionaryEnsemble read_ensemble(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  DictionaryEnsemble ens{DictionaryMatrix(read_matrix_csv(dir / "D0.csv")),
                         meta.at("epsilon").get<double>(),
                         meta.at("epsilon_prime").get<double>(),
                         {},
                         {},
                         std::nullopt,
                         meta.at("seed").get<std::uint64_t>(),
                         std::nullopt};
  if (!meta.at("r").is_null()) ens.radius = meta.at("r").get<double>();
  const auto L = meta.at("L").get<std::size_t>();
  ens.members.reserve(L);
  for (std::size_t l = 0; l < L; ++l) ens.members.push_back(read_matrix_csv(dir / member_filename(l)));
  return ens;
}

}  // namespace minimaxdl

#endif  // MINIMAXDL_IO_HPP_
