#ifndef CVQKD_IO_HPP
#define CVQKD_IO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mc.hpp"
#include "optimize.hpp"
#include "security.hpp"

// File formats: covariance JSON files, run manifests, CSV tables, and the
// binary sample frame. All floating-point text output uses 12 significant
// digits for reproducible artifacts.

namespace cvqkd {

using json = nlohmann::json;

inline constexpr const char* tool_version = "cvqkd 1.0.0";

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// --- quadrature ordering conversions -------------------------------------
// internal: interleaved (x1,p1,x2,p2,...); file option: by-mode
// (x1..xN, p1..pN).

inline Mat interleaved_from_by_mode(const Mat& g) {
  const int n = mode_count(g);
  Mat out(2 * n, 2 * n);
  const auto src = [n](int i) { return (i / 2) + (i % 2) * n; };
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) out(i, j) = g(src(i), src(j));
  return out;
}

inline Mat by_mode_from_interleaved(const Mat& g) {
  const int n = mode_count(g);
  Mat out(2 * n, 2 * n);
  const auto src = [n](int i) { return i < n ? 2 * i : 2 * (i - n) + 1; };
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) out(i, j) = g(src(i), src(j));
  return out;
}

// --- covariance files ------------------------------------------------------

struct CovarianceFile {
  Mat matrix;  // interleaved, validated physical
  json metadata = json::object();
  std::string label;
};

inline json covariance_to_json(const Mat& g_interleaved, const std::string& ordering = "interleaved",
                               const json& metadata = json::object()) {
  if (ordering != "interleaved" && ordering != "by-mode")
    throw std::invalid_argument("covariance_to_json: ordering must be interleaved or by-mode");
  const Mat g = (ordering == "by-mode") ? by_mode_from_interleaved(g_interleaved) : g_interleaved;
  json rows = json::array();
  for (int i = 0; i < g.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
    rows.push_back(row);
  }
  json out = {{"schema_version", 1},
              {"n_modes", mode_count(g_interleaved)},
              {"ordering", ordering},
              {"units", "SNU"},
              {"matrix", rows}};
  if (!metadata.empty()) out["metadata"] = metadata;
  return out;
}

inline void save_covariance(const std::string& path, const Mat& g_interleaved,
                            const std::string& ordering = "interleaved",
                            const json& metadata = json::object()) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_covariance: cannot open " + path);
  f << covariance_to_json(g_interleaved, ordering, metadata).dump(2) << "\n";
}

inline CovarianceFile load_covariance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("load_covariance: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("load_covariance: JSON parse error in " + path + ": " + e.what());
  }
  if (!j.contains("units") || j["units"] != "SNU")
    throw std::invalid_argument("load_covariance: units tag must be \"SNU\"");
  if (j.value("schema_version", 0) != 1)
    throw std::invalid_argument("load_covariance: unsupported schema_version");
  const std::string ordering = j.value("ordering", "");
  if (ordering != "interleaved" && ordering != "by-mode")
    throw std::invalid_argument("load_covariance: ordering must be \"interleaved\" or \"by-mode\"");
  const int n = j.value("n_modes", 0);
  if (n < 1) throw std::invalid_argument("load_covariance: n_modes must be >= 1");
  const auto& rows = j.at("matrix");
  if (!rows.is_array() || static_cast<int>(rows.size()) != 2 * n)
    throw std::invalid_argument("load_covariance: matrix must have 2*n_modes rows");
  Mat g(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != 2 * n)
      throw std::invalid_argument("load_covariance: row " + std::to_string(i) +
                                  " must have 2*n_modes entries");
    for (int jj = 0; jj < 2 * n; ++jj) g(i, jj) = row[jj].get<double>();
  }
  if (ordering == "by-mode") g = interleaved_from_by_mode(g);
  if (!g.is_symmetric(1e-10))
    throw unphysical_error("load_covariance: matrix is not symmetric within tolerance");
  g.symmetrize();
  if (!is_physical(g)) {
    double nu_min = -1.0;
    try {
      nu_min = min_symplectic_eigenvalue(g);
    } catch (const std::exception&) {
    }
    throw unphysical_error("load_covariance: matrix is unphysical (min symplectic eigenvalue " +
                           fmt12(nu_min) + " < 1 - 1e-9)");
  }
  CovarianceFile cf;
  cf.matrix = g;
  cf.metadata = j.value("metadata", json::object());
  cf.label = cf.metadata.value("label", path);
  return cf;
}

// --- digests and manifests ---------------------------------------------------

inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file_digest: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return fnv1a64_hex(ss.str());
}

// Emitted next to every CLI artifact; re-running the stored argv reproduces
// the outputs byte-for-byte.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;  // full original command line (without argv[0])
  json params = json::object();   // resolved parameter set
  std::uint64_t seed = 0;
  std::string version = tool_version;
  json inputs = json::array();   // [{path, fnv1a64}]
  json outputs = json::array();  // [paths]

  json to_json() const {
    return {{"subcommand", subcommand}, {"argv", argv},   {"params", params}, {"seed", seed},
            {"version", version},       {"inputs", inputs}, {"outputs", outputs}};
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.params = j.value("params", json::object());
    m.seed = j.value("seed", std::uint64_t{0});
    m.version = j.value("version", "");
    m.inputs = j.value("inputs", json::array());
    m.outputs = j.value("outputs", json::array());
    return m;
  }
};

inline void save_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_manifest: cannot open " + path);
  f << m.to_json().dump(2) << "\n";
}

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("load_manifest: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("load_manifest: JSON parse error: " + std::string(e.what()));
  }
  return RunManifest::from_json(j);
}

// --- report serialization ---------------------------------------------------

inline json report_to_json(const SecurityReport& r) {
  return {{"i_ab", r.i_ab},
          {"chi_be", r.chi_be},
          {"key_rate", r.key_rate},
          {"key_rate_clamped", r.key_rate_clamped},
          {"basis", r.basis == Quadrature::x ? "x" : "p"},
          {"source", r.source},
          {"purity_deviation", r.purity_deviation},
          {"purification_residual", r.purification_residual},
          {"protocol",
           {{"v0", r.protocol.v0},
            {"delta_v0", r.protocol.delta_v0},
            {"delta_v", r.protocol.delta_v},
            {"g", r.protocol.g}}},
          {"channel", {{"eta", r.channel.eta}, {"epsilon", r.channel.epsilon}}},
          {"detector",
           {{"efficiency", r.detector.efficiency},
            {"electronic_noise", r.detector.electronic_noise},
            {"trusted_added_noise", r.detector.trusted_added_noise}}}};
}

inline json threshold_to_json(const ThresholdResult& t, const std::string& kind) {
  json j = {{"kind", kind},
            {"value", t.value},
            {"bracket_lo", t.bracket_lo},
            {"bracket_hi", t.bracket_hi},
            {"residual_key_rate", t.residual_rate},
            {"iterations", t.iterations},
            {"g_opt", t.g_opt},
            {"noise_opt", t.noise_opt},
            {"cap_hit", t.cap_hit}};
  if (kind == "loss_db") j["km"] = t.km;
  return j;
}

// --- CSV -------------------------------------------------------------------

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& x_name) {
  std::ostringstream out;
  out << x_name << ",key_rate,g_opt,noise_opt,i_ab,chi_be,error\n";
  for (const SweepRow& r : rows)
    out << fmt12(r.x) << ',' << fmt12(r.key_rate) << ',' << fmt12(r.g_opt) << ','
        << fmt12(r.noise_opt) << ',' << fmt12(r.i_ab) << ',' << fmt12(r.chi_be) << ',' << r.error
        << "\n";
  return out.str();
}

inline std::string samples_csv(const SampleBlock& block) {
  std::ostringstream out;
  out << "basis,x_M,x_HD,x_B\n";
  for (const Sample& s : block.samples)
    out << (s.basis == 0 ? 'x' : 'p') << ',' << fmt12(s.x_m) << ',' << fmt12(s.x_hd) << ','
        << fmt12(s.x_b) << "\n";
  return out.str();
}

inline SampleBlock samples_from_csv(std::istream& in) {
  SampleBlock block;
  std::string line;
  if (!std::getline(in, line) || line.rfind("basis,", 0) != 0)
    throw std::invalid_argument("samples_from_csv: missing header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string basis, a, b, c;
    if (!std::getline(ls, basis, ',') || !std::getline(ls, a, ',') || !std::getline(ls, b, ',') ||
        !std::getline(ls, c, ','))
      throw std::invalid_argument("samples_from_csv: malformed line " + std::to_string(lineno));
    Sample s;
    if (basis == "x")
      s.basis = 0;
    else if (basis == "p")
      s.basis = 1;
    else
      throw std::invalid_argument("samples_from_csv: bad basis at line " + std::to_string(lineno));
    s.x_m = std::stod(a);
    s.x_hd = std::stod(b);
    s.x_b = std::stod(c);
    block.samples.push_back(s);
  }
  return block;
}

// Binary sample frame: magic "CVQKDSF1" (8 bytes), uint32 version (= 1,
// little-endian), uint64 sample count, then per sample four little-endian
// IEEE-754 doubles: basis (0.0 or 1.0), x_M, x_HD, x_B.
inline constexpr char sample_frame_magic[9] = "CVQKDSF1";

inline void save_samples_binary(const std::string& path, const SampleBlock& block) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_samples_binary: cannot open " + path);
  f.write(sample_frame_magic, 8);
  const std::uint32_t version = 1;
  const std::uint64_t count = block.samples.size();
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&count), 8);
  for (const Sample& s : block.samples) {
    const double rec[4] = {static_cast<double>(s.basis), s.x_m, s.x_hd, s.x_b};
    f.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
}

inline SampleBlock load_samples_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("load_samples_binary: cannot open " + path);
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != sample_frame_magic)
    throw std::invalid_argument("load_samples_binary: bad magic");
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&count), 8);
  if (!f || version != 1) throw std::invalid_argument("load_samples_binary: unsupported version");
  SampleBlock block;
  block.samples.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    double rec[4];
    f.read(reinterpret_cast<char*>(rec), sizeof(rec));
    if (!f) throw std::invalid_argument("load_samples_binary: truncated file");
    block.samples[i] = {rec[0] == 0.0 ? 0 : 1, rec[1], rec[2], rec[3]};
  }
  return block;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
}

}  // namespace cvqkd

#endif  // CVQKD_IO_HPP
