#pragma once

// JSON run configuration, tabulated pump spectra, run manifests and matrix
// export (CSV and JSON).
//
// Config layout (every field optional unless noted, defaults shown):
//
//   {
//     "crystal":    {"material": "BBO", "length_mm": 1.0, "cut_angle_deg": 30.0},
//     "pump":       {"waist_um": 100.0, "duration_fs": 100.0, "center_nm": 400.0},
//                   or {"waist_um": ..., "spectrum_file": "pump.csv"}
//     "collection": {"waist_um": 100.0, "alpha_deg": "auto", "alpha_offset_deg": 0.0,
//                    "convention": "in_crystal"},
//     "filter":     null | {"fwhm_nm": 20.0 (required), "center_nm": <degenerate>},
//     "grid":       {"lambda_min_nm": 780.0, "lambda_max_nm": 820.0, "points": 32},
//     "quadrature": {"nz": 24, "nzp": 24, "nws": 32, "window": 5.0}
//   }
//
// A manifest written by the CLI is accepted wherever a config is.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc/density.hpp"
#include "spdc/error.hpp"
#include "spdc/pipeline.hpp"
#include "spdc/source.hpp"
#include "spdc/units.hpp"

namespace spdc {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
  SourceConfig source;
  QuadratureSpec quad;
  bool alpha_auto = true;
  double alpha_offset = 0.0;  ///< rad, added to the solved angle
  Json resolved;              ///< every default materialized
};

namespace detail {

class Section {
 public:
  Section(const Json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_) || root.at(name_).is_null()) {
      node_ = Json::object();
      return;
    }
    node_ = root.at(name_);
    if (!node_.is_object()) throw ConfigError(name_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  const Json& raw(const std::string& key) const { return node_.at(key); }
  std::string path(const std::string& key) const { return name_ + "." + key; }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    return v.get<double>();
  }

  double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path(key), "must be positive");
    return v;
  }

  int count(const std::string& key, int fallback, int minimum) const {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    const int n = v.get<int>();
    if (n < minimum)
      throw ConfigError(path(key), "must be >= " + std::to_string(minimum));
    return n;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : node_.items()) {
      bool known = false;
      for (const char* allowed : keys) known = known || k == allowed;
      if (!known) throw ConfigError(path(k), "unknown field");
    }
  }

 private:
  std::string name_;
  Json node_;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

inline void check_window(const std::string& field, double lambda_nm) {
  const auto w = kBboKato1986.window;
  const double um = lambda_nm * 1e-3;
  if (um < w.min_um || um > w.max_um) {
    std::ostringstream os;
    os << lambda_nm << " nm is outside the dispersion model window [" << w.min_um * 1e3
       << ", " << w.max_um * 1e3 << "] nm";
    throw ConfigError(field, os.str());
  }
}

}  // namespace detail

/// CSV with header `wavelength_nm,re_amplitude,im_amplitude`.
inline PumpSpectrum read_pump_spectrum(const std::string& path,
                                       const std::string& field = "pump.spectrum_file") {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(field, path + " is empty");
  const auto header = detail::split_csv_line(line);
  if (header != std::vector<std::string>{"wavelength_nm", "re_amplitude", "im_amplitude"})
    throw ConfigError(field, "header must be wavelength_nm,re_amplitude,im_amplitude");
  std::vector<double> omega;
  std::vector<std::complex<double>> amplitude;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    try {
      if (cells.size() != 3) throw std::invalid_argument("expected 3 columns");
      const double lambda = std::stod(cells[0]);
      if (!(lambda > 0.0)) throw std::invalid_argument("wavelength must be positive");
      omega.push_back(omega_from_wavelength_nm(lambda));
      amplitude.emplace_back(std::stod(cells[1]), std::stod(cells[2]));
    } catch (const std::exception& e) {
      throw ConfigError(field, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    return PumpSpectrum::tabulated(std::move(omega), std::move(amplitude));
  } catch (const DomainError& e) {
    throw ConfigError(field, e.what());
  }
}

/// Parses a config (or manifest) document. Relative spectrum paths resolve
/// against `base_dir`.
inline RunConfig parse_config(const Json& document, const std::filesystem::path& base_dir = {}) {
  if (!document.is_object()) throw ConfigError("config", "expected a JSON object");
  const Json& root = document.contains("manifest_version") ? document.at("config") : document;
  for (const auto& [k, v] : root.items()) {
    if (k != "crystal" && k != "pump" && k != "collection" && k != "filter" && k != "grid" &&
        k != "quadrature")
      throw ConfigError(k, "unknown section");
  }

  RunConfig rc;
  Json resolved;

  const detail::Section crystal(root, "crystal");
  crystal.allow_only({"material", "length_mm", "cut_angle_deg"});
  const std::string material = crystal.text("material", "BBO");
  if (material != "BBO") throw ConfigError("crystal.material", "unsupported material " + material);
  rc.source.crystal.material = Material::BBO;
  const double length_mm = crystal.positive("length_mm", 1.0);
  const double cut_deg = crystal.number("cut_angle_deg", 30.0);
  if (cut_deg < 0.0 || cut_deg > 90.0)
    throw ConfigError("crystal.cut_angle_deg", "must lie in [0, 90]");
  rc.source.crystal.length = length_mm * 1e3;
  rc.source.crystal.cut_angle = deg_to_rad(cut_deg);
  resolved["crystal"] = {{"material", material}, {"length_mm", length_mm},
                         {"cut_angle_deg", cut_deg}};

  const detail::Section pump(root, "pump");
  pump.allow_only({"waist_um", "duration_fs", "center_nm", "spectrum_file"});
  const double pump_waist = pump.positive("waist_um", 100.0);
  if (pump_waist < 1.0) throw ConfigError("pump.waist_um", "must be >= 1 um");
  rc.source.beams.pump_waist = pump_waist;
  resolved["pump"] = {{"waist_um", pump_waist}};
  if (pump.has("spectrum_file")) {
    if (pump.has("duration_fs") || pump.has("center_nm"))
      throw ConfigError("pump.spectrum_file",
                        "cannot be combined with duration_fs or center_nm");
    std::filesystem::path file = pump.text("spectrum_file", "");
    if (file.is_relative()) file = base_dir / file;
    file = std::filesystem::absolute(file).lexically_normal();
    rc.source.pump = read_pump_spectrum(file.string());
    resolved["pump"]["spectrum_file"] = file.string();
  } else {
    const double duration = pump.positive("duration_fs", 100.0);
    const double center_nm = pump.positive("center_nm", 400.0);
    detail::check_window("pump.center_nm", center_nm);
    rc.source.pump = PumpSpectrum::gaussian(duration, omega_from_wavelength_nm(center_nm));
    resolved["pump"]["duration_fs"] = duration;
    resolved["pump"]["center_nm"] = center_nm;
  }
  const double degenerate_nm = wavelength_nm_from_omega(rc.source.omega0());

  const detail::Section collection(root, "collection");
  collection.allow_only({"waist_um", "alpha_deg", "alpha_offset_deg", "convention"});
  const double fiber_waist = collection.positive("waist_um", 100.0);
  if (fiber_waist < 1.0) throw ConfigError("collection.waist_um", "must be >= 1 um");
  rc.source.beams.fiber_waist = fiber_waist;
  const std::string convention = collection.text("convention", "in_crystal");
  if (convention == "in_crystal") {
    rc.source.convention = AngleConvention::InCrystal;
  } else if (convention == "vacuum") {
    rc.source.convention = AngleConvention::Vacuum;
  } else {
    throw ConfigError("collection.convention", "expected \"in_crystal\" or \"vacuum\"");
  }
  const double offset_deg = collection.number("alpha_offset_deg", 0.0);
  Json alpha_json = "auto";
  if (collection.has("alpha_deg") && !collection.raw("alpha_deg").is_string()) {
    const double alpha_deg = collection.number("alpha_deg", 0.0);
    if (!(std::abs(alpha_deg) < 90.0))
      throw ConfigError("collection.alpha_deg", "|alpha| must be < 90");
    rc.alpha_auto = false;
    rc.source.alpha = deg_to_rad(alpha_deg + offset_deg);
    alpha_json = alpha_deg;
  } else if (collection.has("alpha_deg") && collection.raw("alpha_deg") != "auto") {
    throw ConfigError("collection.alpha_deg", "expected a number or \"auto\"");
  }
  rc.alpha_offset = deg_to_rad(offset_deg);
  resolved["collection"] = {{"waist_um", fiber_waist},
                            {"alpha_deg", alpha_json},
                            {"alpha_offset_deg", offset_deg},
                            {"convention", convention}};

  if (!root.contains("filter") || root.at("filter").is_null()) {
    resolved["filter"] = nullptr;
  } else {
    const detail::Section filter(root, "filter");
    filter.allow_only({"fwhm_nm", "center_nm"});
    if (!filter.has("fwhm_nm")) throw ConfigError("filter.fwhm_nm", "required");
    const double fwhm = filter.positive("fwhm_nm", 0.0);
    const double center = filter.positive("center_nm", degenerate_nm);
    rc.source.filter = SpectralFilter::from_wavelength(fwhm, center);
    resolved["filter"] = {{"fwhm_nm", fwhm}, {"center_nm", center}};
  }

  const detail::Section grid(root, "grid");
  grid.allow_only({"lambda_min_nm", "lambda_max_nm", "points"});
  rc.quad.grid.lambda_min_nm = grid.positive("lambda_min_nm", 780.0);
  rc.quad.grid.lambda_max_nm = grid.positive("lambda_max_nm", 820.0);
  rc.quad.grid.points = grid.count("points", 32, 1);
  if (rc.quad.grid.lambda_max_nm < rc.quad.grid.lambda_min_nm ||
      (rc.quad.grid.points > 1 && rc.quad.grid.lambda_max_nm == rc.quad.grid.lambda_min_nm))
    throw ConfigError("grid", "lambda_max_nm must exceed lambda_min_nm");
  const std::pair<const char*, double> ends[] = {
      {"lambda_min_nm", rc.quad.grid.lambda_min_nm},
      {"lambda_max_nm", rc.quad.grid.lambda_max_nm}};
  for (const auto& [key, idler] : ends) {
    detail::check_window(grid.path(key), idler);
    // Conjugate signal wavelength at the pump center.
    const double ws = 2.0 * rc.source.omega0() - omega_from_wavelength_nm(idler);
    if (!(ws > 0.0))
      throw ConfigError(grid.path(key), "idler frequency exceeds the pump frequency");
    detail::check_window(grid.path(key) + " (conjugate signal)", wavelength_nm_from_omega(ws));
  }
  resolved["grid"] = {{"lambda_min_nm", rc.quad.grid.lambda_min_nm},
                      {"lambda_max_nm", rc.quad.grid.lambda_max_nm},
                      {"points", rc.quad.grid.points}};

  const detail::Section quadrature(root, "quadrature");
  quadrature.allow_only({"nz", "nzp", "nws", "window"});
  rc.quad.nz = quadrature.count("nz", 24, 4);
  rc.quad.nzp = quadrature.count("nzp", 24, 4);
  rc.quad.nws = quadrature.count("nws", 32, 4);
  rc.quad.window = quadrature.positive("window", 5.0);
  if (!(std::erf(rc.quad.window) >= 0.9999))
    throw ConfigError("quadrature.window", "must cover >= 99.99% of the pump power");
  resolved["quadrature"] = {{"nz", rc.quad.nz},
                            {"nzp", rc.quad.nzp},
                            {"nws", rc.quad.nws},
                            {"window", rc.quad.window}};

  try {
    rc.source.validate();
  } catch (const DomainError& e) {
    throw ConfigError("config", e.what());
  }
  rc.resolved = std::move(resolved);
  return rc;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  Json document;
  try {
    document = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(document, path.parent_path());
}

/// Solves for alpha if requested and applies the configured offset.
struct ResolvedAngle {
  double alpha = 0.0;  ///< rad
  bool solved = false;
  double residual = 0.0;
};

inline ResolvedAngle resolve_angle(RunConfig& rc) {
  ResolvedAngle r;
  if (rc.alpha_auto) {
    const auto sol = solve_phase_matching_angle(rc.source.crystal, rc.source.omega0(),
                                                rc.source.convention);
    r.alpha = sol.alpha + rc.alpha_offset;
    r.solved = true;
    r.residual = sol.residual;
  } else {
    r.alpha = *rc.source.alpha;
  }
  rc.source.alpha = r.alpha;
  return r;
}

/// 64-bit FNV-1a of the compact serialization, as 16 hex digits.
inline std::string config_hash(const Json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Rows and columns labeled by wavelength; each column is an (re, im) pair.
inline std::string matrix_csv(const DensityMatrix& rho) {
  std::string out = "lambda_nm";
  for (int k = 0; k < rho.size(); ++k) {
    const std::string label = format_double(rho.wavelength_nm(k));
    out += "," + label + "_re," + label + "_im";
  }
  out += "\n";
  for (int j = 0; j < rho.size(); ++j) {
    out += format_double(rho.wavelength_nm(j));
    for (int k = 0; k < rho.size(); ++k) {
      out += "," + format_double(rho.values(j, k).real());
      out += "," + format_double(rho.values(j, k).imag());
    }
    out += "\n";
  }
  return out;
}

inline Json diagnostics_json(const Diagnostics& d) {
  return {{"trace_before_normalize", d.trace_before_normalize},
          {"trace", d.normalized_trace},
          {"purity", d.purity},
          {"fwhm_nm", d.fwhm_nm ? Json(*d.fwhm_nm) : Json(nullptr)},
          {"centroid_nm", d.centroid_nm},
          {"peak_nm", d.peak_nm},
          {"eigenvalue_max", d.lambda_max},
          {"eigenvalue_min", d.lambda_min},
          {"hermiticity_residual", d.hermiticity_residual},
          {"imag_to_real", d.imag_to_real}};
}

/// Grid, row-major flattened matrix and metadata.
inline Json matrix_json(const DensityMatrix& rho, const Json& metadata) {
  Json grid;
  Json lambda = Json::array(), omega = Json::array(), weights = Json::array();
  for (int j = 0; j < rho.size(); ++j) {
    lambda.push_back(rho.wavelength_nm(j));
    omega.push_back(rho.omega[j]);
    weights.push_back(rho.weights[j]);
  }
  grid["lambda_nm"] = lambda;
  grid["omega_rad_per_fs"] = omega;
  grid["weights"] = weights;
  Json re = Json::array(), im = Json::array();
  for (int j = 0; j < rho.size(); ++j)
    for (int k = 0; k < rho.size(); ++k) {
      re.push_back(rho.values(j, k).real());
      im.push_back(rho.values(j, k).imag());
    }
  return {{"grid", grid},
          {"normalized", rho.normalized},
          {"re", re},
          {"im", im},
          {"metadata", metadata}};
}

/// Inverse of matrix_json (grid weights and values only).
inline DensityMatrix matrix_from_json(const Json& j) {
  DensityMatrix rho;
  rho.omega = j.at("grid").at("omega_rad_per_fs").get<std::vector<double>>();
  rho.weights = j.at("grid").at("weights").get<std::vector<double>>();
  rho.normalized = j.at("normalized").get<bool>();
  const int n = rho.size();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != static_cast<std::size_t>(n * n) || im.size() != re.size())
    throw ContractViolation("matrix JSON has inconsistent sizes");
  rho.values.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) rho.values(a, b) = {re[a * n + b], im[a * n + b]};
  return rho;
}

inline Json run_metadata(const RunConfig& rc, const ResolvedAngle& angle,
                         const Diagnostics& d) {
  return {{"config_hash", config_hash(rc.resolved)},
          {"alpha_deg", rad_to_deg(angle.alpha)},
          {"alpha_solved", angle.solved},
          {"purity", d.purity},
          {"trace", d.normalized_trace},
          {"trace_before_normalize", d.trace_before_normalize},
          {"filter", rc.resolved.at("filter")}};
}

inline Json run_manifest(const RunConfig& rc, const ResolvedAngle& angle,
                         const Json& timings) {
  Json solver = {{"alpha_deg", rad_to_deg(angle.alpha)}, {"alpha_solved", angle.solved}};
  if (angle.solved) {
    solver["phase_matching_alpha_deg"] = rad_to_deg(angle.alpha - rc.alpha_offset);
    solver["residual_rad_per_um"] = angle.residual;
  }
  return {{"manifest_version", 1},
          {"tool_version", kToolVersion},
          {"config", rc.resolved},
          {"config_hash", config_hash(rc.resolved)},
          {"solver", solver},
          {"quadrature", rc.resolved.at("quadrature")},
          {"timings", timings}};
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("out", "failed writing " + path.string());
}

}  // namespace spdc
