// spdc: density matrix of a fiber-coupled SPDC idler from a JSON config.
//
// Exit codes: 0 ok, 1 usage, 2 configuration or I/O, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdc/config_io.hpp"
#include "spdc/heatmap.hpp"
#include "spdc/oracle.hpp"
#include "spdc/paraxial.hpp"
#include "spdc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spdc;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::string out = ".";
  unsigned threads = 0;
  bool heatmap = false;
};

Json load_document(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  try {
    Json doc = Json::parse(in);
    if (doc.is_object() && doc.contains("manifest_version")) return doc.at("config");
    return doc;
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

fs::path base_dir(const Globals& g) {
  return g.config.empty() ? fs::current_path() : fs::path(g.config).parent_path();
}

fs::path output_dir(const Globals& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("out", "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_compute(const Globals& g) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig rc = parse_config(load_document(g.config), base_dir(g));
  const ResolvedAngle angle = resolve_angle(rc);
  const double setup = seconds_since(t0);
  ComputeOptions options;
  options.threads = g.threads;
  const RunResult result = run(rc.source, rc.quad, options);

  const fs::path dir = output_dir(g);
  const Json meta = run_metadata(rc, angle, result.diagnostics);
  Json doc = matrix_json(result.state, meta);
  doc["diagnostics"] = diagnostics_json(result.diagnostics);
  write_file(dir / "rho.csv", matrix_csv(result.state));
  write_file(dir / "rho.json", doc.dump(2) + "\n");
  const Json timings = {{"setup_s", setup},
                        {"density_matrix_s", result.compute_seconds},
                        {"total_s", seconds_since(t0)}};
  write_file(dir / "manifest.json", run_manifest(rc, angle, timings).dump(2) + "\n");
  if (g.heatmap) write_png((dir / "rho.png").string(), render_heatmap(result.state));

  Json summary = meta;
  summary["diagnostics"] = diagnostics_json(result.diagnostics);
  summary["out"] = dir.string();
  print(summary);
  return kOk;
}

int run_angle(const Globals& g, std::optional<double> theta_deg) {
  Json doc = load_document(g.config);
  if (theta_deg) doc["crystal"]["cut_angle_deg"] = *theta_deg;
  RunConfig rc = parse_config(doc, base_dir(g));
  const auto t0 = std::chrono::steady_clock::now();
  const auto sol = solve_phase_matching_angle(rc.source.crystal, rc.source.omega0(),
                                              rc.source.convention);
  print({{"alpha_deg", rad_to_deg(sol.alpha)},
         {"residual_rad_per_um", sol.residual},
         {"cut_angle_deg", rad_to_deg(rc.source.crystal.cut_angle)},
         {"degenerate_nm", wavelength_nm_from_omega(rc.source.omega0())},
         {"convention", rc.resolved["collection"]["convention"]},
         {"runtime_s", seconds_since(t0)}});
  return kOk;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

int run_expansion(const Globals& g, std::optional<double> signal_nm,
                  std::optional<double> idler_nm) {
  RunConfig rc = parse_config(load_document(g.config), base_dir(g));
  const ResolvedAngle angle = resolve_angle(rc);
  const double w0 = rc.source.omega0();
  const double ws = signal_nm ? omega_from_wavelength_nm(*signal_nm) : w0;
  const double wi = idler_nm ? omega_from_wavelength_nm(*idler_nm) : w0;
  const GeometryConfig geometry = rc.source.geometry();
  const ParaxialExpansion e = expand_delta_kz(ws, wi, rc.source.crystal, geometry);
  const double fw = rc.source.beams.fiber_waist, pw = rc.source.beams.pump_waist;
  const ExpansionResidual res =
      expansion_residual(e, rc.source.crystal, std::sqrt(1.0 / (fw * fw) + 1.0 / (pw * pw)));
  print({{"signal_nm", wavelength_nm_from_omega(ws)},
         {"idler_nm", wavelength_nm_from_omega(wi)},
         {"alpha_deg", rad_to_deg(angle.alpha)},
         {"ks0", {e.ks0.kx, e.ks0.ky}},
         {"ki0", {e.ki0.kx, e.ki0.ky}},
         {"dkz0", e.dkz0},
         {"D1", {e.D1[0], e.D1[1], e.D1[2], e.D1[3]}},
         {"D2", matrix_to_json(e.D2)},
         {"residual",
          {{"max_abs_rad_per_um", res.max_abs_residual},
           {"exact_variation_rad_per_um", res.exact_variation},
           {"relative", res.relative()}}}});
  return kOk;
}

int run_oracle(const Globals& g, const std::string& mode, int points, int nodes) {
  Json doc = load_document(g.config);
  const int limit = mode == "quadratic" ? 5 : 8;
  if (points < 2 || points > limit)
    throw UsageError("--points must lie in [2, " + std::to_string(limit) + "] for mode " + mode);
  doc["grid"]["points"] = points;
  RunConfig rc = parse_config(doc, base_dir(g));
  resolve_angle(rc);
  rc.source.filter.reset();

  const auto t0 = std::chrono::steady_clock::now();
  ComputeOptions copt;
  copt.threads = g.threads;
  const DensityMatrix pipeline = compute_density_matrix(rc.source, rc.quad, copt);
  const double pipeline_s = seconds_since(t0);
  OracleOptions oopt;
  oopt.transverse_nodes = nodes;
  oopt.threads = g.threads;
  const auto t1 = std::chrono::steady_clock::now();
  const DensityMatrix reference = mode == "quadratic"
                                      ? density_matrix_quadratic_direct(rc.source, rc.quad, oopt)
                                      : density_matrix_direct(rc.source, rc.quad, oopt);
  OracleReport report = compare(pipeline, reference);
  report.transverse_nodes = nodes;
  report.runtime_s = seconds_since(t1);

  const Json j = {{"mode", mode},
                  {"rel_frobenius_error", report.rel_frobenius_error},
                  {"max_abs_entry_error", report.max_abs_entry_error},
                  {"nodes",
                   {{"transverse_per_dim", nodes},
                    {"nz", rc.quad.nz},
                    {"nzp", rc.quad.nzp},
                    {"nws", rc.quad.nws},
                    {"grid_points", points}}},
                  {"runtime_s", {{"oracle", report.runtime_s}, {"pipeline", pipeline_s}}},
                  {"config_hash", config_hash(rc.resolved)}};
  if (!g.out.empty() && g.out != ".") write_file(output_dir(g) / "oracle_report.json", j.dump(2) + "\n");
  print(j);
  return kOk;
}

std::string sweep_pointer(const std::string& name) {
  if (name == "sigma" || name == "fwhm_nm") return "/filter/fwhm_nm";
  if (name == "alpha" || name == "alpha_deg") return "/collection/alpha_deg";
  std::string ptr;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, '.')) ptr += "/" + part;
  return ptr;
}

int run_sweep(const Globals& g, const std::vector<std::string>& specs) {
  if (specs.size() != 1) throw UsageError("sweep takes exactly one --sweep param=v1,v2,...");
  const std::string& spec = specs.front();
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw UsageError("--sweep expects param=v1,v2,...");
  const std::string name = spec.substr(0, eq);
  if (name.find_first_of(",;=") != std::string::npos)
    throw UsageError("only one parameter can be swept at a time");
  std::vector<std::string> values;
  {
    std::stringstream ss(spec.substr(eq + 1));
    std::string v;
    while (std::getline(ss, v, ',')) {
      if (v.find('=') != std::string::npos)
        throw UsageError("only one parameter can be swept at a time");
      values.push_back(detail::trim(v));
    }
  }
  const Json::json_pointer ptr(sweep_pointer(name));
  const Json base = load_document(g.config);

  std::string csv = name + ",trace_before_normalize,purity,fwhm_nm,centroid_nm,alpha_deg\n";
  ComputeOptions options;
  options.threads = g.threads;
  for (const std::string& v : values) {
    Json doc = base;
    try {
      doc[ptr] = v == "auto" ? Json("auto") : Json(std::stod(v));
    } catch (const std::invalid_argument&) {
      throw ConfigError(name, "sweep value '" + v + "' is not a number");
    }
    RunConfig rc = parse_config(doc, base_dir(g));
    const ResolvedAngle angle = resolve_angle(rc);
    const RunResult r = run(rc.source, rc.quad, options);
    const Diagnostics& d = r.diagnostics;
    csv += v + "," + format_double(d.trace_before_normalize) + "," + format_double(d.purity) +
           "," + (d.fwhm_nm ? format_double(*d.fwhm_nm) : std::string()) + "," +
           format_double(d.centroid_nm) + "," + format_double(rad_to_deg(angle.alpha)) + "\n";
  }
  write_file(output_dir(g) / "sweep.csv", csv);
  std::cout << csv;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral density matrix of a fiber-coupled SPDC photon"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config or manifest");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_flag("--heatmap", g.heatmap, "also write rho.png");

  auto* compute = app.add_subcommand("compute", "density matrix, manifest and exports");
  compute->fallthrough();

  std::optional<double> theta;
  auto* angle = app.add_subcommand("angle", "solve the phase-matching observation angle");
  angle->add_option("--cut-angle-deg", theta, "override crystal.cut_angle_deg");
  angle->fallthrough();

  std::optional<double> signal_nm, idler_nm;
  auto* expansion = app.add_subcommand("expansion", "dump dkz0, D1, D2 at a frequency pair");
  expansion->add_option("--signal-nm", signal_nm, "signal wavelength (default degenerate)");
  expansion->add_option("--idler-nm", idler_nm, "idler wavelength (default degenerate)");
  expansion->fallthrough();

  std::string mode = "quadratic";
  int points = 5, nodes = 24;
  auto* oracle = app.add_subcommand("oracle", "compare the pipeline with a direct integration");
  oracle->add_option("--mode", mode, "quadratic | exact")
      ->check(CLI::IsMember({"quadratic", "exact"}));
  oracle->add_option("--points", points, "grid points per axis (<= 5 quadratic, <= 8 exact)");
  oracle->add_option("--nodes", nodes, "Gauss-Hermite nodes per transverse dimension")
      ->check(CLI::Range(4, 200));
  oracle->fallthrough();

  std::vector<std::string> sweeps;
  auto* sweep = app.add_subcommand("sweep", "scalar diagnostics over one parameter");
  sweep->add_option("--sweep", sweeps, "param=v1,v2,... (e.g. filter.fwhm_nm=40,20,10)")
      ->required();
  sweep->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compute) return run_compute(g);
    if (*angle) return run_angle(g, theta);
    if (*expansion) return run_expansion(g, signal_nm, idler_nm);
    if (*oracle) return run_oracle(g, mode, points, nodes);
    if (*sweep) return run_sweep(g, sweeps);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
