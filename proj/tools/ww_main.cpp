// ww: valley-splitting simulations for Si wells with oscillatory Ge
// concentration.  Subcommands: sweep, envelope-report, selection-rule,
// calibrate.  Exit codes: 0 success, 1 invalid config, 2 solver failure on
// all points, 3 selection-rule verification failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ww/selection_rule.hpp"
#include "ww/sweep.hpp"

using namespace ww;
using nlohmann::json;

namespace {

struct ReportOptions {
  std::vector<double> nge = {0.0, 0.1, 0.2};  // envelope-report concentrations
  std::vector<double> vca = {0.1, 0.3};       // selection-rule VCA points
  double peak_window = 4.0;
  double peak_floor = 1e-4;
  double fit_window = 1.0;
};

struct CliConfig {
  DeviceConfig device;
  SweepSpec sweep;
  ReportOptions report;
  std::string form_factor_path;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

// declarative config: [section] + key = value lines mirroring the config
// struct fields; every CLI flag overrides its key
void load_config_file(const std::string& path, CliConfig& cfg, double& q_min, double& q_max,
                      double& q_step) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto bad_key = [&] {
      return std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key " +
                                   section + "." + key);
    };

    if (section == "device") {
      auto& d = cfg.device;
      if (key == "v_b0") d.v_b0 = std::stod(value);
      else if (key == "w") d.w = std::stod(value);
      else if (key == "f_eff") d.f_eff = std::stod(value);
      else if (key == "epsilon") d.epsilon = std::stod(value);
      else if (key == "v0") d.v0 = std::stod(value);
      else if (key == "n_ge") d.n_ge = std::stod(value);
      else if (key == "q") d.q = std::stod(value);
      else if (key == "z_min") d.z_min = std::stod(value);
      else if (key == "z_max") d.z_max = std::stod(value);
      else if (key == "n_grid") d.n_grid = std::stoi(value);
      else if (key == "m_l") d.m_l = std::stod(value);
      else if (key == "window") d.window = parse_window(value);
      else if (key == "a") d.a = std::stod(value);
      else if (key == "k0") d.k0 = std::stod(value);
      else throw bad_key();
    } else if (section == "sweep") {
      if (key == "q_min") q_min = std::stod(value);
      else if (key == "q_max") q_max = std::stod(value);
      else if (key == "q_step") q_step = std::stod(value);
      else if (key == "nge") cfg.sweep.nge_grid = parse_list(value);
      else if (key == "mode") cfg.sweep.mode = parse_sweep_mode(value);
      else if (key == "out") cfg.sweep.out_path = value;
      else if (key == "threads") cfg.sweep.threads = std::stoi(value);
      else throw bad_key();
    } else if (section == "ensemble") {
      auto& e = cfg.sweep.ensemble;
      if (key == "n_samples") e.n_samples = std::stoi(value);
      else if (key == "seed") e.seed = std::stoull(value);
      else if (key == "mode") e.mode = parse_ensemble_mode(value);
      else if (key == "resample_per_point") e.resample_per_point = (value == "true" || value == "1");
      else throw bad_key();
    } else if (section == "report") {
      auto& r = cfg.report;
      if (key == "nge") r.nge = parse_list(value);
      else if (key == "vca") r.vca = parse_list(value);
      else if (key == "peak_window") r.peak_window = std::stod(value);
      else if (key == "peak_floor") r.peak_floor = std::stod(value);
      else if (key == "fit_window") r.fit_window = std::stod(value);
      else throw bad_key();
    } else if (section == "form_factors") {
      if (key == "path") cfg.form_factor_path = value;
      else throw bad_key();
    } else {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown section " + section);
    }
  }
}

json device_json(const DeviceConfig& d) {
  return json{{"v_b0", d.v_b0},     {"w", d.w},         {"f_eff", d.f_eff},
              {"epsilon", d.epsilon}, {"v0", d.v0},       {"n_ge", d.n_ge},
              {"q", d.q},           {"z_min", d.z_min}, {"z_max", d.z_max},
              {"n_grid", d.n_grid}, {"m_l", d.m_l},     {"window", window_name(d.window)},
              {"a", d.a},           {"k0", d.k0}};
}

json metadata_json(const SweepSpec& spec) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  json meta;
  meta["code_version"] = code_version_tag;
  meta["seed"] = spec.ensemble.seed;
  meta["n_samples"] = spec.ensemble.n_samples;
  meta["ensemble_mode"] = ensemble_mode_name(spec.ensemble.mode);
  meta["resample_per_point"] = spec.ensemble.resample_per_point;
  meta["sweep_mode"] = sweep_mode_name(spec.mode);
  meta["device"] = device_json(spec.device);
  meta["config_hash"] = point_cache_key(spec, spec.q_grid.front(), spec.nge_grid.front());
  meta["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  return meta;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

json orbit_report_json(const OrbitSumReport& report) {
  json j;
  j["crystal"] = report.crystal;
  j["gauge"] = report.gauge;
  json sums;
  for (const auto cls : all_orbit_classes) {
    const Complex s = report.class_sum(cls);
    sums[orbit_class_name(cls)] = {{"re", s.real()}, {"im", s.imag()}, {"abs", std::abs(s)}};
  }
  j["class_sums"] = sums;
  j["total_abs"] = std::abs(report.total);
  j["unsigned_sum"] = report.unsigned_sum;
  j["relative_total"] = report.relative_total();
  j["vanishes"] = report.vanishes();
  return j;
}

int run_sweep_command(const CliConfig& cfg, double q_min, double q_max, double q_step) {
  SweepSpec spec = cfg.sweep;
  spec.device = cfg.device;
  spec.q_grid.clear();
  for (double q = q_min; q <= q_max + 1e-12; q += q_step) spec.q_grid.push_back(q);
  spec.validate();

  const BasisSet basis = BasisSet::standard(spec.device.a);
  const FormFactorTable ff =
      cfg.form_factor_path.empty() ? FormFactorTable{} : load_form_factors(cfg.form_factor_path);

  const auto rows = run_sweep(spec, basis, ff);
  int ok = 0;
  for (const auto& r : rows)
    if (r.status == "ok") ++ok;
  std::cout << "sweep: " << ok << "/" << rows.size() << " points -> " << spec.out_path << "\n";

  json report;
  report["metadata"] = metadata_json(spec);
  report["table"] = spec.out_path;
  json peaks_json = json::array();
  for (const double x : spec.nge_grid) {
    const auto curve = curve_for(rows, x);
    if (curve.size() < 3) continue;
    json entry;
    entry["n_ge"] = x;
    json plist = json::array();
    for (const auto& p : detect_peaks(curve, cfg.report.peak_window, cfg.report.peak_floor))
      plist.push_back({{"q", p.q}, {"height", p.height}});
    entry["peaks"] = plist;
    peaks_json.push_back(entry);
  }
  report["peaks"] = peaks_json;

  // scaling fits against the peaks of the highest concentration
  if (spec.nge_grid.size() >= 3) {
    const auto top_curve = curve_for(rows, spec.nge_grid.back());
    json fits = json::array();
    if (top_curve.size() >= 3) {
      for (const auto& p : detect_peaks(top_curve, cfg.report.peak_window, cfg.report.peak_floor)) {
        std::vector<std::pair<double, double>> heights;
        bool usable = true;
        for (const double x : spec.nge_grid) {
          const auto curve = curve_for(rows, x);
          if (curve.size() < 3) {
            usable = false;
            break;
          }
          const double h = peak_height_near(curve, p.q, cfg.report.fit_window);
          if (h <= 0.0) usable = false;
          heights.emplace_back(x, h);
        }
        if (!usable) continue;
        const auto fit = fit_scaling(p.q, heights);
        json f;
        f["q_peak"] = fit.q_peak;
        f["slope"] = fit.slope;
        f["slope_stderr"] = fit.slope_stderr;
        json hs = json::array();
        for (const auto& [x, h] : fit.heights) hs.push_back({{"n_ge", x}, {"height", h}});
        f["heights"] = hs;
        fits.push_back(f);
      }
    }
    report["scaling_fits"] = fits;
  }
  write_json(spec.out_path + ".report.json", report);
  std::cout << "report: " << spec.out_path << ".report.json\n";

  if (ok == 0) return 2;
  return 0;
}

int run_envelope_report(const CliConfig& cfg) {
  cfg.device.validate();
  const BasisSet basis = BasisSet::standard(cfg.device.a);
  const FormFactorTable ff =
      cfg.form_factor_path.empty() ? FormFactorTable{} : load_form_factors(cfg.form_factor_path);

  const std::string out = cfg.sweep.out_path;
  std::vector<EnvelopeSolution> solutions;
  json entries = json::array();
  int solved = 0;
  for (const double x : cfg.report.nge) {
    DeviceConfig dev = cfg.device;
    dev.n_ge = x;
    json entry;
    entry["n_ge"] = x;
    try {
      const auto rho = x == 0.0
                           ? ordered_density_matrix(basis, ff)
                           : sample_density_matrix(basis, ff, x, cfg.sweep.ensemble.n_samples,
                                                   cfg.sweep.ensemble.seed, cfg.sweep.ensemble.mode);
      auto sol = envelope_density(basis, dev, rho);
      entry["e0"] = sol.e0;
      entry["e1"] = sol.e1;
      entry["delta"] = sol.delta;
      entry["density_peaks"] = count_density_peaks(sol.density);
      solutions.push_back(std::move(sol));
      ++solved;
    } catch (const std::exception& err) {
      entry["error"] = err.what();
      solutions.emplace_back();
    }
    entries.push_back(entry);
  }
  if (solved == 0) return 2;

  // density columns share the grid of the first successful solve
  const EnvelopeSolution* ref = nullptr;
  for (const auto& s : solutions)
    if (s.z.size() > 0) {
      ref = &s;
      break;
    }
  std::ofstream csv(out, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + out);
  csv << "z";
  for (const double x : cfg.report.nge) csv << ",density_nge_" << format_double(x);
  csv << "\n";
  for (int i = 0; i < ref->z.size(); ++i) {
    csv << format_double(ref->z[i]);
    for (const auto& s : solutions)
      csv << ',' << format_double(s.z.size() == ref->z.size() ? s.density[i] : 0.0);
    csv << "\n";
  }

  json report;
  report["q"] = cfg.device.q;
  report["profiles"] = entries;
  report["table"] = out;
  write_json(out + ".report.json", report);
  std::cout << "envelope report: " << out << "\n";
  return 0;
}

int run_selection_rule(const CliConfig& cfg) {
  const BasisSet basis = BasisSet::standard(cfg.device.a);
  const FormFactorTable ff =
      cfg.form_factor_path.empty() ? FormFactorTable{} : load_form_factors(cfg.form_factor_path);
  const Eigen::Vector3d k0{0.0, 0.0, cfg.device.k0};

  std::vector<CrystalSpec> ordered = {CrystalSpec::pure_si(), CrystalSpec::pure_ge()};
  for (const double x : cfg.report.vca) ordered.push_back(CrystalSpec::vca(x));

  json reports = json::array();
  bool all_vanish = true;
  for (const auto& spec : ordered) {
    const auto state = solve_conduction_state(basis, build_hamiltonian(basis, ff, spec, k0), k0);
    const auto report = orbit_sum_report(basis, state, spec.describe());
    all_vanish = all_vanish && report.vanishes();
    reports.push_back(orbit_report_json(report));
  }

  // one disorder realization for contrast; not part of the pass criterion
  const int n_pairs = static_cast<int>(disorder_difference_pairs(basis).size());
  const auto realization =
      draw_realization(n_pairs, 0.1, cfg.sweep.ensemble.seed, cfg.sweep.ensemble.mode);
  const auto alloy = CrystalSpec::alloy(0.1, realization, cfg.sweep.ensemble.mode);
  const auto state = solve_conduction_state(basis, build_hamiltonian(basis, ff, alloy, k0), k0);
  reports.push_back(orbit_report_json(orbit_sum_report(basis, state, alloy.describe())));

  json out;
  out["reports"] = reports;
  out["ordered_vanish"] = all_vanish;
  write_json(cfg.sweep.out_path, out);
  std::cout << "selection-rule report: " << cfg.sweep.out_path
            << (all_vanish ? " (ordered sums vanish)" : " (VIOLATION)") << "\n";
  return all_vanish ? 0 : 3;
}

int run_calibrate(const CliConfig& cfg) {
  const BasisSet basis = BasisSet::standard(cfg.device.a);
  const FormFactorTable ff =
      cfg.form_factor_path.empty() ? FormFactorTable{} : load_form_factors(cfg.form_factor_path);

  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.005 + i * (1.0 - 0.005) / 200.0);
  const auto scan = conduction_minimum_scan(basis, ff, CrystalSpec::pure_si(), grid);
  const auto gamma = band_energies(build_hamiltonian(basis, ff, CrystalSpec::pure_si(), {0, 0, 0}));

  std::ofstream csv(cfg.sweep.out_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + cfg.sweep.out_path);
  csv << "kz,conduction_energy\n";
  for (const auto& [kz, e] : scan.samples) csv << format_double(kz) << ',' << format_double(e) << "\n";

  json j;
  j["k_min"] = scan.k_min;
  j["e_min"] = scan.e_min;
  j["valence_top_gamma"] = gamma[3];
  j["indirect_gap"] = scan.e_min - gamma[3];
  j["table"] = cfg.sweep.out_path;
  write_json(cfg.sweep.out_path + ".report.json", j);
  std::cout << "calibrate: k_min = " << format_double(scan.k_min) << " (2pi/a), gap = "
            << format_double(scan.e_min - gamma[3]) << " eV\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"valley splitting in Si wells with oscillatory Ge concentration"};
  app.require_subcommand(1);

  std::string config_path, out_override, mode_override, ensemble_mode_override, ff_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int threads_override = 0;
  double q_min = 2.0, q_max = 22.0, q_step = 0.1;

  app.add_option("--config", config_path, "declarative config file (key = value sections)");
  app.add_option("--seed", seed_override, "ensemble seed override")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_override, "output path override");
  app.add_option("--threads", threads_override, "worker threads override");
  app.add_option("--mode", mode_override, "sweep mode: full_solver | first_order");
  app.add_option("--ensemble-mode", ensemble_mode_override, "mixed_cell | pair_signs");
  app.add_option("--form-factors", ff_override, "form-factor config file");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a (q, n_ge) sweep and detect peaks");
  sweep_cmd->add_option("--q-min", q_min, "sweep start, 1/nm");
  sweep_cmd->add_option("--q-max", q_max, "sweep end, 1/nm");
  sweep_cmd->add_option("--q-step", q_step, "sweep step, 1/nm");
  auto* envelope_cmd = app.add_subcommand("envelope-report", "ground-state density profiles");
  auto* selection_cmd = app.add_subcommand("selection-rule", "verify the orbit-sum selection rule");
  auto* calibrate_cmd = app.add_subcommand("calibrate", "conduction-minimum scan of pure Si");

  CLI11_PARSE(app, argc, argv);

  try {
    CliConfig cfg;
    cfg.sweep.out_path = "";
    if (!config_path.empty()) load_config_file(config_path, cfg, q_min, q_max, q_step);
    if (seed_given) cfg.sweep.ensemble.seed = seed_override;
    if (threads_override > 0) cfg.sweep.threads = threads_override;
    if (!mode_override.empty()) cfg.sweep.mode = parse_sweep_mode(mode_override);
    if (!ensemble_mode_override.empty())
      cfg.sweep.ensemble.mode = parse_ensemble_mode(ensemble_mode_override);
    if (!ff_override.empty()) cfg.form_factor_path = ff_override;
    if (!out_override.empty()) cfg.sweep.out_path = out_override;
    if (cfg.sweep.out_path.empty()) {
      if (sweep_cmd->parsed()) cfg.sweep.out_path = "sweep.csv";
      else if (envelope_cmd->parsed()) cfg.sweep.out_path = "envelope.csv";
      else if (selection_cmd->parsed()) cfg.sweep.out_path = "selection_rule.json";
      else cfg.sweep.out_path = "calibration.csv";
    }

    if (sweep_cmd->parsed()) return run_sweep_command(cfg, q_min, q_max, q_step);
    if (envelope_cmd->parsed()) return run_envelope_report(cfg);
    if (selection_cmd->parsed()) return run_selection_rule(cfg);
    if (calibrate_cmd->parsed()) return run_calibrate(cfg);
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid config: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
