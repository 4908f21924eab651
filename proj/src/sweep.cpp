#include "ww/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace ww {

SweepMode parse_sweep_mode(const std::string& name) {
  if (name == "full_solver") return SweepMode::FullSolver;
  if (name == "first_order") return SweepMode::FirstOrder;
  throw std::invalid_argument("unknown sweep mode: " + name);
}

const char* sweep_mode_name(SweepMode mode) {
  return mode == SweepMode::FullSolver ? "full_solver" : "first_order";
}

const char* ensemble_mode_name(EnsembleMode mode) {
  return mode == EnsembleMode::MixedCellPresence ? "mixed_cell" : "pair_signs";
}

EnsembleMode parse_ensemble_mode(const std::string& name) {
  if (name == "mixed_cell") return EnsembleMode::MixedCellPresence;
  if (name == "pair_signs") return EnsembleMode::FixedPairSigns;
  throw std::invalid_argument("unknown ensemble mode: " + name);
}

void SweepSpec::validate() const {
  device.validate();
  if (q_grid.empty() || nge_grid.empty())
    throw std::invalid_argument("SweepSpec: grids must be non-empty");
  if (!std::is_sorted(q_grid.begin(), q_grid.end(), std::less_equal<>()))
    throw std::invalid_argument("SweepSpec: q_grid must be strictly increasing");
  if (!std::is_sorted(nge_grid.begin(), nge_grid.end(), std::less_equal<>()))
    throw std::invalid_argument("SweepSpec: nge_grid must be strictly increasing");
  if (ensemble.n_samples < 1) throw std::invalid_argument("SweepSpec: n_samples must be >= 1");
  if (threads < 1) throw std::invalid_argument("SweepSpec: threads must be >= 1");
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t point_seed(const EnsembleSpec& ensemble, double q, double n_ge) {
  if (!ensemble.resample_per_point) return ensemble.seed;
  return fnv1a64("seed:" + std::to_string(ensemble.seed) + "|q:" + format_double(q) +
                 "|nge:" + format_double(n_ge));
}

namespace {

std::string device_signature(const DeviceConfig& d) {
  std::ostringstream s;
  s << format_double(d.v_b0) << '|' << format_double(d.w) << '|' << format_double(d.f_eff) << '|'
    << format_double(d.epsilon) << '|' << format_double(d.v0) << '|' << format_double(d.z_min) << '|'
    << format_double(d.z_max) << '|' << d.n_grid << '|' << format_double(d.m_l) << '|'
    << window_name(d.window) << '|' << format_double(d.a) << '|' << format_double(d.k0);
  return s.str();
}

}  // namespace

std::uint64_t point_cache_key(const SweepSpec& spec, double q, double n_ge) {
  std::ostringstream s;
  s << code_version_tag << '|' << device_signature(spec.device) << '|' << format_double(q) << '|'
    << format_double(n_ge) << '|' << spec.ensemble.n_samples << '|' << spec.ensemble.seed << '|'
    << ensemble_mode_name(spec.ensemble.mode) << '|' << spec.ensemble.resample_per_point << '|'
    << sweep_mode_name(spec.mode) << '|' << format_double(spec.q_grid.back());
  return fnv1a64(s.str());
}

namespace {

std::string row_to_csv(const SweepRow& r) {
  std::ostringstream s;
  s << format_double(r.q) << ',' << format_double(r.n_ge) << ',' << format_double(r.delta_w) << ','
    << format_double(r.delta_total) << ',' << format_double(r.e0) << ',' << format_double(r.e1)
    << ',' << r.status;
  return s.str();
}

SweepRow row_from_csv(const std::string& line) {
  SweepRow r;
  std::istringstream s(line);
  std::string field;
  double* slots[6] = {&r.q, &r.n_ge, &r.delta_w, &r.delta_total, &r.e0, &r.e1};
  for (double* slot : slots) {
    if (!std::getline(s, field, ',')) throw std::runtime_error("malformed sweep row: " + line);
    *slot = std::stod(field);
  }
  if (!std::getline(s, r.status)) r.status = "ok";
  return r;
}

SweepRow compute_row(const SweepSpec& spec, const BasisSet& basis, const FormFactorTable& ff,
                     double q, double n_ge) {
  SweepRow row;
  row.q = q;
  row.n_ge = n_ge;
  try {
    DeviceConfig cfg = spec.device;
    cfg.q = q;
    cfg.n_ge = n_ge;
    const double q_floor = spec.q_grid.back();  // one grid for the whole sweep
    const std::uint64_t seed = point_seed(spec.ensemble, q, n_ge);
    const IntervalleyDensityMatrix rho =
        sample_density_matrix(basis, ff, n_ge, spec.ensemble.n_samples, seed, spec.ensemble.mode);

    if (spec.mode == SweepMode::FullSolver) {
      const ValleySplitting vs = valley_splitting_ww(basis, cfg, rho, q_floor);
      row.delta_w = vs.delta_w;
      row.delta_total = vs.delta_total;
      row.e0 = vs.e0;
      row.e1 = vs.e1;
    } else {
      const EnvelopeSolution ground = uncoupled_ground_state(cfg, q_floor);
      const FirstOrderResult dw = first_order_vs(basis, rho, cfg, ground.z, ground.density);
      const FirstOrderResult db = barrier_vs_first_order(basis, rho, cfg, ground.z, ground.density);
      row.delta_w = dw.delta;
      row.delta_total = 2.0 * std::abs(dw.phasor + db.phasor);
      row.e0 = ground.e0;
      row.e1 = ground.e0 + row.delta_total;
    }
  } catch (const std::exception& err) {
    row.status = std::string("error: ") + err.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const BasisSet& basis,
                                const FormFactorTable& ff) {
  spec.validate();
  const std::string cache_path = spec.out_path + ".cache";

  // (key -> row) from any previous run of the same spec
  std::unordered_map<std::uint64_t, SweepRow> cached;
  {
    std::ifstream in(cache_path);
    std::string line;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      try {
        cached.emplace(std::stoull(line.substr(0, comma)), row_from_csv(line.substr(comma + 1)));
      } catch (const std::exception&) {
        // ignore torn tail lines from an interrupted run
      }
    }
  }

  struct Point {
    double q, n_ge;
    std::uint64_t key;
  };
  std::vector<Point> points;
  for (const double q : spec.q_grid)
    for (const double n_ge : spec.nge_grid) points.push_back({q, n_ge, point_cache_key(spec, q, n_ge)});

  std::vector<SweepRow> rows(points.size());
  std::vector<char> pending(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto it = cached.find(points[i].key);
    if (it != cached.end()) rows[i] = it->second;
    else pending[i] = 1;
  }

  std::ofstream cache_out(cache_path, std::ios::app);
  std::mutex cache_mutex;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      if (!pending[i]) continue;
      const SweepRow row = compute_row(spec, basis, ff, points[i].q, points[i].n_ge);
      rows[i] = row;
      std::lock_guard<std::mutex> lock(cache_mutex);
      cache_out << points[i].key << ',' << row_to_csv(row) << '\n';
      cache_out.flush();
    }
  };

  const int n_threads = std::min<int>(spec.threads, static_cast<int>(points.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  write_sweep_csv(spec.out_path, rows);
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
  if (!out) throw std::runtime_error("cannot write sweep table: " + path);
  out << "q,n_ge,delta_w,delta_total,e0,e1,status\n";
  for (const auto& r : rows) out << row_to_csv(r) << '\n';
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sweep table: " + path);
  std::vector<SweepRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(row_from_csv(line));
  return rows;
}

std::vector<std::pair<double, double>> curve_for(const std::vector<SweepRow>& rows, double n_ge) {
  std::vector<std::pair<double, double>> curve;
  for (const auto& r : rows)
    if (r.n_ge == n_ge && r.status == "ok") curve.emplace_back(r.q, r.delta_w);
  std::sort(curve.begin(), curve.end());
  return curve;
}

namespace {

std::vector<double> median3(const std::vector<std::pair<double, double>>& curve) {
  const std::size_t n = curve.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n) {
      s[i] = curve[i].second;
      continue;
    }
    double a = curve[i - 1].second, b = curve[i].second, c = curve[i + 1].second;
    s[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  return s;
}

}  // namespace

std::vector<Peak> detect_peaks(const std::vector<std::pair<double, double>>& curve, double window,
                               double floor_frac) {
  if (curve.size() < 3) return {};
  const std::vector<double> s = median3(curve);
  const double floor = floor_frac * *std::max_element(s.begin(), s.end());

  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    if (!(s[i] >= s[i - 1] && s[i] > s[i + 1])) continue;
    if (s[i] < floor) continue;
    bool dominant = true;
    for (std::size_t j = 0; j < curve.size() && dominant; ++j)
      if (j != i && std::abs(curve[j].first - curve[i].first) <= 0.5 * window && s[j] > s[i])
        dominant = false;
    if (dominant) peaks.push_back({curve[i].first, s[i]});
  }
  return peaks;
}

double peak_height_near(const std::vector<std::pair<double, double>>& curve, double q_center,
                        double window) {
  const std::vector<double> s = median3(curve);
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (std::abs(curve[i].first - q_center) <= 0.5 * window) {
      best = any ? std::max(best, s[i]) : s[i];
      any = true;
    }
  if (!any) throw std::invalid_argument("peak_height_near: window contains no samples");
  return best;
}

PeakFit fit_scaling(double q_peak, const std::vector<std::pair<double, double>>& heights) {
  if (heights.size() < 3) throw std::invalid_argument("fit_scaling: need at least 3 heights");
  for (const auto& [x, h] : heights)
    if (h <= 0.0 || x <= 0.0) throw std::invalid_argument("fit_scaling: heights and n_ge must be positive");

  const std::size_t n = heights.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, h] : heights) {
    const double lx = std::log(x), ly = std::log(h);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  PeakFit fit;
  fit.q_peak = q_peak;
  fit.heights = heights;
  fit.slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [x, h] : heights) {
    const double r = std::log(h) - (fit.slope * std::log(x) + intercept);
    ss += r * r;
  }
  fit.slope_stderr = n > 2 ? std::sqrt(ss / (n - 2) / (sxx - sx * sx / n)) : 0.0;
  return fit;
}

}  // namespace ww
