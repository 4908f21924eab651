#ifndef WW_SWEEP_HPP
#define WW_SWEEP_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ww/device.hpp"
#include "ww/envelope.hpp"
#include "ww/epm.hpp"
#include "ww/perturbation.hpp"

namespace ww {

inline constexpr const char* code_version_tag = "ww-1.0.0";

struct EnsembleSpec {
  int n_samples = 300;
  std::uint64_t seed = 1;
  EnsembleMode mode = EnsembleMode::MixedCellPresence;
  // Draw an independent ensemble per sweep point (seed mixed from the base
  // seed and the point's q and n_ge).  The long-wavelength peak rides on
  // ensemble fluctuations, so its height is only meaningful as the top of
  // the resulting noisy bump; when false one ensemble per concentration is
  // shared by every q.
  bool resample_per_point = true;
};

enum class SweepMode { FullSolver, FirstOrder };
SweepMode parse_sweep_mode(const std::string& name);
const char* sweep_mode_name(SweepMode mode);
const char* ensemble_mode_name(EnsembleMode mode);
EnsembleMode parse_ensemble_mode(const std::string& name);

struct SweepSpec {
  std::vector<double> q_grid;    // 1/nm, strictly increasing
  std::vector<double> nge_grid;  // strictly increasing
  DeviceConfig device;
  EnsembleSpec ensemble;
  SweepMode mode = SweepMode::FullSolver;
  std::string out_path = "sweep.csv";
  int threads = 1;

  void validate() const;
};

struct SweepRow {
  double q = 0.0;
  double n_ge = 0.0;
  double delta_w = 0.0;
  double delta_total = 0.0;
  double e0 = 0.0, e1 = 0.0;
  std::string status = "ok";
};

// shortest round-trip decimal representation
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& data);

// ensemble seed for one sweep point; depends on the base seed and the point
// values only, so a cached row stays valid when the grid is extended
std::uint64_t point_seed(const EnsembleSpec& ensemble, double q, double n_ge);

// cache key binding the row to everything that affects its value
std::uint64_t point_cache_key(const SweepSpec& spec, double q, double n_ge);

// One row per (q, n_ge) in canonical order (q major, n_ge minor).  Rows are
// appended to "<out_path>.cache" as they complete, and previously cached
// rows are reused, so interrupted runs resume.  Per-point failures are
// recorded in the status column and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const BasisSet& basis,
                                const FormFactorTable& ff);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

// delta_w(q) curve for one concentration
std::vector<std::pair<double, double>> curve_for(const std::vector<SweepRow>& rows, double n_ge);

struct Peak {
  double q = 0.0;
  double height = 0.0;  // eV
};

// Local maxima of the median-3 smoothed curve that dominate every point
// within +-window/2 and clear floor_frac of the global maximum; the
// smoothing and the window absorb ensemble noise.
std::vector<Peak> detect_peaks(const std::vector<std::pair<double, double>>& curve, double window,
                               double floor_frac = 1e-3);

// height of the smoothed curve within +-window/2 of q_center
double peak_height_near(const std::vector<std::pair<double, double>>& curve, double q_center,
                        double window);

struct PeakFit {
  double q_peak = 0.0;
  std::vector<std::pair<double, double>> heights;  // (n_ge, height)
  double slope = 0.0;
  double slope_stderr = 0.0;
};

// least-squares slope of log(height) against log(n_ge); needs >= 3 strictly
// positive heights
PeakFit fit_scaling(double q_peak, const std::vector<std::pair<double, double>>& heights);

}  // namespace ww

#endif
