#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ww/sweep.hpp"

using namespace ww;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepSpec small_spec(const std::string& out) {
  SweepSpec spec;
  spec.q_grid = {18.0, 19.44};
  spec.nge_grid = {0.0, 0.05};
  spec.device.z_min = -20.0;
  spec.device.z_max = 4.0;
  spec.ensemble.n_samples = 3;
  spec.ensemble.seed = 11;
  spec.mode = SweepMode::FirstOrder;  // cheap: one uncoupled solve per point
  spec.out_path = out;
  return spec;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (const double x : {0.1, 1.0 / 3.0, 3.141592653589793, 1e-300, -2.5e17, 0.0, 19.44}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("abc") != fnv1a64("acb"));
}

TEST_CASE("scaling fit") {
  SUBCASE("exact linear heights give slope 1") {
    const std::vector<std::pair<double, double>> h{{0.05, 0.05}, {0.1, 0.1}, {0.15, 0.15}, {0.2, 0.2}};
    const auto fit = fit_scaling(3.7, h);
    CHECK(std::abs(fit.slope - 1.0) < 1e-10);
    CHECK(fit.slope_stderr < 1e-10);
  }
  SUBCASE("synthetic power law is recovered") {
    std::vector<std::pair<double, double>> h;
    for (const double x : {0.05, 0.1, 0.15, 0.2}) h.emplace_back(x, 2.3 * std::pow(x, 1.5));
    CHECK(fit_scaling(3.7, h).slope == doctest::Approx(1.5).epsilon(1e-10));
  }
  SUBCASE("rejects non-positive heights and short inputs") {
    CHECK_THROWS_AS(fit_scaling(1.0, {{0.1, 1.0}, {0.2, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_scaling(1.0, {{0.1, 1.0}, {0.2, 0.0}, {0.3, 2.0}}), std::invalid_argument);
  }
}

TEST_CASE("peak detection") {
  SUBCASE("monotone curve has no peaks") {
    std::vector<std::pair<double, double>> curve;
    for (int i = 0; i < 50; ++i) curve.emplace_back(2.0 + 0.1 * i, 1e-3 * i);
    CHECK(detect_peaks(curve, 2.0).empty());
  }
  SUBCASE("single cosine bump is located within one grid step") {
    std::vector<std::pair<double, double>> curve;
    const double center = 9.7;
    for (int i = 0; i <= 200; ++i) {
      const double q = 2.0 + 0.1 * i;
      const double arg = (q - center) / 3.0;
      curve.emplace_back(q, std::abs(arg) < 1.0 ? 1e-3 * (1.0 + std::cos(pi * arg)) : 0.0);
    }
    const auto peaks = detect_peaks(curve, 2.0);
    REQUIRE(peaks.size() == 1);
    CHECK(std::abs(peaks[0].q - center) <= 0.1 + 1e-12);
  }
  SUBCASE("window suppression keeps the taller of two close maxima") {
    std::vector<std::pair<double, double>> curve;
    for (int i = 0; i <= 100; ++i) {
      const double q = 0.1 * i;
      double v = std::exp(-0.5 * std::pow((q - 5.0) / 0.3, 2));
      v += 0.4 * std::exp(-0.5 * std::pow((q - 6.0) / 0.2, 2));
      curve.emplace_back(q, v);
    }
    CHECK(detect_peaks(curve, 4.0).size() == 1);
    CHECK(detect_peaks(curve, 1.0).size() == 2);
  }
  SUBCASE("floor removes numerical dust") {
    std::vector<std::pair<double, double>> curve;
    for (int i = 0; i <= 100; ++i) {
      const double q = 0.1 * i;
      double v = std::exp(-0.5 * std::pow((q - 8.0) / 0.3, 2));
      if (i == 20) v += 1e-6;
      curve.emplace_back(q, v);
    }
    CHECK(detect_peaks(curve, 2.0, 1e-3).size() == 1);
  }
  SUBCASE("peak height lookup near a center") {
    const std::vector<std::pair<double, double>> curve{
        {1.0, 0.1}, {2.0, 0.4}, {2.5, 0.5}, {3.0, 0.45}, {4.0, 0.2}};
    // median-3 smoothing caps the lone 0.5 spike at its taller neighborhood
    CHECK(peak_height_near(curve, 2.5, 1.0) == doctest::Approx(0.45));
    CHECK_THROWS_AS(peak_height_near(curve, 10.0, 0.5), std::invalid_argument);
  }
}

TEST_CASE("spec validation") {
  SweepSpec spec = small_spec("x.csv");
  CHECK_NOTHROW(spec.validate());
  spec.q_grid = {2.0, 2.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.q_grid = {2.0, 3.0};
  spec.nge_grid.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("run_sweep: determinism, cache reuse, resume, threading") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const fs::path dir = fs::temp_directory_path() / "ww_sweep_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string out = (dir / "table.csv").string();

  SweepSpec spec = small_spec(out);
  const auto rows = run_sweep(spec, basis, ff);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.status == "ok");
  // canonical order: q major, n_ge minor
  CHECK(rows[0].q == 18.0);
  CHECK(rows[0].n_ge == 0.0);
  CHECK(rows[1].n_ge == 0.05);
  CHECK(rows[2].q == 19.44);
  // n_ge = 0 rows have no WW splitting
  CHECK(rows[0].delta_w == 0.0);
  const std::string first = slurp(out);
  CHECK(!first.empty());

  SUBCASE("same spec reruns to an identical file without recomputation") {
    const auto cache_before = slurp(out + ".cache");
    const auto again = run_sweep(spec, basis, ff);
    CHECK(slurp(out) == first);
    CHECK(slurp(out + ".cache") == cache_before);  // nothing appended
  }

  SUBCASE("interrupted cache resumes to the same bytes") {
    // keep only the first two cached rows, as if the run had been killed
    std::ifstream in(out + ".cache");
    std::string line, kept;
    for (int i = 0; i < 2 && std::getline(in, line); ++i) kept += line + "\n";
    in.close();
    std::ofstream(out + ".cache", std::ios::trunc) << kept;
    fs::remove(out);
    run_sweep(spec, basis, ff);
    CHECK(slurp(out) == first);
  }

  SUBCASE("thread count does not change the result bytes") {
    SweepSpec threaded = spec;
    threaded.threads = 4;
    threaded.out_path = (dir / "threaded.csv").string();
    run_sweep(threaded, basis, ff);
    CHECK(slurp(threaded.out_path) == first);
  }

  SUBCASE("csv round trip") {
    const auto parsed = read_sweep_csv(out);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(parsed[i].q == rows[i].q);
      CHECK(parsed[i].delta_w == rows[i].delta_w);
      CHECK(parsed[i].status == rows[i].status);
    }
    const auto curve = curve_for(parsed, 0.05);
    CHECK(curve.size() == 2);
    CHECK(curve[0].first == 18.0);
  }

  fs::remove_all(dir);
}

TEST_CASE("point seeds decouple sweep points but stay reproducible") {
  EnsembleSpec ens;
  ens.seed = 7;
  CHECK(point_seed(ens, 3.7, 0.1) == point_seed(ens, 3.7, 0.1));
  CHECK(point_seed(ens, 3.7, 0.1) != point_seed(ens, 3.8, 0.1));
  CHECK(point_seed(ens, 3.7, 0.1) != point_seed(ens, 3.7, 0.15));
  ens.resample_per_point = false;
  CHECK(point_seed(ens, 3.7, 0.1) == 7);
  CHECK(point_seed(ens, 11.0, 0.2) == 7);
}
