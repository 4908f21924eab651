#include <doctest.h>

#include <cmath>

#include "ww/perturbation.hpp"

using namespace ww;

TEST_CASE("candidate wavevectors") {
  const auto list = candidate_wavevectors(3);
  REQUIRE(list.size() == 5);
  for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i].q > list[i - 1].q);

  const auto& q1 = list[0];
  CHECK(q1.k_multiple == 1);
  CHECK(q1.q == doctest::Approx(3.70).epsilon(2e-3));
  CHECK(q1.lambda_nm == doctest::Approx(2.0 * pi / q1.q));
  CHECK(q1.lambda_monolayers == doctest::Approx(q1.lambda_nm / (si_lattice_nm / 4.0)));

  const auto& mid = list[1];
  CHECK(mid.second_order_landmark);
  CHECK(mid.q == doctest::Approx(9.72).epsilon(2e-3));

  const auto& q2 = list[2];
  CHECK(q2.k_multiple == 0);
  CHECK(q2.q == doctest::Approx(19.44).epsilon(1e-3));
  CHECK(q2.lambda_nm == doctest::Approx(0.323).epsilon(2e-3));
  CHECK(q2.lambda_monolayers == doctest::Approx(4.0 / (2.0 * valley_k0)).epsilon(1e-9));

  CHECK(list[3].k_multiple == 2);
  CHECK_THROWS_AS(candidate_wavevectors(0), std::invalid_argument);
}

TEST_CASE("first-order splitting: zero concentration, dominance, linearity") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto rho = ordered_density_matrix(basis, ff);

  DeviceConfig cfg;
  cfg.q = cfg.two_k0_nm();
  cfg.n_ge = 0.0;
  const auto ground = uncoupled_ground_state(cfg);

  SUBCASE("V_osc = 0 gives exactly zero") {
    const auto fo = first_order_vs(basis, rho, cfg, ground.z, ground.density);
    CHECK(fo.delta == 0.0);
  }

  SUBCASE("at q = 2k0 the K = K' channel dominates and the sum is finite") {
    DeviceConfig on = cfg;
    on.n_ge = 0.1;
    const auto fo = first_order_vs(basis, rho, on, ground.z, ground.density);
    CHECK(fo.delta > 1e-3);
    Complex diagonal{}, off{};
    for (const auto& term : fo.terms)
      (term.i == term.j ? diagonal : off) += term.contribution;
    CHECK(std::abs(diagonal) > 3.0 * std::abs(off));
    CHECK(std::abs(fo.phasor - (diagonal + off)) < 1e-15);
    CHECK(fo.delta == doctest::Approx(2.0 * std::abs(fo.phasor)));
  }

  SUBCASE("exactly linear in n_ge for a fixed density and rho") {
    DeviceConfig a = cfg, b = cfg;
    a.n_ge = 0.05;
    b.n_ge = 0.10;
    const auto fa = first_order_vs(basis, rho, a, ground.z, ground.density);
    const auto fb = first_order_vs(basis, rho, b, ground.z, ground.density);
    CHECK(std::abs(fb.delta - 2.0 * fa.delta) <= 1e-12 * fb.delta);
  }
}

TEST_CASE("first-order oracle agrees with the envelope solver in the perturbative limit") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto rho = ordered_density_matrix(basis, ff);

  DeviceConfig cfg;
  cfg.n_ge = 0.005;
  cfg.q = 19.4;
  const auto solver = valley_splitting_ww(basis, cfg, rho);
  const auto ground = uncoupled_ground_state(cfg);
  const auto fo = first_order_vs(basis, rho, cfg, ground.z, ground.density);
  CHECK(std::abs(solver.delta_w - fo.delta) / solver.delta_w < 0.10);
}

TEST_CASE("barrier contribution") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;

  SUBCASE("zero barrier and zero field give exactly zero") {
    DeviceConfig cfg;
    cfg.v_b0 = 0.0;
    cfg.f_eff = 0.0;
    cfg.n_ge = 0.0;
    // V_str vanishes identically, no confinement; integrate against any
    // normalized density on the default grid
    const auto z = uniform_grid(cfg);
    Eigen::VectorXd density = Eigen::VectorXd::Zero(z.size());
    density[z.size() / 2] = 1.0 / (z[1] - z[0]);
    const auto rho = ordered_density_matrix(basis, ff);
    CHECK(barrier_vs_first_order(basis, rho, cfg, z, density).delta == 0.0);
  }

  SUBCASE("independent of q") {
    const auto rho = sample_density_matrix(basis, ff, 0.1, 50, 17);
    DeviceConfig cfg;
    cfg.n_ge = 0.0;
    const auto ground = uncoupled_ground_state(cfg);
    const auto da = barrier_vs_first_order(basis, rho, cfg, ground.z, ground.density);
    DeviceConfig other = cfg;
    other.q = 11.0;
    const auto db = barrier_vs_first_order(basis, rho, other, ground.z, ground.density);
    CHECK(da.delta == db.delta);
  }

  SUBCASE("sharp-interface disorder device lands in the ueV-to-meV decade") {
    // the smooth 1 nm default barrier suppresses the 2k0 Fourier weight far
    // below the scale of measured devices; a monolayer-wide interface with
    // alloy disorder in rho is the regime the quoted decade refers to
    const auto rho = sample_density_matrix(basis, ff, 0.1, 100, 29);
    DeviceConfig cfg;
    cfg.w = si_lattice_nm / 4.0;
    cfg.n_ge = 0.0;
    const auto ground = uncoupled_ground_state(cfg);
    const auto db = barrier_vs_first_order(basis, rho, cfg, ground.z, ground.density);
    CHECK(db.delta > 1e-6);
    CHECK(db.delta < 1e-3);
  }
}

TEST_CASE("phasor additivity of the first-order contributions") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto rho = sample_density_matrix(basis, ff, 0.1, 30, 41);
  DeviceConfig cfg;
  cfg.n_ge = 0.1;
  cfg.q = 19.44;
  const auto ground = uncoupled_ground_state(cfg);
  const auto fw = first_order_vs(basis, rho, cfg, ground.z, ground.density);
  const auto fb = barrier_vs_first_order(basis, rho, cfg, ground.z, ground.density);

  // independent total: direct double loop against V_osc + V_str
  Complex total{};
  const int nz = static_cast<int>(ground.z.size());
  const double dz = ground.z[1] - ground.z[0];
  const double unit = 2.0 * pi / basis.lattice_constant();
  for (int i = 0; i < basis.size(); ++i)
    for (int j = 0; j < basis.size(); ++j) {
      const Complex r = rho.rho(i, j);
      if (r == Complex{}) continue;
      const double freq = (basis.at(j).l - basis.at(i).l) * unit - cfg.two_k0_nm();
      Complex integral{};
      for (int m = 0; m < nz; ++m) {
        const double v =
            oscillatory_potential(cfg, ground.z[m]) + structure_potential(cfg, ground.z[m]);
        const Complex term = ground.density[m] * v * std::polar(1.0, freq * ground.z[m]);
        integral += (m == 0 || m == nz - 1) ? 0.5 * term : term;
      }
      total += r * integral * dz;
    }
  const double delta_total = 2.0 * std::abs(total);
  CHECK(std::abs(delta_total - 2.0 * std::abs(fw.phasor + fb.phasor)) <=
        1e-12 * std::max(1e-30, delta_total));
}
