#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "ww/epm.hpp"
#include "ww/selection_rule.hpp"

using namespace ww;

namespace {

const Eigen::Vector3d k0_vec{0.0, 0.0, valley_k0};

// test-only oracle: cyclic complex Jacobi diagonalization, independent of
// the library's eigensolver path
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXcd a) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-18) continue;
        // unitary 2x2 rotation annihilating a(p,q)
        const Complex apq = a(p, q);
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), aqq - app);
        const Complex phase = apq / std::abs(apq);
        const double c = std::cos(theta), s = std::sin(theta);
        Eigen::Vector2cd col_p = {Complex(c, 0.0), -s * std::conj(phase)};
        Eigen::Vector2cd col_q = {s * phase, Complex(c, 0.0)};
        Eigen::MatrixXcd j = Eigen::MatrixXcd::Identity(n, n);
        j(p, p) = col_p[0];
        j(q, p) = col_p[1];
        j(p, q) = col_q[0];
        j(q, q) = col_q[1];
        a = j.adjoint() * a * j;
      }
  }
  std::vector<double> evals(n);
  for (int i = 0; i < n; ++i) evals[i] = a(i, i).real();
  std::sort(evals.begin(), evals.end());
  return evals;
}

double hermiticity_defect(const Eigen::MatrixXcd& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("kinetic diagonal at the valley wavevector") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto h = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec);
  const double expected = hbar2_over_2me * std::pow(valley_k0 * 2.0 * pi / si_lattice_nm, 2);
  CHECK(h(0, 0).real() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(3.5995).epsilon(1e-3));
}

TEST_CASE("structure-factor extinction at |G|^2 = 4") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto h = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec);
  const int i = basis.index_of(2, 0, 0);
  const int j = basis.index_of(0, 0, 0);
  REQUIRE(i >= 0);
  CHECK(h(i, j) == Complex{0.0, 0.0});
  CHECK(h(j, i) == Complex{0.0, 0.0});
}

TEST_CASE("VCA at x=0.5 averages the species Hamiltonians") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto h_si = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec);
  const auto h_ge = build_hamiltonian(basis, ff, CrystalSpec::pure_ge(), k0_vec);
  const auto h_mix = build_hamiltonian(basis, ff, CrystalSpec::vca(0.5), k0_vec);
  CHECK((h_mix - 0.5 * (h_si + h_ge)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(CrystalSpec::vca(1.5), std::invalid_argument);
}

TEST_CASE("Hermiticity of every built Hamiltonian") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const int n_pairs = static_cast<int>(disorder_difference_pairs(basis).size());
  CHECK(hermiticity_defect(build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec)) <= 1e-14);
  CHECK(hermiticity_defect(build_hamiltonian(basis, ff, CrystalSpec::pure_ge(), k0_vec)) <= 1e-14);
  CHECK(hermiticity_defect(build_hamiltonian(basis, ff, CrystalSpec::vca(0.3), k0_vec)) <= 1e-14);
  for (const auto mode : {EnsembleMode::MixedCellPresence, EnsembleMode::FixedPairSigns}) {
    const auto real = draw_realization(n_pairs, 0.2, 7, mode);
    const auto h = build_hamiltonian(basis, ff, CrystalSpec::alloy(0.2, real, mode), k0_vec);
    CHECK(hermiticity_defect(h) <= 1e-14);
  }
}

TEST_CASE("conduction state of ordered Si at k0") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto h = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec);
  const auto state = solve_conduction_state(basis, h, k0_vec);

  CHECK(state.band_index == 4);
  CHECK(std::abs(state.coeffs.squaredNorm() - 1.0) < 1e-12);
  // bond-center origin: gauge-fixed coefficients are real
  double max_imag = 0.0;
  for (int i = 0; i < basis.size(); ++i) max_imag = std::max(max_imag, std::abs(state.coeffs[i].imag()));
  CHECK(max_imag < 1e-10);
  // anchor coefficient real and positive
  CHECK(state.coeffs[basis.index_of(0, 0, 0)].real() > 0.0);
  // forbidden coefficients at (0,0,+-4pi/a)
  CHECK(std::abs(state.coeffs[basis.index_of(0, 0, 2)]) < 1e-10);
  CHECK(std::abs(state.coeffs[basis.index_of(0, 0, -2)]) < 1e-10);
  // eigenresidual; the Frobenius norm bounds the operator norm
  CHECK((h * state.coeffs - state.energy * state.coeffs).norm() <= 1e-10 * h.norm());
}

TEST_CASE("degenerate band pair raises an error") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  // at Gamma the valence-band top is triply degenerate; bands 1 and 2 are
  // an exactly degenerate pair
  const auto h = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(solve_conduction_state(basis, h, {0.0, 0.0, 0.0}, 1), std::runtime_error);
}

TEST_CASE("eigenvalues match an independent Jacobi diagonalization (3-shell basis)") {
  const BasisSet basis(enumerate_basis(4));  // shells 0,3,4: 15 vectors
  REQUIRE(basis.size() == 15);
  const FormFactorTable ff;
  const auto h = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec);
  const auto reference = jacobi_eigenvalues(h);
  const auto evals = band_energies(h);
  for (int i = 0; i < basis.size(); ++i)
    CHECK(std::abs(evals[i] - reference[i]) < 1e-10);
}

TEST_CASE("conduction minimum scan calibrates k0 and the indirect gap") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.005 + i * (1.0 - 0.005) / 200.0);
  const auto scan = conduction_minimum_scan(basis, ff, CrystalSpec::pure_si(), grid);
  CHECK(scan.k_min == doctest::Approx(0.84).epsilon(0.025));

  // indirect gap against the valence top at Gamma
  const auto gamma = band_energies(build_hamiltonian(basis, ff, CrystalSpec::pure_si(), {0, 0, 0}));
  const double gap = scan.e_min - gamma[3];
  CHECK(gap > 0.8);
  CHECK(gap < 1.4);

  SUBCASE("degenerate single-point scan returns the point") {
    const auto single = conduction_minimum_scan(basis, ff, CrystalSpec::pure_si(), {valley_k0});
    CHECK(single.k_min == valley_k0);
    CHECK(single.samples.size() == 1);
  }
}

TEST_CASE("opposite valley state") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;
  const auto h = build_hamiltonian(basis, ff, CrystalSpec::pure_si(), k0_vec);
  const auto plus = solve_conduction_state(basis, h, k0_vec);
  const auto minus = opposite_valley_state(basis, plus);

  CHECK(minus.k[2] == -plus.k[2]);
  CHECK(std::abs(minus.coeffs.squaredNorm() - 1.0) < 1e-12);
  // real ordered coefficients: c_-(K) = c_+(-K)
  for (int i = 0; i < basis.size(); ++i)
    CHECK(std::abs(minus.coeffs[i] - plus.coeffs[basis.negated_index(i)]) < 1e-9);
  // involution
  const auto twice = opposite_valley_state(basis, minus);
  CHECK((twice.coeffs - plus.coeffs).norm() < 1e-14);
}

TEST_CASE("disorder difference pairs of the standard basis") {
  const BasisSet basis = BasisSet::standard();
  const auto pairs = disorder_difference_pairs(basis);
  CHECK(pairs.size() == 16);
  int shell3 = 0, shell11 = 0;
  for (const auto& g : pairs) {
    if (g.norm_sq() == 3) ++shell3;
    if (g.norm_sq() == 11) ++shell11;
  }
  CHECK(shell3 == 4);
  CHECK(shell11 == 12);
}

TEST_CASE("realization draws are balanced and deterministic") {
  for (const auto mode : {EnsembleMode::FixedPairSigns, EnsembleMode::MixedCellPresence}) {
    const auto a = draw_realization(16, 0.15, 42, mode);
    const auto b = draw_realization(16, 0.15, 42, mode);
    CHECK(a.signs == b.signs);
    const int plus = a.count(1), minus = a.count(-1);
    CHECK(std::abs(plus - minus) <= (plus + minus) % 2);
    if (mode == EnsembleMode::FixedPairSigns) CHECK(plus + minus == 16);
  }
  CHECK_THROWS_AS(draw_realization(16, -0.1, 1, EnsembleMode::MixedCellPresence),
                  std::invalid_argument);
}

TEST_CASE("extended-VCA ensemble mean converges to the standard VCA matrix") {
  const BasisSet basis(enumerate_basis(4));  // 15 vectors keeps this cheap
  const FormFactorTable ff;
  const double x = 0.3;
  const int n_pairs = static_cast<int>(disorder_difference_pairs(basis).size());
  const auto h_vca = build_hamiltonian(basis, ff, CrystalSpec::vca(x), k0_vec);

  for (const auto mode : {EnsembleMode::FixedPairSigns, EnsembleMode::MixedCellPresence}) {
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto real = draw_realization(n_pairs, x, 1000 + i, mode);
      mean += build_hamiltonian(basis, ff, CrystalSpec::alloy(x, real, mode), k0_vec);
    }
    mean /= static_cast<double>(n);
    double off_scale = 0.0;
    for (int i = 0; i < basis.size(); ++i)
      for (int j = 0; j < basis.size(); ++j)
        if (i != j) off_scale = std::max(off_scale, std::abs(h_vca(i, j)));
    CHECK((mean - h_vca).cwiseAbs().maxCoeff() < 1e-2 * off_scale);
  }
}

TEST_CASE("density matrix: ordered limit, sparsity, determinism") {
  const BasisSet basis = BasisSet::standard();
  const FormFactorTable ff;

  SUBCASE("x = 0 reproduces the rank-one ordered matrix for any seed") {
    const auto rho_a = sample_density_matrix(basis, ff, 0.0, 10, 1);
    const auto rho_b = sample_density_matrix(basis, ff, 0.0, 10, 999);
    const auto ordered = ordered_density_matrix(basis, ff);
    CHECK((rho_a.rho - ordered.rho).cwiseAbs().maxCoeff() == 0.0);
    CHECK((rho_a.rho - rho_b.rho).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("in-plane delta sparsity is exact") {
    const auto rho = sample_density_matrix(basis, ff, 0.1, 10, 3);
    for (int i = 0; i < basis.size(); ++i)
      for (int j = 0; j < basis.size(); ++j)
        if (basis.at(i).h != basis.at(j).h || basis.at(i).k != basis.at(j).k)
          CHECK(rho.rho(i, j) == Complex{0.0, 0.0});
  }

  SUBCASE("same seed twice is bitwise identical") {
    const auto a = sample_density_matrix(basis, ff, 0.1, 20, 5);
    const auto b = sample_density_matrix(basis, ff, 0.1, 20, 5);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("threaded sampling matches the serial reduction bitwise") {
    const auto serial = sample_density_matrix(basis, ff, 0.12, 24, 11, EnsembleMode::MixedCellPresence, 1);
    const auto parallel = sample_density_matrix(basis, ff, 0.12, 24, 11, EnsembleMode::MixedCellPresence, 4);
    CHECK((serial.rho - parallel.rho).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("matches a direct small-ensemble average computed independently") {
    const int n = 4;
    const double x = 0.1;
    const std::uint64_t seed = 77;
    const int n_pairs = static_cast<int>(disorder_difference_pairs(basis).size());
    Eigen::MatrixXcd direct = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
    for (int s = 0; s < n; ++s) {
      const auto real = draw_realization(n_pairs, x, seed + s, EnsembleMode::MixedCellPresence);
      const auto h = build_hamiltonian(basis, ff,
                                       CrystalSpec::alloy(x, real, EnsembleMode::MixedCellPresence),
                                       k0_vec);
      const auto plus = solve_conduction_state(basis, h, k0_vec);
      const auto minus = opposite_valley_state(basis, plus);
      for (int i = 0; i < basis.size(); ++i)
        for (int j = 0; j < basis.size(); ++j) {
          if (basis.at(i).h != basis.at(j).h || basis.at(i).k != basis.at(j).k) continue;
          direct(i, j) += std::conj(plus.coeffs[i]) * minus.coeffs[j] / static_cast<double>(n);
        }
    }
    const auto rho = sample_density_matrix(basis, ff, x, n, seed);
    CHECK((rho.rho - direct).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("disorder populates the selection-rule channel") {
    const auto rho = sample_density_matrix(basis, ff, 0.1, 300, 2024);
    Complex channel{};
    for (int i = 0; i < basis.size(); ++i) {
      const auto& K = basis.at(i);
      const int j = basis.index_of(K.h, K.k, K.l + 2);
      if (j >= 0) channel += rho.rho(i, j);
    }
    CHECK(std::abs(channel) > 1e-7);

    const auto ordered = ordered_density_matrix(basis, ff);
    Complex ordered_channel{};
    for (int i = 0; i < basis.size(); ++i) {
      const auto& K = basis.at(i);
      const int j = basis.index_of(K.h, K.k, K.l + 2);
      if (j >= 0) ordered_channel += ordered.rho(i, j);
    }
    CHECK(std::abs(ordered_channel) < 1e-12);
  }
}

TEST_CASE("form factor config file round trip") {
  namespace fs = std::filesystem;
  const FormFactorTable table;
  const auto path = (fs::temp_directory_path() / "ww_ff_test.cfg").string();
  save_form_factors(table, path);
  const auto loaded = load_form_factors(path);
  CHECK(loaded.si.v3 == table.si.v3);
  CHECK(loaded.si.v8 == table.si.v8);
  CHECK(loaded.si.v11 == table.si.v11);
  CHECK(loaded.ge.v3 == table.ge.v3);
  CHECK(loaded.ge.v11 == table.ge.v11);
  fs::remove(path);
  CHECK_THROWS_AS(load_form_factors("/nonexistent/ff.cfg"), std::runtime_error);
}
