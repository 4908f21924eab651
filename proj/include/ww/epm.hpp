#ifndef WW_EPM_HPP
#define WW_EPM_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ww/constants.hpp"
#include "ww/crystal_basis.hpp"
#include "ww/form_factors.hpp"

namespace ww {

// One draw of the alloy sign disorder.  signs[i] belongs to the i-th
// canonical difference pair {G,-G} (see disorder_difference_pairs); the same
// sign applies to G and -G, which keeps the Hamiltonian Hermitian.
// +1/-1 select the two Si/Ge arrangements of a mixed cell, 0 marks a pair
// whose sine term is absent in this realization (mixed-cell mode only).
struct DisorderRealization {
  std::vector<int> signs;
  std::uint64_t seed = 0;

  int count(int value) const;
};

enum class EnsembleMode {
  // Each pair carries a sine term with probability 2x(1-x) (the mixed-cell
  // fraction) at full strength; the number of active terms fluctuates like a
  // random walk.  Default, and the mode used by the sweep pipeline.
  MixedCellPresence,
  // Every pair always carries a sine term of fixed strength 2x(1-x) with a
  // balanced +-1 assignment.  Kept for sensitivity studies.
  FixedPairSigns,
};

// Canonical {G,-G} difference pairs whose sine structure factor and form
// factor are both nonzero (shells 3 and 11 for the standard support).
std::vector<ReciprocalVector> disorder_difference_pairs(const BasisSet& basis);

DisorderRealization draw_realization(int n_pairs, double x_ge, std::uint64_t seed,
                                     EnsembleMode mode);

// What crystal the Hamiltonian describes.  Both species sit on the Si
// lattice constant; no strain.
class CrystalSpec {
 public:
  enum class Kind { PureSi, PureGe, Vca, Alloy };

  static CrystalSpec pure_si() { return CrystalSpec(Kind::PureSi, 0.0); }
  static CrystalSpec pure_ge() { return CrystalSpec(Kind::PureGe, 1.0); }
  static CrystalSpec vca(double x_ge);
  static CrystalSpec alloy(double x_ge, DisorderRealization realization, EnsembleMode mode);

  Kind kind() const { return kind_; }
  double x_ge() const { return x_ge_; }
  const DisorderRealization& realization() const { return realization_; }
  EnsembleMode mode() const { return mode_; }
  std::string describe() const;

 private:
  CrystalSpec(Kind kind, double x) : kind_(kind), x_ge_(x) {}
  Kind kind_;
  double x_ge_;
  DisorderRealization realization_;
  EnsembleMode mode_ = EnsembleMode::MixedCellPresence;
};

// Local EPM Hamiltonian over the basis at wavevector k (units 2*pi/a), eV.
// Diagonal: (hbar^2/2 m_e) |k - K|^2.  Off-diagonal: U_{K-K'} with the
// cosine structure factor for the symmetric part and, for alloy
// realizations, the signed sine term of the extended VCA.
Eigen::MatrixXcd build_hamiltonian(const BasisSet& basis, const FormFactorTable& ff,
                                   const CrystalSpec& crystal, const Eigen::Vector3d& k);

// Conduction-band eigenpair: 5th eigenvalue (index 4) above the 4 valence
// bands, with the global phase rotated so the K=(0,0,0) coefficient is real
// and positive.
struct BlochState {
  Eigen::VectorXcd coeffs;
  double energy = 0.0;        // eV
  Eigen::Vector3d k;          // units 2*pi/a
  int band_index = 4;
};

inline constexpr int conduction_band_index = 4;

// Throws std::runtime_error when bands band_index and band_index+1 are
// closer than 1e-9 eV (gauge fixing would be ill-defined).
BlochState solve_conduction_state(const BasisSet& basis, const Eigen::MatrixXcd& h,
                                  const Eigen::Vector3d& k, int band_index = conduction_band_index);

Eigen::VectorXd band_energies(const Eigen::MatrixXcd& h);

struct MinimumScanResult {
  double k_min = 0.0;  // units 2*pi/a, parabolic refinement of the grid minimum
  double e_min = 0.0;  // eV
  std::vector<std::pair<double, double>> samples;  // (kz, conduction energy)
};
MinimumScanResult conduction_minimum_scan(const BasisSet& basis, const FormFactorTable& ff,
                                          const CrystalSpec& crystal,
                                          const std::vector<double>& kz_grid);

// c_-(K) = c_+^*(-K); index permutation plus conjugation, no second
// diagonalization, so the relative gauge of the two valleys is fixed.
BlochState opposite_valley_state(const BasisSet& basis, const BlochState& plus);

// rho_{K,K'} = <c_+^*(K) c_-(K')> over the disorder ensemble, with the
// in-plane deltas applied (entries with unequal K_x or K_y are exactly zero).
struct IntervalleyDensityMatrix {
  Eigen::MatrixXcd rho;
  int n_samples = 0;
  double x_ge = 0.0;
  std::uint64_t seed = 0;
  EnsembleMode mode = EnsembleMode::MixedCellPresence;
};

// Realization i is seeded seed + i.  Results are identical for any
// n_threads: realizations are stored and summed in canonical order.
IntervalleyDensityMatrix sample_density_matrix(const BasisSet& basis, const FormFactorTable& ff,
                                               double x_ge, int n_samples, std::uint64_t seed,
                                               EnsembleMode mode = EnsembleMode::MixedCellPresence,
                                               int n_threads = 1);

// Rank-one ordered limit (pure crystal or standard VCA), independent of any
// seed.
IntervalleyDensityMatrix ordered_density_matrix(const BasisSet& basis, const FormFactorTable& ff,
                                                double x_vca = 0.0);

}  // namespace ww

#endif
