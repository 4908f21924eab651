#ifndef WW_PERTURBATION_HPP
#define WW_PERTURBATION_HPP

#include <vector>

#include "ww/device.hpp"
#include "ww/envelope.hpp"
#include "ww/epm.hpp"

namespace ww {

// Wavevectors where the first-order intervalley integral peaks:
// q = |m (4 pi / a) - 2 k0|, m = 0, 1, ...  The m = 0 entry is the
// short-wavelength point 2 k0 and m = 1 the long-wavelength one.  The
// second-order landmark at half the short value is tagged separately.
struct CandidateWavevector {
  double q = 0.0;                  // 1/nm
  int k_multiple = 0;              // m
  double lambda_nm = 0.0;          // 2 pi / q
  double lambda_monolayers = 0.0;  // lambda / (a/4)
  bool second_order_landmark = false;
};

std::vector<CandidateWavevector> candidate_wavevectors(int max_multiple,
                                                       double a = si_lattice_nm,
                                                       double k0 = valley_k0);

struct FirstOrderTerm {
  int i = 0, j = 0;  // basis indices of (K, K')
  Complex contribution;
};

// First-order estimate delta = 2 |sum_{K,K'} rho_{K,K'} I(K,K')| with
// I = integral of |psi(z)|^2 V_sel(z) exp[i(K'_z-K_z-2k0) z] dz, psi taken
// from the uncoupled ground state (the envelope-weighted regularization).
struct FirstOrderResult {
  double delta = 0.0;  // eV
  double q = 0.0;      // 1/nm
  Complex phasor;      // sum of terms; delta = 2 |phasor|
  std::vector<FirstOrderTerm> terms;
};

// density must be normalized on z_grid (trapezoid)
FirstOrderResult first_order_vs(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                                const DeviceConfig& cfg, const Eigen::VectorXd& z_grid,
                                const Eigen::VectorXd& density);

// same integral with V_str in place of V_osc: the barrier contribution
FirstOrderResult barrier_vs_first_order(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                                        const DeviceConfig& cfg, const Eigen::VectorXd& z_grid,
                                        const Eigen::VectorXd& density);

// uncoupled (kernel = 0) ground state used to weight the integrals
EnvelopeSolution uncoupled_ground_state(const DeviceConfig& cfg, double q_floor = 0.0);

}  // namespace ww

#endif
