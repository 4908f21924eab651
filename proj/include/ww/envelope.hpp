#ifndef WW_ENVELOPE_HPP
#define WW_ENVELOPE_HPP

#include <map>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ww/device.hpp"
#include "ww/epm.hpp"

namespace ww {

// Intervalley phase sum C(z) = sum_{K,K'} rho_{K,K'} exp[i(K'_z-K_z-2k0) z].
// The in-plane deltas are already applied in rho; the surviving pairs have
// K'_z-K_z equal to a multiple of 4*pi/a, so C(z) is a short sum of complex
// amplitudes over those channels.  The device potential is not folded in:
// the coupling is assembled later as V_c(z) = C(z) V(z).
struct CouplingKernel {
  Eigen::VectorXd z;                       // nm
  Eigen::VectorXcd c_of_z;
  std::map<int, Complex> channel_amplitudes;  // key: K'_z-K_z in units 2*pi/a
  // provenance
  double x_ge = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

CouplingKernel coupling_kernel(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                               const Eigen::VectorXd& z_grid, double k0 = valley_k0);

// Which part of the device potential enters the off-diagonal coupling block;
// the diagonal always carries the full V(z).
enum class CouplingPotential { Total, OscillatoryOnly, None };

// Two-valley envelope operator on the interior points of the grid, Dirichlet
// ends, valley components interleaved so the matrix stays banded.
struct EnvelopeOperator {
  Eigen::SparseMatrix<Complex> h;  // 2(n-2) x 2(n-2)
  Eigen::VectorXd z;               // full grid incl. endpoints
  Eigen::VectorXd v_diag;          // V(z) on interior points
  Eigen::VectorXcd v_couple;       // V_c(z) on interior points
  double m_l = 0.92;
};

EnvelopeOperator assemble_envelope_hamiltonian(const DeviceConfig& cfg, const CouplingKernel& kernel,
                                               CouplingPotential coupling = CouplingPotential::Total);

struct EnvelopeSolution {
  Eigen::VectorXd z;         // nm, full grid
  Eigen::VectorXcd f_plus;   // ground state F+
  Eigen::VectorXcd f_minus;  // ground state F-
  double e0 = 0.0, e1 = 0.0;  // eV, two lowest eigenvalues
  double delta = 0.0;         // eV, valley splitting e1-e0
  Eigen::VectorXd density;    // |F+|^2+|F-|^2, unit trapezoid norm
};

// Two lowest eigenpairs by shift-inverted block iteration; residuals are
// driven below 1e-10 * ||H||_inf.  Throws when the ground density fails to
// vanish at the domain ends (domain too small).
EnvelopeSolution solve_valley_doublet(const EnvelopeOperator& op);

struct ValleySplitting {
  double delta_total = 0.0;  // coupling built from the full V(z)
  double delta_w = 0.0;      // coupling restricted to V_osc (WW contribution)
  double e0 = 0.0, e1 = 0.0;  // from the full-coupling solve
};

ValleySplitting valley_splitting_ww(const BasisSet& basis, const DeviceConfig& cfg,
                                    const IntervalleyDensityMatrix& rho, double q_floor = 0.0);

// Ground density of the full-coupling solve at the given config.
EnvelopeSolution envelope_density(const BasisSet& basis, const DeviceConfig& cfg,
                                  const IntervalleyDensityMatrix& rho);

// Local maxima above frac * max(density).
int count_density_peaks(const Eigen::VectorXd& density, double frac = 0.05);

}  // namespace ww

#endif
