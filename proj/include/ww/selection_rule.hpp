#ifndef WW_SELECTION_RULE_HPP
#define WW_SELECTION_RULE_HPP

#include <array>
#include <string>
#include <vector>

#include "ww/crystal_basis.hpp"
#include "ww/epm.hpp"

namespace ww {

// Origin translation from the bond center to the atom at -r0/2:
// c'(K) = exp(-i K . r0/2) c(K) = exp(-i pi (h+k+l)/4) c(K).
// In this gauge the Delta_1 transformation rules
//   c'(K) = c'(W K)                      (pure point operations)
//   c'(K) = i^(h'+k'+l') c'(W K)         (glide operations)
// hold for ordered-crystal conduction states.
BlochState to_atom_center_gauge(const BasisSet& basis, const BlochState& state);
Complex atom_center_phase(const ReciprocalVector& K);

// Partial sum S_O = sum_{K in O} c^*(K+G) c(K) over all basis vectors of one
// orbit class, with c(K+G) = 0 outside the basis.  c must be in the
// atom-center gauge; G is (0,0,4*pi/a) for the long-wavelength rule.
Complex orbit_sum(const BasisSet& basis, const Eigen::VectorXcd& c_atom_gauge,
                  OrbitClassLabel cls, const ReciprocalVector& G);

// sum_K |c_+(K)|^2 — the q = 2 k0 coupling weight, equal to 1 by
// normalization; there is no selection rule at the short wavelength.
double short_wavelength_sum(const BlochState& state);

struct VanishingCoefficient {
  ReciprocalVector K;
  double magnitude;
};

// All K = (0,0,K_z) with K_z an odd multiple of 4*pi/a present in the basis;
// throws when any |c(K)| exceeds tol (ordered crystals only).
std::vector<VanishingCoefficient> verify_vanishing_coefficients(const BasisSet& basis,
                                                                const BlochState& state,
                                                                double tol = 1e-10);

struct OrbitSumReport {
  std::array<Complex, 7> class_sums{};  // A1..A4, B1..B3 order
  Complex total{};
  double unsigned_sum = 0.0;  // sum |c(K+G) c(K)|, the scale for "vanishes"
  std::string gauge = "atom_center";
  std::string crystal;

  Complex class_sum(OrbitClassLabel c) const { return class_sums[static_cast<int>(c)]; }
  double relative_total() const;
  bool vanishes(double rel_tol = 1e-10) const;
};

OrbitSumReport orbit_sum_report(const BasisSet& basis, const BlochState& bond_center_state,
                                const std::string& crystal_description);

}  // namespace ww

#endif
