#include "ww/selection_rule.hpp"

#include <cmath>
#include <stdexcept>

namespace ww {

namespace {

constexpr double sqrt_half = 0.70710678118654752440;

Complex eighth_phase(int s) {
  // exp(-i pi s / 4) from an exact table
  static const Complex table[8] = {
      {1.0, 0.0},        {sqrt_half, -sqrt_half}, {0.0, -1.0},      {-sqrt_half, -sqrt_half},
      {-1.0, 0.0},       {-sqrt_half, sqrt_half}, {0.0, 1.0},       {sqrt_half, sqrt_half}};
  return table[((s % 8) + 8) % 8];
}

}  // namespace

Complex atom_center_phase(const ReciprocalVector& K) { return eighth_phase(K.h + K.k + K.l); }

BlochState to_atom_center_gauge(const BasisSet& basis, const BlochState& state) {
  BlochState out = state;
  for (int i = 0; i < basis.size(); ++i) out.coeffs[i] = atom_center_phase(basis.at(i)) * state.coeffs[i];
  return out;
}

Complex orbit_sum(const BasisSet& basis, const Eigen::VectorXcd& c_atom_gauge,
                  OrbitClassLabel cls, const ReciprocalVector& G) {
  if (c_atom_gauge.size() != basis.size())
    throw std::invalid_argument("orbit_sum: coefficient/basis size mismatch");
  Complex sum{};
  for (int i = 0; i < basis.size(); ++i) {
    const auto& K = basis.at(i);
    if (classify_orbit(K) != cls) continue;
    const int j = basis.index_of(K.h + G.h, K.k + G.k, K.l + G.l);
    if (j < 0) continue;  // out-of-basis partner treated as zero
    sum += std::conj(c_atom_gauge[j]) * c_atom_gauge[i];
  }
  return sum;
}

double short_wavelength_sum(const BlochState& state) { return state.coeffs.squaredNorm(); }

std::vector<VanishingCoefficient> verify_vanishing_coefficients(const BasisSet& basis,
                                                                const BlochState& state,
                                                                double tol) {
  std::vector<VanishingCoefficient> out;
  for (int i = 0; i < basis.size(); ++i) {
    const auto& K = basis.at(i);
    if (K.h != 0 || K.k != 0) continue;
    if (K.l % 2 != 0 || (K.l / 2) % 2 == 0) continue;  // K_z an odd multiple of 4*pi/a
    out.push_back({K, std::abs(state.coeffs[i])});
  }
  for (const auto& v : out)
    if (v.magnitude > tol)
      throw std::runtime_error("verify_vanishing_coefficients: |c| above tolerance at a forbidden K");
  return out;
}

double OrbitSumReport::relative_total() const {
  return unsigned_sum > 0.0 ? std::abs(total) / unsigned_sum : std::abs(total);
}

bool OrbitSumReport::vanishes(double rel_tol) const { return relative_total() <= rel_tol; }

OrbitSumReport orbit_sum_report(const BasisSet& basis, const BlochState& bond_center_state,
                                const std::string& crystal_description) {
  const BlochState atom = to_atom_center_gauge(basis, bond_center_state);
  const ReciprocalVector G(0, 0, 2, basis.lattice_constant());

  OrbitSumReport report;
  report.crystal = crystal_description;
  for (const auto cls : all_orbit_classes)
    report.class_sums[static_cast<int>(cls)] = orbit_sum(basis, atom.coeffs, cls, G);

  // direct double-loop total in the same canonical order as the class sums
  Complex total{};
  double unsigned_sum = 0.0;
  for (int i = 0; i < basis.size(); ++i) {
    const auto& K = basis.at(i);
    const int j = basis.index_of(K.h + G.h, K.k + G.k, K.l + G.l);
    if (j < 0) continue;
    const Complex term = std::conj(atom.coeffs[j]) * atom.coeffs[i];
    total += term;
    unsigned_sum += std::abs(term);
  }
  report.total = total;
  report.unsigned_sum = unsigned_sum;
  return report;
}

}  // namespace ww
