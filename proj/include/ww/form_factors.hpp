#ifndef WW_FORM_FACTORS_HPP
#define WW_FORM_FACTORS_HPP

#include <string>

namespace ww {

enum class Species { Si, Ge };

// Symmetric local-pseudopotential form factors at |K|^2 = 3, 8, 11 in
// (2*pi/a)^2 units, in Rydberg; all other shells carry exactly zero.
struct FormFactorSet {
  double v3 = 0.0, v8 = 0.0, v11 = 0.0;  // Ry
  Species species = Species::Si;

  // per-shell value in eV; returns 0 outside the support
  double at_shell_ev(int norm_sq) const;
};

FormFactorSet si_form_factors();
FormFactorSet ge_form_factors();

struct FormFactorTable {
  FormFactorSet si = si_form_factors();
  FormFactorSet ge = ge_form_factors();
};

// Text config, key-value per species block:
//   species = Si
//   v3 = -0.21
//   v8 = 0.04
//   v11 = 0.08
//   species = Ge
//   ...
FormFactorTable load_form_factors(const std::string& path);
void save_form_factors(const FormFactorTable& table, const std::string& path);

}  // namespace ww

#endif
