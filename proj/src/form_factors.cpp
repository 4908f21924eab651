#include "ww/form_factors.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ww/constants.hpp"

namespace ww {

double FormFactorSet::at_shell_ev(int norm_sq) const {
  switch (norm_sq) {
    case 3: return v3 * rydberg_ev;
    case 8: return v8 * rydberg_ev;
    case 11: return v11 * rydberg_ev;
    default: return 0.0;
  }
}

FormFactorSet si_form_factors() { return {-0.21, 0.04, 0.08, Species::Si}; }
FormFactorSet ge_form_factors() { return {-0.23, 0.01, 0.06, Species::Ge}; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

FormFactorTable load_form_factors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open form-factor file: " + path);
  FormFactorTable table;
  FormFactorSet* current = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "species") {
      if (value == "Si" || value == "si") current = &table.si;
      else if (value == "Ge" || value == "ge") current = &table.ge;
      else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown species " + value);
      continue;
    }
    if (!current)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": key before any species block");
    double* slot = key == "v3" ? &current->v3 : key == "v8" ? &current->v8
                   : key == "v11" ? &current->v11 : nullptr;
    if (!slot) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    *slot = std::stod(value);
  }
  return table;
}

void save_form_factors(const FormFactorTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write form-factor file: " + path);
  out << "# local pseudopotential form factors, Ry\n";
  for (const FormFactorSet* ff : {&table.si, &table.ge}) {
    out << "species = " << (ff->species == Species::Si ? "Si" : "Ge") << "\n";
    out << "v3 = " << ff->v3 << "\nv8 = " << ff->v8 << "\nv11 = " << ff->v11 << "\n";
  }
}

}  // namespace ww
