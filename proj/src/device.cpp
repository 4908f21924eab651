#include "ww/device.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ww {

OscWindow parse_window(const std::string& name) {
  if (name == "none") return OscWindow::None;
  if (name == "hard") return OscWindow::Hard;
  if (name == "smooth") return OscWindow::Smooth;
  throw std::invalid_argument("unknown oscillation window: " + name);
}

const char* window_name(OscWindow w) {
  switch (w) {
    case OscWindow::None: return "none";
    case OscWindow::Hard: return "hard";
    default: return "smooth";
  }
}

int DeviceConfig::resolved_grid_size(double q_floor) const {
  const double fastest = std::max({q, q_floor, two_k0_nm()});
  const double dz = std::min(2.0 * pi / (20.0 * fastest), 0.02);
  return static_cast<int>(std::ceil((z_max - z_min) / dz)) + 1;
}

void DeviceConfig::validate() const {
  if (w <= 0.0) throw std::invalid_argument("DeviceConfig: barrier width must be positive");
  if (n_ge < 0.0 || n_ge > 0.3)
    throw std::invalid_argument("DeviceConfig: n_ge outside [0, 0.3]");
  if (q <= 0.0) throw std::invalid_argument("DeviceConfig: q must be positive");
  if (!(z_min < 0.0 && 0.0 < z_max))
    throw std::invalid_argument("DeviceConfig: domain must straddle the interface z=0");
  if (m_l <= 0.0) throw std::invalid_argument("DeviceConfig: mass must be positive");
  if (a <= 0.0) throw std::invalid_argument("DeviceConfig: lattice constant must be positive");
  if (n_grid != 0 && n_grid < resolved_grid_size())
    throw std::invalid_argument("DeviceConfig: n_grid does not resolve the fastest oscillation");
}

double structure_potential(const DeviceConfig& cfg, double z) {
  return cfg.v_b0 * (1.0 + std::tanh(z / cfg.w)) / 2.0 - cfg.f_eff * z;
}

double oscillation_window(const DeviceConfig& cfg, double z) {
  switch (cfg.window) {
    case OscWindow::None: return 1.0;
    case OscWindow::Hard: return z < 0.0 ? 1.0 : 0.0;
    default: return (1.0 - std::tanh(z / cfg.w)) / 2.0;
  }
}

double oscillatory_potential(const DeviceConfig& cfg, double z) {
  return cfg.v0 * cfg.n_ge * (1.0 + std::cos(cfg.q * z)) * oscillation_window(cfg, z);
}

Eigen::VectorXd uniform_grid(const DeviceConfig& cfg, double q_floor) {
  const int n = cfg.n_grid > 0 ? cfg.n_grid : cfg.resolved_grid_size(q_floor);
  return Eigen::VectorXd::LinSpaced(n, cfg.z_min, cfg.z_max);
}

PotentialProfile sample_profile(const DeviceConfig& cfg) {
  cfg.validate();
  PotentialProfile p;
  p.z = uniform_grid(cfg);
  const int n = static_cast<int>(p.z.size());
  p.v_str.resize(n);
  p.v_osc.resize(n);
  for (int i = 0; i < n; ++i) {
    p.v_str[i] = structure_potential(cfg, p.z[i]);
    p.v_osc[i] = oscillatory_potential(cfg, p.z[i]);
  }
  p.v_total = p.v_str + p.v_osc;
  return p;
}

}  // namespace ww
