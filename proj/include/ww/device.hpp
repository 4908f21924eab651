#ifndef WW_DEVICE_HPP
#define WW_DEVICE_HPP

#include <string>

#include <Eigen/Core>

#include "ww/constants.hpp"

namespace ww {

// How the oscillatory Ge potential is confined to the well half-space z<0.
enum class OscWindow { None, Hard, Smooth };

OscWindow parse_window(const std::string& name);
const char* window_name(OscWindow w);

struct DeviceConfig {
  double v_b0 = 1.0;           // eV, barrier height
  double w = 1.0;              // nm, barrier width
  double f_eff = 0.1 / 11.0;   // V/nm, effective field F/epsilon
  double epsilon = 11.0;       // recorded; the field enters only through f_eff
  double v0 = -0.5;            // eV, Ge band-offset coefficient
  double n_ge = 0.0;           // mean Ge fraction in the well
  double q = 3.7;              // 1/nm, oscillation wavevector
  double z_min = -30.0;        // nm
  double z_max = 5.0;          // nm
  int n_grid = 0;              // grid points incl. endpoints; 0 = auto-resolve
  double m_l = 0.92;           // longitudinal mass in units of m_e
  OscWindow window = OscWindow::Smooth;
  double a = si_lattice_nm;    // nm
  double k0 = valley_k0;       // units 2*pi/a

  double two_k0_nm() const { return 2.0 * k0 * 2.0 * pi / a; }

  // smallest grid that resolves the faster of q and 2 k0 with 20 points per
  // period (and at least 0.02 nm spacing); q_floor lets sweeps fix one grid
  // for their whole q range
  int resolved_grid_size(double q_floor = 0.0) const;

  void validate() const;  // throws std::invalid_argument
};

// V_b0 [1+tanh(z/w)]/2 - e F_eff z, in eV
double structure_potential(const DeviceConfig& cfg, double z);

// v0 n_ge (1+cos(q z)) confined to the well by the configured window
double oscillatory_potential(const DeviceConfig& cfg, double z);

double oscillation_window(const DeviceConfig& cfg, double z);

struct PotentialProfile {
  Eigen::VectorXd z;        // nm, uniform
  Eigen::VectorXd v_str;    // eV
  Eigen::VectorXd v_osc;    // eV
  Eigen::VectorXd v_total;  // eV, v_str + v_osc pointwise
};

PotentialProfile sample_profile(const DeviceConfig& cfg);

Eigen::VectorXd uniform_grid(const DeviceConfig& cfg, double q_floor = 0.0);

}  // namespace ww

#endif
