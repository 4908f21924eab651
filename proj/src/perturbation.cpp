#include "ww/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ww {

std::vector<CandidateWavevector> candidate_wavevectors(int max_multiple, double a, double k0) {
  if (max_multiple < 1) throw std::invalid_argument("candidate_wavevectors: max_multiple must be >= 1");
  const double g = 4.0 * pi / a;        // 1/nm
  const double two_k0 = 2.0 * k0 * 2.0 * pi / a;
  const double monolayer = a / 4.0;

  std::vector<CandidateWavevector> out;
  for (int m = 0; m <= max_multiple; ++m) {
    CandidateWavevector c;
    c.q = std::abs(m * g - two_k0);
    c.k_multiple = m;
    c.lambda_nm = 2.0 * pi / c.q;
    c.lambda_monolayers = c.lambda_nm / monolayer;
    out.push_back(c);
  }
  // subsidiary peak from envelope oscillations at half the short-WW value
  CandidateWavevector half;
  half.q = two_k0 / 2.0;
  half.k_multiple = 0;
  half.lambda_nm = 2.0 * pi / half.q;
  half.lambda_monolayers = half.lambda_nm / monolayer;
  half.second_order_landmark = true;
  out.push_back(half);

  std::sort(out.begin(), out.end(),
            [](const CandidateWavevector& p, const CandidateWavevector& q_) { return p.q < q_.q; });
  return out;
}

namespace {

enum class Weighting { Oscillatory, Structure };

FirstOrderResult envelope_weighted_sum(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                                       const DeviceConfig& cfg, const Eigen::VectorXd& z,
                                       const Eigen::VectorXd& density, Weighting weighting) {
  if (z.size() != density.size())
    throw std::invalid_argument("first_order_vs: grid/density size mismatch");
  if (rho.rho.rows() != basis.size())
    throw std::invalid_argument("first_order_vs: rho/basis size mismatch");
  const int nz = static_cast<int>(z.size());
  const double dz = z[1] - z[0];

  Eigen::VectorXd weight(nz);
  for (int m = 0; m < nz; ++m)
    weight[m] = density[m] * (weighting == Weighting::Oscillatory ? oscillatory_potential(cfg, z[m])
                                                                  : structure_potential(cfg, z[m]));

  // I depends on K,K' only through the channel frequency; evaluate each
  // trapezoid integral once
  const double unit = 2.0 * pi / basis.lattice_constant();
  const double two_k0 = cfg.two_k0_nm();
  std::map<int, Complex> channel_integral;
  for (int i = 0; i < basis.size(); ++i)
    for (int j = 0; j < basis.size(); ++j) {
      if (rho.rho(i, j) == Complex{}) continue;
      channel_integral.emplace(basis.at(j).l - basis.at(i).l, Complex{});
    }
  for (auto& [dl, integral] : channel_integral) {
    const double freq = dl * unit - two_k0;
    Complex acc{};
    for (int m = 0; m < nz; ++m) {
      const Complex term = weight[m] * std::polar(1.0, freq * z[m]);
      acc += (m == 0 || m == nz - 1) ? 0.5 * term : term;
    }
    integral = acc * dz;
  }

  FirstOrderResult result;
  result.q = cfg.q;
  for (int i = 0; i < basis.size(); ++i)
    for (int j = 0; j < basis.size(); ++j) {
      const Complex r = rho.rho(i, j);
      if (r == Complex{}) continue;
      const Complex contribution = r * channel_integral.at(basis.at(j).l - basis.at(i).l);
      result.terms.push_back({i, j, contribution});
      result.phasor += contribution;
    }
  result.delta = 2.0 * std::abs(result.phasor);
  return result;
}

}  // namespace

FirstOrderResult first_order_vs(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                                const DeviceConfig& cfg, const Eigen::VectorXd& z_grid,
                                const Eigen::VectorXd& density) {
  return envelope_weighted_sum(basis, rho, cfg, z_grid, density, Weighting::Oscillatory);
}

FirstOrderResult barrier_vs_first_order(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                                        const DeviceConfig& cfg, const Eigen::VectorXd& z_grid,
                                        const Eigen::VectorXd& density) {
  return envelope_weighted_sum(basis, rho, cfg, z_grid, density, Weighting::Structure);
}

EnvelopeSolution uncoupled_ground_state(const DeviceConfig& cfg, double q_floor) {
  CouplingKernel kernel;
  kernel.z = uniform_grid(cfg, q_floor);
  kernel.c_of_z = Eigen::VectorXcd::Zero(kernel.z.size());
  return solve_valley_doublet(assemble_envelope_hamiltonian(cfg, kernel, CouplingPotential::None));
}

}  // namespace ww
