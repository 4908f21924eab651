#include "ww/envelope.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace ww {

namespace {

double trapezoid(const Eigen::VectorXd& y, double dz) {
  if (y.size() < 2) return 0.0;
  return dz * (y.sum() - 0.5 * (y[0] + y[y.size() - 1]));
}

}  // namespace

CouplingKernel coupling_kernel(const BasisSet& basis, const IntervalleyDensityMatrix& rho,
                               const Eigen::VectorXd& z_grid, double k0) {
  if (rho.rho.rows() != basis.size() || rho.rho.cols() != basis.size())
    throw std::invalid_argument("coupling_kernel: rho/basis size mismatch");

  CouplingKernel kernel;
  kernel.z = z_grid;
  kernel.x_ge = rho.x_ge;
  kernel.n_samples = rho.n_samples;
  kernel.seed = rho.seed;

  // the in-plane deltas leave only pairs with K'_z-K_z a multiple of 4*pi/a;
  // accumulate those channel amplitudes, then evaluate one exponential each
  for (int i = 0; i < basis.size(); ++i)
    for (int j = 0; j < basis.size(); ++j) {
      const Complex r = rho.rho(i, j);
      if (r == Complex{}) continue;
      kernel.channel_amplitudes[basis.at(j).l - basis.at(i).l] += r;
    }

  const double unit = 2.0 * pi / basis.lattice_constant();
  const double two_k0 = 2.0 * k0 * unit;
  kernel.c_of_z = Eigen::VectorXcd::Zero(z_grid.size());
  for (const auto& [dl, amp] : kernel.channel_amplitudes) {
    const double freq = dl * unit - two_k0;
    for (Eigen::Index m = 0; m < z_grid.size(); ++m)
      kernel.c_of_z[m] += amp * std::polar(1.0, freq * z_grid[m]);
  }
  return kernel;
}

EnvelopeOperator assemble_envelope_hamiltonian(const DeviceConfig& cfg, const CouplingKernel& kernel,
                                               CouplingPotential coupling) {
  cfg.validate();
  const Eigen::VectorXd& z = kernel.z;
  const int n = static_cast<int>(z.size());
  if (n < 6) throw std::invalid_argument("assemble_envelope_hamiltonian: grid too small");
  const double dz = z[1] - z[0];
  const int ni = n - 2;  // interior points; Dirichlet values at the ends
  const double t = hbar2_over_2me / cfg.m_l / (dz * dz);

  EnvelopeOperator op;
  op.z = z;
  op.m_l = cfg.m_l;
  op.v_diag.resize(ni);
  op.v_couple.resize(ni);
  for (int i = 0; i < ni; ++i) {
    const double zi = z[i + 1];
    const double vs = structure_potential(cfg, zi);
    const double vo = oscillatory_potential(cfg, zi);
    op.v_diag[i] = vs + vo;
    switch (coupling) {
      case CouplingPotential::Total: op.v_couple[i] = kernel.c_of_z[i + 1] * (vs + vo); break;
      case CouplingPotential::OscillatoryOnly: op.v_couple[i] = kernel.c_of_z[i + 1] * vo; break;
      case CouplingPotential::None: op.v_couple[i] = Complex{}; break;
    }
  }

  // interleaved (F+_i, F-_i): the kinetic stencil couples i to i+-1 within a
  // valley, V_c couples the valleys pointwise; bandwidth stays at 2
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(ni) * 8);
  for (int i = 0; i < ni; ++i) {
    const double diag = 2.0 * t + op.v_diag[i];
    trip.emplace_back(2 * i, 2 * i, Complex{diag});
    trip.emplace_back(2 * i + 1, 2 * i + 1, Complex{diag});
    if (op.v_couple[i] != Complex{}) {
      trip.emplace_back(2 * i, 2 * i + 1, op.v_couple[i]);
      trip.emplace_back(2 * i + 1, 2 * i, std::conj(op.v_couple[i]));
    }
    if (i + 1 < ni) {
      trip.emplace_back(2 * i, 2 * (i + 1), Complex{-t});
      trip.emplace_back(2 * (i + 1), 2 * i, Complex{-t});
      trip.emplace_back(2 * i + 1, 2 * (i + 1) + 1, Complex{-t});
      trip.emplace_back(2 * (i + 1) + 1, 2 * i + 1, Complex{-t});
    }
  }
  op.h.resize(2 * ni, 2 * ni);
  op.h.setFromTriplets(trip.begin(), trip.end());

  const Eigen::SparseMatrix<Complex> adj = op.h.adjoint();
  if ((op.h - adj).norm() > 1e-12 * op.h.norm())
    throw std::runtime_error("assemble_envelope_hamiltonian: assembly is not Hermitian");
  return op;
}

namespace {

double operator_inf_norm(const Eigen::SparseMatrix<Complex>& h) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(h, k); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  return row_sums.maxCoeff();
}

Eigen::MatrixXcd deterministic_start_block(int rows, int cols) {
  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
  Eigen::MatrixXcd x(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
      const double im = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
      x(i, j) = Complex(re, im);
    }
  return x;
}

// Shifted factorization that also reports the number of eigenvalues below
// the shift (Sylvester inertia from the LDL^H pivots).
class ShiftedFactor {
 public:
  explicit ShiftedFactor(const Eigen::SparseMatrix<Complex>& h) : h_(h) {}

  bool factor(double sigma) {
    Eigen::SparseMatrix<Complex> shifted = h_;
    for (int i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= sigma;
    ldlt_.compute(shifted);
    if (ldlt_.info() != Eigen::Success) return false;
    negatives_ = 0;
    const auto& d = ldlt_.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (std::real(d[i]) < 0.0) ++negatives_;
    sigma_ = sigma;
    return true;
  }

  int eigenvalues_below() const { return negatives_; }
  double sigma() const { return sigma_; }
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const { return ldlt_.solve(rhs); }

 private:
  const Eigen::SparseMatrix<Complex>& h_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Complex>, Eigen::Lower> ldlt_;
  int negatives_ = 0;
  double sigma_ = 0.0;
};

}  // namespace

EnvelopeSolution solve_valley_doublet(const EnvelopeOperator& op) {
  const int dim = static_cast<int>(op.h.rows());
  const int ni = dim / 2;
  constexpr int block = 4;
  if (dim < 2 * block) throw std::invalid_argument("solve_valley_doublet: operator too small");

  const double scale = operator_inf_norm(op.h);
  const double tol = 1e-10 * scale;

  // kinetic part is PSD, so the spectrum lies above the pointwise 2x2 block
  // minimum of the potential part
  double bound = std::numeric_limits<double>::max();
  for (int i = 0; i < ni; ++i)
    bound = std::min(bound, op.v_diag[i] - std::abs(op.v_couple[i]));

  ShiftedFactor factor(op.h);
  double sigma = bound - 0.01 * std::max(1.0, std::abs(bound));
  if (!factor.factor(sigma) || factor.eigenvalues_below() != 0)
    throw std::runtime_error("solve_valley_doublet: initial factorization failed");

  Eigen::MatrixXcd x = deterministic_start_block(dim, block);
  {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, block);
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(block);
  bool converged = false;
  for (int iter = 0; iter < 400 && !converged; ++iter) {
    x = factor.solve(x);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, block);

    const Eigen::MatrixXcd hx = op.h * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(x.adjoint() * hx);
    theta = ritz.eigenvalues();
    x = x * ritz.eigenvectors();

    const Eigen::MatrixXcd hx2 = op.h * x;
    const double r0 = (hx2.col(0) - theta[0] * x.col(0)).norm();
    const double r1 = (hx2.col(1) - theta[1] * x.col(1)).norm();
    converged = r0 <= tol && r1 <= tol;

    // chase the shift towards the ground Ritz value, certified below the
    // true lowest eigenvalue through the factorization inertia
    if (!converged && iter % 4 == 3) {
      double lo = factor.sigma();
      double hi = theta[0] - std::max(1e-9, 1e-4 * (theta[block - 1] - theta[0]));
      if (hi > lo) {
        double adopted = lo;
        for (int step = 0; step < 4 && hi - lo > 1e-12; ++step) {
          const double cand = step == 0 ? hi : 0.5 * (lo + hi);
          if (factor.factor(cand) && factor.eigenvalues_below() == 0) {
            adopted = cand;
            lo = cand;
            if (step == 0) break;  // the aggressive shift is already safe
          } else {
            hi = cand;
          }
        }
        if (factor.sigma() != adopted && !factor.factor(adopted))
          throw std::runtime_error("solve_valley_doublet: refactorization failed");
      }
    }
  }
  if (!converged) throw std::runtime_error("solve_valley_doublet: block iteration did not converge");

  EnvelopeSolution sol;
  sol.z = op.z;
  sol.e0 = theta[0];
  sol.e1 = theta[1];
  sol.delta = theta[1] - theta[0];

  const int n = static_cast<int>(op.z.size());
  sol.f_plus = Eigen::VectorXcd::Zero(n);
  sol.f_minus = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < ni; ++i) {
    sol.f_plus[i + 1] = x(2 * i, 0);
    sol.f_minus[i + 1] = x(2 * i + 1, 0);
  }

  const double dz = op.z[1] - op.z[0];
  sol.density = sol.f_plus.cwiseAbs2() + sol.f_minus.cwiseAbs2();
  const double norm = trapezoid(sol.density, dz);
  sol.density /= norm;
  const double amp = std::sqrt(norm);
  sol.f_plus /= amp;
  sol.f_minus /= amp;

  // domain adequacy: both doublet states must have essentially left the
  // walls.  A deliberate hard-wall geometry presses the state against the
  // boundary at the (grid-spacing)^2 level, so the hard failure threshold
  // sits at 1e-4; comfortably confined solutions stay below 1e-6.
  for (int col = 0; col < 2; ++col) {
    const double head = std::norm(x(0, col)) + std::norm(x(1, col));
    const double tail = std::norm(x(dim - 2, col)) + std::norm(x(dim - 1, col));
    if (std::max(head, tail) > 1e-4 * x.col(col).cwiseAbs2().maxCoeff())
      throw std::runtime_error("solve_valley_doublet: density does not vanish at the domain ends");
  }
  return sol;
}

ValleySplitting valley_splitting_ww(const BasisSet& basis, const DeviceConfig& cfg,
                                    const IntervalleyDensityMatrix& rho, double q_floor) {
  const Eigen::VectorXd z = uniform_grid(cfg, q_floor);
  const CouplingKernel kernel = coupling_kernel(basis, rho, z, cfg.k0);

  ValleySplitting out;
  const auto total =
      solve_valley_doublet(assemble_envelope_hamiltonian(cfg, kernel, CouplingPotential::Total));
  out.delta_total = total.delta;
  out.e0 = total.e0;
  out.e1 = total.e1;
  out.delta_w =
      solve_valley_doublet(assemble_envelope_hamiltonian(cfg, kernel, CouplingPotential::OscillatoryOnly))
          .delta;
  return out;
}

EnvelopeSolution envelope_density(const BasisSet& basis, const DeviceConfig& cfg,
                                  const IntervalleyDensityMatrix& rho) {
  const Eigen::VectorXd z = uniform_grid(cfg);
  const CouplingKernel kernel = coupling_kernel(basis, rho, z, cfg.k0);
  return solve_valley_doublet(assemble_envelope_hamiltonian(cfg, kernel, CouplingPotential::Total));
}

int count_density_peaks(const Eigen::VectorXd& density, double frac) {
  const double floor = frac * density.maxCoeff();
  int peaks = 0;
  for (Eigen::Index i = 1; i + 1 < density.size(); ++i)
    if (density[i] > density[i - 1] && density[i] > density[i + 1] && density[i] >= floor) ++peaks;
  return peaks;
}

}  // namespace ww
