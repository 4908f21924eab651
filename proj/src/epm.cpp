#include "ww/epm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <Eigen/Dense>

namespace ww {

namespace {

constexpr double sqrt_half = 0.70710678118654752440;

// cos(pi s / 4) and sin(pi s / 4) as exact table values, so structure-factor
// extinctions are zeros to the last bit
double quarter_cos(int s) {
  static const double table[8] = {1.0, sqrt_half, 0.0, -sqrt_half, -1.0, -sqrt_half, 0.0, sqrt_half};
  return table[((s % 8) + 8) % 8];
}
double quarter_sin(int s) {
  static const double table[8] = {0.0, sqrt_half, 1.0, sqrt_half, 0.0, -sqrt_half, -1.0, -sqrt_half};
  return table[((s % 8) + 8) % 8];
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with explicit index draws; std::shuffle ordering is not
// pinned by the standard
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(v[i - 1], v[j]);
  }
}

long long pack(int h, int k, int l) {
  return (static_cast<long long>(h + 512) << 20) | (static_cast<long long>(k + 512) << 10) |
         static_cast<long long>(l + 512);
}

ReciprocalVector canonical_pair_rep(const ReciprocalVector& g) {
  const ReciprocalVector n = g.negated();
  const auto key = [](const ReciprocalVector& v) { return std::array<int, 3>{v.h, v.k, v.l}; };
  return key(g) >= key(n) ? g : n;
}

struct PairLookup {
  std::vector<ReciprocalVector> pairs;
  std::unordered_map<long long, int> index;

  explicit PairLookup(const BasisSet& basis) : pairs(disorder_difference_pairs(basis)) {
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
      index[pack(pairs[i].h, pairs[i].k, pairs[i].l)] = i;
      const auto n = pairs[i].negated();
      index[pack(n.h, n.k, n.l)] = i;
    }
  }
  int find(int dh, int dk, int dl) const {
    const auto it = index.find(pack(dh, dk, dl));
    return it == index.end() ? -1 : it->second;
  }
};

}  // namespace

int DisorderRealization::count(int value) const {
  return static_cast<int>(std::count(signs.begin(), signs.end(), value));
}

std::vector<ReciprocalVector> disorder_difference_pairs(const BasisSet& basis) {
  std::set<ReciprocalVector> reps;
  const int n = basis.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& a = basis.at(i);
      const auto& b = basis.at(j);
      const int dh = a.h - b.h, dk = a.k - b.k, dl = a.l - b.l;
      const int g2 = dh * dh + dk * dk + dl * dl;
      if (g2 != 3 && g2 != 8 && g2 != 11) continue;
      if (quarter_sin(dh + dk + dl) == 0.0) continue;
      reps.insert(canonical_pair_rep(ReciprocalVector(dh, dk, dl, basis.lattice_constant())));
    }
  return {reps.begin(), reps.end()};
}

DisorderRealization draw_realization(int n_pairs, double x_ge, std::uint64_t seed,
                                     EnsembleMode mode) {
  if (x_ge < 0.0 || x_ge > 1.0) throw std::invalid_argument("draw_realization: x_ge outside [0,1]");
  std::mt19937_64 gen(seed);
  DisorderRealization out;
  out.seed = seed;
  out.signs.assign(n_pairs, 0);

  // balanced pool of m signs; an odd count gets an unbiased random extra so
  // the ensemble mean of the sign sum stays exactly zero
  const auto balanced_pool = [&gen](int m) {
    std::vector<int> pool;
    pool.reserve(m);
    for (int i = 0; i < m / 2; ++i) {
      pool.push_back(1);
      pool.push_back(-1);
    }
    if (m % 2 != 0) pool.push_back(uniform01(gen) < 0.5 ? 1 : -1);
    deterministic_shuffle(pool, gen);
    return pool;
  };

  if (mode == EnsembleMode::FixedPairSigns) {
    out.signs = balanced_pool(n_pairs);
    return out;
  }
  // mixed-cell presence: Bernoulli(2x(1-x)) per pair, then balanced signs
  // over the present ones
  const double p = 2.0 * x_ge * (1.0 - x_ge);
  std::vector<int> present;
  for (int i = 0; i < n_pairs; ++i)
    if (uniform01(gen) < p) present.push_back(i);
  const std::vector<int> pool = balanced_pool(static_cast<int>(present.size()));
  for (std::size_t i = 0; i < present.size(); ++i) out.signs[present[i]] = pool[i];
  return out;
}

CrystalSpec CrystalSpec::vca(double x_ge) {
  if (x_ge < 0.0 || x_ge > 1.0) throw std::invalid_argument("CrystalSpec::vca: x outside [0,1]");
  return CrystalSpec(Kind::Vca, x_ge);
}

CrystalSpec CrystalSpec::alloy(double x_ge, DisorderRealization realization, EnsembleMode mode) {
  if (x_ge < 0.0 || x_ge > 1.0) throw std::invalid_argument("CrystalSpec::alloy: x outside [0,1]");
  CrystalSpec spec(Kind::Alloy, x_ge);
  spec.realization_ = std::move(realization);
  spec.mode_ = mode;
  return spec;
}

std::string CrystalSpec::describe() const {
  switch (kind_) {
    case Kind::PureSi: return "Si";
    case Kind::PureGe: return "Ge";
    case Kind::Vca: return "vca(x=" + std::to_string(x_ge_) + ")";
    default: return "alloy(x=" + std::to_string(x_ge_) + ", seed=" + std::to_string(realization_.seed) + ")";
  }
}

Eigen::MatrixXcd build_hamiltonian(const BasisSet& basis, const FormFactorTable& ff,
                                   const CrystalSpec& crystal, const Eigen::Vector3d& k) {
  const int n = basis.size();
  const double a = basis.lattice_constant();
  const double unit = 2.0 * pi / a;  // 1/nm per (2*pi/a)

  double w_si = 1.0, w_ge = 0.0, sine_weight = 0.0;
  switch (crystal.kind()) {
    case CrystalSpec::Kind::PureSi: break;
    case CrystalSpec::Kind::PureGe: w_si = 0.0; w_ge = 1.0; break;
    case CrystalSpec::Kind::Vca:
      w_si = 1.0 - crystal.x_ge();
      w_ge = crystal.x_ge();
      break;
    case CrystalSpec::Kind::Alloy:
      // symmetric part reduces to the standard VCA mean in either mode
      w_si = 1.0 - crystal.x_ge();
      w_ge = crystal.x_ge();
      sine_weight = crystal.mode() == EnsembleMode::FixedPairSigns
                        ? 2.0 * crystal.x_ge() * (1.0 - crystal.x_ge())
                        : 1.0;
      break;
  }

  std::optional<PairLookup> pair_lookup;
  if (crystal.kind() == CrystalSpec::Kind::Alloy) {
    pair_lookup.emplace(basis);
    if (crystal.realization().signs.size() != pair_lookup->pairs.size())
      throw std::invalid_argument("build_hamiltonian: realization sign count does not match basis pairs");
  }

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& ki = basis.at(i);
    const Eigen::Vector3d d{(k[0] - ki.h) * unit, (k[1] - ki.k) * unit, (k[2] - ki.l) * unit};
    h(i, i) = hbar2_over_2me * d.squaredNorm();
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& kj = basis.at(j);
      const int dh = ki.h - kj.h, dk = ki.k - kj.k, dl = ki.l - kj.l;
      const int g2 = dh * dh + dk * dk + dl * dl;
      const double v_si = ff.si.at_shell_ev(g2);
      const double v_ge = ff.ge.at_shell_ev(g2);
      if (v_si == 0.0 && v_ge == 0.0) continue;
      const int s = dh + dk + dl;
      Complex u = quarter_cos(s) * (w_si * v_si + w_ge * v_ge);
      if (sine_weight != 0.0) {
        const int p = pair_lookup->find(dh, dk, dl);
        if (p >= 0 && crystal.realization().signs[p] != 0) {
          // U_a sine term: -i sin(G.r0/2) (V_Si - V_Ge)/2 per atomic potential
          const double dv = 0.5 * (v_si - v_ge);
          u += Complex(0.0, -1.0) * static_cast<double>(crystal.realization().signs[p]) *
               quarter_sin(s) * dv * sine_weight;
        }
      }
      h(i, j) += u;
    }
  }
  return h;
}

Eigen::VectorXd band_energies(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("band_energies: eigensolver failed");
  return solver.eigenvalues();
}

BlochState solve_conduction_state(const BasisSet& basis, const Eigen::MatrixXcd& h,
                                  const Eigen::Vector3d& k, int band_index) {
  if (h.rows() != basis.size() || h.cols() != basis.size())
    throw std::invalid_argument("solve_conduction_state: matrix/basis size mismatch");
  if (band_index < 0 || band_index >= basis.size())
    throw std::invalid_argument("solve_conduction_state: band index out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve_conduction_state: eigensolver failed");
  const auto& evals = solver.eigenvalues();
  if (band_index + 1 < basis.size() &&
      evals[band_index + 1] - evals[band_index] < 1e-9)
    throw std::runtime_error("solve_conduction_state: degenerate band pair, gauge undefined");

  BlochState state;
  state.coeffs = solver.eigenvectors().col(band_index);
  state.energy = evals[band_index];
  state.k = k;
  state.band_index = band_index;

  const int i0 = basis.index_of(0, 0, 0);
  if (i0 < 0) throw std::runtime_error("solve_conduction_state: basis lacks the origin");
  const Complex anchor = state.coeffs[i0];
  if (std::abs(anchor) < 1e-8)
    throw std::runtime_error("solve_conduction_state: gauge anchor coefficient is null");
  state.coeffs *= std::conj(anchor) / std::abs(anchor);
  return state;
}

MinimumScanResult conduction_minimum_scan(const BasisSet& basis, const FormFactorTable& ff,
                                          const CrystalSpec& crystal,
                                          const std::vector<double>& kz_grid) {
  if (kz_grid.empty()) throw std::invalid_argument("conduction_minimum_scan: empty grid");
  MinimumScanResult out;
  out.samples.reserve(kz_grid.size());
  for (const double kz : kz_grid) {
    const auto h = build_hamiltonian(basis, ff, crystal, {0.0, 0.0, kz});
    out.samples.emplace_back(kz, band_energies(h)[conduction_band_index]);
  }
  std::size_t imin = 0;
  for (std::size_t i = 1; i < out.samples.size(); ++i)
    if (out.samples[i].second < out.samples[imin].second) imin = i;
  out.k_min = out.samples[imin].first;
  out.e_min = out.samples[imin].second;
  if (imin > 0 && imin + 1 < out.samples.size()) {
    // parabolic refinement through the bracketing triple
    const auto [x0, y0] = out.samples[imin - 1];
    const auto [x1, y1] = out.samples[imin];
    const auto [x2, y2] = out.samples[imin + 1];
    const double denom = (y0 - 2.0 * y1 + y2);
    if (denom > 0.0) {
      const double h01 = x1 - x0;
      out.k_min = x1 - 0.5 * h01 * (y2 - y0) / denom;
      out.e_min = y1 - 0.125 * (y2 - y0) * (y2 - y0) / denom;
    }
  }
  return out;
}

BlochState opposite_valley_state(const BasisSet& basis, const BlochState& plus) {
  BlochState minus = plus;
  minus.k = -plus.k;
  for (int i = 0; i < basis.size(); ++i)
    minus.coeffs[i] = std::conj(plus.coeffs[basis.negated_index(i)]);
  return minus;
}

namespace {

// masked outer product conj(c_+) c_-^T restricted to equal in-plane components
Eigen::MatrixXcd intervalley_outer(const BasisSet& basis, const BlochState& plus) {
  const BlochState minus = opposite_valley_state(basis, plus);
  const int n = basis.size();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (basis.at(i).h != basis.at(j).h || basis.at(i).k != basis.at(j).k) continue;
      rho(i, j) = std::conj(plus.coeffs[i]) * minus.coeffs[j];
    }
  return rho;
}

}  // namespace

IntervalleyDensityMatrix sample_density_matrix(const BasisSet& basis, const FormFactorTable& ff,
                                               double x_ge, int n_samples, std::uint64_t seed,
                                               EnsembleMode mode, int n_threads) {
  if (n_samples < 1) throw std::invalid_argument("sample_density_matrix: n_samples must be >= 1");
  if (x_ge < 0.0 || x_ge > 1.0) throw std::invalid_argument("sample_density_matrix: x_ge outside [0,1]");
  const Eigen::Vector3d k0{0.0, 0.0, valley_k0};

  if (2.0 * x_ge * (1.0 - x_ge) == 0.0) {
    // no mixed cells: every realization is the same ordered crystal
    IntervalleyDensityMatrix out = ordered_density_matrix(basis, ff, x_ge);
    out.n_samples = n_samples;
    out.seed = seed;
    out.mode = mode;
    return out;
  }

  const int n_pairs = static_cast<int>(disorder_difference_pairs(basis).size());

  // per-realization results are kept and reduced in canonical order so the
  // sum is bit-identical for any thread count
  std::vector<Eigen::MatrixXcd> parts(n_samples);
  const auto worker = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto realization = draw_realization(n_pairs, x_ge, seed + static_cast<std::uint64_t>(i), mode);
      const auto h = build_hamiltonian(basis, ff, CrystalSpec::alloy(x_ge, realization, mode), k0);
      parts[i] = intervalley_outer(basis, solve_conduction_state(basis, h, k0));
    }
  };

  n_threads = std::max(1, std::min(n_threads, n_samples));
  if (n_threads == 1) {
    worker(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_samples + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n_samples, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  IntervalleyDensityMatrix out;
  out.rho = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
  for (int i = 0; i < n_samples; ++i) out.rho += parts[i];
  out.rho /= static_cast<double>(n_samples);
  out.n_samples = n_samples;
  out.x_ge = x_ge;
  out.seed = seed;
  out.mode = mode;
  return out;
}

IntervalleyDensityMatrix ordered_density_matrix(const BasisSet& basis, const FormFactorTable& ff,
                                                double x_vca) {
  const Eigen::Vector3d k0{0.0, 0.0, valley_k0};
  const auto spec = x_vca == 0.0 ? CrystalSpec::pure_si() : CrystalSpec::vca(x_vca);
  const auto h = build_hamiltonian(basis, ff, spec, k0);
  IntervalleyDensityMatrix out;
  out.rho = intervalley_outer(basis, solve_conduction_state(basis, h, k0));
  out.n_samples = 1;
  out.x_ge = x_vca;
  out.seed = 0;
  return out;
}

}  // namespace ww
