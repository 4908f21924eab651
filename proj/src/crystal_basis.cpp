#include "ww/crystal_basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace ww {

namespace {

bool uniform_parity(int h, int k, int l) {
  const bool he = h % 2 == 0, ke = k % 2 == 0, le = l % 2 == 0;
  return (he && ke && le) || (!he && !ke && !le);
}

long long pack_hkl(int h, int k, int l) {
  // offsets keep components non-negative for any realistic cutoff
  return (static_cast<long long>(h + 512) << 20) | (static_cast<long long>(k + 512) << 10) |
         static_cast<long long>(l + 512);
}

Complex fourth_root_of_unity(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

ReciprocalVector::ReciprocalVector(int h_, int k_, int l_, double a_) : h(h_), k(k_), l(l_), a(a_) {
  if (!uniform_parity(h, k, l))
    throw std::invalid_argument("ReciprocalVector: mixed parity (h,k,l) is not a bcc point");
  if (a <= 0.0) throw std::invalid_argument("ReciprocalVector: lattice constant must be positive");
}

Eigen::Vector3d ReciprocalVector::cartesian() const {
  const double u = 2.0 * pi / a;
  return {u * h, u * k, u * l};
}

std::vector<ReciprocalVector> enumerate_basis(int cutoff_sq, double a) {
  if (cutoff_sq < 0) throw std::invalid_argument("enumerate_basis: cutoff_sq must be >= 0");
  std::vector<ReciprocalVector> out;
  const int r = static_cast<int>(std::sqrt(static_cast<double>(cutoff_sq))) + 1;
  for (int h = -r; h <= r; ++h)
    for (int k = -r; k <= r; ++k)
      for (int l = -r; l <= r; ++l) {
        if (h * h + k * k + l * l > cutoff_sq) continue;
        if (!uniform_parity(h, k, l)) continue;
        out.emplace_back(h, k, l, a);
      }
  std::sort(out.begin(), out.end());
  return out;
}

BasisSet::BasisSet(std::vector<ReciprocalVector> vectors)
    : vectors_(std::move(vectors)), a_(vectors_.empty() ? si_lattice_nm : vectors_.front().a) {
  if (!std::is_sorted(vectors_.begin(), vectors_.end()))
    throw std::invalid_argument("BasisSet: vectors must be in canonical order");
  lookup_.reserve(vectors_.size() * 2);
  for (int i = 0; i < size(); ++i) lookup_[pack_hkl(vectors_[i].h, vectors_[i].k, vectors_[i].l)] = i;
  neg_index_.resize(vectors_.size());
  for (int i = 0; i < size(); ++i) {
    const int j = index_of(-vectors_[i].h, -vectors_[i].k, -vectors_[i].l);
    if (j < 0) throw std::invalid_argument("BasisSet: set is not closed under negation");
    neg_index_[i] = j;
  }
}

int BasisSet::index_of(int h, int k, int l) const {
  const auto it = lookup_.find(pack_hkl(h, k, l));
  return it == lookup_.end() ? -1 : it->second;
}

const std::array<GroupElement, 8>& delta_group() {
  static const std::array<GroupElement, 8> elems = [] {
    auto m = [](int a11, int a12, int a21, int a22) {
      Eigen::Matrix2i M;
      M << a11, a12, a21, a22;
      return M;
    };
    std::array<GroupElement, 8> g;
    g[0] = {"E", m(1, 0, 0, 1), false};
    g[1] = {"C4^2", m(-1, 0, 0, -1), false};
    g[2] = {"R", m(0, 1, 1, 0), false};        // reflection in x=y
    g[3] = {"R'", m(0, -1, -1, 0), false};     // reflection in x=-y
    g[4] = {"T.R.C4", m(1, 0, 0, -1), true};   // (x,y)->(x,-y) with glide
    g[5] = {"T.R'.C4", m(-1, 0, 0, 1), true};  // (x,y)->(-x,y) with glide
    g[6] = {"T.C4", m(0, -1, 1, 0), true};     // quarter turn with glide
    g[7] = {"T.C4^-1", m(0, 1, -1, 0), true};
    return g;
  }();
  return elems;
}

const GroupElement& compose(const GroupElement& g1, const GroupElement& g2) {
  const Eigen::Matrix2i P = g1.point_part * g2.point_part;
  const bool glide = g1.has_glide != g2.has_glide;
  for (const auto& g : delta_group())
    if (g.has_glide == glide && g.point_part == P) return g;
  throw std::logic_error("compose: product fell outside the Delta group");
}

GroupAction apply_group_element(const GroupElement& g, const ReciprocalVector& K) {
  const Eigen::Vector2i hk = g.point_part * Eigen::Vector2i(K.h, K.k);
  ReciprocalVector image(hk[0], hk[1], K.l, K.a);
  Complex phase{1.0, 0.0};
  if (g.has_glide) {
    // exp[i (a/4) (W K).(1,1,1)] with K in (2*pi/a) units -> i^(h'+k'+l')
    phase = fourth_root_of_unity(image.h + image.k + image.l);
  }
  return {image, phase};
}

const char* orbit_class_name(OrbitClassLabel c) {
  switch (c) {
    case OrbitClassLabel::A1: return "A1";
    case OrbitClassLabel::A2: return "A2";
    case OrbitClassLabel::A3: return "A3";
    case OrbitClassLabel::A4: return "A4";
    case OrbitClassLabel::B1: return "B1";
    case OrbitClassLabel::B2: return "B2";
    default: return "B3";
  }
}

int expected_orbit_size(OrbitClassLabel c) {
  switch (c) {
    case OrbitClassLabel::A1: return 1;
    case OrbitClassLabel::A2: return 4;
    case OrbitClassLabel::A3: return 4;
    case OrbitClassLabel::A4: return 8;
    case OrbitClassLabel::B1: return 4;
    default: return 8;
  }
}

OrbitClassLabel classify_orbit(const ReciprocalVector& K) {
  const int ah = std::abs(K.h), ak = std::abs(K.k);
  if (K.sublattice() == Sublattice::A) {
    const int nx = ah / 2, ny = ak / 2;
    if (nx == 0 && ny == 0) return OrbitClassLabel::A1;
    if (nx == 0 || ny == 0) return OrbitClassLabel::A2;
    if (nx == ny) return OrbitClassLabel::A3;
    return OrbitClassLabel::A4;
  }
  if (ah == ak) return OrbitClassLabel::B1;
  // labels in the (n+1/2) convention, taken from the absolute coordinates
  const int nx = (ah - 1) / 2, ny = (ak - 1) / 2;
  return (nx + ny) % 2 == 0 ? OrbitClassLabel::B2 : OrbitClassLabel::B3;
}

std::pair<OrbitClassLabel, std::vector<ReciprocalVector>> orbit_of(const ReciprocalVector& K) {
  std::set<ReciprocalVector> members;
  for (const auto& g : delta_group()) members.insert(apply_group_element(g, K).image);
  return {classify_orbit(K), std::vector<ReciprocalVector>(members.begin(), members.end())};
}

}  // namespace ww
