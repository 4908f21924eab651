#ifndef WW_CRYSTAL_BASIS_HPP
#define WW_CRYSTAL_BASIS_HPP

#include <array>
#include <complex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ww/constants.hpp"

namespace ww {

enum class Sublattice { A, B };

// A bcc reciprocal-lattice point of the diamond structure, K = (2*pi/a)(h,k,l).
// h,k,l must be all even (sublattice A) or all odd (sublattice B).
struct ReciprocalVector {
  int h = 0, k = 0, l = 0;
  double a = si_lattice_nm;  // nm

  ReciprocalVector() = default;
  ReciprocalVector(int h_, int k_, int l_, double a_ = si_lattice_nm);

  Sublattice sublattice() const { return (h % 2 == 0) ? Sublattice::A : Sublattice::B; }
  int norm_sq() const { return h * h + k * k + l * l; }
  Eigen::Vector3d cartesian() const;  // 1/nm
  ReciprocalVector negated() const { return {-h, -k, -l, a}; }

  friend bool operator==(const ReciprocalVector& p, const ReciprocalVector& q) {
    return p.h == q.h && p.k == q.k && p.l == q.l;
  }
  // canonical order: shell (norm), then lexicographic in (h,k,l)
  friend bool operator<(const ReciprocalVector& p, const ReciprocalVector& q) {
    if (p.norm_sq() != q.norm_sq()) return p.norm_sq() < q.norm_sq();
    if (p.h != q.h) return p.h < q.h;
    if (p.k != q.k) return p.k < q.k;
    return p.l < q.l;
  }
};

// All bcc reciprocal vectors with h^2+k^2+l^2 <= cutoff_sq in canonical order.
// cutoff_sq = 12 gives the 59-vector set; 19 gives the 89-vector variant.
std::vector<ReciprocalVector> enumerate_basis(int cutoff_sq, double a = si_lattice_nm);

inline constexpr int default_cutoff_sq = 12;

// Canonically ordered basis with O(1) index lookups.
class BasisSet {
 public:
  explicit BasisSet(std::vector<ReciprocalVector> vectors);
  static BasisSet standard(double a = si_lattice_nm) {
    return BasisSet(enumerate_basis(default_cutoff_sq, a));
  }

  int size() const { return static_cast<int>(vectors_.size()); }
  const ReciprocalVector& at(int i) const { return vectors_[i]; }
  const std::vector<ReciprocalVector>& vectors() const { return vectors_; }
  double lattice_constant() const { return a_; }

  // -1 when (h,k,l) is not in the basis
  int index_of(int h, int k, int l) const;
  int index_of(const ReciprocalVector& v) const { return index_of(v.h, v.k, v.l); }
  // index of -K; the basis is closed under negation so this is always valid
  int negated_index(int i) const { return neg_index_[i]; }

 private:
  std::vector<ReciprocalVector> vectors_;
  std::unordered_map<long long, int> lookup_;
  std::vector<int> neg_index_;
  double a_;
};

// Element of the Delta group (wavevectors along Gamma->X), 8 elements,
// isomorphic to C4v.  The point part acts on (h,k); K_z is always fixed.
// Glide elements carry the fractional translation (a/4)(1,1,1).
struct GroupElement {
  std::string name;
  Eigen::Matrix2i point_part;
  bool has_glide = false;
};

const std::array<GroupElement, 8>& delta_group();

// g1*g2 (apply g2 first); closed on the 8 elements
const GroupElement& compose(const GroupElement& g1, const GroupElement& g2);

// Image of K under the point part, together with the representation phase:
// 1 for pure point operations, exp[i (a/4) (W K).(1,1,1)] = i^(h'+k'+l')
// for glide operations.  The phase is an exact 4th root of unity.
struct GroupAction {
  ReciprocalVector image;
  Complex phase;
};
GroupAction apply_group_element(const GroupElement& g, const ReciprocalVector& K);

enum class OrbitClassLabel { A1, A2, A3, A4, B1, B2, B3 };

const char* orbit_class_name(OrbitClassLabel c);
int expected_orbit_size(OrbitClassLabel c);
inline constexpr std::array<OrbitClassLabel, 7> all_orbit_classes = {
    OrbitClassLabel::A1, OrbitClassLabel::A2, OrbitClassLabel::A3, OrbitClassLabel::A4,
    OrbitClassLabel::B1, OrbitClassLabel::B2, OrbitClassLabel::B3};

// Classification by the in-plane integer labels (see the orbit taxonomy of
// the Delta group).  A sublattice (h,k,l even, n_i = h_i/2): A1 origin,
// A2 axes, A3 diagonals, A4 general.  B sublattice (odd, labels n_i+1/2):
// B1 diagonals, B2/B3 general with n_x+n_y even/odd.
OrbitClassLabel classify_orbit(const ReciprocalVector& K);

// Orbit of K under all 8 group elements, in canonical order.
std::pair<OrbitClassLabel, std::vector<ReciprocalVector>> orbit_of(const ReciprocalVector& K);

}  // namespace ww

#endif
