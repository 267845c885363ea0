#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "phlat/common.hpp"

namespace phlat {

/// One basis ket of the three-cavity + qubit problem: photon occupations
/// (n1, n2, n3) and the qubit sigma_z eigenvalue (+1 or -1).
struct FockLabel {
  std::array<int, 3> n{0, 0, 0};
  int spin = +1;

  int total() const { return n[0] + n[1] + n[2]; }

  friend bool operator==(const FockLabel& a, const FockLabel& b) {
    return a.n == b.n && a.spin == b.spin;
  }
};

/// Basis of the fixed-photon-number sector.  The total photon number N is
/// conserved, so every simulation works inside one sector of dimension
/// (N+1)(N+2): (N+1)(N+2)/2 occupation triples times 2 qubit states.
///
/// Ordering contract (stable across versions, relied on by file formats):
/// n1 ascending (outer), then n2 ascending, spin innermost with +1 before
/// -1; n3 = N - n1 - n2 is implicit.
class SectorBasis {
 public:
  static SectorBasis enumerate(int N) {
    if (N < 0) throw config_error("SectorBasis: N must be >= 0");
    SectorBasis b;
    b.N_ = N;
    b.labels_.reserve(std::size_t(N + 1) * std::size_t(N + 2));
    for (int n1 = 0; n1 <= N; ++n1)
      for (int n2 = 0; n2 <= N - n1; ++n2)
        for (int spin : {+1, -1})
          b.labels_.push_back(FockLabel{{n1, n2, N - n1 - n2}, spin});
    return b;
  }

  int N() const { return N_; }
  int size() const { return int(labels_.size()); }
  const FockLabel& label(int i) const { return labels_[std::size_t(i)]; }
  const std::vector<FockLabel>& labels() const { return labels_; }

  /// Inverse of the ordering, in closed form.
  int index_of(const FockLabel& l) const {
    const int n1 = l.n[0], n2 = l.n[1], n3 = l.n[2];
    if (n1 < 0 || n2 < 0 || n3 < 0 || n1 + n2 + n3 != N_)
      throw config_error("SectorBasis::index_of: label outside sector");
    if (l.spin != +1 && l.spin != -1)
      throw config_error("SectorBasis::index_of: spin must be +1 or -1");
    // Rows with first occupation < n1 contribute N+1-k pairs each.
    const int pair = n1 * (N_ + 1) - n1 * (n1 - 1) / 2 + n2;
    return 2 * pair + (l.spin > 0 ? 0 : 1);
  }

  /// Spin of basis state i without a label lookup; the ordering puts spin
  /// innermost, so it is the index parity.
  static int spin_of_index(int i) { return (i % 2 == 0) ? +1 : -1; }

 private:
  int N_ = 0;
  std::vector<FockLabel> labels_;
};

/// Distance from the nearest edge of the triangular occupation lattice,
/// d = sqrt(3/2) * min_j n_j.  Maximal at the centroid: d = sqrt(3/2) N/3.
inline double edge_distance(const std::array<int, 3>& n) {
  return std::sqrt(1.5) * double(std::min({n[0], n[1], n[2]}));
}

inline double edge_distance(const FockLabel& l) { return edge_distance(l.n); }

/// Orthogonal coordinates in the constant-N plane:
/// x = (n1 - n2)/sqrt(2), y = (n1 + n2 - 2 n3)/sqrt(6).
/// The corners (N,0,0), (0,N,0), (0,0,N) map to an equilateral triangle of
/// side N*sqrt(2).
inline std::array<double, 2> plane_coords(const std::array<int, 3>& n) {
  return {(n[0] - n[1]) / std::sqrt(2.0),
          (n[0] + n[1] - 2.0 * n[2]) / std::sqrt(6.0)};
}

inline std::array<double, 2> plane_coords(const FockLabel& l) {
  return plane_coords(l.n);
}

}  // namespace phlat
