#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "phlat/basis.hpp"
#include "phlat/operators.hpp"
#include "phlat/sparse.hpp"

namespace phlat {

struct SpectrumOptions {
  /// boundary-band membership requires <d>/N at or below this
  double edge_fraction = 0.15;
  /// boundary band keeps |E| <= band_fraction * gap_estimate
  double band_fraction = 0.4;
  /// states with <C>/(g N^2) below this are not part of the chiral band and
  /// mark the bulk onset; the chiral band sits near 0.128 and bulk states
  /// near zero, so the classifier has a wide margin
  double circ_fraction = 0.06;
  /// diagonalize the three C3 symmetry blocks instead of the full matrix
  bool use_c3_blocks = true;
  /// also compute the circulation expectation of every eigenstate
  bool with_circulation = true;
};

struct StateRecord {
  double energy = 0.0;
  double edge_mean = 0.0;  // <d>  (not normalized)
  double circ_mean = 0.0;  // <C>  (not normalized)
  int c3_sector = -1;      // 0,1,2 for eigenvalue exp(i pi (2k+1)/3); -1 if unresolved
};

struct SpectrumResult {
  std::vector<StateRecord> states;  // ascending energy
  /// 2 min |E| over bulk-like states; NaN if no state qualifies as bulk
  double gap_estimate = std::numeric_limits<double>::quiet_NaN();
};

struct BoundaryBandStats {
  int count = 0;
  double edge_mean_over_n = 0.0;   // band average of <d>/N
  double circ_mean_norm = 0.0;     // band average of <C>/(g N^2)
};

namespace detail {

/// Symmetry-adapted orthonormal basis of the C3 sector with eigenvalue
/// lambda_k = exp(i pi (2k+1)/3).  Columns have three entries (one per orbit
/// member) or one entry for the centroid orbit.
inline std::vector<std::vector<std::pair<int, cx>>> c3_block_basis(const SectorBasis& basis,
                                                                   int k) {
  const cx lambda = std::exp(cx(0.0, pi * (2.0 * k + 1.0) / 3.0));
  const cx lb = std::conj(lambda);
  std::vector<std::vector<std::pair<int, cx>>> cols;
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  for (int i = 0; i < basis.size(); ++i) {
    const FockLabel& l = basis.label(i);
    const FockLabel p1{{l.n[2], l.n[0], l.n[1]}, l.spin};
    if (p1.n == l.n) {
      // centroid: U eigenstate with eigenvalue equal to the qubit phase
      const cx ph = l.spin > 0 ? std::exp(cx(0.0, -pi / 3.0)) : std::exp(cx(0.0, pi / 3.0));
      if (std::abs(ph - lambda) < 1e-12) cols.push_back({{i, cx(1.0, 0.0)}});
      continue;
    }
    const FockLabel p2{{l.n[1], l.n[2], l.n[0]}, l.spin};
    const int i1 = basis.index_of(p1), i2 = basis.index_of(p2);
    if (i < i1 && i < i2) {  // orbit representative: smallest index
      const cx ph = l.spin > 0 ? std::exp(cx(0.0, -pi / 3.0)) : std::exp(cx(0.0, pi / 3.0));
      // (1/sqrt3) (|l> + conj(lambda) ph |p1> + conj(lambda)^2 ph^2 |p2>)
      cols.push_back({{i, inv_sqrt3}, {i1, inv_sqrt3 * lb * ph}, {i2, inv_sqrt3 * lb * lb * ph * ph}});
    }
  }
  return cols;
}

}  // namespace detail

/// Dense eigendecomposition of the sector Hamiltonian with per-state edge
/// distance (and optionally circulation) expectations.  With use_c3_blocks the
/// three symmetry sectors are diagonalized independently, which is exact for a
/// C3-symmetric H and roughly an order of magnitude faster; switch it off for
/// disordered Hamiltonians.  g sets the circulation normalization used by the
/// bulk-onset classifier.
inline SpectrumResult analyze_spectrum(const SectorBasis& basis, const SparseOperator& H,
                                       double g, const SpectrumOptions& opt = {}) {
  const int D = basis.size();
  SpectrumResult out;
  out.states.reserve(std::size_t(D));

  Eigen::VectorXd edge_diag(D);
  for (int i = 0; i < D; ++i) edge_diag[i] = edge_distance(basis.label(i));
  SparseOperator C = SparseOperator::identity(1);
  if (opt.with_circulation) C = circulation_op(basis, H);

  auto record_state = [&](double e, const Eigen::VectorXcd& psi, int sector) {
    StateRecord s;
    s.energy = e;
    s.c3_sector = sector;
    double dm = 0.0;
    for (int i = 0; i < D; ++i) dm += edge_diag[i] * std::norm(psi[i]);
    s.edge_mean = dm;
    if (opt.with_circulation) s.circ_mean = std::real(psi.dot(C.apply(psi)));
    out.states.push_back(s);
  };

  if (opt.use_c3_blocks) {
    for (int k = 0; k < 3; ++k) {
      const auto cols = detail::c3_block_basis(basis, k);
      const int Dk = int(cols.size());
      if (Dk == 0) continue;
      // HB = H * B_k, dense D x Dk
      Eigen::MatrixXcd HB(D, Dk);
      {
        Eigen::VectorXcd col = Eigen::VectorXcd::Zero(D);
        for (int c = 0; c < Dk; ++c) {
          for (const auto& [i, v] : cols[std::size_t(c)]) col[i] = v;
          HB.col(c) = H.apply(col);
          for (const auto& [i, v] : cols[std::size_t(c)]) col[i] = cx(0.0, 0.0);
        }
      }
      Eigen::MatrixXcd Hk(Dk, Dk);
      for (int r = 0; r < Dk; ++r)
        for (int c = 0; c < Dk; ++c) {
          cx acc = 0.0;
          for (const auto& [i, v] : cols[std::size_t(r)]) acc += std::conj(v) * HB(i, c);
          Hk(r, c) = acc;
        }
      Hk = cx(0.5, 0.0) * (Hk + Hk.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hk);
      if (es.info() != Eigen::Success) throw numerical_error("analyze_spectrum: block eigensolve failed");
      Eigen::VectorXcd psi(D);
      for (int m = 0; m < Dk; ++m) {
        psi.setZero();
        for (int c = 0; c < Dk; ++c) {
          const cx w = es.eigenvectors()(c, m);
          if (w == cx(0.0, 0.0)) continue;
          for (const auto& [i, v] : cols[std::size_t(c)]) psi[i] += w * v;
        }
        record_state(es.eigenvalues()[m], psi, k);
      }
    }
    if (int(out.states.size()) != D)
      throw numerical_error("analyze_spectrum: C3 blocks do not span the sector");
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.to_dense());
    if (es.info() != Eigen::Success) throw numerical_error("analyze_spectrum: eigensolve failed");
    for (int m = 0; m < D; ++m) record_state(es.eigenvalues()[m], es.eigenvectors().col(m), -1);
  }

  std::sort(out.states.begin(), out.states.end(),
            [](const StateRecord& a, const StateRecord& b) { return a.energy < b.energy; });

  // Bulk onset: the first state that does not belong to the chiral boundary
  // band.  Band-edge bulk states concentrate near the local gap-closing curve
  // close to the boundary, so a distance cut alone cannot see them; the
  // circulation expectation separates the classes sharply.
  const double N = double(basis.N());
  const double circ_norm = g * N * N;
  double min_bulk = std::numeric_limits<double>::infinity();
  for (const auto& s : out.states) {
    const bool far_from_edge = s.edge_mean / N > opt.edge_fraction;
    const bool non_chiral = opt.with_circulation && s.circ_mean / circ_norm < opt.circ_fraction;
    if (far_from_edge || non_chiral) min_bulk = std::min(min_bulk, std::abs(s.energy));
  }
  if (std::isfinite(min_bulk)) out.gap_estimate = 2.0 * min_bulk;
  return out;
}

/// Averages over the boundary band {|E| <= band_fraction * gap, <d>/N <= edge_fraction}.
inline BoundaryBandStats boundary_band_stats(const SpectrumResult& spec, int N, double g,
                                             const SpectrumOptions& opt = {}) {
  BoundaryBandStats st;
  if (!std::isfinite(spec.gap_estimate)) return st;
  const double ecut = opt.band_fraction * spec.gap_estimate;
  double dsum = 0.0, csum = 0.0;
  for (const auto& s : spec.states) {
    if (std::abs(s.energy) > ecut) continue;
    if (s.edge_mean / N > opt.edge_fraction) continue;
    ++st.count;
    dsum += s.edge_mean / N;
    csum += s.circ_mean / (g * double(N) * double(N));
  }
  if (st.count > 0) {
    st.edge_mean_over_n = dsum / st.count;
    st.circ_mean_norm = csum / st.count;
  }
  return st;
}

/// Largest absolute deviation from exact +/-E pairing of a sorted spectrum.
inline double pairing_residual(const SpectrumResult& spec) {
  double r = 0.0;
  const int D = int(spec.states.size());
  for (int i = 0; i < D / 2 + 1 && i < D; ++i)
    r = std::max(r, std::abs(spec.states[std::size_t(i)].energy +
                             spec.states[std::size_t(D - 1 - i)].energy));
  return r;
}

}  // namespace phlat
