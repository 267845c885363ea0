#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "phlat/basis.hpp"
#include "phlat/rng.hpp"
#include "phlat/sparse.hpp"

namespace phlat {

/// Model parameters of the rotating-frame Hamiltonian
///   H = Delta sigma_z + sum_j (b_j^dag b_{j+1} G_{j-1} + h.c.),
/// with qubit-valued hop matrices
///   G_j = i g (cos(2 pi j/3) sigma_x + sin(2 pi j/3) sigma_y + i sigma_z).
/// The lab frame adds omega * N_hat to the diagonal.
struct ModelParams {
  double g = 1.0;
  double delta = 0.0;  // qubit detuning Delta
  double omega = 0.0;  // bare cavity frequency (lab frame only)
  int N = 0;           // photon-number sector
};

enum class Frame { rotating, lab };

enum class PerturbationKind { none, cavity_frequency, coupling_generic, coupling_p_symmetric };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::none;
  double strength = 0.0;  // half-width of the uniform draws
  std::uint64_t seed = 0;
};

/// One concrete disorder draw.
///  - delta_omega: cavity frequency shifts, dH = sum_j delta_omega_j n_j
///  - delta_g[j-1]: complex vector dg_j with dH = sum_a b_a^dag b_{a+1} (dg_{a-1} . sigma) + h.c.
struct PerturbationRealization {
  std::array<double, 3> delta_omega{0.0, 0.0, 0.0};
  std::array<Eigen::Vector3cd, 3> delta_g{Eigen::Vector3cd::Zero(), Eigen::Vector3cd::Zero(),
                                          Eigen::Vector3cd::Zero()};
  bool any() const {
    for (double w : delta_omega)
      if (w != 0.0) return true;
    for (const auto& v : delta_g)
      if (v.squaredNorm() != 0.0) return true;
    return false;
  }
};

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, cx(0, -1), cx(0, 1), 0;
  return m;
}
inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

/// G_j for j in {1,2,3}; explicitly
///   G_j = [[-g, i g e^{-i phi_j}], [i g e^{i phi_j}, g]],  phi_j = 2 pi j / 3.
inline Eigen::Matrix2cd qubit_coupling(int j, double g) {
  if (j < 1 || j > 3) throw config_error("qubit_coupling: j must be in 1..3");
  const double phi = 2.0 * pi * double(j) / 3.0;
  Eigen::Matrix2cd m;
  m << -g, iu * g * std::exp(cx(0.0, -phi)), iu * g * std::exp(cx(0.0, phi)), g;
  return m;
}

/// v . sigma for a complex 3-vector v.
inline Eigen::Matrix2cd dot_sigma(const Eigen::Vector3cd& v) {
  Eigen::Matrix2cd m;
  m << v[2], v[0] - iu * v[1], v[0] + iu * v[1], -v[2];
  return m;
}

/// Circulation period T = 4 pi / (sqrt(3) |g|).
inline double circulation_period(double g) {
  if (g == 0.0) throw config_error("circulation_period: g must be nonzero");
  return 4.0 * pi / (std::sqrt(3.0) * std::abs(g));
}

/// Draw one disorder realization.  Draw order is part of the format:
///  - cavity_frequency: delta_omega_1, _2, _3 ~ U[-s, s]
///  - coupling_generic: for j = 1..3, for axis = x,y,z: Re then Im ~ U[-s, s]
///  - coupling_p_symmetric: for j = 1..3: Im dg_x, Im dg_y, Re dg_z ~ U[-s, s]
///    (the components that must vanish to preserve the P anti-symmetry are
///    never drawn)
inline PerturbationRealization sample_perturbation(const PerturbationSpec& spec,
                                                   std::uint64_t stream = 0) {
  PerturbationRealization out;
  if (spec.kind == PerturbationKind::none || spec.strength == 0.0) return out;
  if (spec.strength < 0.0) throw config_error("sample_perturbation: strength must be >= 0");
  pcg64 rng(spec.seed, stream);
  const double s = spec.strength;
  switch (spec.kind) {
    case PerturbationKind::cavity_frequency:
      for (int j = 0; j < 3; ++j) out.delta_omega[std::size_t(j)] = rng.symmetric(s);
      break;
    case PerturbationKind::coupling_generic:
      for (int j = 0; j < 3; ++j)
        for (int a = 0; a < 3; ++a) {
          const double re = rng.symmetric(s);
          const double im = rng.symmetric(s);
          out.delta_g[std::size_t(j)][a] = cx(re, im);
        }
      break;
    case PerturbationKind::coupling_p_symmetric:
      for (int j = 0; j < 3; ++j) {
        const double ix = rng.symmetric(s);
        const double iy = rng.symmetric(s);
        const double rz = rng.symmetric(s);
        out.delta_g[std::size_t(j)][0] = cx(0.0, ix);
        out.delta_g[std::size_t(j)][1] = cx(0.0, iy);
        out.delta_g[std::size_t(j)][2] = cx(rz, 0.0);
      }
      break;
    case PerturbationKind::none:
      break;
  }
  return out;
}

/// Sector Hamiltonian.  Hop a (0-based) creates on cavity a and annihilates
/// on cavity a+1 with qubit matrix G_{a-1} (1-based: G_3, G_1, G_2 for
/// a = 0, 1, 2); Bose factor sqrt((n_a + 1) n_{a+1}).  Block construction
/// never leaves the sector, so [H, N_hat] = 0 holds exactly.
inline SparseOperator build_hamiltonian(const SectorBasis& basis, const ModelParams& params,
                                        const PerturbationRealization& pert,
                                        Frame frame = Frame::rotating) {
  const int D = basis.size();
  std::vector<Triplet> ts;
  ts.reserve(std::size_t(D) * 14);

  std::array<Eigen::Matrix2cd, 3> hop;  // hop[a] = G_{jm(a)} + dg_{jm(a)} . sigma
  for (int a = 0; a < 3; ++a) {
    const int jm = ((a + 2) % 3) + 1;
    hop[std::size_t(a)] =
        qubit_coupling(jm, params.g) + dot_sigma(pert.delta_g[std::size_t(jm - 1)]);
  }

  for (int c = 0; c < D; ++c) {
    const FockLabel& l = basis.label(c);
    const int sc = l.spin > 0 ? 0 : 1;

    double diag = params.delta * double(l.spin);
    if (frame == Frame::lab) diag += params.omega * double(basis.N());
    for (int j = 0; j < 3; ++j) diag += pert.delta_omega[std::size_t(j)] * double(l.n[std::size_t(j)]);
    if (diag != 0.0) ts.push_back({c, c, cx(diag, 0.0)});

    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3;
      if (l.n[std::size_t(b)] == 0) continue;
      FockLabel tgt = l;
      tgt.n[std::size_t(a)] += 1;
      tgt.n[std::size_t(b)] -= 1;
      const double bose =
          std::sqrt(double(l.n[std::size_t(a)] + 1) * double(l.n[std::size_t(b)]));
      for (int sr = 0; sr < 2; ++sr) {
        tgt.spin = (sr == 0) ? +1 : -1;
        const cx amp = bose * hop[std::size_t(a)](sr, sc);
        if (amp == cx(0.0, 0.0)) continue;
        const int r = basis.index_of(tgt);
        ts.push_back({r, c, amp});
        ts.push_back({c, r, std::conj(amp)});
      }
    }
  }
  return SparseOperator::from_triplets(D, std::move(ts));
}

inline SparseOperator build_hamiltonian(const SectorBasis& basis, const ModelParams& params,
                                        const PerturbationSpec& spec = {},
                                        Frame frame = Frame::rotating) {
  return build_hamiltonian(basis, params, sample_perturbation(spec), frame);
}

/// n_j as a diagonal operator (j in 1..3).
inline SparseOperator number_op(const SectorBasis& basis, int j) {
  if (j < 1 || j > 3) throw config_error("number_op: j must be in 1..3");
  Eigen::VectorXd d(basis.size());
  for (int i = 0; i < basis.size(); ++i) d[i] = double(basis.label(i).n[std::size_t(j - 1)]);
  return SparseOperator::diagonal(d);
}

/// d = sqrt(3/2) min_j n_j as a diagonal operator.
inline SparseOperator edge_distance_op(const SectorBasis& basis) {
  Eigen::VectorXd d(basis.size());
  for (int i = 0; i < basis.size(); ++i) d[i] = edge_distance(basis.label(i));
  return SparseOperator::diagonal(d);
}

/// Current into cavity j: J_j = i [H, n_j].  With diagonal n_j the entries
/// are i H_rc (n_j(c) - n_j(r)).
inline SparseOperator current_op(const SectorBasis& basis, const SparseOperator& H, int j) {
  if (j < 1 || j > 3) throw config_error("current_op: j must be in 1..3");
  std::vector<Triplet> ts;
  auto hts = H.to_triplets();
  ts.reserve(hts.size());
  for (const auto& t : hts) {
    const double dn = double(basis.label(t.c).n[std::size_t(j - 1)]) -
                      double(basis.label(t.r).n[std::size_t(j - 1)]);
    if (dn != 0.0) ts.push_back({t.r, t.c, iu * t.v * dn});
  }
  return SparseOperator::from_triplets(basis.size(), std::move(ts));
}

/// Circulation C = 1/2 sum_{abc} eps_{abc} n_a J_b u_c + h.c. with
/// u = (1,1,1)/sqrt(3).  Assembled as the symmetrized product
/// (2 sqrt(3))^{-1} sum over cyclic pairs s_ab (n_a J_b + J_b n_a).
inline SparseOperator circulation_op(const SectorBasis& basis, const SparseOperator& H) {
  const double w = 1.0 / (2.0 * std::sqrt(3.0));
  std::vector<Triplet> ts;
  // (a, b, sign) with eps_{ab.} summed against u: +1 on cyclic pairs.
  const std::array<std::array<int, 3>, 6> pairs{{{1, 2, +1},
                                                 {2, 3, +1},
                                                 {3, 1, +1},
                                                 {2, 1, -1},
                                                 {3, 2, -1},
                                                 {1, 3, -1}}};
  for (const auto& p : pairs) {
    const int a = p[0], b = p[1];
    const double s = double(p[2]);
    const SparseOperator Jb = current_op(basis, H, b);
    for (const auto& t : Jb.to_triplets()) {
      const double na = double(basis.label(t.r).n[std::size_t(a - 1)]) +
                        double(basis.label(t.c).n[std::size_t(a - 1)]);
      ts.push_back({t.r, t.c, w * s * na * t.v});
    }
  }
  return SparseOperator::from_triplets(basis.size(), std::move(ts));
}

/// C3 rotation: Fock permutation (n1,n2,n3) -> (n3,n1,n2) tensored with the
/// qubit rotation exp(-i pi sigma_z / 3).  U^3 = -1.
inline SparseOperator c3_unitary(const SectorBasis& basis) {
  std::vector<Triplet> ts;
  ts.reserve(std::size_t(basis.size()));
  const cx ph_up = std::exp(cx(0.0, -pi / 3.0));
  const cx ph_dn = std::exp(cx(0.0, +pi / 3.0));
  for (int c = 0; c < basis.size(); ++c) {
    const FockLabel& l = basis.label(c);
    FockLabel tgt;
    tgt.n = {l.n[2], l.n[0], l.n[1]};
    tgt.spin = l.spin;
    ts.push_back({basis.index_of(tgt), c, l.spin > 0 ? ph_up : ph_dn});
  }
  return SparseOperator::from_triplets(basis.size(), std::move(ts));
}

/// Residual of the antiunitary anti-symmetry P = sigma_x K, which obeys
/// P H P^{-1} = -H for the clean rotating-frame Hamiltonian:
/// returns || sigma_x H^* sigma_x + H ||_max.  Relies on the basis ordering
/// contract (spin innermost), so it needs no basis argument.
inline double p_antisymmetry_residual(const SparseOperator& H) {
  std::vector<Triplet> ts;
  auto hts = H.to_triplets();
  ts.reserve(2 * hts.size());
  for (const auto& t : hts) {
    ts.push_back(t);
    const int r = t.r + SectorBasis::spin_of_index(t.r);  // toggle spin bit
    const int c = t.c + SectorBasis::spin_of_index(t.c);
    ts.push_back({r, c, std::conj(t.v)});
  }
  return SparseOperator::from_triplets(H.dim(), std::move(ts)).max_abs();
}

/// Qubit expectation values (sigma_x, sigma_y, sigma_z) for a state on any
/// basis that stores spin innermost (+1 at even indices).
inline Eigen::Vector3d sigma_expectations(const Eigen::VectorXcd& psi) {
  if (psi.size() % 2 != 0) throw config_error("sigma_expectations: odd dimension");
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (int k = 0; 2 * k + 1 < psi.size(); ++k) {
    const cx up = psi[2 * k], dn = psi[2 * k + 1];
    const cx cross = std::conj(up) * dn;
    sx += 2.0 * cross.real();
    sy += 2.0 * cross.imag();
    sz += std::norm(up) - std::norm(dn);
  }
  return {sx, sy, sz};
}

}  // namespace phlat
