#pragma once
// Band topology of the frozen-amplitude lattice model: Bloch vectors, Chern
// numbers by plaquette Berry flux, the local gap/Chern map over the photon
// simplex, and the closed-form boundary-mode path.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <phlat/common.hpp>
#include <phlat/threadpool.hpp>

namespace phlat {

/// Reciprocal primitive cell; both vectors shift every hop phase by a
/// multiple of 2 pi, so all band quantities are periodic under them.
inline Eigen::Vector2d reciprocal_b1() { return {2.0 * pi, 2.0 * pi / std::sqrt(3.0)}; }
inline Eigen::Vector2d reciprocal_b2() { return {0.0, 4.0 * pi / std::sqrt(3.0)}; }

namespace detail {

/// Hop phases theta_j = k . a_j along the three lattice directions
/// a_1 = (-1/2, sqrt3/2), a_2 = (-1/2, -sqrt3/2), a_3 = (1, 0).
inline std::array<double, 3> hop_phases(double kx, double ky) {
  const double r = 0.5 * std::sqrt(3.0) * ky;
  return {-0.5 * kx + r, -0.5 * kx - r, kx};
}

}  // namespace detail

/// Bloch vector of the two-band bulk model; the renormalized qubit splitting
/// m enters only the z component.
inline Eigen::Vector3d bloch_vector(double kx, double ky, double m) {
  const double hx = 0.5 * kx;
  const double hy = 0.5 * std::sqrt(3.0) * ky;
  return {std::sin(kx) + std::sin(hx) * std::cos(hy),
          std::sqrt(3.0) * std::cos(hx) * std::sin(hy),
          m - std::cos(kx) - 2.0 * std::cos(hx) * std::cos(hy)};
}

/// Hop weights f_j = sqrt(n_{j+1} n_{j-1}) frozen at lattice site n.
inline Eigen::Vector3d local_weights(const Eigen::Vector3d& n) {
  return {std::sqrt(n[1] * n[2]), std::sqrt(n[2] * n[0]), std::sqrt(n[0] * n[1])};
}

/// d-vector of the frozen-amplitude two-band Hamiltonian
///   d . sigma = delta sigma_z + sum_j f_j (G_j e^{-i theta_j} + h.c.).
/// bloch_vector(kx, ky, m) equals this at f = (1/2,1/2,1/2), g = 1, delta = m.
inline Eigen::Vector3d local_bloch_vector(double kx, double ky, const Eigen::Vector3d& f,
                                          double g, double delta) {
  const auto th = detail::hop_phases(kx, ky);
  const double s0 = std::sin(th[0]);
  const double s1 = std::sin(th[1]);
  const double s2 = std::sin(th[2]);
  // coupling angles: cos phi_j = (-1/2, -1/2, 1), sin phi_j = (s3h, -s3h, 0)
  const double s3h = 0.5 * std::sqrt(3.0);
  const double dx = -0.5 * (f[0] * s0 + f[1] * s1) + f[2] * s2;
  const double dy = s3h * (f[0] * s0 - f[1] * s1);
  const double dz = f[0] * std::cos(th[0]) + f[1] * std::cos(th[1]) + f[2] * std::cos(th[2]);
  return {2.0 * g * dx, 2.0 * g * dy, delta - 2.0 * g * dz};
}

/// The frozen-amplitude gap closes at an M point once some f_j reaches
/// f_{j+1} + f_{j-1} + delta/(2g); past it the lower band is trivial.
inline bool locally_trivial(const Eigen::Vector3d& f, double g, double delta) {
  if (g == 0.0) throw config_error("locally_trivial: coupling g must be nonzero");
  const double c = delta / (2.0 * g);
  for (int j = 0; j < 3; ++j)
    if (f[j] > f[(j + 1) % 3] + f[(j + 2) % 3] + c) return true;
  return false;
}

namespace detail {

/// Band eigenvector of d . sigma, chart chosen per hemisphere so the spinor
/// norm stays >= sqrt(2) |d|; the upper band is the lower band of -d.
inline Eigen::Vector2cd band_state(Eigen::Vector3d d, bool lower) {
  if (!lower) d = -d;
  const double r = d.norm();
  Eigen::Vector2cd u;
  if (d.z() <= 0.0)
    u << cx(d.z() - r, 0.0), cx(d.x(), d.y());
  else
    u << cx(-d.x(), d.y()), cx(d.z() + r, 0.0);
  return u / u.norm();
}

struct FluxSum {
  std::optional<int> chern;  // empty when the grid detects a closed gap
  double grid_min = 0.0;     // smallest |d| met on the grid
};

/// Plaquette Berry-flux Chern number on a grid x grid discretization of the
/// reciprocal cell. Exactly integer-valued whenever every plaquette flux is
/// resolved; a non-integer total signals an inadmissible grid.
template <class Field>
FluxSum fhs_chern(Field&& d_at, int grid, bool lower, double gap_floor) {
  const Eigen::Vector2d b1 = reciprocal_b1();
  const Eigen::Vector2d b2 = reciprocal_b2();
  const int Q = grid;
  std::vector<Eigen::Vector2cd> u(static_cast<std::size_t>(Q) * Q);
  FluxSum out;
  out.grid_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < Q; ++i) {
    for (int j = 0; j < Q; ++j) {
      const Eigen::Vector2d k = (double(i) * b1 + double(j) * b2) / Q;
      const Eigen::Vector3d d = d_at(k.x(), k.y());
      out.grid_min = std::min(out.grid_min, d.norm());
      u[static_cast<std::size_t>(i) * Q + j] = band_state(d, lower);
    }
  }
  if (!(out.grid_min > gap_floor)) return out;
  const auto at = [&](int i, int j) -> const Eigen::Vector2cd& {
    return u[static_cast<std::size_t>((i + Q) % Q) * Q + (j + Q) % Q];
  };
  // traversal order fixes the sign convention: the lower band carries
  // C = -1 in the central nontrivial window
  double total = 0.0;
  for (int i = 0; i < Q; ++i) {
    for (int j = 0; j < Q; ++j) {
      const auto& a = at(i, j);
      const auto& b = at(i, j + 1);
      const auto& c = at(i + 1, j + 1);
      const auto& e = at(i + 1, j);
      total += std::arg(a.dot(b) * b.dot(c) * c.dot(e) * e.dot(a));
    }
  }
  const double c_raw = total / (2.0 * pi);
  const double c_round = std::round(c_raw);
  if (std::abs(c_raw - c_round) > 1e-3)
    throw numerical_error("plaquette flux sum is not an integer; grid too coarse");
  out.chern = int(c_round);
  return out;
}

/// Minimum of |d| over the reciprocal cell: coarse scan seeded with the
/// high-symmetry points, then a shrinking pattern search (handles the conical
/// minima at band touchings).
template <class Field>
double min_band_norm(Field&& d_at, int grid) {
  const Eigen::Vector2d b1 = reciprocal_b1();
  const Eigen::Vector2d b2 = reciprocal_b2();
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d kbest = Eigen::Vector2d::Zero();
  const auto consider = [&](const Eigen::Vector2d& k) {
    const double v = d_at(k.x(), k.y()).norm();
    if (v < best) {
      best = v;
      kbest = k;
    }
  };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) consider((double(i) * b1 + double(j) * b2) / grid);
  consider({0.0, 0.0});
  consider(0.5 * b1);
  consider(0.5 * b2);
  consider(0.5 * (b1 + b2));
  consider({4.0 * pi / 3.0, 0.0});
  consider({-4.0 * pi / 3.0, 0.0});
  double h = 1.0 / grid;
  int moves = 0;
  while (h > 1e-13 && moves < 500) {
    const Eigen::Vector2d center = kbest;
    const double before = best;
    for (int ds = -1; ds <= 1; ++ds)
      for (int dt = -1; dt <= 1; ++dt)
        if (ds != 0 || dt != 0) consider(center + h * (double(ds) * b1 + double(dt) * b2));
    if (best >= before) h *= 0.5;
    ++moves;
  }
  return best;
}

}  // namespace detail

/// Lower-band Chern number of the bulk model at splitting m. Throws when the
/// grid is too coarse or the band gap closes (m within 1e-6 of a transition).
inline int chern_number(double m, int grid, bool lower = true) {
  if (grid < 24) throw config_error("chern_number: grid must be at least 24");
  // gap closings sit at the high-symmetry points only: Gamma (m = 3),
  // M (m = -1), K (m = -3/2)
  const double sym_min = std::min({std::abs(m - 3.0), std::abs(m + 1.0), std::abs(m + 1.5)});
  if (sym_min <= 1e-6)
    throw config_error("chern_number: band gap closes at this splitting");
  const auto field = [m](double kx, double ky) { return bloch_vector(kx, ky, m); };
  const auto res = detail::fhs_chern(field, grid, lower, 1e-6);
  if (!res.chern)
    throw config_error("chern_number: band gap closes at this splitting");
  return *res.chern;
}

inline int chern_number_upper(double m, int grid) { return chern_number(m, grid, false); }

struct ChernScanPoint {
  double m = 0.0;
  int chern = 0;
  bool gapless = false;  // chern is meaningless when set
};

inline std::vector<ChernScanPoint> chern_scan(const std::vector<double>& splittings, int grid) {
  std::vector<ChernScanPoint> out;
  out.reserve(splittings.size());
  for (const double m : splittings) {
    ChernScanPoint p;
    p.m = m;
    try {
      p.chern = chern_number(m, grid);
    } catch (const config_error&) {
      p.gapless = true;
    }
    out.push_back(p);
  }
  return out;
}

/// One sampled site of the local gap/Chern map. Cells whose gap is closed to
/// numerical precision report chern 0; the gap column identifies them.
struct LocalCell {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  Eigen::Vector3d f = Eigen::Vector3d::Zero();
  double gap = 0.0;
  int chern = 0;
};

inline LocalCell local_cell(const Eigen::Vector3d& n, double g, double delta, int grid = 24) {
  if (grid < 24) throw config_error("local_cell: grid must be at least 24");
  LocalCell cell;
  cell.n = n;
  cell.f = local_weights(n);
  const double scale = 2.0 * std::abs(g) * cell.f.sum() + std::abs(delta);
  if (cell.f.sum() == 0.0) {
    // corner site: the hopping part vanishes identically
    cell.gap = 2.0 * std::abs(delta);
    return cell;
  }
  const auto field = [&](double kx, double ky) {
    return local_bloch_vector(kx, ky, cell.f, g, delta);
  };
  cell.gap = 2.0 * detail::min_band_norm(field, grid);
  const auto res = detail::fhs_chern(field, grid, true, 1e-9 * scale);
  cell.chern = res.chern.value_or(0);
  return cell;
}

/// Samples the simplex sum(n_j) = N at resolution + 1 points per side
/// (resolution = N lands on the integer sites) and evaluates every cell.
inline std::vector<LocalCell> local_phase_map(int N, double g, double delta, int resolution,
                                              int grid, const ThreadPool& pool) {
  if (N < 3) throw config_error("local_phase_map: total photon number must be at least 3");
  if (resolution < 1) throw config_error("local_phase_map: resolution must be positive");
  std::vector<Eigen::Vector3d> sites;
  sites.reserve(static_cast<std::size_t>(resolution + 1) * (resolution + 2) / 2);
  for (int a = 0; a <= resolution; ++a)
    for (int b = 0; a + b <= resolution; ++b)
      sites.push_back(double(N) / resolution *
                      Eigen::Vector3d(double(a), double(b), double(resolution - a - b)));
  std::vector<LocalCell> cells(sites.size());
  pool.parallel_for(sites.size(), [&](std::size_t i) {
    cells[i] = local_cell(sites[i], g, delta, grid);
  });
  return cells;
}

/// Boundary-path occupation profile nu(x) = (1 + 2 cos(2 pi x))^2 / 9;
/// the three shifted copies nu(x - j/3) sum to 1 identically.
inline double boundary_profile(double x) {
  const double c = 1.0 + 2.0 * std::cos(2.0 * pi * x);
  return c * c / 9.0;
}

/// Point on the gap-closing path in occupation fractions, n_j/N = nu(x - j/3).
inline Eigen::Vector3d boundary_path(double x) {
  return {boundary_profile(x - 1.0 / 3.0), boundary_profile(x - 2.0 / 3.0), boundary_profile(x)};
}

/// Implicit form of the gap-closing curve: this vanishes exactly on it.
inline double boundary_curve_residual(const Eigen::Vector3d& n) {
  const double total = n.sum();
  const double p01 = n[0] * n[1];
  const double p12 = n[1] * n[2];
  const double p20 = n[2] * n[0];
  return 2.0 * n[0] * n[1] * n[2] * total - p01 * p01 - p12 * p12 - p20 * p20;
}

struct BoundaryConstants {
  double edge_distance_over_n = 0.0;   // time-averaged <d>/N on the path
  double circulation_over_gn2 = 0.0;   // time-averaged <C>/(g N^2) on the path
};

inline BoundaryConstants lda_boundary_constants() {
  return {1.0 / std::sqrt(6.0) - 3.0 / (2.0 * std::sqrt(2.0) * pi), 2.0 / (9.0 * std::sqrt(3.0))};
}

}  // namespace phlat
