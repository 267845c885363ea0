#pragma once
// Classical limit of the lattice model: spin-boson equations of motion, an
// embedded Dormand-Prince 5(4) integrator, the self-consistent circulating
// point, and trajectory-averaged boundary observables.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <phlat/common.hpp>
#include <phlat/dynamics.hpp>

namespace phlat {

/// Classical spin-boson state: complex cavity amplitudes (|b_j|^2 photons)
/// and a unit spin vector.
struct ClassicalState {
  Eigen::Vector3cd b = Eigen::Vector3cd::Zero();
  Eigen::Vector3d sigma = Eigen::Vector3d::UnitX();
};

namespace detail {

/// Coupling scalar G_j = g (i cos phi_j s_x + i sin phi_j s_y - s_z),
/// phi_j = 2 pi j / 3, evaluated on a classical spin (1-based j).
inline cx coupling_scalar(int j, double g, const Eigen::Vector3d& s) {
  const double phi = 2.0 * pi * j / 3.0;
  return cx(-g * s.z(), g * (std::cos(phi) * s.x() + std::sin(phi) * s.y()));
}

}  // namespace detail

/// H = delta s_z + sum_j 2 Re(b*_{j+1} b_{j-1} G_j); conserved along the flow.
inline double classical_energy(const ClassicalState& st, double g, double delta) {
  double h = delta * st.sigma.z();
  for (int j = 1; j <= 3; ++j) {
    const cx hop = std::conj(st.b[j % 3]) * st.b[(j + 1) % 3];
    h += 2.0 * std::real(hop * detail::coupling_scalar(j, g, st.sigma));
  }
  return h;
}

/// Hamilton equations: db_j/dt = -i (b_{j+1} G_{j-1} + b_{j-1} G*_{j+1}),
/// dsigma/dt = sigma x B with B = -2 grad_sigma H.
inline ClassicalState eom_derivative(const ClassicalState& st, double g, double delta) {
  ClassicalState d;
  const cx G1 = detail::coupling_scalar(1, g, st.sigma);
  const cx G2 = detail::coupling_scalar(2, g, st.sigma);
  const cx G3 = detail::coupling_scalar(3, g, st.sigma);
  const cx G[3] = {G1, G2, G3};
  const auto bj = [&](int j) { return st.b[(j + 2) % 3]; };  // 1-based access
  const auto Gj = [&](int j) { return G[(j + 2) % 3]; };
  for (int j = 1; j <= 3; ++j)
    d.b[j - 1] = -iu * (bj(j + 1) * Gj(j + 2) + bj(j + 2) * std::conj(Gj(j + 1)));
  Eigen::Vector3d field(0.0, 0.0, -2.0 * delta);
  for (int j = 1; j <= 3; ++j) {
    const cx hop = std::conj(bj(j + 1)) * bj(j + 2);  // b*_{j+1} b_{j-1}
    const double phi = 2.0 * pi * j / 3.0;
    field.x() += 4.0 * g * std::cos(phi) * std::imag(hop);
    field.y() += 4.0 * g * std::sin(phi) * std::imag(hop);
    field.z() += 4.0 * g * std::real(hop);
  }
  d.sigma = st.sigma.cross(field);
  return d;
}

/// Cavity occupations n_j = |b_j|^2.
inline Eigen::Vector3d occupations(const ClassicalState& st) {
  return st.b.cwiseAbs2();
}

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<ClassicalState> states;
};

namespace detail {

using Vec9 = Eigen::Matrix<double, 9, 1>;

inline Vec9 pack_state(const ClassicalState& s) {
  Vec9 y;
  for (int i = 0; i < 3; ++i) {
    y[i] = s.b[i].real();
    y[i + 3] = s.b[i].imag();
  }
  y.segment<3>(6) = s.sigma;
  return y;
}

inline ClassicalState unpack_state(const Vec9& y) {
  ClassicalState s;
  for (int i = 0; i < 3; ++i) s.b[i] = cx(y[i], y[i + 3]);
  s.sigma = y.segment<3>(6);
  return s;
}

/// One adaptive Dormand-Prince 5(4) leg from t0 to t1 (forward only); the
/// fifth-order solution is propagated and the embedded fourth-order
/// difference controls the step.
template <class RHS>
void dopri5_advance(RHS&& f, Vec9& y, double t0, double t1, double tol) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                          e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                          e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
  const double span = t1 - t0;
  if (span <= 0.0) return;
  double t = t0;
  double h = span * 1e-2;
  Vec9 k1 = f(y);
  while (t < t1) {
    const double hstep = std::min(h, t1 - t);
    const Vec9 k2 = f(Vec9(y + hstep * (a21 * k1)));
    const Vec9 k3 = f(Vec9(y + hstep * (a31 * k1 + a32 * k2)));
    const Vec9 k4 = f(Vec9(y + hstep * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vec9 k5 = f(Vec9(y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vec9 k6 = f(Vec9(y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Vec9 y5 = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec9 k7 = f(y5);
    const Vec9 defect = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (int i = 0; i < 9; ++i) {
      // local budget sits two decades under tol: accumulated drift over a
      // multi-period run scales linearly with the per-step budget
      const double sc = 0.01 * tol * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
      err += (defect[i] / sc) * (defect[i] / sc);
    }
    err = std::sqrt(err / 9.0);
    if (err <= 1.0) {
      t += hstep;
      y = y5;
      k1 = k7;
      h = hstep * std::clamp(0.8 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 5.0);
    } else {
      h = hstep * std::clamp(0.8 * std::pow(err, -0.2), 0.1, 0.9);
    }
    if (h < 1e-14 * span)
      throw numerical_error("classical integrator: step size underflow");
  }
}

}  // namespace detail

/// Integrates the classical flow through the given increasing sample times;
/// states[k] is the solution at times[k] (state0 belongs to times.front()).
inline ClassicalTrajectory integrate(const ClassicalState& state0, double g, double delta,
                                     std::span<const double> times, double tol = 1e-10) {
  if (tol <= 0.0) throw config_error("integrate: tolerance must be positive");
  if (times.empty()) throw config_error("integrate: no sample times");
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    if (!(times[k + 1] > times[k]))
      throw config_error("integrate: sample times must be strictly increasing");
  ClassicalTrajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  traj.states.push_back(state0);
  detail::Vec9 y = detail::pack_state(state0);
  const auto rhs = [&](const detail::Vec9& v) {
    return detail::pack_state(eom_derivative(detail::unpack_state(v), g, delta));
  };
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    detail::dopri5_advance(rhs, y, times[k], times[k + 1], tol);
    traj.states.push_back(detail::unpack_state(y));
  }
  return traj;
}

/// Self-consistent circulating point at detuning epsilon = 4 delta/(sqrt3 g) - 1.
struct FixedPointSolution {
  double b_z = 0.0;           // precession rate of the co-rotating field
  Eigen::Vector3d x0 = Eigen::Vector3d::Zero();  // real cavity amplitudes
  double epsilon = 0.0;
  double period = 0.0;        // 2 pi / |b_z|
  double residual = 0.0;      // defect of the self-consistency equation at b_z

  ClassicalState initial_state() const {
    ClassicalState s;
    s.b = x0.cast<cx>();
    s.sigma = Eigen::Vector3d::UnitX();
    return s;
  }
};

/// Detuning for a given epsilon: delta = (sqrt3 g / 4)(1 + epsilon).
inline double detuning_for_epsilon(double epsilon, double g) {
  return std::sqrt(3.0) * g / 4.0 * (1.0 + epsilon);
}

/// 1/N series for the circulating period at detuning epsilon.
inline double period_series(double n, double epsilon, double g) {
  const double t_inf = 4.0 * pi / (std::sqrt(3.0) * std::abs(g));
  const double e = epsilon;
  return t_inf * (1.0 - 3.0 * std::sqrt(3.0) / 16.0 * e / n +
                  9.0 / 512.0 * e * (6.0 + 5.0 * e) / (n * n));
}

/// Solves b_z = -2 delta - 2 g n + 6 g n b_z^2 / (b_z^2 + 3 g^2 / 2) by
/// bisection in a bracket around -sqrt3 g / 2 (the exact epsilon = 0 root),
/// then polishes with Newton steps. The co-rotating initial amplitudes are
/// x0 = -sign(g) sqrt(n) (b_z u + w0) / |b_z u + w0| with w0 = g(1/2,1/2,-1),
/// the spin starting along +x.
inline FixedPointSolution solve_circulating_point(double n, double epsilon, double g) {
  if (g == 0.0) throw config_error("solve_circulating_point: coupling g must be nonzero");
  if (n <= 0.0) throw config_error("solve_circulating_point: photon number must be positive");
  if (std::abs(epsilon) > 0.5)
    throw config_error("solve_circulating_point: detuning parameter must satisfy |epsilon| <= 0.5");
  const double delta = detuning_for_epsilon(epsilon, g);
  const double omega0 = -std::sqrt(3.0) * g / 2.0;
  const double omega_v2 = 1.5 * g * g;
  const auto defect = [&](double b) {
    return b + 2.0 * delta + 2.0 * g * n - 6.0 * g * n * b * b / (b * b + omega_v2);
  };
  const double half_width = 1.0 / std::sqrt(n);
  double lo = omega0 * (1.0 - half_width);
  double hi = omega0 * (1.0 + half_width);
  if (lo > hi) std::swap(lo, hi);
  double flo = defect(lo);
  double fhi = defect(hi);
  if (flo == 0.0) hi = lo;
  else if (fhi == 0.0) lo = hi;
  else if (flo * fhi > 0.0)
    throw numerical_error("solve_circulating_point: no self-consistent root in bracket");
  else {
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::abs(omega0); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = defect(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
  }
  double root = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double den = root * root + omega_v2;
    const double slope = 1.0 - 12.0 * g * n * root * omega_v2 / (den * den);
    if (slope == 0.0) break;
    root -= defect(root) / slope;
  }
  FixedPointSolution sol;
  sol.b_z = root;
  sol.epsilon = epsilon;
  sol.residual = std::abs(defect(root));
  sol.period = 2.0 * pi / std::abs(root);
  const Eigen::Vector3d u = Eigen::Vector3d::Constant(1.0 / std::sqrt(3.0));
  const Eigen::Vector3d w0 = g * Eigen::Vector3d(0.5, 0.5, -1.0);
  const Eigen::Vector3d axis = root * u + w0;
  sol.x0 = -(g > 0 ? 1.0 : -1.0) * std::sqrt(n) * axis / axis.norm();
  return sol;
}

/// Circulation period from upward zero crossings of sigma_x.
inline double measure_period(const ClassicalTrajectory& traj) {
  std::vector<double> sx(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) sx[k] = traj.states[k].sigma.x();
  return period_from_upward_crossings(traj.times, sx);
}

/// Cycle averages over a trajectory spanning exactly one period.
struct TrajectoryAverages {
  double edge_distance = 0.0;  // mean of sqrt(3/2) min_j n_j
  double circulation = 0.0;    // mean of (n x dn/dt) . u
  double photons = 0.0;        // conserved total n
};

inline TrajectoryAverages trajectory_averages(const ClassicalTrajectory& traj, double g,
                                              double delta) {
  if (traj.times.size() < 8)
    throw config_error("trajectory_averages: too few samples for a cycle average");
  const Eigen::Vector3d u = Eigen::Vector3d::Constant(1.0 / std::sqrt(3.0));
  const Eigen::Vector3d n_first = occupations(traj.states.front());
  const Eigen::Vector3d n_last = occupations(traj.states.back());
  const double total = n_first.sum();
  if ((n_last - n_first).norm() > 0.05 * std::max(total, 1.0))
    throw config_error("trajectory_averages: trajectory does not close into one period");
  const std::size_t m = traj.times.size();
  std::vector<double> dval(m);
  std::vector<double> cval(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& st = traj.states[k];
    const Eigen::Vector3d n = occupations(st);
    const ClassicalState d = eom_derivative(st, g, delta);
    Eigen::Vector3d ndot;
    for (int j = 0; j < 3; ++j) ndot[j] = 2.0 * std::real(std::conj(st.b[j]) * d.b[j]);
    dval[k] = std::sqrt(1.5) * n.minCoeff();
    cval[k] = n.cross(ndot).dot(u);
  }
  const double span = traj.times.back() - traj.times.front();
  TrajectoryAverages avg;
  avg.photons = total;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double w = 0.5 * (traj.times[k + 1] - traj.times[k]) / span;
    avg.edge_distance += w * (dval[k] + dval[k + 1]);
    avg.circulation += w * (cval[k] + cval[k + 1]);
  }
  return avg;
}

}  // namespace phlat
