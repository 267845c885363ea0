#pragma once
// Externally driven device: a Lorentzian pulse loads cavity 3, and two
// detector cavities tap cavities 1 and 2 through non-reciprocal couplings.
// Evolves the time-dependent, generally non-Hermitian Schroedinger equation
// and reports per-mode populations and the detector imbalance.
//
// All quantities are computed in the frame rotating at the common resonance
// frequency omega; the transform conserves every reported observable and
// turns the drive into its real Lorentzian envelope.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <phlat/common.hpp>
#include <phlat/operators.hpp>
#include <phlat/sparse.hpp>

namespace phlat {

/// Lab-frame drive amplitude: a Lorentzian pulse of weight F0 centred at
/// t = 0, carried at the resonance frequency.  Integrated over all time it
/// deposits F0; a run starting at t = 0 catches half the pulse.
inline cx drive_envelope(double t, cx f0, double sigma_pulse, double omega) {
  if (sigma_pulse <= 0.0) throw config_error("drive_envelope: sigma_pulse must be positive");
  return f0 * sigma_pulse * std::exp(iu * omega * t) / (pi * (t * t + sigma_pulse * sigma_pulse));
}

struct RouterConfig {
  cx f0 = 2.0;               // pulse weight; deposits |f0|^2/4 photons from t = 0
  double sigma_pulse = 0.1;  // pulse width, must be << circulation period
  double omega = 1.0;        // common resonance frequency of all five modes
  double r_in = 0.02;        // detector -> cavity back-coupling
  double r_out = 2.0;        // cavity -> detector coupling; >= r_in
  double g = 1.0;
  std::array<int, 5> cutoffs{6, 6, 6, 6, 6};  // per-mode n_max: cavities 1..3, D1, D2
  double t_final = 20.0;
  double dt = 0.05;          // output sample spacing
  double step_tol = 1e-8;    // integrator relative error per step
  double leak_tol = 1e-3;    // max population at a core cavity's top level
  double floor_tol = 1e-8;   // imbalance is 0 while (nD1+nD2)/norm^2 is below this
};

struct RouterSeries {
  std::vector<double> times;
  Eigen::Matrix3Xd core;        // <n_1..3>, unnormalized expectation values
  Eigen::Matrix2Xd detectors;   // <n_D1>, <n_D2>
  std::vector<double> imbalance;
  std::vector<double> norm;
};

namespace detail {

/// Five boson modes with independent cutoffs plus the qubit, spin innermost.
class RouterBasis {
 public:
  explicit RouterBasis(const std::array<int, 5>& cutoffs) : cutoffs_(cutoffs) {
    dim_ = 2;
    for (int m = 4; m >= 0; --m) {
      stride_[std::size_t(m)] = dim_;
      dim_ *= cutoffs_[std::size_t(m)] + 1;
    }
  }

  int dim() const { return dim_; }
  int cutoff(int mode) const { return cutoffs_[std::size_t(mode)]; }

  int occupation(int index, int mode) const {
    return index / stride_[std::size_t(mode)] % (cutoffs_[std::size_t(mode)] + 1);
  }
  int stride(int mode) const { return stride_[std::size_t(mode)]; }
  int spin_slot(int index) const { return index % 2; }

  /// Index shifted by one photon in `mode`, or -1 past the cutoff.
  int raised(int index, int mode) const {
    if (occupation(index, mode) >= cutoffs_[std::size_t(mode)]) return -1;
    return index + stride_[std::size_t(mode)];
  }

 private:
  std::array<int, 5> cutoffs_;
  std::array<int, 5> stride_{};
  int dim_ = 0;
};

inline SparseOperator router_static(const RouterBasis& basis, const RouterConfig& cfg) {
  std::vector<Triplet> ts;
  ts.reserve(std::size_t(basis.dim()) * 18);
  std::array<Eigen::Matrix2cd, 3> hop;
  for (int a = 0; a < 3; ++a) hop[std::size_t(a)] = qubit_coupling(((a + 2) % 3) + 1, cfg.g);

  for (int c = 0; c < basis.dim(); ++c) {
    const int sc = basis.spin_slot(c);
    // chiral hops b_a^dag b_{a+1} among the core cavities
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3;
      const int nb = basis.occupation(c, b);
      if (nb == 0 || basis.occupation(c, a) >= basis.cutoff(a)) continue;
      const int target = c + basis.stride(a) - basis.stride(b);
      const double bose = std::sqrt(double(basis.occupation(c, a) + 1) * double(nb));
      for (int sr = 0; sr < 2; ++sr) {
        const cx amp = bose * hop[std::size_t(a)](sr, sc);
        if (amp == cx(0.0, 0.0)) continue;
        const int r = target - sc + sr;
        ts.push_back({r, c, amp});
        ts.push_back({c, r, std::conj(amp)});
      }
    }
    // non-reciprocal detector taps: r_out moves a photon out of the core
    for (int pair = 0; pair < 2; ++pair) {
      const int cavity = pair;        // cavity 1 -> D1, cavity 2 -> D2
      const int detector = 3 + pair;
      const int nc = basis.occupation(c, cavity);
      if (nc == 0 || basis.occupation(c, detector) >= basis.cutoff(detector)) continue;
      const double bose = std::sqrt(double(basis.occupation(c, detector) + 1) * double(nc));
      const int r = c + basis.stride(detector) - basis.stride(cavity);
      ts.push_back({r, c, cx(cfg.r_out * bose, 0.0)});
      ts.push_back({c, r, cx(cfg.r_in * bose, 0.0)});
    }
  }
  return SparseOperator::from_triplets(basis.dim(), std::move(ts));
}

/// Hermitian pulse operator f0 b_3^dag + f0* b_3; the evolution scales it by
/// the real rotating-frame envelope.
inline SparseOperator router_pulse(const RouterBasis& basis, cx f0) {
  std::vector<Triplet> ts;
  ts.reserve(std::size_t(basis.dim()) * 2);
  for (int c = 0; c < basis.dim(); ++c) {
    const int target = basis.raised(c, 2);
    if (target < 0) continue;
    const cx amp = f0 * std::sqrt(double(basis.occupation(c, 2) + 1));
    ts.push_back({target, c, amp});
    ts.push_back({c, target, std::conj(amp)});
  }
  return SparseOperator::from_triplets(basis.dim(), std::move(ts));
}

/// One adaptive Dormand-Prince 5(4) segment for y' = f(t, y) on a complex
/// state; k1 is the FSAL slope carried across segments.
template <class RHS>
void dopri5_complex(RHS&& f, Eigen::VectorXcd& y, Eigen::VectorXcd& k1, double t0, double t1,
                    double rel_tol, double& h) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Eigen::Index n = y.size();
  Eigen::VectorXcd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), err(n);
  double t = t0;
  int rejected_in_a_row = 0;
  while (t < t1) {
    h = std::min(h, t1 - t);
    ynew = y + h * (a21 * k1);
    f(t + h / 5.0, ynew, k2);
    ynew = y + h * (a31 * k1 + a32 * k2);
    f(t + 3.0 * h / 10.0, ynew, k3);
    ynew = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + 4.0 * h / 5.0, ynew, k4);
    ynew = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + 8.0 * h / 9.0, ynew, k5);
    ynew = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ynew, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    // Scale-free error norm, built from squared magnitudes only: exactly
    // homogeneous in the state, so a rescaled initial state reproduces the
    // step sequence bit for bit (rescaling by powers of two commutes with
    // every rounding here).
    double ymax2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      ymax2 = std::max({ymax2, std::norm(y[i]), std::norm(ynew[i])});
    const double floor2 = 1e-8 * ymax2;
    const double rel2 = rel_tol * rel_tol;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk2 = rel2 * std::max({std::norm(y[i]), std::norm(ynew[i]), floor2});
      acc += std::norm(err[i]) / sk2;
    }
    const double scaled = std::sqrt(acc / double(n));
    if (scaled <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);
      rejected_in_a_row = 0;
      h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(scaled, 1e-10), -0.2)));
    } else {
      h *= std::max(0.2, 0.9 * std::pow(scaled, -0.2));
      if (++rejected_in_a_row > 60)
        throw numerical_error("dopri5_complex: step size collapsed; the problem is too stiff");
    }
  }
}

}  // namespace detail

inline void validate(const RouterConfig& cfg) {
  if (cfg.sigma_pulse <= 0.0) throw config_error("router: sigma_pulse must be positive");
  if (cfg.g == 0.0) throw config_error("router: g must be nonzero");
  if (cfg.r_in < 0.0 || cfg.r_out < cfg.r_in)
    throw config_error("router: couplings must satisfy r_out >= r_in >= 0");
  for (int c : cfg.cutoffs)
    if (c < 2) throw config_error("router: every mode cutoff must be at least 2");
  if (cfg.t_final <= 0.0 || cfg.dt <= 0.0 || cfg.dt > cfg.t_final)
    throw config_error("router: need 0 < dt <= t_final");
  if (cfg.step_tol <= 0.0 || cfg.leak_tol <= 0.0 || cfg.floor_tol <= 0.0)
    throw config_error("router: tolerances must be positive");
  // the pulse must fit into the driven cavity: Poisson tail above the cutoff
  const double mean = 0.25 * std::norm(cfg.f0);
  double term = std::exp(-mean), cdf = term;
  for (int k = 1; k <= cfg.cutoffs[2]; ++k) {
    term *= mean / double(k);
    cdf += term;
  }
  if (1.0 - cdf > 1e-4)
    throw config_error("router: deposited pulse does not fit below the cavity-3 cutoff");
}

inline RouterSeries evolve_router(const RouterConfig& cfg, const Eigen::VectorXcd& psi0) {
  validate(cfg);
  const detail::RouterBasis basis(cfg.cutoffs);
  if (psi0.size() != basis.dim())
    throw config_error("evolve_router: initial state does not match the basis dimension");
  const SparseOperator h_static = detail::router_static(basis, cfg);
  const SparseOperator pulse = detail::router_pulse(basis, cfg.f0);

  const auto envelope = [&](double t) {
    return cfg.sigma_pulse / (pi * (t * t + cfg.sigma_pulse * cfg.sigma_pulse));
  };
  const auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& out) {
    h_static.apply(y.data(), out.data());
    pulse.apply_add(cx(envelope(t), 0.0), y.data(), out.data());
    out *= -iu;
  };

  const int samples = int(std::floor(cfg.t_final / cfg.dt + 1e-9)) + 1;
  RouterSeries out;
  out.times.resize(std::size_t(samples));
  out.core.resize(3, samples);
  out.detectors.resize(2, samples);
  out.imbalance.resize(std::size_t(samples));
  out.norm.resize(std::size_t(samples));

  Eigen::VectorXcd psi = psi0, k1(basis.dim());
  rhs(0.0, psi, k1);
  double h = std::min(cfg.dt, cfg.sigma_pulse / 10.0);
  bool onset = false;
  for (int k = 0; k < samples; ++k) {
    const double t = k * cfg.dt;
    if (k > 0) detail::dopri5_complex(rhs, psi, k1, (k - 1) * cfg.dt, t, cfg.step_tol, h);

    const double nsq = psi.squaredNorm();
    Eigen::Matrix<double, 5, 1> occ = Eigen::Matrix<double, 5, 1>::Zero();
    std::array<double, 3> boundary{};
    for (int i = 0; i < basis.dim(); ++i) {
      const double p = std::norm(psi[i]);
      for (int m = 0; m < 5; ++m) occ[m] += p * double(basis.occupation(i, m));
      for (int m = 0; m < 3; ++m)
        if (basis.occupation(i, m) == basis.cutoff(m)) boundary[std::size_t(m)] += p;
    }
    for (int m = 0; m < 3; ++m)
      if (boundary[std::size_t(m)] > cfg.leak_tol * nsq)
        throw numerical_error("evolve_router: population reached the cavity " +
                              std::to_string(m + 1) + " cutoff at t = " + std::to_string(t) +
                              "; raise the cutoff");

    out.times[std::size_t(k)] = t;
    out.core.col(k) = occ.head<3>();
    out.detectors.col(k) = occ.tail<2>();
    out.norm[std::size_t(k)] = std::sqrt(nsq);
    const double den = occ[3] + occ[4];
    if (den >= cfg.floor_tol * nsq) {
      onset = true;
      out.imbalance[std::size_t(k)] = (occ[3] - occ[4]) / den;
    } else {
      if (onset)
        throw numerical_error("evolve_router: detector population fell back below the floor");
      out.imbalance[std::size_t(k)] = 0.0;
    }
  }
  return out;
}

/// Default initial state: all five modes in vacuum, qubit along +x.
inline Eigen::VectorXcd router_vacuum(const RouterConfig& cfg) {
  const detail::RouterBasis basis(cfg.cutoffs);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim());
  psi[0] = 1.0 / std::sqrt(2.0);
  psi[1] = 1.0 / std::sqrt(2.0);
  return psi;
}

inline RouterSeries evolve_router(const RouterConfig& cfg) {
  return evolve_router(cfg, router_vacuum(cfg));
}

}  // namespace phlat
