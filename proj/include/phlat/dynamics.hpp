#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "phlat/basis.hpp"
#include "phlat/operators.hpp"
#include "phlat/sparse.hpp"
#include "phlat/threadpool.hpp"

namespace phlat {

struct KrylovOptions {
  int max_subspace = 30;
  double step_tol = 1e-10;  // per-step local error target
  /// below this dimension a cached eigendecomposition replaces Krylov stepping
  int dense_threshold = 600;
};

/// Unitary propagator for a fixed Hermitian operator.  Small problems use a
/// cached dense eigendecomposition; larger ones an adaptive Lanczos
/// exponential with multi-sample reconstruction inside accepted steps.
class Propagator {
 public:
  explicit Propagator(const SparseOperator& H, KrylovOptions opt = {}) : H_(H), opt_(opt) {
    if (H_.dim() <= opt_.dense_threshold) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H_.to_dense());
      if (es.info() != Eigen::Success) throw numerical_error("Propagator: eigensolve failed");
      evals_ = es.eigenvalues();
      evecs_ = es.eigenvectors();
    }
  }

  bool dense() const { return evals_.size() > 0; }
  int dim() const { return H_.dim(); }

  /// Evolve psi from t0, invoking on_sample(t, psi_t) at every requested time
  /// (ascending, all >= t0).  psi ends at max(times, t0).
  void evolve(Eigen::VectorXcd& psi, double t0, std::span<const double> times,
              const std::function<void(double, const Eigen::VectorXcd&)>& on_sample) const {
    if (psi.size() != H_.dim()) throw config_error("Propagator: state dimension mismatch");
    std::size_t i = 0;
    while (i < times.size() && times[i] <= t0 + tiny_time(t0)) {
      on_sample(times[i], psi);
      ++i;
    }
    if (dense()) {
      double t = t0;
      for (; i < times.size(); ++i) {
        dense_advance(psi, times[i] - t);
        t = times[i];
        on_sample(t, psi);
      }
      return;
    }
    const double t_end = times.empty() ? t0 : std::max(times.back(), t0);
    double t = t0;
    while (t < t_end - tiny_time(t_end)) {
      t = krylov_step(psi, t, t_end, times, i, on_sample);
    }
    // guard against a sample at exactly t_end surviving round-off
    for (; i < times.size(); ++i) on_sample(times[i], psi);
  }

  /// Evolve by dt (either sign) without intermediate samples.
  void advance(Eigen::VectorXcd& psi, double dt) const {
    if (psi.size() != H_.dim()) throw config_error("Propagator: state dimension mismatch");
    if (dt == 0.0) return;
    if (dense()) {
      dense_advance(psi, dt);
      return;
    }
    double remaining = dt;
    while (std::abs(remaining) > 1e-13 * (1.0 + std::abs(dt))) {
      const Factorization f = factorize(psi);
      const double tau = accepted_tau(f, remaining);
      psi.noalias() = f.V.leftCols(f.m) * (f.nrm * small_exp(f, tau));
      remaining -= tau;
    }
  }

 private:
  static double tiny_time(double t) { return 1e-12 * (1.0 + std::abs(t)); }

  void dense_advance(Eigen::VectorXcd& psi, double dt) const {
    Eigen::VectorXcd c = evecs_.adjoint() * psi;
    for (int k = 0; k < c.size(); ++k) c[k] *= std::exp(cx(0.0, -evals_[k] * dt));
    psi = evecs_ * c;
  }

  struct Factorization {
    Eigen::MatrixXcd V;     // D x (m_max + 1) Lanczos basis
    Eigen::VectorXd theta;  // eigenvalues of T_m
    Eigen::MatrixXd Q;      // eigenvectors of T_m
    Eigen::VectorXd q1;     // Q^T e_1
    double beta_m = 0.0;    // residual coupling for the error estimate
    double nrm = 0.0;       // norm of the input state
    int m = 0;
    bool breakdown = false;
  };

  Factorization factorize(const Eigen::VectorXcd& psi) const {
    const int D = H_.dim();
    const int m_max = std::min(opt_.max_subspace, D);
    Factorization f;
    f.nrm = psi.norm();
    if (f.nrm == 0.0) throw numerical_error("Propagator: zero state");

    f.V.resize(D, m_max + 1);
    Eigen::VectorXd alpha(m_max), beta(m_max + 1);
    f.V.col(0) = psi / f.nrm;
    f.m = m_max;
    double scale = 0.0;
    Eigen::VectorXcd w(D);
    for (int j = 0; j < m_max; ++j) {
      H_.apply(f.V.col(j).data(), w.data());
      if (j > 0) w -= beta[j] * f.V.col(j - 1);
      alpha[j] = std::real(f.V.col(j).dot(w));
      w -= alpha[j] * f.V.col(j);
      scale = std::max(scale, std::abs(alpha[j]));
      beta[j + 1] = w.norm();
      if (beta[j + 1] <= 1e-14 * (scale + 1.0)) {
        f.m = j + 1;
        f.breakdown = true;
        break;
      }
      f.V.col(j + 1) = w / beta[j + 1];
    }
    f.beta_m = f.breakdown ? 0.0 : beta[f.m];

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(f.m, f.m);
    for (int j = 0; j < f.m; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < f.m) T(j, j + 1) = T(j + 1, j) = beta[j + 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
      throw numerical_error("Propagator: tridiagonal eigensolve failed");
    f.theta = es.eigenvalues();
    f.Q = es.eigenvectors();
    f.q1 = f.Q.row(0).transpose();
    return f;
  }

  /// exp(-i tau T_m) e_1 in the Lanczos coordinates (tau of either sign)
  static Eigen::VectorXcd small_exp(const Factorization& f, double tau) {
    Eigen::VectorXcd u(f.m);
    for (int k = 0; k < f.m; ++k) u[k] = std::exp(cx(0.0, -f.theta[k] * tau)) * f.q1[k];
    return (f.Q.cast<cx>() * u).eval();
  }

  /// Largest |tau| <= |tau_want| (same sign) meeting the local error target.
  double accepted_tau(const Factorization& f, double tau_want) const {
    double tau = tau_want;
    if (f.breakdown) return tau;  // invariant subspace: exact for any step
    for (int shrink = 0;; ++shrink) {
      const double err = f.beta_m * std::abs(small_exp(f, tau)[f.m - 1]);
      if (err <= opt_.step_tol) return tau;
      tau /= 1.5;
      if (shrink > 200 || std::abs(tau) < 1e-13 * (1.0 + std::abs(tau_want)))
        throw numerical_error("Propagator: step size underflow, local error " +
                              std::to_string(err));
    }
  }

  /// One accepted forward Lanczos step from t; emits samples inside
  /// (t, t + tau].  Returns t + tau.
  double krylov_step(Eigen::VectorXcd& psi, double t, double t_end,
                     std::span<const double> times, std::size_t& i,
                     const std::function<void(double, const Eigen::VectorXcd&)>& on_sample) const {
    const Factorization f = factorize(psi);
    const double tau = accepted_tau(f, t_end - t);
    Eigen::VectorXcd sample(H_.dim());
    for (; i < times.size() && times[i] <= t + tau + tiny_time(times[i]); ++i) {
      const double s = std::min(times[i] - t, tau);
      sample.noalias() = f.V.leftCols(f.m) * (f.nrm * small_exp(f, s));
      on_sample(times[i], sample);
    }
    psi.noalias() = f.V.leftCols(f.m) * (f.nrm * small_exp(f, tau));
    return t + tau;
  }

  SparseOperator H_;
  KrylovOptions opt_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXcd evecs_;
};

/// |cell> x (q0 |up> + q1 |dn>) in the sector basis.
inline Eigen::VectorXcd fock_state(const SectorBasis& basis, const std::array<int, 3>& cell,
                                   const Eigen::Vector2cd& qubit) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.size());
  psi[basis.index_of({cell, +1})] = qubit[0];
  psi[basis.index_of({cell, -1})] = qubit[1];
  return psi;
}

/// qubit |+> along x
inline Eigen::Vector2cd plus_x() {
  return Eigen::Vector2cd(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
}

inline Eigen::Vector3d number_expectations(const SectorBasis& basis, const Eigen::VectorXcd& psi) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 0; i < basis.size(); ++i) {
    const double w = std::norm(psi[i]);
    if (w == 0.0) continue;
    const auto& n = basis.label(i).n;
    out[0] += w * n[0];
    out[1] += w * n[1];
    out[2] += w * n[2];
  }
  return out;
}

inline double edge_distance_mean(const SectorBasis& basis, const Eigen::VectorXcd& psi) {
  double out = 0.0;
  for (int i = 0; i < basis.size(); ++i) out += std::norm(psi[i]) * edge_distance(basis.label(i));
  return out;
}

struct TimeSeries {
  std::vector<double> times;
  Eigen::Matrix3Xd n_exp;       // <n_j>(t)
  Eigen::Matrix3Xd sigma_exp;   // <sigma>(t)
  std::vector<double> fidelity; // |<psi(t)|psi0>|^2
  std::vector<double> norm;
  std::vector<double> circulation;  // empty unless requested
};

struct EvolveOptions {
  KrylovOptions krylov;
  bool with_circulation = false;
};

/// Evolve psi0 under H, sampling the standard observable set.
inline TimeSeries evolve_sector(const SectorBasis& basis, const SparseOperator& H,
                                const Eigen::VectorXcd& psi0, std::span<const double> times,
                                const EvolveOptions& opt = {}) {
  TimeSeries ts;
  ts.times.assign(times.begin(), times.end());
  const int T = int(times.size());
  ts.n_exp.resize(3, T);
  ts.sigma_exp.resize(3, T);
  ts.fidelity.resize(static_cast<std::size_t>(T));
  ts.norm.resize(static_cast<std::size_t>(T));
  std::optional<SparseOperator> C;
  if (opt.with_circulation) {
    C = circulation_op(basis, H);
    ts.circulation.resize(static_cast<std::size_t>(T));
  }

  Propagator prop(H, opt.krylov);
  Eigen::VectorXcd psi = psi0;
  int k = 0;
  prop.evolve(psi, 0.0, times, [&](double, const Eigen::VectorXcd& st) {
    ts.n_exp.col(k) = number_expectations(basis, st);
    ts.sigma_exp.col(k) = sigma_expectations(st);
    ts.fidelity[std::size_t(k)] = std::norm(psi0.dot(st));
    ts.norm[std::size_t(k)] = st.norm();
    if (C) ts.circulation[std::size_t(k)] = std::real(st.dot(C->apply(st)));
    ++k;
  });
  if (k != T) throw numerical_error("evolve_sector: missed samples");
  return ts;
}

/// |<psi_t | U_C3^n | psi0>|^2
inline double rotated_fidelity(const SectorBasis& basis, const Eigen::VectorXcd& psi_t,
                               const Eigen::VectorXcd& psi0, int n_thirds) {
  if (psi_t.size() != psi0.size()) throw config_error("rotated_fidelity: dimension mismatch");
  const auto U = c3_unitary(basis);
  Eigen::VectorXcd v = psi0;
  const int n = ((n_thirds % 3) + 3) % 3;
  for (int k = 0; k < n; ++k) v = U.apply(v);
  return std::norm(psi_t.dot(v));
}

struct RevivalRecord {
  int q = 0;
  double t_q = 0.0;
  double peak = 0.0;
};

/// Per window ((q - 1/2) T, (q + 1/2) T): max of the sampled series and its
/// time.  Requires the sampling to cover every window.
inline std::vector<RevivalRecord> detect_revivals(std::span<const double> times,
                                                  std::span<const double> values, double T,
                                                  int q_max) {
  if (times.size() != values.size() || times.empty())
    throw config_error("detect_revivals: bad series");
  if (times.back() < (q_max + 0.5) * T - 1e-9)
    throw config_error("detect_revivals: series shorter than the last window");
  std::vector<RevivalRecord> out;
  out.reserve(static_cast<std::size_t>(q_max));
  std::size_t i = 0;
  for (int q = 1; q <= q_max; ++q) {
    const double lo = (q - 0.5) * T, hi = (q + 0.5) * T;
    while (i < times.size() && times[i] < lo) ++i;
    RevivalRecord r;
    r.q = q;
    bool found = false;
    for (std::size_t j = i; j < times.size() && times[j] <= hi; ++j) {
      if (!found || values[j] > r.peak) {
        r.peak = values[j];
        r.t_q = times[j];
        found = true;
      }
    }
    if (!found) throw config_error("detect_revivals: empty window");
    out.push_back(r);
  }
  return out;
}

/// Least-squares period of the upward zero crossings of a sampled signal.
/// Returns the fitted period; requires at least two crossings.
inline double period_from_upward_crossings(std::span<const double> times,
                                           std::span<const double> signal) {
  std::vector<double> crossings;
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (signal[j - 1] < 0.0 && signal[j] >= 0.0) {
      const double f = signal[j - 1] / (signal[j - 1] - signal[j]);
      crossings.push_back(times[j - 1] + f * (times[j] - times[j - 1]));
    }
  }
  const int n = int(crossings.size());
  if (n < 2) throw numerical_error("period_from_upward_crossings: need two upward crossings");
  // fit t_k = a + P k
  double sk = 0, st = 0, skk = 0, skt = 0;
  for (int k = 0; k < n; ++k) {
    sk += k;
    st += crossings[std::size_t(k)];
    skk += double(k) * k;
    skt += k * crossings[std::size_t(k)];
  }
  return (n * skt - sk * st) / (n * skk - sk * sk);
}

struct LifetimeOptions {
  PerturbationSpec pert;
  int realizations = 100;
  int samples_per_period = 40;
  double threshold = 0.9;  // revival considered alive while mean peak / N >= this
  int q_max = 0;           // 0: heuristic by perturbation kind
  KrylovOptions krylov;
};

struct LifetimePoint {
  int q = 0;
  double t_mean = 0.0;
  double peak_mean = 0.0;  // un-normalized
};

struct LifetimePerN {
  int N = 0;
  std::vector<LifetimePoint> points;
  double t_star = 0.0;
  bool censored = false;  // no revival fell below threshold within q_max
};

struct LifetimeResult {
  std::vector<LifetimePerN> per_n;
  double beta = 0.0;       // t* ~ N^beta fit over uncensored N
  double amplitude = 0.0;  // exp(intercept)
  bool any_censored = false;
};

inline int default_q_max(PerturbationKind kind, int N) {
  switch (kind) {
    case PerturbationKind::coupling_generic:
    case PerturbationKind::cavity_frequency:
      return int(std::ceil(3.5 * std::sqrt(double(N)))) + 6;
    case PerturbationKind::coupling_p_symmetric:
    case PerturbationKind::none:
      return 3 * N;
  }
  return 3 * N;
}

/// Disorder-averaged revival decay.  Evolves |0,0,N>|+> per realization,
/// detects revivals of <n_3>, then averages peak values and peak times
/// separately over realizations (realization-index order, so results do not
/// depend on the thread count).
inline LifetimeResult lifetime_sweep(std::span<const int> Ns, const ModelParams& base,
                                     const LifetimeOptions& opt, const ThreadPool& pool) {
  if (opt.realizations < 1) throw config_error("lifetime_sweep: need realizations >= 1");
  LifetimeResult out;
  const double T = circulation_period(base.g);

  for (const int N : Ns) {
    const auto basis = SectorBasis::enumerate(N);
    const int q_max = opt.q_max > 0 ? opt.q_max : default_q_max(opt.pert.kind, N);
    const int per_period = std::max(opt.samples_per_period, 40);
    const int n_samples = q_max * per_period + per_period / 2 + 1;
    std::vector<double> times(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) times[std::size_t(k)] = T * k / per_period;

    std::vector<std::vector<RevivalRecord>> slots(static_cast<std::size_t>(opt.realizations));
    ModelParams params = base;
    params.N = N;
    pool.parallel_for(opt.realizations, [&](int r) {
      const auto pert = sample_perturbation(opt.pert, std::uint64_t(r));
      const auto H = build_hamiltonian(basis, params, pert);
      Propagator prop(H, opt.krylov);
      Eigen::VectorXcd psi = fock_state(basis, {0, 0, N}, plus_x());
      std::vector<double> n3(times.size());
      int k = 0;
      prop.evolve(psi, 0.0, times, [&](double, const Eigen::VectorXcd& st) {
        double v = 0.0;
        for (int idx = 0; idx < basis.size(); ++idx)
          v += std::norm(st[idx]) * basis.label(idx).n[2];
        n3[std::size_t(k++)] = v;
      });
      slots[std::size_t(r)] = detect_revivals(times, n3, T, q_max);
    });

    LifetimePerN pn;
    pn.N = N;
    pn.points.resize(static_cast<std::size_t>(q_max));
    for (int q = 0; q < q_max; ++q) pn.points[std::size_t(q)].q = q + 1;
    for (int r = 0; r < opt.realizations; ++r)
      for (int q = 0; q < q_max; ++q) {
        pn.points[std::size_t(q)].t_mean += slots[std::size_t(r)][std::size_t(q)].t_q;
        pn.points[std::size_t(q)].peak_mean += slots[std::size_t(r)][std::size_t(q)].peak;
      }
    for (auto& pt : pn.points) {
      pt.t_mean /= opt.realizations;
      pt.peak_mean /= opt.realizations;
    }
    pn.censored = true;
    for (const auto& pt : pn.points)
      if (pt.peak_mean / N < opt.threshold) {
        pn.t_star = pt.t_mean;
        pn.censored = false;
        break;
      }
    if (pn.censored) pn.t_star = pn.points.back().t_mean;
    out.any_censored |= pn.censored;
    out.per_n.push_back(std::move(pn));
  }

  // log-log fit over uncensored sizes
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& pn : out.per_n) {
    if (pn.censored || pn.t_star <= 0.0) continue;
    const double x = std::log(double(pn.N)), y = std::log(pn.t_star);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    out.beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.amplitude = std::exp((sy - out.beta * sx) / n);
  }
  return out;
}

struct CoherentOptions {
  double tail_tol = 1e-8;  // omitted Poisson mass
  KrylovOptions krylov;
};

struct CoherentSeries {
  std::vector<double> times;
  Eigen::Matrix3Xd n_exp;
  Eigen::Matrix3Xd sigma_exp;
  int sector_min = 0;
  int sector_max = 0;
};

/// Coherent-state evolution: Poisson mixture over sectors, each started from
/// |0,0,N>|qubit> and evolved independently.  All reported observables are
/// number-conserving, so cross-sector terms vanish identically.
inline CoherentSeries coherent_series(const ModelParams& base, double nbar,
                                      const Eigen::Vector2cd& qubit,
                                      std::span<const double> times, const CoherentOptions& opt,
                                      const ThreadPool& pool) {
  if (nbar <= 0.0) throw config_error("coherent_series: mean photon number must be > 0");
  if (opt.tail_tol <= 0.0 || opt.tail_tol >= 1.0)
    throw config_error("coherent_series: tail_tol must be in (0,1)");

  // grow the window [lo, hi] around the mode greedily by next-largest weight
  auto logw = [&](int N) { return -nbar + N * std::log(nbar) - std::lgamma(double(N) + 1.0); };
  int lo = int(nbar), hi = lo;
  double mass = std::exp(logw(lo));
  while (mass < 1.0 - opt.tail_tol) {
    const double wl = lo > 0 ? std::exp(logw(lo - 1)) : -1.0;
    const double wh = std::exp(logw(hi + 1));
    if (wh >= wl) {
      ++hi;
      mass += wh;
    } else {
      --lo;
      mass += wl;
    }
    if (hi - lo > 100000) throw numerical_error("coherent_series: window runaway");
  }
  const int n_sec = hi - lo + 1;
  if (n_sec < 3) throw config_error("coherent_series: tail_tol keeps fewer than 3 sectors");
  std::vector<double> w(static_cast<std::size_t>(n_sec));
  double wsum = 0.0;
  for (int s = 0; s < n_sec; ++s) wsum += (w[std::size_t(s)] = std::exp(logw(lo + s)));
  for (auto& x : w) x /= wsum;

  const int T = int(times.size());
  std::vector<Eigen::Matrix3Xd> n_slot(static_cast<std::size_t>(n_sec)), s_slot(static_cast<std::size_t>(n_sec));
  pool.parallel_for(n_sec, [&](int s) {
    const int N = lo + s;
    const auto basis = SectorBasis::enumerate(N);
    ModelParams p = base;
    p.N = N;
    const auto H = build_hamiltonian(basis, p, PerturbationRealization{});
    Propagator prop(H, opt.krylov);
    Eigen::VectorXcd psi = fock_state(basis, {0, 0, N}, qubit);
    Eigen::Matrix3Xd ne(3, T), se(3, T);
    int k = 0;
    prop.evolve(psi, 0.0, times, [&](double, const Eigen::VectorXcd& st) {
      ne.col(k) = number_expectations(basis, st);
      se.col(k) = sigma_expectations(st);
      ++k;
    });
    n_slot[std::size_t(s)] = std::move(ne);
    s_slot[std::size_t(s)] = std::move(se);
  });

  CoherentSeries out;
  out.times.assign(times.begin(), times.end());
  out.sector_min = lo;
  out.sector_max = hi;
  out.n_exp = Eigen::Matrix3Xd::Zero(3, T);
  out.sigma_exp = Eigen::Matrix3Xd::Zero(3, T);
  for (int s = 0; s < n_sec; ++s) {
    out.n_exp += w[std::size_t(s)] * n_slot[std::size_t(s)];
    out.sigma_exp += w[std::size_t(s)] * s_slot[std::size_t(s)];
  }
  return out;
}

}  // namespace phlat
