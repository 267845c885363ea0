#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <map>

#include "phlat/dynamics.hpp"
#include "phlat/router.hpp"

using namespace phlat;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

// Independent dense build of the router Hamiltonian: different enumeration
// order (spin outermost, detectors before cavities) and explicit ladder
// algebra, so any stride or conjugation slip in the sparse path shows up.
struct DenseOracle {
  std::array<int, 5> cut;
  std::map<std::array<int, 6>, int> index;  // (s, nD2, nD1, n3, n2, n1) -> row
  std::vector<std::array<int, 6>> states;

  explicit DenseOracle(const std::array<int, 5>& cutoffs) : cut(cutoffs) {
    for (int s = 0; s < 2; ++s)
      for (int d2 = 0; d2 <= cut[4]; ++d2)
        for (int d1 = 0; d1 <= cut[3]; ++d1)
          for (int n3 = 0; n3 <= cut[2]; ++n3)
            for (int n2 = 0; n2 <= cut[1]; ++n2)
              for (int n1 = 0; n1 <= cut[0]; ++n1) {
                index[{s, d2, d1, n3, n2, n1}] = int(states.size());
                states.push_back({s, d2, d1, n3, n2, n1});
              }
  }

  int dim() const { return int(states.size()); }

  static Eigen::Matrix2cd coupling(int j, double g) {
    const double phi = 2.0 * pi * j / 3.0;
    Eigen::Matrix2cd m;
    m << -g, iu * g * std::exp(-iu * phi), iu * g * std::exp(iu * phi), g;
    return m;
  }

  // occupation of cavity a (0..2) in tuple t
  static int nc(const std::array<int, 6>& t, int a) { return t[std::size_t(5 - a)]; }
  static int nd(const std::array<int, 6>& t, int d) { return t[std::size_t(2 - d)]; }

  MatrixXcd hamiltonian(double g, double r_in, double r_out) const {
    MatrixXcd fwd = MatrixXcd::Zero(dim(), dim());
    MatrixXcd det = MatrixXcd::Zero(dim(), dim());
    for (int c = 0; c < dim(); ++c) {
      const auto& t = states[std::size_t(c)];
      for (int a = 0; a < 3; ++a) {  // b_a^dag b_{a+1} G_{a-1}, forward half
        const int b = (a + 1) % 3;
        if (nc(t, b) == 0 || nc(t, a) == cut[std::size_t(a)]) continue;
        auto u = t;
        u[std::size_t(5 - a)] += 1;
        u[std::size_t(5 - b)] -= 1;
        const double bose = std::sqrt(double(nc(t, a) + 1) * double(nc(t, b)));
        const Eigen::Matrix2cd G = coupling(((a + 2) % 3) + 1, g);
        for (int sr = 0; sr < 2; ++sr) {
          auto ur = u;
          ur[0] = sr;
          fwd(index.at(ur), c) += bose * G(sr, t[0]);
        }
      }
      for (int d = 0; d < 2; ++d) {  // r_out b_D^dag b_c and r_in b_c^dag b_D
        if (nc(t, d) >= 1 && nd(t, d) < cut[std::size_t(3 + d)]) {
          auto u = t;
          u[std::size_t(5 - d)] -= 1;
          u[std::size_t(2 - d)] += 1;
          const double bose = std::sqrt(double(nd(t, d) + 1) * double(nc(t, d)));
          det(index.at(u), c) += r_out * bose;
          det(c, index.at(u)) += r_in * bose;
        }
      }
    }
    return fwd + fwd.adjoint() + det;
  }

  MatrixXcd pulse(cx f0) const {
    MatrixXcd up = MatrixXcd::Zero(dim(), dim());
    for (int c = 0; c < dim(); ++c) {
      const auto& t = states[std::size_t(c)];
      if (nc(t, 2) == cut[2]) continue;
      auto u = t;
      u[3] += 1;
      up(index.at(u), c) = f0 * std::sqrt(double(nc(t, 2) + 1));
    }
    return up + up.adjoint().eval();
  }
};

double quadrature_re(double sigma, double omega, double f0re, double f0im, double& im_out) {
  // midpoint rule for integral of F(t) e^{-i omega t} over [-20 sigma, 20 sigma]
  const int K = 200000;
  const double a = -20.0 * sigma, b = 20.0 * sigma, h = (b - a) / K;
  cx acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const double t = a + (k + 0.5) * h;
    acc += drive_envelope(t, cx(f0re, f0im), sigma, omega) * std::exp(-iu * omega * t) * h;
  }
  im_out = acc.imag();
  return acc.real();
}

}  // namespace

TEST_CASE("drive envelope: peak, half width, kick weight") {
  const cx f0(2.0, -0.5);
  const double sigma = 0.1, omega = 3.0;
  const cx peak = drive_envelope(0.0, f0, sigma, omega);
  REQUIRE(std::abs(peak - f0 / (pi * sigma)) < 1e-12);
  REQUIRE(std::abs(drive_envelope(sigma, f0, sigma, omega)) ==
          Catch::Approx(std::abs(peak) / 2.0).epsilon(1e-12));
  REQUIRE(std::abs(drive_envelope(-sigma, f0, sigma, omega)) ==
          Catch::Approx(std::abs(peak) / 2.0).epsilon(1e-12));

  // The full-line integral of F(t) e^{-i omega t} is exactly F0; over
  // +-20 sigma the Lorentzian tails leave (2/pi) arctan(20) of it.
  const double expected = 2.0 / pi * std::atan(20.0);
  REQUIRE(expected == Catch::Approx(0.968195497487647).epsilon(1e-12));
  double im = 0.0;
  const double re = quadrature_re(sigma, omega, f0.real(), f0.imag(), im);
  REQUIRE(re == Catch::Approx(expected * f0.real()).epsilon(1e-6));
  REQUIRE(im == Catch::Approx(expected * f0.imag()).epsilon(1e-6));
  // the weight is scale and carrier independent
  double im2 = 0.0;
  const double re2 = quadrature_re(1e-3, 40.0, f0.real(), f0.imag(), im2);
  REQUIRE(re2 == Catch::Approx(re).epsilon(1e-9));
  REQUIRE(im2 == Catch::Approx(im).epsilon(1e-9));

  REQUIRE_THROWS_AS(drive_envelope(0.0, f0, 0.0, omega), config_error);
}

TEST_CASE("sparse construction matches a dense first-principles build") {
  const std::array<int, 5> cutoffs{2, 3, 2, 2, 2};
  const double g = 0.8, r_in = 0.05, r_out = 1.7;
  DenseOracle oracle(cutoffs);
  detail::RouterBasis basis(cutoffs);
  REQUIRE(oracle.dim() == basis.dim());

  RouterConfig cfg;
  cfg.g = g;
  cfg.r_in = r_in;
  cfg.r_out = r_out;
  cfg.cutoffs = cutoffs;
  const MatrixXcd sparse_dense = detail::router_static(basis, cfg).to_dense();

  // permutation between the two enumeration orders
  std::vector<int> perm(std::size_t(basis.dim()));
  for (int i = 0; i < basis.dim(); ++i) {
    const std::array<int, 6> t{basis.spin_slot(i),    basis.occupation(i, 4),
                               basis.occupation(i, 3), basis.occupation(i, 2),
                               basis.occupation(i, 1), basis.occupation(i, 0)};
    perm[std::size_t(i)] = oracle.index.at(t);
  }
  const MatrixXcd H_o = oracle.hamiltonian(g, r_in, r_out);
  double worst = 0.0;
  for (int c = 0; c < basis.dim(); ++c)
    for (int r = 0; r < basis.dim(); ++r)
      worst = std::max(worst,
                       std::abs(sparse_dense(r, c) -
                                H_o(perm[std::size_t(r)], perm[std::size_t(c)])));
  REQUIRE(worst < 1e-13);

  // the non-reciprocity sits exactly in the detector taps
  const MatrixXcd skew = H_o - H_o.adjoint().eval();
  const double tap_norm = oracle.hamiltonian(0.0, 0.0, 1.0).norm();
  REQUIRE(skew.norm() ==
          Catch::Approx((r_out - r_in) * std::sqrt(2.0) * tap_norm).epsilon(1e-12));

  const cx f0(0.7, 0.3);
  const MatrixXcd P_s = detail::router_pulse(basis, f0).to_dense();
  const MatrixXcd P_o = oracle.pulse(f0);
  double worst_p = 0.0;
  for (int c = 0; c < basis.dim(); ++c)
    for (int r = 0; r < basis.dim(); ++r)
      worst_p = std::max(worst_p,
                         std::abs(P_s(r, c) - P_o(perm[std::size_t(r)], perm[std::size_t(c)])));
  REQUIRE(worst_p < 1e-13);
}

TEST_CASE("closed-system limit reproduces the sector propagator") {
  const double g = 1.0, T = circulation_period(g);
  const int N = 2;
  const auto sector = SectorBasis::enumerate(N);
  const ModelParams p{g, 0.0, 0.0, N};
  const auto H = build_hamiltonian(sector, p, PerturbationRealization{});
  VectorXcd psi0 = VectorXcd::Zero(sector.size());
  FockLabel l;
  l.n = {0, 0, N};
  l.spin = +1;
  psi0[sector.index_of(l)] = 1.0 / std::sqrt(2.0);
  l.spin = -1;
  psi0[sector.index_of(l)] = 1.0 / std::sqrt(2.0);
  std::vector<double> times;
  for (int k = 0; k <= 12; ++k) times.push_back(k * T / 12.0);
  const TimeSeries ts = evolve_sector(sector, H, psi0, times);

  RouterConfig cfg;
  cfg.f0 = 0.0;
  cfg.g = g;
  cfg.r_in = cfg.r_out = 0.0;
  cfg.cutoffs = {3, 3, 3, 2, 2};
  cfg.t_final = T;
  cfg.dt = T / 12.0;
  detail::RouterBasis rb(cfg.cutoffs);
  VectorXcd phi0 = VectorXcd::Zero(rb.dim());
  phi0[2 * rb.stride(2) + 0] = 1.0 / std::sqrt(2.0);
  phi0[2 * rb.stride(2) + 1] = 1.0 / std::sqrt(2.0);
  const RouterSeries rs = evolve_router(cfg, phi0);

  REQUIRE(rs.times.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int m = 0; m < 3; ++m)
      REQUIRE(rs.core(m, int(k)) == Catch::Approx(ts.n_exp(m, int(k))).margin(1e-6));
  for (std::size_t k = 0; k < times.size(); ++k) {
    REQUIRE(rs.detectors(0, int(k)) == 0.0);
    REQUIRE(rs.imbalance[k] == 0.0);
  }
}

TEST_CASE("pulse deposits the half-kick photon number and circulates forward") {
  RouterConfig cfg;
  cfg.f0 = 1.2;
  cfg.sigma_pulse = 0.1;
  cfg.g = 1.0;
  cfg.r_in = cfg.r_out = 0.0;
  cfg.cutoffs = {5, 5, 5, 2, 2};
  cfg.t_final = 7.3;
  cfg.dt = 0.05;
  const RouterSeries s = evolve_router(cfg);
  const double T = circulation_period(cfg.g);
  const double nbar = 0.25 * std::norm(cfg.f0);

  const auto total = [&](std::size_t k) {
    return s.core(0, int(k)) + s.core(1, int(k)) + s.core(2, int(k));
  };
  const auto at = [&](double t) { return std::size_t(std::lround(t / cfg.dt)); };

  // early deposit follows the truncated-kick law while the hops are still
  // subleading: n(t) ~ nbar ((2/pi) arctan(t/sigma))^2
  const double law =
      nbar * std::pow(2.0 / pi * std::atan(0.5 / cfg.sigma_pulse), 2);
  REQUIRE(total(at(0.5)) == Catch::Approx(law).epsilon(0.02));
  // settled deposit close to the half-kick coherent population
  REQUIRE(total(at(3.0)) / nbar > 0.85);
  REQUIRE(total(at(3.0)) / nbar < 1.0);
  REQUIRE(total(at(3.0)) == Catch::Approx(0.328231).margin(0.003));

  // chiral order for g > 0: the payload visits cavity 1 first, cavity 2 later
  double max1_early = 0.0, max2_early = 0.0, max2_late = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (s.times[k] <= 0.5 * T) {
      max1_early = std::max(max1_early, s.core(0, int(k)));
      max2_early = std::max(max2_early, s.core(1, int(k)));
    } else {
      max2_late = std::max(max2_late, s.core(1, int(k)));
    }
  }
  REQUIRE(max1_early > 4.0 * max2_early);
  REQUIRE(max1_early == Catch::Approx(0.313626).margin(0.005));
  REQUIRE(max2_late == Catch::Approx(0.282102).margin(0.005));

  // norm is conserved in this Hermitian limit
  for (double v : s.norm) REQUIRE(v == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("non-reciprocal taps route the pulse into the matching detector") {
  RouterConfig cfg;
  cfg.f0 = 1.2;
  cfg.sigma_pulse = 0.1;
  cfg.g = 1.0;
  cfg.r_in = 0.02;
  cfg.r_out = 2.0;
  cfg.cutoffs = {4, 4, 4, 4, 4};
  const double T = circulation_period(cfg.g);
  cfg.t_final = 0.8 * T;
  cfg.dt = 0.05;
  const RouterSeries plus = evolve_router(cfg);
  cfg.g = -1.0;
  const RouterSeries minus = evolve_router(cfg);

  const std::size_t K = plus.times.size();
  // late-time imbalance: final quarter of the detection run
  for (std::size_t k = 0; k < K; ++k) {
    if (plus.times[k] < 0.75 * cfg.t_final) continue;
    REQUIRE(plus.imbalance[k] >= 0.8);
    REQUIRE(minus.imbalance[k] <= -0.8);
  }
  double peak = 0.0;
  for (std::size_t k = 0; k < K; ++k) peak = std::max(peak, plus.imbalance[k]);
  REQUIRE(peak == Catch::Approx(0.968921).margin(0.003));
  REQUIRE(plus.imbalance[K - 1] == Catch::Approx(0.864666).margin(0.003));
  REQUIRE(plus.detectors(0, int(K - 1)) == Catch::Approx(3663.378270).epsilon(0.01));
  REQUIRE(plus.norm[K - 1] == Catch::Approx(33.020940).epsilon(0.005));

  // flipping g mirrors the device: cavities 1<->2, detectors D1<->D2
  for (std::size_t k = 0; k < K; ++k) {
    REQUIRE(minus.imbalance[k] == Catch::Approx(-plus.imbalance[k]).margin(1e-6));
    REQUIRE(minus.detectors(1, int(k)) ==
            Catch::Approx(plus.detectors(0, int(k))).epsilon(1e-6).margin(1e-8));
    REQUIRE(minus.core(1, int(k)) ==
            Catch::Approx(plus.core(0, int(k))).epsilon(1e-6).margin(1e-8));
  }

  // the collecting detector fills monotonically from the pulse window to the
  // first recurrence of the circulating remainder
  for (std::size_t k = 1; k < K; ++k) {
    const double t = plus.times[k];
    if (t < 0.6 || t > 5.5) continue;
    REQUIRE(plus.detectors(0, int(k)) >=
            plus.detectors(0, int(k - 1)) * (1.0 - 1e-3));
    const double tot_prev = plus.detectors(0, int(k - 1)) + plus.detectors(1, int(k - 1));
    const double tot = plus.detectors(0, int(k)) + plus.detectors(1, int(k));
    REQUIRE(tot >= tot_prev * (1.0 - 1e-3));
  }
}

TEST_CASE("hermitian limit conserves the norm; rescaling shifts nothing") {
  RouterConfig cfg;
  cfg.f0 = 1.0;
  cfg.sigma_pulse = 0.1;
  cfg.g = 1.0;
  cfg.r_in = cfg.r_out = 2.0;
  cfg.cutoffs = {4, 4, 4, 4, 4};
  cfg.t_final = circulation_period(cfg.g);
  cfg.dt = 0.05;
  const RouterSeries herm = evolve_router(cfg);
  for (double v : herm.norm) REQUIRE(v == Catch::Approx(1.0).margin(1e-8));

  // rescaled initial state: identical step sequence, imbalance bit for bit
  cfg.r_in = 0.02;
  cfg.r_out = 2.0;
  cfg.f0 = 1.2;
  cfg.t_final = 0.5 * circulation_period(cfg.g);
  const VectorXcd psi0 = router_vacuum(cfg);
  const RouterSeries a = evolve_router(cfg, psi0);
  const RouterSeries b = evolve_router(cfg, 2.0 * psi0);
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    REQUIRE(b.imbalance[k] == a.imbalance[k]);
    REQUIRE(b.norm[k] == Catch::Approx(2.0 * a.norm[k]).epsilon(1e-14));
    REQUIRE(b.detectors(0, int(k)) ==
            Catch::Approx(4.0 * a.detectors(0, int(k))).epsilon(1e-13));
  }
}

TEST_CASE("configuration and runtime guards") {
  RouterConfig good;
  good.f0 = 1.0;
  good.cutoffs = {4, 4, 4, 2, 2};
  good.t_final = 0.2;
  good.dt = 0.1;
  REQUIRE_NOTHROW(evolve_router(good));

  RouterConfig c = good;
  c.sigma_pulse = 0.0;
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c = good;
  c.g = 0.0;
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c = good;
  c.r_in = 0.5;
  c.r_out = 0.4;
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c = good;
  c.r_in = -0.1;
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c = good;
  c.cutoffs[4] = 1;
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c = good;
  c.dt = 0.3;  // dt > t_final
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c = good;
  c.step_tol = 0.0;
  REQUIRE_THROWS_AS(evolve_router(c), config_error);

  // the deposited Poisson tail must fit under the driven-cavity cutoff:
  // mean 1 needs six levels above the vacuum
  c = good;
  c.f0 = 2.0;
  c.cutoffs = {6, 6, 5, 2, 2};
  REQUIRE_THROWS_AS(evolve_router(c), config_error);
  c.cutoffs = {6, 6, 6, 2, 2};
  REQUIRE_NOTHROW(validate(c));

  // initial state must match the basis
  c = good;
  REQUIRE_THROWS_AS(evolve_router(c, VectorXcd::Zero(7)), config_error);

  // a state parked on a core cutoff trips the leakage monitor immediately
  c = good;
  c.f0 = 0.0;
  detail::RouterBasis rb(c.cutoffs);
  VectorXcd top = VectorXcd::Zero(rb.dim());
  top[4 * rb.stride(0)] = 1.0;
  REQUIRE_THROWS_AS(evolve_router(c, top), numerical_error);
}
