#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "phlat/dynamics.hpp"
#include "phlat/lda.hpp"
#include "phlat/semiclassical.hpp"

using namespace phlat;
using Eigen::Vector3d;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[std::size_t(i)] = a + (b - a) * i / (n - 1);
  return t;
}

ClassicalState random_state(std::mt19937& gen, double amp) {
  std::normal_distribution<double> dist(0.0, 1.0);
  ClassicalState s;
  for (int i = 0; i < 3; ++i) s.b[i] = amp * cx(dist(gen), dist(gen));
  Vector3d v(dist(gen), dist(gen), dist(gen));
  s.sigma = v / v.norm();
  return s;
}

double energy_of(const detail::Vec9& y, double g, double delta) {
  return classical_energy(detail::unpack_state(y), g, delta);
}

}  // namespace

TEST_CASE("classical energy on simple states") {
  ClassicalState s;
  s.b << 1.0, 0.0, 0.0;
  s.sigma = Vector3d(0, 0, 1);
  REQUIRE(classical_energy(s, 0.7, 0.5) == Catch::Approx(0.5).margin(1e-15));

  s.b << 1.0, 1.0, 0.0;  // only the b1* b2 hop survives
  REQUIRE(classical_energy(s, 0.7, 0.5) == Catch::Approx(0.5 - 1.4).margin(1e-14));

  s.sigma = Vector3d(1, 0, 0);
  REQUIRE(classical_energy(s, 0.7, 0.3) == Catch::Approx(0.0).margin(1e-14));
  s.b << 1.0, iu, 0.0;
  REQUIRE(classical_energy(s, 0.7, 0.3) == Catch::Approx(-1.4).margin(1e-14));
}

TEST_CASE("empty cavities leave a Larmor spin") {
  const double delta = 0.83;
  ClassicalState s;
  s.b.setZero();
  s.sigma = Vector3d(0.6, -0.48, 0.64);
  const auto d = eom_derivative(s, 1.3, delta);
  REQUIRE(d.b.norm() == 0.0);
  const Vector3d expected = s.sigma.cross(Vector3d(0, 0, -2.0 * delta));
  REQUIRE((d.sigma - expected).norm() < 1e-14);
}

TEST_CASE("equations of motion match finite differences of the energy") {
  std::mt19937 gen(7);
  const double g = 0.83, delta = 0.37;
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(gen, 1.5);
    const auto d = eom_derivative(s, g, delta);
    const auto y = detail::pack_state(s);

    // db_j/dt = -i dH/dconj(b_j) = -(i/2)(dH/dRe + i dH/dIm)
    for (int j = 0; j < 3; ++j) {
      auto yp = y, ym = y;
      yp[j] += h;
      ym[j] -= h;
      const double dre = (energy_of(yp, g, delta) - energy_of(ym, g, delta)) / (2 * h);
      yp = y;
      ym = y;
      yp[j + 3] += h;
      ym[j + 3] -= h;
      const double dim = (energy_of(yp, g, delta) - energy_of(ym, g, delta)) / (2 * h);
      const cx expected = -iu * 0.5 * cx(dre, dim);
      REQUIRE(std::abs(d.b[j] - expected) < 1e-6 * (1.0 + std::abs(expected)));
    }

    // dsigma/dt = sigma x (-2 grad H)
    Vector3d grad;
    for (int a = 0; a < 3; ++a) {
      auto yp = y, ym = y;
      yp[6 + a] += h;
      ym[6 + a] -= h;
      grad[a] = (energy_of(yp, g, delta) - energy_of(ym, g, delta)) / (2 * h);
    }
    const Vector3d expected = s.sigma.cross(Vector3d(-2.0 * grad));
    REQUIRE((d.sigma - expected).norm() < 1e-6 * (1.0 + expected.norm()));
  }
}

TEST_CASE("integration conserves photons, spin length, and energy") {
  const double g = 1.0;
  const double T = circulation_period(g);
  std::mt19937 gen(11);
  auto s0 = random_state(gen, 1.0);
  s0.b *= std::sqrt(30.0) / s0.b.norm();  // 30 photons total
  const double delta = 0.4;
  const double e0 = classical_energy(s0, g, delta);
  const double n0 = s0.b.squaredNorm();

  const auto traj = integrate(s0, g, delta, linspace(0.0, 5 * T, 11), 1e-10);
  for (const auto& st : traj.states) {
    REQUIRE(std::abs(st.b.squaredNorm() - n0) < 1e-8);
    REQUIRE(std::abs(st.sigma.norm() - 1.0) < 1e-8);
    REQUIRE(std::abs(classical_energy(st, g, delta) - e0) < 1e-8 * (1.0 + std::abs(e0)));
  }
}

TEST_CASE("planar real states form an invariant manifold") {
  std::mt19937 gen(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  ClassicalState s0;
  for (int i = 0; i < 3; ++i) s0.b[i] = dist(gen);
  s0.b *= 5.0 / s0.b.norm();
  s0.sigma = Vector3d(std::cos(0.3), std::sin(0.3), 0.0);
  const double g = 1.0, delta = 0.6;
  const auto traj = integrate(s0, g, delta, linspace(0.0, 3 * circulation_period(g), 61), 1e-10);
  for (const auto& st : traj.states) {
    REQUIRE(std::abs(st.sigma.z()) < 1e-8);
    REQUIRE(st.b.imag().cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("circulating point at zero detuning offset is exact") {
  const double n = 50.0, g = 1.0;
  const auto sol = solve_circulating_point(n, 0.0, g);
  REQUIRE(sol.b_z == Catch::Approx(-std::sqrt(3.0) / 2.0).epsilon(1e-13));
  REQUIRE(sol.residual < 1e-10);
  REQUIRE((sol.x0 - Vector3d(0, 0, std::sqrt(n))).norm() < 1e-10);
  REQUIRE(sol.period == Catch::Approx(4.0 * pi / std::sqrt(3.0)).epsilon(1e-13));
  REQUIRE(sol.period == Catch::Approx(circulation_period(g)).epsilon(1e-13));
}

TEST_CASE("circulating point amplitudes follow the detuning expansion") {
  const double n = 100.0, g = 1.0, eps = 0.1;
  const auto sol = solve_circulating_point(n, eps, g);
  REQUIRE(sol.residual < 1e-10);
  REQUIRE(sol.x0.x() == sol.x0.y());
  REQUIRE(std::abs(sol.x0.norm() - std::sqrt(n)) < 1e-12 * std::sqrt(n));
  const double leading = eps / 16.0 * std::sqrt(3.0 / n);
  REQUIRE(sol.x0.x() == Catch::Approx(leading).epsilon(0.15));
}

TEST_CASE("circulating period follows the 1/n series") {
  const double n = 50.0, g = 1.0, eps = 0.2;
  const auto sol = solve_circulating_point(n, eps, g);
  REQUIRE(sol.residual < 1e-10);
  REQUIRE(std::abs(sol.period / period_series(n, eps, g) - 1.0) < 5.0 / (n * n));

  const auto traj =
      integrate(sol.initial_state(), g, detuning_for_epsilon(eps, g), linspace(0.0, 3.3 * sol.period, 331), 1e-10);
  REQUIRE(measure_period(traj) == Catch::Approx(sol.period).epsilon(1e-6));
}

TEST_CASE("fixed-point trajectory traces the boundary occupation path") {
  const double n = 40.0, g = 1.0;
  const auto sol = solve_circulating_point(n, 0.0, g);
  const double delta = detuning_for_epsilon(0.0, g);
  const auto times = linspace(0.0, sol.period, 121);
  const auto traj = integrate(sol.initial_state(), g, delta, times, 1e-11);
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto path = boundary_path(times[k] / sol.period);
    const Vector3d occ = occupations(traj.states[k]) / n;
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(occ[j] - path[std::size_t(j)]));
  }
  REQUIRE(worst < 1e-4);
}

TEST_CASE("coupling sign sets the circulation direction") {
  const double n = 30.0;
  for (const double g : {1.0, -1.0}) {
    const auto sol = solve_circulating_point(n, 0.0, g);
    const double delta = detuning_for_epsilon(0.0, g);
    const std::vector<double> times{0.0, sol.period / 3.0};
    const auto traj = integrate(sol.initial_state(), g, delta, times, 1e-10);
    const Vector3d occ = occupations(traj.states.back());
    if (g > 0)
      REQUIRE(occ[0] > 0.99 * n);  // order 3 -> 1 -> 2
    else
      REQUIRE(occ[1] > 0.99 * n);  // order 3 -> 2 -> 1
  }
}

TEST_CASE("cycle averages reproduce the boundary constants") {
  const double n = 40.0, g = 1.0;
  const auto sol = solve_circulating_point(n, 0.0, g);
  const double delta = detuning_for_epsilon(0.0, g);
  const auto traj = integrate(sol.initial_state(), g, delta, linspace(0.0, sol.period, 601), 1e-11);
  const auto avg = trajectory_averages(traj, g, delta);
  const auto constants = lda_boundary_constants();
  REQUIRE(avg.photons == Catch::Approx(n).margin(1e-8));
  REQUIRE(avg.edge_distance / n == Catch::Approx(constants.edge_distance_over_n).epsilon(1e-4));
  REQUIRE(avg.circulation / (g * n * n) ==
          Catch::Approx(constants.circulation_over_gn2).epsilon(1e-4));
}

TEST_CASE("decoupled cavities freeze and carry no circulation") {
  ClassicalState s0;
  s0.b << 0.0, 0.0, std::sqrt(20.0);
  s0.sigma = Vector3d::UnitX();
  const auto traj = integrate(s0, 0.0, 0.7, linspace(0.0, 5.0, 11), 1e-10);
  REQUIRE((occupations(traj.states.back()) - occupations(s0)).norm() < 1e-12);
  const auto avg = trajectory_averages(traj, 0.0, 0.7);
  REQUIRE(avg.circulation == 0.0);
  REQUIRE(avg.edge_distance == 0.0);
}

TEST_CASE("classical occupations track the quantum corner evolution") {
  const int N = 40;
  const auto basis = SectorBasis::enumerate(N);
  const ModelParams p{1.0, 0.0, 0.0, N};
  const auto H = build_hamiltonian(basis, p, PerturbationRealization{});
  const double T = circulation_period(p.g);
  const auto times = linspace(0.0, T, 81);

  Propagator prop(H, KrylovOptions{});
  Eigen::VectorXcd psi = fock_state(basis, {0, 0, N}, plus_x());
  Eigen::Matrix3Xd quantum(3, 81);
  int k = 0;
  prop.evolve(psi, 0.0, times, [&](double, const Eigen::VectorXcd& st) {
    quantum.col(k++) = number_expectations(basis, st);
  });

  ClassicalState s0;
  s0.b << 0.0, 0.0, std::sqrt(double(N));
  s0.sigma = Vector3d::UnitX();
  const auto traj = integrate(s0, p.g, p.delta, times, 1e-10);

  double worst = 0.0;
  for (int i = 0; i < 81; ++i) {
    const Vector3d diff = quantum.col(i) - occupations(traj.states[std::size_t(i)]);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff() / N);
  }
  REQUIRE(worst < 0.05);
}

TEST_CASE("semiclassical preconditions are enforced") {
  ClassicalState s;
  s.b << 1.0, 0.0, 0.0;
  REQUIRE_THROWS_AS(integrate(s, 1.0, 0.0, std::vector<double>{}, 1e-10), config_error);
  REQUIRE_THROWS_AS(integrate(s, 1.0, 0.0, std::vector<double>{0.0, 1.0}, 0.0), config_error);
  REQUIRE_THROWS_AS(integrate(s, 1.0, 0.0, std::vector<double>{0.0, 1.0, 1.0}, 1e-10),
                    config_error);
  REQUIRE_THROWS_AS(solve_circulating_point(20.0, 0.0, 0.0), config_error);
  REQUIRE_THROWS_AS(solve_circulating_point(-3.0, 0.0, 1.0), config_error);
  REQUIRE_THROWS_AS(solve_circulating_point(20.0, 0.7, 1.0), config_error);

  const auto sol = solve_circulating_point(25.0, 0.0, 1.0);
  const auto half = integrate(sol.initial_state(), 1.0, detuning_for_epsilon(0.0, 1.0),
                              linspace(0.0, 0.5 * sol.period, 41), 1e-10);
  REQUIRE_THROWS_AS(trajectory_averages(half, 1.0, detuning_for_epsilon(0.0, 1.0)), config_error);
}
