#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "phlat/operators.hpp"

using namespace phlat;
using Eigen::MatrixXcd;
using Eigen::Matrix2cd;
using Eigen::VectorXcd;

namespace {

// Reference Hamiltonian assembled on the full three-mode product space with
// explicit ladder matrices and Kronecker products, then projected onto the
// fixed-N sector.  Shares nothing with the CSR builder except the 2x2 hop
// matrices, which have their own frozen-value tests below.
MatrixXcd reference_dense_h(const SectorBasis& basis, const ModelParams& p,
                            const PerturbationRealization& pert, Frame frame) {
  const int N = basis.N();
  const int m = N + 1;
  MatrixXcd a(m, m);  // annihilation for one mode
  a.setZero();
  for (int n = 1; n < m; ++n) a(n - 1, n) = std::sqrt(double(n));
  const MatrixXcd id = MatrixXcd::Identity(m, m);
  const Matrix2cd id2 = Matrix2cd::Identity();

  const MatrixXcd b1 = Eigen::kroneckerProduct(a, Eigen::kroneckerProduct(id, id).eval()).eval();
  const MatrixXcd b2 = Eigen::kroneckerProduct(id, Eigen::kroneckerProduct(a, id).eval()).eval();
  const MatrixXcd b3 = Eigen::kroneckerProduct(id, Eigen::kroneckerProduct(id, a).eval()).eval();
  const std::array<MatrixXcd, 3> b{b1, b2, b3};

  const int dm = m * m * m;
  MatrixXcd H = MatrixXcd::Zero(2 * dm, 2 * dm);
  auto add = [&](const MatrixXcd& mode, const Matrix2cd& q) {
    H += Eigen::kroneckerProduct(mode, q).eval();
  };

  add(MatrixXcd::Identity(dm, dm), p.delta * pauli_z());
  for (int j = 0; j < 3; ++j) {
    MatrixXcd nj = b[std::size_t(j)].adjoint() * b[std::size_t(j)];
    if (frame == Frame::lab) add(nj, p.omega * id2);
    add(nj, pert.delta_omega[std::size_t(j)] * id2);
  }
  // hops b_j^dag b_{j+1} G_{j-1} + h.c., cavity indices 1-based
  for (int j = 1; j <= 3; ++j) {
    const int jp = j % 3 + 1;
    const int jm = (j + 1) % 3 + 1;
    const Matrix2cd M =
        qubit_coupling(jm, p.g) + dot_sigma(pert.delta_g[std::size_t(jm - 1)]);
    const MatrixXcd hop = b[std::size_t(j - 1)].adjoint() * b[std::size_t(jp - 1)];
    add(hop, M);
    add(hop.adjoint(), M.adjoint());
  }

  // project onto the sector, rows/cols in basis order
  MatrixXcd out(basis.size(), basis.size());
  auto full_index = [&](const FockLabel& l) {
    return ((l.n[0] * m + l.n[1]) * m + l.n[2]) * 2 + (l.spin > 0 ? 0 : 1);
  };
  for (int r = 0; r < basis.size(); ++r)
    for (int c = 0; c < basis.size(); ++c)
      out(r, c) = H(full_index(basis.label(r)), full_index(basis.label(c)));
  return out;
}

double max_abs_diff(const SparseOperator& A, const MatrixXcd& B) {
  return (A.to_dense() - B).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("hop matrices: frozen values and cyclic covariance") {
  const Matrix2cd G3 = qubit_coupling(3, 1.0);
  Matrix2cd expect;
  expect << -1.0, iu, iu, 1.0;
  REQUIRE((G3 - expect).cwiseAbs().maxCoeff() < 1e-15);

  // R_z(2pi/3) G_j R_z^dag = G_{j+1}
  Matrix2cd R;
  R << std::exp(cx(0, -pi / 3)), 0, 0, std::exp(cx(0, pi / 3));
  for (int j = 1; j <= 3; ++j) {
    const Matrix2cd lhs = R * qubit_coupling(j, 0.8) * R.adjoint();
    const Matrix2cd rhs = qubit_coupling(j % 3 + 1, 0.8);
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
  }

  // dot_sigma against explicit Pauli expansion
  const Eigen::Vector3cd v(cx(0.3, -1.2), cx(0, 2), cx(-0.5, 0.25));
  const Matrix2cd D = dot_sigma(v);
  const Matrix2cd E = v[0] * pauli_x() + v[1] * pauli_y() + v[2] * pauli_z();
  REQUIRE((D - E).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sector Hamiltonian matches the product-space reference") {
  for (int N : {1, 2, 3}) {
    const auto basis = SectorBasis::enumerate(N);
    ModelParams p{0.9, 0.37, 1.4, N};

    SECTION("clean, rotating frame, N=" + std::to_string(N)) {
      const auto H = build_hamiltonian(basis, p, PerturbationRealization{});
      REQUIRE(max_abs_diff(H, reference_dense_h(basis, p, {}, Frame::rotating)) < 1e-13);
      REQUIRE(H.hermiticity_violation() == 0.0);
    }
    SECTION("lab frame, N=" + std::to_string(N)) {
      const auto H = build_hamiltonian(basis, p, PerturbationRealization{}, Frame::lab);
      REQUIRE(max_abs_diff(H, reference_dense_h(basis, p, {}, Frame::lab)) < 1e-13);
    }
    SECTION("disordered, N=" + std::to_string(N)) {
      const auto pert =
          sample_perturbation({PerturbationKind::coupling_generic, 0.2, 77}, 5);
      auto full = pert;
      full.delta_omega = {0.11, -0.07, 0.19};
      const auto H = build_hamiltonian(basis, p, full);
      REQUIRE(max_abs_diff(H, reference_dense_h(basis, p, full, Frame::rotating)) < 1e-13);
      REQUIRE(H.hermiticity_violation() == 0.0);
    }
  }
}

TEST_CASE("energy moments of corner states match closed forms") {
  // For |0,0,N> x |s> at Delta = 0: <H> = 0 and
  // <H^2> = N g^2 (4 - 2 sqrt(3) <sigma_x>).
  const int N = 24;
  const auto basis = SectorBasis::enumerate(N);
  const ModelParams p{1.3, 0.0, 0.0, N};
  const auto H = build_hamiltonian(basis, p, PerturbationRealization{});

  const int iup = basis.index_of({{0, 0, N}, +1});
  const int idn = basis.index_of({{0, 0, N}, -1});
  for (double sx : {0.0, 1.0, -1.0}) {
    VectorXcd psi = VectorXcd::Zero(basis.size());
    if (sx == 0.0) {
      psi[iup] = 1.0;
    } else {
      psi[iup] = 1.0 / std::sqrt(2.0);
      psi[idn] = sx / std::sqrt(2.0);
    }
    const VectorXcd hpsi = H.apply(psi);
    const double e1 = std::real(psi.dot(hpsi));
    const double e2 = std::real(hpsi.dot(hpsi));
    REQUIRE(std::abs(e1) < 1e-12 * p.g * N);
    const double expect = N * p.g * p.g * (4.0 - 2.0 * std::sqrt(3.0) * sx);
    REQUIRE(e2 == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("spectrum pairs as +/-E about the sector offset") {
  const int N = 5;
  const auto basis = SectorBasis::enumerate(N);
  const auto H = build_hamiltonian(basis, ModelParams{1.0, 0.45, 0.0, N},
                                   PerturbationRealization{});
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H.to_dense());
  const auto& E = es.eigenvalues();
  const int D = int(E.size());
  for (int i = 0; i < D; ++i)
    REQUIRE(E[i] + E[D - 1 - i] == Catch::Approx(0.0).margin(1e-11));
}

TEST_CASE("C3 unitary: unitarity, U^3 = -1, commutes with clean H") {
  const int N = 6;
  const auto basis = SectorBasis::enumerate(N);
  const auto U = c3_unitary(basis);
  const auto I = SparseOperator::identity(basis.size());

  const auto UtU = SparseOperator::multiply(U.adjoint(), U);
  REQUIRE(SparseOperator::axpby(1.0, UtU, -1.0, I).max_abs() < 1e-15);

  const auto U3 = SparseOperator::multiply(SparseOperator::multiply(U, U), U);
  REQUIRE(SparseOperator::axpby(1.0, U3, 1.0, I).max_abs() < 1e-15);

  const auto H = build_hamiltonian(basis, ModelParams{0.7, 0.3, 0.0, N},
                                   PerturbationRealization{});
  const auto UHUt = SparseOperator::multiply(SparseOperator::multiply(U, H), U.adjoint());
  const double scale = H.max_abs();
  REQUIRE(SparseOperator::axpby(1.0, UHUt, -1.0, H).max_abs() < 1e-13 * scale);
}

TEST_CASE("anti-symmetry residual: zero for clean H, exact offset in the lab frame") {
  const int N = 7;
  const auto basis = SectorBasis::enumerate(N);
  const ModelParams p{1.1, 0.6, 2.5, N};

  const auto H = build_hamiltonian(basis, p, PerturbationRealization{});
  REQUIRE(p_antisymmetry_residual(H) < 1e-13);

  // omega N is even under the anti-symmetry, so the lab frame offsets the
  // residual by exactly 2 omega N
  const auto Hlab = build_hamiltonian(basis, p, PerturbationRealization{}, Frame::lab);
  REQUIRE(p_antisymmetry_residual(Hlab) ==
          Catch::Approx(2.0 * p.omega * N).epsilon(1e-12));
}

TEST_CASE("disorder classes break or preserve the anti-symmetry as designed") {
  const int N = 5;
  const auto basis = SectorBasis::enumerate(N);
  const ModelParams p{1.0, 0.2, 0.0, N};

  const auto cav = sample_perturbation({PerturbationKind::cavity_frequency, 0.3, 11}, 0);
  REQUIRE(p_antisymmetry_residual(build_hamiltonian(basis, p, cav)) > 0.05);

  const auto gen = sample_perturbation({PerturbationKind::coupling_generic, 0.3, 12}, 0);
  REQUIRE(p_antisymmetry_residual(build_hamiltonian(basis, p, gen)) > 0.05);

  for (std::uint64_t stream = 0; stream < 8; ++stream) {
    const auto sym =
        sample_perturbation({PerturbationKind::coupling_p_symmetric, 0.4, 13}, stream);
    REQUIRE(sym.any());
    REQUIRE(p_antisymmetry_residual(build_hamiltonian(basis, p, sym)) < 1e-13);
  }
}

TEST_CASE("perturbation draws are reproducible and follow the declared order") {
  const PerturbationSpec spec{PerturbationKind::cavity_frequency, 0.5, 99};
  const auto p1 = sample_perturbation(spec, 3);
  const auto p2 = sample_perturbation(spec, 3);
  REQUIRE(p1.delta_omega == p2.delta_omega);
  const auto p3 = sample_perturbation(spec, 4);
  REQUIRE(p1.delta_omega != p3.delta_omega);

  pcg64 r(99, 3);
  for (int j = 0; j < 3; ++j)
    REQUIRE(p1.delta_omega[std::size_t(j)] == r.symmetric(0.5));

  const auto g = sample_perturbation({PerturbationKind::coupling_generic, 0.2, 5}, 0);
  pcg64 rg(5, 0);
  for (int j = 0; j < 3; ++j)
    for (int a = 0; a < 3; ++a) {
      const double re = rg.symmetric(0.2), im = rg.symmetric(0.2);
      REQUIRE(g.delta_g[std::size_t(j)][a] == cx(re, im));
    }
}

TEST_CASE("currents: Hermitian, traceless, sum to zero, match the commutator") {
  const int N = 4;
  const auto basis = SectorBasis::enumerate(N);
  const auto H = build_hamiltonian(basis, ModelParams{0.8, 0.1, 0.0, N},
                                   PerturbationRealization{});

  SparseOperator sum = SparseOperator::identity(basis.size(), 0.0);
  for (int j = 1; j <= 3; ++j) {
    const auto J = current_op(basis, H, j);
    REQUIRE(J.hermiticity_violation() < 1e-15);
    REQUIRE(std::abs(J.trace()) == 0.0);
    const auto nj = number_op(basis, j);
    const auto comm = SparseOperator::axpby(iu, SparseOperator::multiply(H, nj), -iu,
                                            SparseOperator::multiply(nj, H));
    REQUIRE(SparseOperator::axpby(1.0, J, -1.0, comm).max_abs() < 1e-13);
    sum = SparseOperator::axpby(1.0, sum, 1.0, J);
  }
  REQUIRE(sum.max_abs() < 1e-13);
}

TEST_CASE("circulation: Hermitian, traceless, C3 invariant") {
  const int N = 5;
  const auto basis = SectorBasis::enumerate(N);
  const auto H = build_hamiltonian(basis, ModelParams{1.0, 0.25, 0.0, N},
                                   PerturbationRealization{});
  const auto C = circulation_op(basis, H);
  REQUIRE(C.hermiticity_violation() < 1e-13);
  REQUIRE(std::abs(C.trace()) < 1e-12);

  const auto U = c3_unitary(basis);
  const auto UCUt = SparseOperator::multiply(SparseOperator::multiply(U, C), U.adjoint());
  REQUIRE(SparseOperator::axpby(1.0, UCUt, -1.0, C).max_abs() < 1e-12 * (1 + C.max_abs()));
}

TEST_CASE("diagonal observables read the labels") {
  const int N = 6;
  const auto basis = SectorBasis::enumerate(N);
  for (int j = 1; j <= 3; ++j) {
    const auto nj = number_op(basis, j);
    for (int i = 0; i < basis.size(); ++i) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(basis.size());
      e[i] = 1.0;
      REQUIRE(std::real(e.dot(nj.apply(e))) == double(basis.label(i).n[std::size_t(j - 1)]));
    }
  }
  const auto d = edge_distance_op(basis);
  REQUIRE(std::abs(d.trace().imag()) == 0.0);
}

TEST_CASE("qubit expectations on a handmade state") {
  // two Fock cells; qubit state (|up> + i|dn>)/sqrt(2) in the first cell
  VectorXcd psi = VectorXcd::Zero(4);
  psi[0] = 1.0 / std::sqrt(2.0);
  psi[1] = iu / std::sqrt(2.0);
  const auto s = sigma_expectations(psi);
  REQUIRE(s[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s[1] == Catch::Approx(1.0).epsilon(1e-15));
  REQUIRE(s[2] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("circulation period") {
  REQUIRE(circulation_period(1.0) == Catch::Approx(4.0 * pi / std::sqrt(3.0)).epsilon(1e-15));
  REQUIRE(circulation_period(-2.0) == Catch::Approx(2.0 * pi / std::sqrt(3.0)).epsilon(1e-15));
  REQUIRE_THROWS_AS(circulation_period(0.0), config_error);
}
