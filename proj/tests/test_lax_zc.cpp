#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "al/lax_zc.hpp"

using namespace al;

namespace {

SequencePair rand_pair(const Window& w, Rng& rng, double radius = 0.5) {
  SequencePair x(w);
  for (int n = w.n_min; n <= w.n_max; ++n) {
    x.alpha(n) = rng.disk(radius);
    x.beta(n) = rng.disk(radius);
  }
  return x;
}

}  // namespace

TEST_CASE("transfer matrix entries and determinant") {
  Window w = make_window(-8, 7);
  SequencePair x(w);
  x.alpha(3) = cplx(0.2, -0.1);
  x.beta(3) = cplx(-0.4, 0.3);
  cplx z(0.6, 0.8);
  Eigen::Matrix2cd u = transfer_U(x, 3, z);
  REQUIRE(u(0, 0) == z);
  REQUIRE(u(0, 1) == x.alpha(3));
  REQUIRE(u(1, 0) == x.beta(3) * z);
  REQUIRE(u(1, 1) == cplx(1, 0));
  cplx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  REQUIRE(std::abs(det - z * (1.0 - x.alpha(3) * x.beta(3))) < 1e-15);
}

TEST_CASE("companion matrix on free data is diagonal") {
  Window w = make_window(-8, 7);
  SequencePair zero(w);
  cplx z(0.3, -0.5);
  const cplx I(0, 1);
  Eigen::Matrix2cd v = flow_V(zero, 0, z);
  REQUIRE(std::abs(v(0, 0) - I * (z - 1.0)) < 1e-15);
  REQUIRE(v(0, 1) == cplx(0, 0));
  REQUIRE(v(1, 0) == cplx(0, 0));
  REQUIRE(std::abs(v(1, 1) - I * (1.0 - 1.0 / z)) < 1e-15);
  REQUIRE_THROWS_AS(flow_V(zero, 0, cplx(0, 0)), validation_error);
}

TEST_CASE("zero-curvature identity certifies the flow and flags corruption") {
  Rng rng(91);
  Window w = make_window(-16, 15, Boundary::periodic);
  SequencePair x = rand_pair(w, rng, 0.4);
  FlowDerivative d = al_system_rhs(x);

  double worst = 0;
  for (int k = 0; k < 8; ++k) {
    double th = 2 * std::numbers::pi * k / 8.0 + 0.37;
    cplx z = std::polar(1.0, th);
    for (int n = -15; n <= 14; ++n)
      worst = std::max(worst, zc_residual(x, d, z, n));
  }
  REQUIRE(worst < 1e-12);

  FlowDerivative bad = d;
  for (auto& v : bad.dalpha) v = -v;
  double floor_ = 0;
  for (int n = -15; n <= 14; ++n)
    floor_ = std::max(floor_, zc_residual(x, bad, cplx(1, 0), n));
  REQUIRE(floor_ > 1e-2);

  REQUIRE_THROWS_AS(zc_residual(x, d, cplx(1, 0), -16), validation_error);
}

TEST_CASE("five-diagonal operator on free data is the two-step shift") {
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair zero(w);
  LaxBundle B = build_L(zero);
  const int N = 16;
  REQUIRE(B.inv_ok);
  REQUIRE(B.branch_flagged.empty());

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      int site = -8 + i;
      bool even = ((site % 2) + 2) % 2 == 0;
      int expect_col = (i + (even ? 2 : -2) + N) % N;
      REQUIRE(B.L(i, j) == (j == expect_col ? cplx(1, 0) : cplx(0, 0)));
    }

  // Unitary; eigenvalues are the (N/2)-th roots of unity, each twice.
  Eigen::MatrixXcd gram = B.L * B.L.adjoint();
  REQUIRE((gram - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() <
          1e-14);
  std::vector<cplx> exact;
  for (int k = 0; k < N / 2; ++k) {
    cplx r = std::polar(1.0, 2 * std::numbers::pi * k / (N / 2));
    exact.push_back(r);
    exact.push_back(r);
  }
  REQUIRE(eigen_drift(spectrum(B.L), exact).max_drift < 1e-12);
}

TEST_CASE("single-site data perturbs exactly one stencil entry") {
  Window w = make_window(-8, 7, Boundary::periodic);

  SequencePair xa(w);
  xa.alpha(0) = cplx(0.5, 0);
  LaxBundle A = build_L(xa);
  SequencePair zero(w);
  Eigen::MatrixXcd free_L = build_L(zero).L;
  Eigen::MatrixXcd diff = A.L - free_L;
  REQUIRE(std::abs(diff(w.idx(0), w.idx(-1)) - cplx(-0.5, 0)) < 1e-15);
  diff(w.idx(0), w.idx(-1)) = 0;
  REQUIRE(diff.cwiseAbs().maxCoeff() < 1e-15);

  SequencePair xb(w);
  xb.beta(0) = cplx(0.4, 0);
  Eigen::MatrixXcd diffb = build_L(xb).L - free_L;
  REQUIRE(std::abs(diffb(w.idx(1), w.idx(2)) - cplx(0.4, 0)) < 1e-15);
  diffb(w.idx(1), w.idx(2)) = 0;
  REQUIRE(diffb.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("triangular split reconstructs the operator") {
  Rng rng(101);
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair x = rand_pair(w, rng, 0.4);
  LaxBundle B = build_L(x);
  Eigen::MatrixXcd diag = B.L;
  diag = Eigen::MatrixXcd(diag.diagonal().asDiagonal());
  REQUIRE((B.L_upper + B.L_lower + diag - B.L).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(B.inv_residual < 1e-10);
}

TEST_CASE("rho uses the principal branch and flags the cut") {
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair x(w);
  x.alpha(2) = cplx(3, 0);
  x.beta(2) = cplx(0.5, 0);  // 1 - alpha beta = -0.5, on the cut
  LaxBundle B = build_L(x);
  REQUIRE(B.branch_flagged == std::vector<int>{2});
  REQUIRE(std::abs(B.rho[w.idx(2)] - cplx(0, std::sqrt(0.5))) < 1e-15);
  REQUIRE(std::abs(B.rho[w.idx(0)] - cplx(1, 0)) < 1e-15);

  SequencePair y(w);
  y.alpha(1) = cplx(2, 0);
  y.beta(1) = cplx(0.5, 0);  // alpha beta = 1 exactly
  REQUIRE_THROWS_AS(build_L(y), numerical_error);
}

TEST_CASE("periodic closure needs an even window") {
  Window w{-8, 6, Boundary::periodic, 0};  // 15 sites
  SequencePair x(w);
  REQUIRE_THROWS_AS(build_L(x), validation_error);
}

TEST_CASE("zero-padded truncation of free data is singular and refused") {
  Window w = make_window(-8, 7, Boundary::pad_zero);
  SequencePair zero(w);
  LaxBundle B = build_L(zero, Boundary::pad_zero);
  REQUIRE(!B.inv_ok);
  REQUIRE_THROWS_AS(build_P(B), numerical_error);
}

TEST_CASE("generator diagonal and free structure") {
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair zero(w);
  LaxBundle B = build_L(zero);
  Eigen::MatrixXcd P = build_P(B);
  const int N = 16;
  const cplx I(0, 1);

  for (int i = 0; i < N; ++i) REQUIRE(P(i, i) == I * B.qd[i]);

  // Skew-adjoint, and +-2 couplings carry the site parity, opposite in phase
  // to the diagonal (away from the wrap seam, where the triangular split
  // reassigns entries).
  REQUIRE((P + P.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  for (int i = 2; i < N - 2; ++i) {
    cplx want = -0.5 * I * B.qd[i];
    REQUIRE(std::abs(P(i, i + 2) - want) < 1e-14);
    REQUIRE(std::abs(P(i, i - 2) - want) < 1e-14);
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      int d = std::abs(i - j);
      if (d == 0 || d == 2 || d == N - 2) continue;
      REQUIRE(std::abs(P(i, j)) < 1e-14);
    }
}

TEST_CASE("assembled derivative matches a finite difference") {
  Rng rng(103);
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair x = rand_pair(w, rng, 0.4);
  FlowDerivative d = al_system_rhs(x);

  LaxBundle B = build_L(x);
  Eigen::MatrixXcd L, dL;
  detail::assemble_L(x, &d, B.closure, B.rho, L, &dL);
  REQUIRE((L - B.L).cwiseAbs().maxCoeff() == 0.0);

  double eps = 1e-6;
  SequencePair xp = x, xm = x;
  for (int n = -8; n <= 7; ++n) {
    xp.alpha(n) += eps * d.da(n);
    xp.beta(n) += eps * d.db(n);
    xm.alpha(n) -= eps * d.da(n);
    xm.beta(n) -= eps * d.db(n);
  }
  Eigen::MatrixXcd fd = (build_L(xp).L - build_L(xm).L) / (2 * eps);
  REQUIRE((fd - dL).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("operator-pair identity holds in the interior") {
  Window w = make_window(-32, 31, Boundary::periodic);
  SequencePair x = profile_gaussian(w, cplx(0.3, 0.1), cplx(0.2, -0.15), 6.0);
  FlowDerivative d = al_system_rhs(x);
  REQUIRE(lax_residual(x, d) < 1e-8);

  FlowDerivative bad = d;
  for (auto& v : bad.dalpha) v = -v;
  REQUIRE(lax_residual(x, bad) > 1e-2);

  REQUIRE_THROWS_AS(lax_residual(x, d, 3), validation_error);
  REQUIRE_THROWS_AS(lax_residual(x, d, 32), validation_error);
}

TEST_CASE("generator interior entries are window-stable") {
  auto patch = [](const Window& w) {
    return profile_gaussian(w, cplx(0.3, 0.1), cplx(0.2, -0.15), 6.0);
  };
  Window w1 = make_window(-32, 31, Boundary::periodic);
  Window w2 = make_window(-64, 63, Boundary::periodic);
  Eigen::MatrixXcd p1 = build_P(build_L(patch(w1)));
  Eigen::MatrixXcd p2 = build_P(build_L(patch(w2)));
  double worst = 0;
  for (int i = -16; i <= 15; ++i)
    for (int j = -16; j <= 15; ++j)
      worst = std::max(worst,
                       std::abs(p1(w1.idx(i), w1.idx(j)) -
                                p2(w2.idx(i), w2.idx(j))));
  REQUIRE(worst < 1e-9);
}

TEST_CASE("assignment pairing matches brute force on small spectra") {
  Rng rng(107);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<cplx> a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = rng.disk(2.0);
        b[i] = rng.disk(2.0);
      }
      std::vector<std::vector<double>> cost(n, std::vector<double>(n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost[i][j] = std::abs(a[i] - b[j]);
      auto match = detail::min_cost_assignment(cost);
      double got = 0;
      std::vector<char> seen(n, 0);
      for (int i = 0; i < n; ++i) {
        got += cost[i][match[i]];
        REQUIRE(!seen[match[i]]);
        seen[match[i]] = 1;
      }
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      do {
        double s = 0;
        for (int i = 0; i < n; ++i) s += cost[i][perm[i]];
        best = std::min(best, s);
      } while (std::next_permutation(perm.begin(), perm.end()));
      REQUIRE(got == Catch::Approx(best).margin(1e-12));
    }
  }
}

TEST_CASE("spectral drift pairs across reordering and perturbation") {
  std::vector<cplx> a{cplx(0, 0), cplx(1, 0), cplx(0, 2), cplx(3, 1)};
  std::vector<cplx> shuffled{a[2], a[0], a[3], a[1]};
  REQUIRE(eigen_drift(a, shuffled).max_drift == 0.0);

  std::vector<cplx> moved = a;
  for (size_t i = 0; i < moved.size(); ++i) moved[i] += cplx(1e-6, 0);
  DriftReport r = eigen_drift(a, moved);
  REQUIRE(r.max_drift == Catch::Approx(1e-6));
  REQUIRE(r.mean_drift == Catch::Approx(1e-6));

  REQUIRE_THROWS_AS(eigen_drift(a, std::vector<cplx>{cplx(0, 0)}),
                    validation_error);
}

TEST_CASE("spectrum is invariant under the amplitude scaling") {
  Rng rng(109);
  Window w = make_window(-16, 15, Boundary::periodic);
  SequencePair x = rand_pair(w, rng, 0.4);
  std::vector<cplx> s0 = spectrum(build_L(x).L);
  std::vector<cplx> s1 = spectrum(build_L(scaling_transform(x, cplx(1.7, 0))).L);
  REQUIRE(eigen_drift(s0, s1).max_drift < 1e-10);
}
