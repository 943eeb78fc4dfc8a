#pragma once

// Compatibility certificates for the flows: the local 2x2 zero-curvature
// identity and the doubly-infinite five-diagonal operator pair truncated to a
// window.
//
// Transfer matrix and its depth-(1,1) companion at site n (spectral
// parameter z):
//
//   U = ( z          alpha(n) )    V = i ( z - 1 - alpha(n) beta(n-1)      alpha(n) - alpha(n-1)/z )
//       ( beta(n) z  1        )          ( beta(n-1) z - beta(n)           1 + alpha(n-1) beta(n) - 1/z )
//
// A flow derivative is compatible iff U_t + U V - V^+ U = 0 at every site.
//
// The five-diagonal operator uses rho = sqrt(1 - alpha beta) (principal
// branch) and alternates two stencil rows; with absolute site parity (row m):
//
//   even m: L(m,m-1) = -alpha(m) rho(m-1)     odd m: L(m,m-2) = rho(m-2) rho(m-1)
//           L(m,m)   = -alpha(m) beta(m-1)           L(m,m-1) = beta(m-2) rho(m-1)
//           L(m,m+1) = -alpha(m+1) rho(m)            L(m,m)   = -alpha(m) beta(m-1)
//           L(m,m+2) = rho(m) rho(m+1)               L(m,m+1) = beta(m-1) rho(m)
//
// P = (i/2)(L_+ - L_- + (L^-1)_- - (L^-1)_+ + 2 Q_d), Q_d = diag((-1)^m),
// and the flow satisfies dL/dt = P L - L P up to window-truncation effects
// confined to a boundary band.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "al/flows.hpp"

namespace al {

inline Eigen::Matrix2cd transfer_U(const SequencePair& x, int n, cplx z) {
  Eigen::Matrix2cd u;
  u << z, x.alpha(n), x.beta(n) * z, cplx{1, 0};
  return u;
}

inline Eigen::Matrix2cd flow_V(const SequencePair& x, int n, cplx z,
                               std::optional<Boundary> mode = {}) {
  if (z == 0.0) throw validation_error("flow_V: z must be nonzero");
  cplx a = x.alpha_ext(n, mode), am = x.alpha_ext(n - 1, mode);
  cplx b = x.beta_ext(n, mode), bm = x.beta_ext(n - 1, mode);
  const cplx I{0, 1};
  Eigen::Matrix2cd v;
  v << I * (z - 1.0 - a * bm), I * (a - am / z), I * (bm * z - b),
      I * (1.0 + am * b - 1.0 / z);
  return v;
}

// Frobenius norm of U_t + U V - V^+ U at site n; V^+ is V evaluated one site
// up. Zero (to rounding) iff deriv is the compatible flow derivative.
inline double zc_residual(const SequencePair& x, const FlowDerivative& d,
                          cplx z, int n, std::optional<Boundary> mode = {}) {
  detail::require_same_window(x.window(), d.win, "zc_residual");
  if (n < x.n_min() + 1 || n > x.n_max() - 1)
    throw validation_error("zc_residual: need sites n-1 .. n+1 in the window");
  Eigen::Matrix2cd ut;
  ut << cplx{}, d.da(n), d.db(n) * z, cplx{};
  Eigen::Matrix2cd r = ut + transfer_U(x, n, z) * flow_V(x, n, z, mode) -
                       flow_V(x, n + 1, z, mode) * transfer_U(x, n, z);
  return r.norm();
}

struct LaxBundle {
  Window win;
  Boundary closure = Boundary::periodic;
  Eigen::MatrixXcd L, L_upper, L_lower;  // strict triangular parts
  Eigen::MatrixXcd L_inv;
  Eigen::VectorXcd qd;    // alternating diagonal, -1 on the alpha-stencil rows
  std::vector<cplx> rho;  // principal sqrt(1 - alpha beta) per window site
  double inv_residual = 0;  // max entry of |L L_inv - I|
  bool inv_ok = false;
  std::vector<int> branch_flagged;  // sites with 1 - alpha beta on the cut
  double rho_tol = 1e-8;
};

namespace detail {

struct SiteData {
  cplx a, b, rho;
  cplx da, db, drho;
};

// Mode-closed per-site values (and optional derivatives) for the stencil
// walk. Out-of-window sites: pad_zero -> constants (0, 0, 1); frozen ->
// clamped values treated as constants; periodic -> wrapped.
inline SiteData site_data(const SequencePair& x, const FlowDerivative* d,
                          int n, Boundary closure,
                          const std::vector<cplx>& rho) {
  SiteData s{};
  const Window& w = x.window();
  bool outside = !w.contains(n);
  if (outside) {
    if (closure == Boundary::periodic) {
      n = w.wrap(n);
      outside = false;
    } else if (closure == Boundary::frozen_edges) {
      // clamped copies are held: values carried over, derivatives zero
      n = n < w.n_min ? w.n_min : w.n_max;
    } else {
      s.rho = 1.0;  // alpha = beta = 0 outside
      return s;
    }
  }
  s.a = x.alpha(n);
  s.b = x.beta(n);
  s.rho = rho[w.idx(n)];
  if (d && !outside) {
    s.da = d->da(n);
    s.db = d->db(n);
    // d rho/dt = -(alpha_t beta + alpha beta_t) / (2 rho)
    s.drho = -(s.da * s.b + s.a * s.db) / (2.0 * s.rho);
  }
  return s;
}

// One pass builds L and, when deriv is given, dL/dt entrywise via the product
// rule on the stencil factors.
inline void assemble_L(const SequencePair& x, const FlowDerivative* deriv,
                       Boundary closure, const std::vector<cplx>& rho,
                       Eigen::MatrixXcd& L, Eigen::MatrixXcd* dL) {
  const Window& w = x.window();
  const int N = w.size();
  L = Eigen::MatrixXcd::Zero(N, N);
  if (dL) *dL = Eigen::MatrixXcd::Zero(N, N);

  auto put = [&](int row, int col, cplx v, cplx dv) {
    if (col < w.n_min || col > w.n_max) {
      if (closure != Boundary::periodic) return;
      col = w.wrap(col);
    }
    L(w.idx(row), w.idx(col)) = v;
    if (dL) (*dL)(w.idx(row), w.idx(col)) = dv;
  };

  auto sd = [&](int n) { return site_data(x, deriv, n, closure, rho); };

  for (int m = w.n_min; m <= w.n_max; ++m) {
    bool even = ((m % 2) + 2) % 2 == 0;
    SiteData sm = sd(m), sm1 = sd(m - 1);
    if (even) {
      SiteData sp1 = sd(m + 1);
      put(m, m - 1, -sm.a * sm1.rho, -(sm.da * sm1.rho + sm.a * sm1.drho));
      put(m, m, -sm.a * sm1.b, -(sm.da * sm1.b + sm.a * sm1.db));
      put(m, m + 1, -sp1.a * sm.rho, -(sp1.da * sm.rho + sp1.a * sm.drho));
      put(m, m + 2, sm.rho * sp1.rho, sm.drho * sp1.rho + sm.rho * sp1.drho);
    } else {
      SiteData sm2 = sd(m - 2);
      put(m, m - 2, sm2.rho * sm1.rho, sm2.drho * sm1.rho + sm2.rho * sm1.drho);
      put(m, m - 1, sm2.b * sm1.rho, sm2.db * sm1.rho + sm2.b * sm1.drho);
      put(m, m, -sm.a * sm1.b, -(sm.da * sm1.b + sm.a * sm1.db));
      put(m, m + 1, sm1.b * sm.rho, sm1.db * sm.rho + sm1.b * sm.drho);
    }
  }
}

}  // namespace detail

// Five-diagonal truncation of the lattice operator. The periodic closure is
// the structurally sound one (requires even N; the two-step shift pattern is
// parity-consistent only then) and is the default for operator diagnostics.
// pad_zero drops out-of-window couplings, which can make the truncation
// singular (already in the free case); inverse health is recorded rather than
// enforced, and build_P rejects bundles without a trustworthy inverse.
inline LaxBundle build_L(const SequencePair& x,
                         std::optional<Boundary> closure = {},
                         double rho_tol = 1e-8) {
  LaxBundle B;
  B.win = x.window();
  B.closure = closure.value_or(Boundary::periodic);
  B.rho_tol = rho_tol;
  const int N = B.win.size();
  if (B.closure == Boundary::periodic && N % 2 != 0)
    throw validation_error("build_L: periodic closure needs an even window");

  B.rho.resize(N);
  for (int n = x.n_min(); n <= x.n_max(); ++n) {
    cplx one_ab = 1.0 - x.alpha(n) * x.beta(n);
    if (std::abs(one_ab) <= rho_tol)
      throw numerical_error("build_L: alpha*beta too close to 1 at site " +
                            std::to_string(n));
    if (one_ab.real() < 0 &&
        std::abs(one_ab.imag()) <= 1e-12 * (1.0 + std::abs(one_ab)))
      B.branch_flagged.push_back(n);
    // Subtraction can leave -0.0 imaginary parts; keep sqrt on the principal
    // side of the cut.
    if (one_ab.imag() == 0.0) one_ab = cplx(one_ab.real(), 0.0);
    B.rho[B.win.idx(n)] = std::sqrt(one_ab);
  }

  detail::assemble_L(x, nullptr, B.closure, B.rho, B.L, nullptr);

  // The alternating diagonal must be -1 on rows carrying the alpha stencil
  // (even sites here); flipping it breaks the operator-pair identity on the
  // odd bands by exactly [2i qd, L].
  B.qd.resize(N);
  for (int n = x.n_min(); n <= x.n_max(); ++n)
    B.qd[B.win.idx(n)] = (((n % 2) + 2) % 2 == 0) ? -1.0 : 1.0;

  B.L_upper = B.L.triangularView<Eigen::StrictlyUpper>();
  B.L_lower = B.L.triangularView<Eigen::StrictlyLower>();

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(B.L);
  B.L_inv = lu.inverse();
  Eigen::MatrixXcd res =
      B.L * B.L_inv - Eigen::MatrixXcd::Identity(N, N);
  // NaN-safe max scan: a singular truncation leaves non-finite entries.
  double worst = 0;
  for (int i = 0; i < N && std::isfinite(worst); ++i)
    for (int j = 0; j < N; ++j) {
      double v = std::abs(res(i, j));
      if (!std::isfinite(v)) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      worst = std::max(worst, v);
    }
  B.inv_residual = worst;
  B.inv_ok = B.L_inv.allFinite() && std::isfinite(worst) && worst <= 1e-8;
  return B;
}

// P = (i/2)(L_+ - L_- + (L^-1)_- - (L^-1)_+ + 2 Q_d). Its diagonal is
// i Q_d exactly.
inline Eigen::MatrixXcd build_P(const LaxBundle& B) {
  if (!B.inv_ok)
    throw numerical_error(
        "build_P: truncated operator is singular or badly conditioned "
        "(inverse residual " +
        fmt_g17(B.inv_residual) + ")");
  const int N = B.win.size();
  Eigen::MatrixXcd inv_upper = B.L_inv.triangularView<Eigen::StrictlyUpper>();
  Eigen::MatrixXcd inv_lower = B.L_inv.triangularView<Eigen::StrictlyLower>();
  Eigen::MatrixXcd p =
      cplx{0, 0.5} * (B.L_upper - B.L_lower + inv_lower - inv_upper);
  for (int i = 0; i < N; ++i) p(i, i) = cplx{0, 1} * B.qd[i];
  return p;
}

// Eigenvalues sorted lexicographically by (re, im).
inline std::vector<cplx> spectrum(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  if (es.info() != Eigen::Success)
    throw numerical_error("spectrum: eigensolver failed to converge");
  std::vector<cplx> ev(es.eigenvalues().data(),
                       es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

namespace detail {

// Min-cost bipartite assignment (shortest augmenting path with potentials,
// O(n^3)). Returns col index matched to each row.
inline std::vector<int> min_cost_assignment(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1), way(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

}  // namespace detail

struct DriftReport {
  double max_drift = 0;
  double mean_drift = 0;
};

// Distance between two spectra under the min-total-cost pairing.
inline DriftReport eigen_drift(const std::vector<cplx>& a,
                               const std::vector<cplx>& b) {
  if (a.size() != b.size())
    throw validation_error("eigen_drift: spectra must have equal size");
  const int n = static_cast<int>(a.size());
  if (n == 0) return {};
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost[i][j] = std::abs(a[i] - b[j]);
  auto match = detail::min_cost_assignment(cost);
  DriftReport r;
  for (int i = 0; i < n; ++i) {
    double d = cost[i][match[i]];
    r.max_drift = std::max(r.max_drift, d);
    r.mean_drift += d / n;
  }
  return r;
}

// Max interior entry of |dL/dt - (P L - L P)|, the operator-pair form of the
// compatibility identity. Margin rows/columns at each end are excluded:
// truncation error is confined to a boundary band. Entries touching
// branch-flagged sites are skipped (rho derivative is not trustworthy on the
// cut).
inline double lax_residual(const SequencePair& x, const FlowDerivative& d,
                           int margin = 8,
                           std::optional<Boundary> closure = {}) {
  detail::require_same_window(x.window(), d.win, "lax_residual");
  if (margin < 4) throw validation_error("lax_residual: margin must be >= 4");
  LaxBundle B = build_L(x, closure.value_or(Boundary::periodic));
  const int N = B.win.size();
  if (N <= 2 * margin)
    throw validation_error("lax_residual: window too small for margin");

  Eigen::MatrixXcd L, dL;
  detail::assemble_L(x, &d, B.closure, B.rho, L, &dL);
  Eigen::MatrixXcd P = build_P(B);
  Eigen::MatrixXcd comm = P * B.L - B.L * P;

  std::vector<char> skip(N, 0);
  for (int n : B.branch_flagged)
    for (int k = -2; k <= 2; ++k) {
      int i = B.win.idx(n) + k;
      if (i >= 0 && i < N) skip[i] = 1;
    }

  double r = 0;
  for (int i = margin; i < N - margin; ++i) {
    if (skip[i]) continue;
    for (int j = margin; j < N - margin; ++j) {
      if (skip[j]) continue;
      r = std::max(r, std::abs(dL(i, j) - comm(i, j)));
    }
  }
  return r;
}

}  // namespace al
