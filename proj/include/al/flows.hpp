#pragma once

// Ablowitz-Ladik flows in solved form. The defining equations are kept in
// "= 0" shape in comments; the code returns the time derivatives they pin
// down:
//
//   -i alpha_t - (1 - alpha beta)(alpha^- + alpha^+) + 2 alpha = 0
//   -i beta_t  + (1 - alpha beta)(beta^-  + beta^+)  - 2 beta  = 0
//
// so alpha_t = i((1 - alpha beta)(alpha^- + alpha^+) - 2 alpha) and
//    beta_t  = -i((1 - alpha beta)(beta^- + beta^+) - 2 beta).
// The same solve pattern (multiply the "= 0" form by i) is used for every
// flow in the family.

#include <optional>
#include <vector>

#include "al/lattice.hpp"

namespace al {

struct FlowDerivative {
  Window win;
  std::vector<cplx> dalpha, dbeta;
  // Sites outside [valid_lo, valid_hi] depend on the artificial boundary
  // closure (full window under periodic).
  int valid_lo = 0, valid_hi = 0;

  cplx da(int n) const { return dalpha[win.idx(n)]; }
  cplx db(int n) const { return dbeta[win.idx(n)]; }
};

// Selects one member of the flow family: ladder depths (r_minus, r_plus) and
// summation constants c_minus[j] = c_{j,-}, c_plus[j] = c_{j,+}, sizes r+1.
// Only the mean of the two top constants enters the equations.
struct FlowSpec {
  int r_minus = 1, r_plus = 1;
  std::vector<cplx> c_minus{cplx{1, 0}, cplx{-2, 0}};
  std::vector<cplx> c_plus{cplx{1, 0}, cplx{-2, 0}};

  cplx c_top() const { return 0.5 * (c_minus.back() + c_plus.back()); }
  int reach() const { return r_minus > r_plus ? r_minus : r_plus; }

  void validate() const {
    if (r_minus < 0 || r_plus < 0)
      throw validation_error("flow spec: ladder depths must be >= 0");
    if (static_cast<int>(c_minus.size()) != r_minus + 1 ||
        static_cast<int>(c_plus.size()) != r_plus + 1)
      throw validation_error("flow spec: need r+1 constants per sign");
  }

  static FlowSpec al_system() { return FlowSpec{}; }

  // Pure phase rotation: alpha_t = i c alpha, beta_t = -i c beta.
  static FlowSpec phase(cplx c) { return FlowSpec{0, 0, {c}, {c}}; }

  // c_{0,+-} = -+i; with beta = conj(alpha) this is the Schur flow
  // alpha_t = (1 - |alpha|^2)(alpha^+ - alpha^-).
  static FlowSpec schur() {
    return FlowSpec{1, 1, {cplx{0, 1}, cplx{0, 0}}, {cplx{0, -1}, cplx{0, 0}}};
  }

  bool is_al_system() const {
    FlowSpec ref;
    return r_minus == ref.r_minus && r_plus == ref.r_plus &&
           c_minus == ref.c_minus && c_plus == ref.c_plus;
  }

  bool operator==(const FlowSpec& o) const {
    return r_minus == o.r_minus && r_plus == o.r_plus &&
           c_minus == o.c_minus && c_plus == o.c_plus;
  }
};

inline FlowDerivative al_system_rhs(const SequencePair& x,
                                    std::optional<Boundary> mode = {}) {
  const Window& w = x.window();
  FlowDerivative d{w, std::vector<cplx>(w.size()), std::vector<cplx>(w.size()),
                   w.n_min, w.n_max};
  const cplx I{0, 1};
  for (int n = w.n_min; n <= w.n_max; ++n) {
    cplx am = x.alpha_ext(n - 1, mode), ap = x.alpha_ext(n + 1, mode);
    cplx bm = x.beta_ext(n - 1, mode), bp = x.beta_ext(n + 1, mode);
    cplx g = 1.0 - x.alpha(n) * x.beta(n);
    d.dalpha[w.idx(n)] = I * (g * (am + ap) - 2.0 * x.alpha(n));
    d.dbeta[w.idx(n)] = -I * (g * (bm + bp) - 2.0 * x.beta(n));
  }
  Boundary m = mode.value_or(w.mode);
  if (m != Boundary::periodic) {
    d.valid_lo = w.n_min + 1;
    d.valid_hi = w.n_max - 1;
  }
  return d;
}

namespace detail {

// Depth (0,0): -i alpha_t - c alpha = 0, -i beta_t + c beta = 0.
inline FlowDerivative al00_rhs(const SequencePair& x, cplx c) {
  const Window& w = x.window();
  FlowDerivative d{w, std::vector<cplx>(w.size()), std::vector<cplx>(w.size()),
                   w.n_min, w.n_max};
  const cplx I{0, 1};
  for (int n = w.n_min; n <= w.n_max; ++n) {
    d.dalpha[w.idx(n)] = I * c * x.alpha(n);
    d.dbeta[w.idx(n)] = -I * c * x.beta(n);
  }
  return d;
}

// Depth (1,1): -i alpha_t - g(c0m alpha^- + c0p alpha^+) - c1 alpha = 0,
//              -i beta_t  + g(c0p beta^-  + c0m beta^+)  + c1 beta  = 0,
// g = 1 - alpha beta.
inline FlowDerivative al11_rhs(const SequencePair& x, cplx c0m, cplx c0p,
                               cplx c1, std::optional<Boundary> mode) {
  const Window& w = x.window();
  FlowDerivative d{w, std::vector<cplx>(w.size()), std::vector<cplx>(w.size()),
                   w.n_min, w.n_max};
  const cplx I{0, 1};
  for (int n = w.n_min; n <= w.n_max; ++n) {
    cplx g = 1.0 - x.alpha(n) * x.beta(n);
    d.dalpha[w.idx(n)] =
        I * (g * (c0m * x.alpha_ext(n - 1, mode) + c0p * x.alpha_ext(n + 1, mode)) +
             c1 * x.alpha(n));
    d.dbeta[w.idx(n)] =
        -I * (g * (c0p * x.beta_ext(n - 1, mode) + c0m * x.beta_ext(n + 1, mode)) +
              c1 * x.beta(n));
  }
  Boundary m = mode.value_or(w.mode);
  if (m != Boundary::periodic) {
    d.valid_lo = w.n_min + 1;
    d.valid_hi = w.n_max - 1;
  }
  return d;
}

// Depth (2,2), solved from the printed two-level flow; reach 2.
inline FlowDerivative al22_rhs(const SequencePair& x, cplx c0m, cplx c0p,
                               cplx c1m, cplx c1p, cplx c2,
                               std::optional<Boundary> mode) {
  const Window& w = x.window();
  FlowDerivative d{w, std::vector<cplx>(w.size()), std::vector<cplx>(w.size()),
                   w.n_min, w.n_max};
  const cplx I{0, 1};
  for (int n = w.n_min; n <= w.n_max; ++n) {
    cplx a = x.alpha(n), b = x.beta(n);
    cplx am = x.alpha_ext(n - 1, mode), ap = x.alpha_ext(n + 1, mode);
    cplx amm = x.alpha_ext(n - 2, mode), app = x.alpha_ext(n + 2, mode);
    cplx bm = x.beta_ext(n - 1, mode), bp = x.beta_ext(n + 1, mode);
    cplx bmm = x.beta_ext(n - 2, mode), bpp = x.beta_ext(n + 2, mode);
    cplx g = 1.0 - a * b;
    cplx gp = 1.0 - ap * bp;
    cplx gm = 1.0 - am * bm;
    cplx a2 = g * (c0p * app * gp + c0m * amm * gm -
                   a * (c0p * ap * bm + c0m * am * bp) -
                   b * (c0m * am * am + c0p * ap * ap));
    cplx b2 = g * (c0m * bpp * gp + c0p * bmm * gm -
                   b * (c0p * ap * bm + c0m * am * bp) -
                   a * (c0p * bm * bm + c0m * bp * bp));
    d.dalpha[w.idx(n)] = I * (a2 + g * (c1m * am + c1p * ap) + c2 * a);
    d.dbeta[w.idx(n)] = -I * (b2 + g * (c1p * bm + c1m * bp) + c2 * b);
  }
  Boundary m = mode.value_or(w.mode);
  if (m != Boundary::periodic) {
    d.valid_lo = w.n_min + 2;
    d.valid_hi = w.n_max - 2;
  }
  return d;
}

}  // namespace detail

// Closed-form members of the family, depths (0,0), (1,1), (2,2) only. Serves
// as the independent oracle for the recursion-built right-hand side.
inline FlowDerivative al_explicit_rhs(const SequencePair& x, const FlowSpec& s,
                                      std::optional<Boundary> mode = {}) {
  s.validate();
  if (s.r_minus == 0 && s.r_plus == 0) return detail::al00_rhs(x, s.c_top());
  if (s.r_minus == 1 && s.r_plus == 1)
    return detail::al11_rhs(x, s.c_minus[0], s.c_plus[0], s.c_top(), mode);
  if (s.r_minus == 2 && s.r_plus == 2)
    return detail::al22_rhs(x, s.c_minus[0], s.c_plus[0], s.c_minus[1],
                            s.c_plus[1], s.c_top(), mode);
  throw validation_error(
      "al_explicit_rhs: closed forms exist for depths (0,0), (1,1), (2,2)");
}

// (alpha, beta) -> (c alpha, beta / c). Products alpha*beta, hence all g
// levels, are invariant; every flow is equivariant.
inline SequencePair scaling_transform(const SequencePair& x, cplx c) {
  if (c == 0.0) throw validation_error("scaling_transform: c must be nonzero");
  SequencePair y(x.window());
  for (int n = x.n_min(); n <= x.n_max(); ++n) {
    y.alpha(n) = c * x.alpha(n);
    y.beta(n) = x.beta(n) / c;
  }
  return y;
}

inline FlowDerivative scaling_transform(const FlowDerivative& d, cplx c) {
  if (c == 0.0) throw validation_error("scaling_transform: c must be nonzero");
  FlowDerivative y = d;
  for (auto& v : y.dalpha) v *= c;
  for (auto& v : y.dbeta) v /= c;
  return y;
}

}  // namespace al
