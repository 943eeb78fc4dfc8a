#pragma once

// Doubly infinite complex sequence pairs (alpha, beta) truncated to a finite
// window, with boundary closures, weighted norms, shifts, and stock initial
// profiles. Site indices are absolute lattice positions; windows never
// renumber them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "al/common.hpp"

namespace al {

inline constexpr double p_inf = std::numeric_limits<double>::infinity();

enum class Boundary { pad_zero, periodic, frozen_edges };

inline const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::pad_zero: return "pad_zero";
    case Boundary::periodic: return "periodic";
    case Boundary::frozen_edges: return "frozen_edges";
  }
  return "?";
}

struct Window {
  int n_min = 0;
  int n_max = 0;
  Boundary mode = Boundary::pad_zero;
  int frozen_band = 0;  // 0 = auto (stencil width + 1) when mode is frozen_edges

  int size() const { return n_max - n_min + 1; }
  bool contains(int n) const { return n >= n_min && n <= n_max; }
  int idx(int n) const { return n - n_min; }
  int wrap(int n) const {
    int N = size();
    int k = (n - n_min) % N;
    if (k < 0) k += N;
    return n_min + k;
  }
  bool operator==(const Window& o) const {
    return n_min == o.n_min && n_max == o.n_max && mode == o.mode &&
           frozen_band == o.frozen_band;
  }
};

inline Window make_window(int n_min, int n_max, Boundary mode = Boundary::pad_zero,
                          int frozen_band = 0) {
  if (n_max - n_min + 1 < 8)
    throw validation_error("window needs at least 8 sites");
  if (frozen_band < 0) throw validation_error("frozen band must be >= 0");
  return Window{n_min, n_max, mode, frozen_band};
}

class SequencePair {
 public:
  SequencePair() : win_{0, 7, Boundary::pad_zero, 0}, a_(8), b_(8) {}

  explicit SequencePair(const Window& w)
      : win_(w), a_(w.size(), cplx{}), b_(w.size(), cplx{}) {
    if (w.size() < 8) throw validation_error("window needs at least 8 sites");
  }

  SequencePair(const Window& w, std::vector<cplx> a, std::vector<cplx> b)
      : win_(w), a_(std::move(a)), b_(std::move(b)) {
    if (w.size() < 8) throw validation_error("window needs at least 8 sites");
    if (static_cast<int>(a_.size()) != w.size() ||
        static_cast<int>(b_.size()) != w.size())
      throw validation_error("sequence length does not match window");
  }

  const Window& window() const { return win_; }
  int n_min() const { return win_.n_min; }
  int n_max() const { return win_.n_max; }
  int size() const { return win_.size(); }

  cplx& alpha(int n) { return a_[win_.idx(n)]; }
  cplx& beta(int n) { return b_[win_.idx(n)]; }
  const cplx& alpha(int n) const { return a_[win_.idx(n)]; }
  const cplx& beta(int n) const { return b_[win_.idx(n)]; }

  const std::vector<cplx>& alpha_raw() const { return a_; }
  const std::vector<cplx>& beta_raw() const { return b_; }
  std::vector<cplx>& alpha_raw() { return a_; }
  std::vector<cplx>& beta_raw() { return b_; }

  // Boundary-closed reads for any site index.
  cplx alpha_ext(int n, std::optional<Boundary> m = {}) const {
    return ext(a_, n, m.value_or(win_.mode));
  }
  cplx beta_ext(int n, std::optional<Boundary> m = {}) const {
    return ext(b_, n, m.value_or(win_.mode));
  }

  double sup_norm() const {
    double s = 0;
    for (int i = 0; i < win_.size(); ++i)
      s = std::max(s, std::abs(a_[i]) + std::abs(b_[i]));
    return s;
  }

  // Bookkeeping for the transfer-matrix hypothesis: alpha*beta must stay away
  // from 1; alpha*beta = 0 sites are recorded, never rejected.
  struct AbReport {
    double max_abs_ab = 0;
    double min_dist_to_one = std::numeric_limits<double>::infinity();
    std::vector<int> product_zero_sites;
  };
  AbReport ab_report() const {
    AbReport r;
    for (int n = win_.n_min; n <= win_.n_max; ++n) {
      cplx ab = alpha(n) * beta(n);
      r.max_abs_ab = std::max(r.max_abs_ab, std::abs(ab));
      r.min_dist_to_one = std::min(r.min_dist_to_one, std::abs(1.0 - ab));
      if (ab == 0.0) r.product_zero_sites.push_back(n);
    }
    return r;
  }

 private:
  cplx ext(const std::vector<cplx>& v, int n, Boundary m) const {
    if (win_.contains(n)) return v[win_.idx(n)];
    switch (m) {
      case Boundary::pad_zero: return cplx{};
      case Boundary::periodic: return v[win_.idx(win_.wrap(n))];
      case Boundary::frozen_edges:
        return n < win_.n_min ? v.front() : v.back();
    }
    return cplx{};
  }

  Window win_;
  std::vector<cplx> a_, b_;
};

// Weight sequence w(n) >= 1, stored over the window together with a
// closed-form rule so it extends to any site (squared weights, margins,
// shifted reads).
class Weight {
 public:
  static Weight unit(const Window& w) {
    return Weight(w, [](int) { return 1.0; }, "unit");
  }

  static Weight one_plus_abs(const Window& w) {
    return Weight(w, [](int n) { return 1.0 + std::abs(n); }, "one_plus_abs");
  }

  // (1+n)^e on the right half-line, 1 elsewhere; the natural weight for
  // power-tail data.
  static Weight power_plus(const Window& w, double e) {
    if (e < 0) throw validation_error("weight exponent must be >= 0");
    return Weight(
        w, [e](int n) { return n > 0 ? std::pow(1.0 + n, e) : 1.0; },
        "power_plus(" + fmt_g17(e) + ")");
  }

  static Weight from_rule(const Window& w, std::function<double(int)> rule,
                          std::string name = "custom") {
    return Weight(w, std::move(rule), std::move(name));
  }

  const Window& window() const { return win_; }
  const std::string& name() const { return name_; }

  double at(int n) const { return win_.contains(n) ? w_[win_.idx(n)] : rule_(n); }

  Weight squared() const {
    auto r = rule_;
    return Weight(win_, [r](int n) { double v = r(n); return v * v; },
                  name_ + "^2");
  }

  // sup over adjacent site pairs of w(n+1)/w(n) + w(n)/w(n+1); bounds the
  // operator norm of both one-site shifts on the weighted spaces.
  double shift_ratio_bound() const { return srb_; }

 private:
  Weight(const Window& w, std::function<double(int)> rule, std::string name)
      : win_(w), rule_(std::move(rule)), name_(std::move(name)) {
    w_.resize(win_.size());
    for (int n = win_.n_min; n <= win_.n_max; ++n) {
      double v = rule_(n);
      if (!(v >= 1.0) || !std::isfinite(v))
        throw validation_error("weights must satisfy w(n) >= 1");
      w_[win_.idx(n)] = v;
    }
    srb_ = 0;
    for (int n = win_.n_min - 1; n <= win_.n_max; ++n) {
      double r = rule_(n + 1) / rule_(n);
      srb_ = std::max(srb_, r + 1.0 / r);
    }
  }

  Window win_;
  std::vector<double> w_;
  std::function<double(int)> rule_;
  std::string name_;
  double srb_ = 0;
};

namespace detail {
inline void require_same_window(const Window& a, const Window& b,
                                const char* what) {
  if (a.n_min != b.n_min || a.n_max != b.n_max)
    throw validation_error(std::string(what) + ": window mismatch");
}
}  // namespace detail

// ||(alpha, beta)||_{w,p}: (sum_n w(n)(|alpha|^p + |beta|^p))^{1/p} for finite
// p >= 1, sup_n w(n)(|alpha(n)| + |beta(n)|) for p = inf.
inline double weighted_norm(const SequencePair& x, const Weight& w, double p) {
  detail::require_same_window(x.window(), w.window(), "weighted_norm");
  if (!(p >= 1.0)) throw validation_error("norm exponent must satisfy p >= 1");
  if (p == p_inf) {
    double s = 0;
    for (int n = x.n_min(); n <= x.n_max(); ++n)
      s = std::max(s, w.at(n) * (std::abs(x.alpha(n)) + std::abs(x.beta(n))));
    return s;
  }
  double s = 0;
  for (int n = x.n_min(); n <= x.n_max(); ++n)
    s += w.at(n) *
         (std::pow(std::abs(x.alpha(n)), p) + std::pow(std::abs(x.beta(n)), p));
  return std::pow(s, 1.0 / p);
}

// Pointwise shift: result(n) = x(n + j), out-of-window reads closed by mode.
inline SequencePair shift(const SequencePair& x, int j,
                          std::optional<Boundary> mode = {}) {
  SequencePair y(x.window());
  for (int n = x.n_min(); n <= x.n_max(); ++n) {
    y.alpha(n) = x.alpha_ext(n + j, mode);
    y.beta(n) = x.beta_ext(n + j, mode);
  }
  return y;
}

// ||(alpha - alpha^+, beta - beta^+)||_{w,p}; the one-sided difference pair
// whose boundedness the decay results hinge on.
inline double difference_norm(const SequencePair& x, const Weight& w, double p,
                              std::optional<Boundary> mode = {}) {
  SequencePair d(x.window());
  for (int n = x.n_min(); n <= x.n_max(); ++n) {
    d.alpha(n) = x.alpha(n) - x.alpha_ext(n + 1, mode);
    d.beta(n) = x.beta(n) - x.beta_ext(n + 1, mode);
  }
  return weighted_norm(d, w, p);
}

namespace detail {
inline void reject_ab_one(const SequencePair& x, const char* kind) {
  for (int n = x.n_min(); n <= x.n_max(); ++n)
    if (std::abs(1.0 - x.alpha(n) * x.beta(n)) < 1e-12)
      throw validation_error(std::string(kind) +
                             ": alpha*beta = 1 at site " + std::to_string(n));
}
}  // namespace detail

// alpha(n) = a/n^delta, beta(n) = b/n^delta on n > 0; zero on n <= 0.
inline SequencePair profile_power_tail(const Window& w, cplx a, cplx b,
                                       double delta) {
  if (delta < 0) throw validation_error("power_tail: delta must be >= 0");
  SequencePair x(w);
  for (int n = std::max(1, w.n_min); n <= w.n_max; ++n) {
    double s = std::pow(static_cast<double>(n), -delta);
    x.alpha(n) = a * s;
    x.beta(n) = b * s;
  }
  detail::reject_ab_one(x, "power_tail");
  return x;
}

// Constant left/right half-line values (step at n = 0; n >= 0 is "right").
inline SequencePair profile_steplike(const Window& w, cplx a_left, cplx a_right,
                                     cplx b_left, cplx b_right) {
  SequencePair x(w);
  for (int n = w.n_min; n <= w.n_max; ++n) {
    x.alpha(n) = n < 0 ? a_left : a_right;
    x.beta(n) = n < 0 ? b_left : b_right;
  }
  detail::reject_ab_one(x, "steplike");
  return x;
}

// Constant values on [n0, n1], zero outside.
inline SequencePair profile_compact(const Window& w, int n0, int n1, cplx a_val,
                                    cplx b_val) {
  if (n0 > n1 || !w.contains(n0) || !w.contains(n1))
    throw validation_error("compact: support must lie inside the window");
  SequencePair x(w);
  for (int n = n0; n <= n1; ++n) {
    x.alpha(n) = a_val;
    x.beta(n) = b_val;
  }
  detail::reject_ab_one(x, "compact");
  return x;
}

inline SequencePair profile_gaussian(const Window& w, cplx a_amp, cplx b_amp,
                                     double width, double center = 0) {
  if (!(width > 0)) throw validation_error("gaussian: width must be > 0");
  SequencePair x(w);
  for (int n = w.n_min; n <= w.n_max; ++n) {
    double u = (n - center) / width;
    double g = std::exp(-u * u);
    x.alpha(n) = a_amp * g;
    x.beta(n) = b_amp * g;
  }
  detail::reject_ab_one(x, "gaussian");
  return x;
}

// Tagged-union profile description; the CLI and config files funnel through
// this, library code calls the typed factories above directly.
struct ProfileParams {
  enum class Kind { power_tail, steplike, compact, gaussian } kind =
      Kind::gaussian;
  cplx a{0.3, 0.0}, b{0.3, 0.0};  // amplitudes (power_tail: numerators)
  double delta = 1.0;             // power_tail decay exponent
  cplx a_left{}, b_left{};        // steplike left values (right values = a, b)
  int n0 = 0, n1 = 0;             // compact support
  double width = 10.0, center = 0.0;
};

inline SequencePair make_profile(const Window& w, const ProfileParams& p) {
  using K = ProfileParams::Kind;
  switch (p.kind) {
    case K::power_tail: return profile_power_tail(w, p.a, p.b, p.delta);
    case K::steplike: return profile_steplike(w, p.a_left, p.a, p.b_left, p.b);
    case K::compact: return profile_compact(w, p.n0, p.n1, p.a, p.b);
    case K::gaussian:
      return profile_gaussian(w, p.a, p.b, p.width, p.center);
  }
  throw validation_error("make_profile: unknown profile kind");
}

}  // namespace al
