#pragma once

// Falsifiable numerical experiments on the flows:
//
//   closeness_run      two solutions of the same flow, weighted distance
//                      delta(t) = ||x_a(t) - x_b(t)||_{w,p}, fitted against
//                      the envelope delta(0) e^{Ct} + D (e^{Ct} - 1)/C
//   asymptotics_run    power-tail data a/n^delta on the right half-line;
//                      checks that the deviation from the initial tail stays
//                      bounded in the matched weighted sup norm, uniformly
//                      across window sizes
//   support_spread_run one step from compactly supported data; the sites
//                      adjacent to the support must light up (compact support
//                      is not preserved)
//
// Envelope fits run in log space over (C, D) with both constrained
// nonnegative, so the fitted envelope is nondecreasing in t.

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include "al/hierarchy.hpp"
#include "al/integrator.hpp"

namespace al {

struct GronwallFit {
  double C = 0, D = 0;
  double y0 = 0;        // first sample, pinned (not fitted)
  double slack = 1.1;
  double max_ratio = 0;  // max over samples of y_i / envelope(t_i)
  bool envelope_ok = true;
};

namespace detail {

// (e^{C tau} - 1)/C, stable for small C tau.
inline double expm1_over(double c, double tau) {
  if (std::abs(c * tau) < 1e-8) return tau * (1.0 + 0.5 * c * tau);
  return std::expm1(c * tau) / c;
}

inline double golden_min(double lo, double hi,
                         const std::function<double(double)>& f, int iters) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace detail

// Envelope value at elapsed time tau >= 0 (measured from the first sample).
inline double gronwall_envelope(const GronwallFit& g, double tau) {
  return g.y0 * std::exp(g.C * tau) + g.D * detail::expm1_over(g.C, tau);
}

// Least-squares fit of log(series) to log(y0 e^{Ct} + D (e^{Ct}-1)/C) with
// C, D >= 0: coarse grid in C, golden-section in D at each C, then a local
// golden refinement in C. Zero samples carry no log information and are
// skipped by the loss; an identically zero series fits C = D = 0.
inline GronwallFit gronwall_fit(const std::vector<double>& times,
                                const std::vector<double>& series,
                                double slack = 1.1) {
  if (times.size() != series.size())
    throw validation_error("gronwall_fit: times and series sizes differ");
  if (times.empty()) throw validation_error("gronwall_fit: empty series");
  for (size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i]) || series[i] < 0)
      throw validation_error("gronwall_fit: series must be finite and >= 0");
    if (i && times[i] <= times[i - 1])
      throw validation_error("gronwall_fit: times must increase");
  }

  GronwallFit g;
  g.slack = slack;
  g.y0 = series.front();

  std::vector<double> tau(times.size());
  for (size_t i = 0; i < times.size(); ++i) tau[i] = times[i] - times.front();

  double ymax = *std::max_element(series.begin(), series.end());
  if (ymax == 0) return g;  // identically zero: C = D = 0, envelope holds

  auto loss = [&](double c, double d) {
    double s = 0;
    for (size_t i = 0; i < tau.size(); ++i) {
      if (series[i] <= 0) continue;
      double m = g.y0 * std::exp(c * tau[i]) + d * detail::expm1_over(c, tau[i]);
      if (m <= 0) return 1e30;  // y0 = 0, d = 0 cannot explain a positive sample
      double r = std::log(series[i]) - std::log(m);
      s += r * r;
    }
    return s;
  };

  const double tau_max = tau.back();
  auto d_cap = [&](double c) {
    double u = detail::expm1_over(c, tau_max);
    return u > 0 ? 2.0 * ymax / u : 0.0;
  };
  auto best_d = [&](double c) {
    double cap = d_cap(c);
    if (cap <= 0) return 0.0;
    double d = detail::golden_min(0.0, cap, [&](double dd) { return loss(c, dd); }, 60);
    if (loss(c, 0.0) <= loss(c, d)) d = 0.0;  // prefer the homogeneous fit
    return d;
  };

  const double c_hi = 12.0;
  double best_c = 0, best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 120; ++k) {
    double c = c_hi * k / 120.0;
    double l = loss(c, best_d(c));
    if (l < best) {
      best = l;
      best_c = c;
    }
  }
  double lo = std::max(0.0, best_c - 0.1), hi = std::min(c_hi, best_c + 0.1);
  double c_ref = detail::golden_min(
      lo, hi, [&](double c) { return loss(c, best_d(c)); }, 50);
  if (loss(c_ref, best_d(c_ref)) < best) best_c = c_ref;

  g.C = best_c;
  g.D = best_d(best_c);

  for (size_t i = 0; i < tau.size(); ++i) {
    double env = gronwall_envelope(g, tau[i]);
    double ratio;
    if (env > 0)
      ratio = series[i] / env;
    else
      ratio = series[i] > 0 ? std::numeric_limits<double>::infinity() : 1.0;
    g.max_ratio = std::max(g.max_ratio, ratio);
  }
  g.envelope_ok = g.max_ratio <= slack;
  return g;
}

namespace detail {

inline SequencePair pair_difference(const SequencePair& a,
                                    const SequencePair& b) {
  require_same_window(a.window(), b.window(), "pair_difference");
  SequencePair d(a.window());
  for (int n = a.n_min(); n <= a.n_max(); ++n) {
    d.alpha(n) = a.alpha(n) - b.alpha(n);
    d.beta(n) = a.beta(n) - b.beta(n);
  }
  return d;
}

}  // namespace detail

struct ClosenessReport {
  std::vector<double> times;
  std::vector<double> delta_norm;  // ||x_a(t) - x_b(t)||_{w,p}
  GronwallFit fit;
  bool envelope_ok = true;
  Trajectory first, second;
};

// Evolves both states under the same flow (concurrently), records the
// weighted distance at each sample, and fits the exponential envelope.
inline ClosenessReport closeness_run(const SequencePair& a,
                                     const SequencePair& b, const Weight& w,
                                     double p, const FlowSpec& spec, double t1,
                                     double h = 1e-3, int stride = 10,
                                     double slack = 1.1) {
  detail::require_same_window(a.window(), b.window(), "closeness_run");
  detail::require_same_window(a.window(), w.window(), "closeness_run");
  auto fut = std::async(std::launch::async, [&]() {
    return evolve(a, spec, 0.0, t1, h, {}, stride);
  });
  ClosenessReport r;
  r.second = evolve(b, spec, 0.0, t1, h, {}, stride);
  r.first = fut.get();
  r.times = r.first.times;
  r.delta_norm.reserve(r.times.size());
  for (size_t k = 0; k < r.times.size(); ++k)
    r.delta_norm.push_back(weighted_norm(
        detail::pair_difference(r.first.states[k], r.second.states[k]), w, p));
  r.fit = gronwall_fit(r.times, r.delta_norm, slack);
  r.envelope_ok = r.fit.envelope_ok;
  return r;
}

struct AsymptoticsWindowResult {
  Window win;
  std::vector<double> times;
  std::vector<double> residual;  // weighted deviation from the initial tail
  double hypothesis_sup = 0;   // ||(a0, b0)||_{w,inf} at t = 0
  // ||(a0 - a0^+, b0 - b0^+)||_{w^2,inf} at t = 0, margin-trimmed: the first
  // difference at the window edge reads the closure, not data.
  double hypothesis_diff = 0;
  double final_residual = 0;
};

struct AsymptoticsReport {
  double delta = 0;
  double weight_exponent = 0;  // min(delta, (delta+1)/2)
  double p = p_inf;
  int margin = 16;
  std::vector<AsymptoticsWindowResult> windows;
  double stability_ratio = 1;      // max consecutive final-residual ratio
  bool out_of_hypothesis = false;  // hypothesis norms grow with the window
  bool constraint_ok = true;       // constants satisfy the summed constraint
};

// Power-tail data a/n^delta (n > 0, zero on the left half-line), evolved on
// each window in turn. The residual series is the weighted norm of the
// deviation from the initial data, with w^2 for p = inf and w for finite p,
// taken over the margin-trimmed interior: window truncation corrupts a
// boundary band first, and the weight amplifies the right edge, so the trim
// keeps the diagnostic about the tail rather than about the cut.
inline AsymptoticsReport asymptotics_run(cplx a, cplx b, double delta,
                                         const FlowSpec& spec, double t1,
                                         const std::vector<int>& window_sizes,
                                         double p = p_inf, double h = 1e-3,
                                         int margin = 16, int stride = 10) {
  if (delta < 0) throw validation_error("asymptotics_run: delta must be >= 0");
  if (margin < 0) throw validation_error("asymptotics_run: margin must be >= 0");
  if (window_sizes.empty())
    throw validation_error("asymptotics_run: need at least one window size");

  AsymptoticsReport rep;
  rep.delta = delta;
  rep.weight_exponent = std::min(delta, 0.5 * (delta + 1.0));
  rep.p = p;
  rep.margin = margin;
  rep.constraint_ok =
      spec.is_al_system() || check_constraint(spec).ok_excluding_top;

  for (int N : window_sizes) {
    int half = N / 2;
    Window win = make_window(-half, N % 2 ? half : half - 1, Boundary::pad_zero);
    if (win.size() <= 2 * margin + 2)
      throw validation_error("asymptotics_run: window too small for margin");
    Weight w = Weight::power_plus(win, rep.weight_exponent);
    SequencePair x0 = profile_power_tail(win, a, b, delta);

    AsymptoticsWindowResult res;
    res.win = win;
    res.hypothesis_sup = weighted_norm(x0, w, p_inf);
    const Weight w2 = w.squared();
    for (int n = win.n_min + margin; n < win.n_max - margin; ++n) {
      double dev = std::abs(x0.alpha(n) - x0.alpha(n + 1)) +
                   std::abs(x0.beta(n) - x0.beta(n + 1));
      res.hypothesis_diff = std::max(res.hypothesis_diff, w2.at(n) * dev);
    }

    const Weight wr = p == p_inf ? w.squared() : w;
    auto residual_norm = [&](const SequencePair& x) {
      double acc = 0;
      for (int n = win.n_min + margin; n <= win.n_max - margin; ++n) {
        double dev = std::abs(x.alpha(n) - x0.alpha(n)) +
                     std::abs(x.beta(n) - x0.beta(n));
        double v = wr.at(n) * dev;
        if (p == p_inf)
          acc = std::max(acc, v);
        else
          acc += std::pow(v, p);
      }
      return p == p_inf ? acc : std::pow(acc, 1.0 / p);
    };

    Trajectory tr = evolve(x0, spec, 0.0, t1, h, {}, stride);
    res.times = tr.times;
    res.residual.reserve(tr.times.size());
    for (const auto& st : tr.states) res.residual.push_back(residual_norm(st));
    res.final_residual = res.residual.back();
    rep.windows.push_back(std::move(res));
  }

  for (size_t i = 1; i < rep.windows.size(); ++i) {
    double prev = rep.windows[i - 1].final_residual;
    double cur = rep.windows[i].final_residual;
    double ratio = prev > 0 ? cur / prev
                            : (cur > 0 ? std::numeric_limits<double>::infinity()
                                       : 1.0);
    rep.stability_ratio = std::max(rep.stability_ratio, ratio);
    auto grows = [](double lo, double hi) { return lo > 0 && hi / lo > 1.5; };
    if (grows(rep.windows[i - 1].hypothesis_sup, rep.windows[i].hypothesis_sup) ||
        grows(rep.windows[i - 1].hypothesis_diff, rep.windows[i].hypothesis_diff))
      rep.out_of_hypothesis = true;
  }
  return rep;
}

struct SupportSpreadReport {
  bool has_support = false;
  int left_site = 0, right_site = 0;  // sites adjacent to the support
  double left_mag = 0, right_mag = 0;  // |alpha| + |beta| there after one step
  double alpha_left = 0, alpha_right = 0;
  double beta_left = 0, beta_right = 0;
  double sup0 = 0;
  double threshold = 0;  // 1e-2 * h * sup0
  bool spread_detected = false;
};

// One integrator step from compactly supported data; compact support is not
// preserved, so the two sites adjacent to the support must exceed a
// first-order-in-h fraction of the initial amplitude.
inline SupportSpreadReport support_spread_run(const SequencePair& x,
                                              const FlowSpec& spec, double h) {
  SupportSpreadReport r;
  r.sup0 = x.sup_norm();
  int lo = 0, hi = 0;
  bool found = false;
  for (int n = x.n_min(); n <= x.n_max(); ++n) {
    if (std::abs(x.alpha(n)) + std::abs(x.beta(n)) > 0) {
      if (!found) lo = n;
      hi = n;
      found = true;
    }
  }
  if (!found) return r;  // zero data: nothing spreads, no claim made
  r.has_support = true;
  r.left_site = lo - 1;
  r.right_site = hi + 1;
  int held = detail::held_band(x.window(), spec);
  if (r.left_site < x.n_min() + held || r.right_site > x.n_max() - held)
    throw validation_error(
        "support_spread_run: support must sit strictly inside the evolving "
        "window");
  SequencePair y = rk4_step(x, spec, h);
  r.alpha_left = std::abs(y.alpha(r.left_site));
  r.beta_left = std::abs(y.beta(r.left_site));
  r.alpha_right = std::abs(y.alpha(r.right_site));
  r.beta_right = std::abs(y.beta(r.right_site));
  r.left_mag = r.alpha_left + r.beta_left;
  r.right_mag = r.alpha_right + r.beta_right;
  r.threshold = 1e-2 * h * r.sup0;
  r.spread_detected =
      std::min(r.left_mag, r.right_mag) > r.threshold;
  return r;
}

}  // namespace al
