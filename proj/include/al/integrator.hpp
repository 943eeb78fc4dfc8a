#pragma once

// Classical fixed-step fourth-order time stepping for the flow family, with
// blowup detection, boundary-band handling, trajectory sampling, and a
// step-halving convergence table.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "al/hierarchy.hpp"

namespace al {

class blowup_error : public numerical_error {
 public:
  blowup_error(double t, double sup, SequencePair last)
      : numerical_error("blowup at t = " + fmt_g17(t) +
                        " (sup = " + fmt_g17(sup) + ")"),
        t_abort(t),
        sup_at_abort(sup),
        last_finite(std::move(last)) {}
  double t_abort;
  double sup_at_abort;
  SequencePair last_finite;  // state before the offending step
};

inline constexpr double blowup_sup = 1e6;

namespace detail {

inline void axpy(SequencePair& y, double c, const FlowDerivative& d) {
  const int N = y.size();
  for (int i = 0; i < N; ++i) {
    y.alpha_raw()[i] += c * d.dalpha[i];
    y.beta_raw()[i] += c * d.dbeta[i];
  }
}

// Width of the band held fixed at each window end during a step. pad_zero
// holds the stencil reach (those sites' derivatives depend on the artificial
// zero closure); frozen_edges holds its configured band (auto: reach + 1);
// periodic updates everything.
inline int held_band(const Window& w, const FlowSpec& s) {
  switch (w.mode) {
    case Boundary::periodic: return 0;
    case Boundary::pad_zero: return s.reach();
    case Boundary::frozen_edges:
      return w.frozen_band > 0 ? w.frozen_band : s.reach() + 1;
  }
  return 0;
}

inline void zero_band(FlowDerivative& d, int band) {
  const int N = static_cast<int>(d.dalpha.size());
  for (int k = 0; k < band && k < N; ++k) {
    d.dalpha[k] = d.dbeta[k] = cplx(0, 0);
    d.dalpha[N - 1 - k] = d.dbeta[N - 1 - k] = cplx(0, 0);
  }
}

}  // namespace detail

// One classical fourth-order step of size h. The held band's derivative is
// masked in every stage, not just at the end of the step: a band that moves
// inside a stage leaks an O(h^2) per-step error into its neighbors and caps
// the global order at one.
inline SequencePair rk4_step(const SequencePair& x, const FlowSpec& s,
                             double h) {
  const int band = detail::held_band(x.window(), s);
  auto rhs = [&](const SequencePair& y) {
    FlowDerivative d = al_r_rhs(y, s);
    detail::zero_band(d, band);
    return d;
  };

  FlowDerivative k1 = rhs(x);
  SequencePair y2 = x;
  detail::axpy(y2, h / 2, k1);
  FlowDerivative k2 = rhs(y2);
  SequencePair y3 = x;
  detail::axpy(y3, h / 2, k2);
  FlowDerivative k3 = rhs(y3);
  SequencePair y4 = x;
  detail::axpy(y4, h, k3);
  FlowDerivative k4 = rhs(y4);

  SequencePair out = x;
  const int N = x.size();
  for (int i = 0; i < N; ++i) {
    out.alpha_raw()[i] +=
        h / 6 * (k1.dalpha[i] + 2.0 * k2.dalpha[i] + 2.0 * k3.dalpha[i] +
                 k4.dalpha[i]);
    out.beta_raw()[i] += h / 6 * (k1.dbeta[i] + 2.0 * k2.dbeta[i] +
                                  2.0 * k3.dbeta[i] + k4.dbeta[i]);
  }

  // With masked stages this is a no-op up to signed zeros; keep the band
  // bitwise equal to the input.
  for (int k = 0; k < band && k < N; ++k) {
    int lo = x.n_min() + k, hi = x.n_max() - k;
    out.alpha(lo) = x.alpha(lo);
    out.beta(lo) = x.beta(lo);
    out.alpha(hi) = x.alpha(hi);
    out.beta(hi) = x.beta(hi);
  }
  return out;
}

struct Observer {
  std::string name;
  std::function<double(double, const SequencePair&)> fn;
};

struct Trajectory {
  std::vector<double> times;         // sample times (always t0 and t1)
  std::vector<SequencePair> states;  // states at sample times
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observables;  // [observer][sample]

  const SequencePair& final_state() const { return states.back(); }
};

// Integrate from t0 to t1 with fixed step h (h must divide t1 - t0).
// Samples every `stride` steps plus the endpoints. Throws blowup_error when
// the sup norm exceeds blowup_sup or turns non-finite.
inline Trajectory evolve(const SequencePair& x0, const FlowSpec& s, double t0,
                         double t1, double h,
                         const std::vector<Observer>& obs = {},
                         int stride = 10) {
  s.validate();
  if (t1 < t0) throw validation_error("evolve: t1 must be >= t0");
  if (!(h > 0)) throw validation_error("evolve: step size must be > 0");
  if (stride < 1) throw validation_error("evolve: stride must be >= 1");
  const double span = t1 - t0;
  const std::int64_t steps = std::llround(span / h);
  if (std::abs(steps * h - span) > 1e-9 * std::max(1.0, std::abs(span)))
    throw validation_error("evolve: h must divide t1 - t0");

  Trajectory tr;
  for (const auto& o : obs) tr.observable_names.push_back(o.name);
  tr.observables.resize(obs.size());

  auto sample = [&](double t, const SequencePair& x) {
    tr.times.push_back(t);
    tr.states.push_back(x);
    for (size_t i = 0; i < obs.size(); ++i)
      tr.observables[i].push_back(obs[i].fn(t, x));
  };

  SequencePair x = x0;
  sample(t0, x);
  for (std::int64_t k = 1; k <= steps; ++k) {
    SequencePair next = rk4_step(x, s, h);
    double sup = next.sup_norm();
    if (!std::isfinite(sup) || sup > blowup_sup)
      throw blowup_error(t0 + k * h, sup, x);
    x = std::move(next);
    if (k % stride == 0 || k == steps) sample(t0 + k * h, x);
  }
  return tr;
}

inline double sup_distance(const SequencePair& a, const SequencePair& b) {
  detail::require_same_window(a.window(), b.window(), "sup_distance");
  double s = 0;
  for (int i = 0; i < a.size(); ++i)
    s = std::max(s, std::abs(a.alpha_raw()[i] - b.alpha_raw()[i]) +
                        std::abs(a.beta_raw()[i] - b.beta_raw()[i]));
  return s;
}

struct ConvergenceRow {
  double h = 0;
  double err = 0;     // sup distance of the final state to the reference run
  double order = 0;   // log ratio vs the previous row (0 for the first row)
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double observed_order = 0;  // mean of the per-row estimates
};

// Errors are measured against a reference run at a quarter of the finest
// listed step, so every listed h gets a usable error entry.
inline ConvergenceReport convergence_report(const SequencePair& x0,
                                            const FlowSpec& s, double t1,
                                            std::vector<double> h_list) {
  if (h_list.empty()) return {};
  std::sort(h_list.begin(), h_list.end(), std::greater<>());
  double h_ref = h_list.back() / 4;
  SequencePair ref = evolve(x0, s, 0, t1, h_ref, {}, 1 << 30).final_state();

  ConvergenceReport rep;
  for (double h : h_list) {
    ConvergenceRow row;
    row.h = h;
    row.err = sup_distance(evolve(x0, s, 0, t1, h, {}, 1 << 30).final_state(),
                           ref);
    rep.rows.push_back(row);
  }
  double acc = 0;
  int cnt = 0;
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    auto& prev = rep.rows[i - 1];
    auto& cur = rep.rows[i];
    if (cur.err > 0 && prev.err > 0) {
      cur.order = std::log(prev.err / cur.err) / std::log(prev.h / cur.h);
      acc += cur.order;
      ++cnt;
    }
  }
  rep.observed_order = cnt ? acc / cnt : 0;
  return rep;
}

}  // namespace al
