#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "al/lattice.hpp"

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

TEST_CASE("window construction and validation") {
  Window w = make_window(-4, 3);
  REQUIRE(w.size() == 8);
  REQUIRE(w.contains(-4));
  REQUIRE(w.contains(3));
  REQUIRE(!w.contains(4));
  REQUIRE(w.idx(-4) == 0);
  REQUIRE(w.idx(3) == 7);
  REQUIRE(w.wrap(4) == -4);
  REQUIRE(w.wrap(-5) == 3);
  REQUIRE(w.wrap(11) == 3);
  REQUIRE_THROWS_AS(make_window(0, 5), validation_error);
  REQUIRE_THROWS_AS(make_window(0, 15, Boundary::pad_zero, -1),
                    validation_error);
}

TEST_CASE("boundary-closed reads") {
  Window w = make_window(0, 7);
  SequencePair x(w);
  for (int n = 0; n <= 7; ++n) x.alpha(n) = cplx(n, 0);

  REQUIRE(x.alpha_ext(8, Boundary::pad_zero) == cplx(0, 0));
  REQUIRE(x.alpha_ext(-1, Boundary::pad_zero) == cplx(0, 0));
  REQUIRE(x.alpha_ext(8, Boundary::periodic) == cplx(0, 0));
  REQUIRE(x.alpha_ext(9, Boundary::periodic) == cplx(1, 0));
  REQUIRE(x.alpha_ext(-1, Boundary::periodic) == cplx(7, 0));
  REQUIRE(x.alpha_ext(-3, Boundary::frozen_edges) == cplx(0, 0));
  REQUIRE(x.alpha_ext(12, Boundary::frozen_edges) == cplx(7, 0));
  REQUIRE(x.alpha_ext(5) == cplx(5, 0));
}

TEST_CASE("product report") {
  Window w = make_window(-8, 7);
  SequencePair zero(w);
  auto rep = zero.ab_report();
  REQUIRE(rep.max_abs_ab == 0.0);
  REQUIRE(rep.min_dist_to_one == 1.0);
  REQUIRE(static_cast<int>(rep.product_zero_sites.size()) == w.size());

  SequencePair x(w);
  x.alpha(0) = cplx(0.5, 0);
  x.beta(0) = cplx(0.8, 0);
  rep = x.ab_report();
  REQUIRE(rep.max_abs_ab == Catch::Approx(0.4));
  REQUIRE(rep.min_dist_to_one == Catch::Approx(0.6));
  REQUIRE(static_cast<int>(rep.product_zero_sites.size()) == w.size() - 1);
}

TEST_CASE("weighted norm worked examples") {
  Window w = make_window(-8, 7);
  Weight unit = Weight::unit(w);

  SequencePair x(w);
  x.alpha(0) = cplx(1, 0);
  REQUIRE(weighted_norm(x, unit, 2.0) == Catch::Approx(1.0));

  SequencePair zero(w);
  REQUIRE(weighted_norm(zero, unit, 1.0) == 0.0);
  REQUIRE(weighted_norm(zero, unit, p_inf) == 0.0);

  SequencePair y(w);
  y.alpha(0) = cplx(1, 0);
  y.beta(0) = cplx(1, 0);
  Weight spiked = Weight::from_rule(w, [](int n) { return n == 0 ? 2.0 : 1.0; });
  REQUIRE(weighted_norm(y, spiked, p_inf) == Catch::Approx(4.0));
}

TEST_CASE("weighted norm validation") {
  Window w = make_window(-8, 7);
  SequencePair x(w);
  REQUIRE_THROWS_AS(weighted_norm(x, Weight::unit(make_window(-8, 8)), 2.0),
                    validation_error);
  REQUIRE_THROWS_AS(weighted_norm(x, Weight::unit(w), 0.5), validation_error);
  REQUIRE_THROWS_AS(Weight::power_plus(w, -1.0), validation_error);
  REQUIRE_THROWS_AS(Weight::from_rule(w, [](int) { return 0.5; }),
                    validation_error);
}

TEST_CASE("shift worked examples") {
  Window w = make_window(-8, 7);
  SequencePair x(w);
  x.alpha(0) = cplx(1, 0);

  SequencePair same = shift(x, 0);
  for (int n = -8; n <= 7; ++n) REQUIRE(same.alpha(n) == x.alpha(n));

  SequencePair left = shift(x, 1, Boundary::pad_zero);
  REQUIRE(left.alpha(-1) == cplx(1, 0));
  for (int n = -8; n <= 7; ++n)
    if (n != -1) REQUIRE(left.alpha(n) == cplx(0, 0));

  SequencePair c(w);
  for (int n = -8; n <= 7; ++n) c.alpha(n) = cplx(0.3, -0.1);
  for (int j : {1, 3, -5}) {
    SequencePair moved = shift(c, j, Boundary::periodic);
    for (int n = -8; n <= 7; ++n) REQUIRE(moved.alpha(n) == cplx(0.3, -0.1));
  }
}

TEST_CASE("periodic shift round trip is exact") {
  Rng rng(11);
  Window w = make_window(-8, 7);
  SequencePair x = rand_pair(w, rng);
  for (int j : {1, 2, 5, -3}) {
    SequencePair back = shift(shift(x, j, Boundary::periodic), -j,
                              Boundary::periodic);
    for (int n = -8; n <= 7; ++n) {
      REQUIRE(back.alpha(n) == x.alpha(n));
      REQUIRE(back.beta(n) == x.beta(n));
    }
  }
}

TEST_CASE("difference norm worked examples") {
  Window w = make_window(-8, 7);
  Weight unit = Weight::unit(w);

  SequencePair c(w);
  for (int n = -8; n <= 7; ++n) {
    c.alpha(n) = cplx(0.2, 0.1);
    c.beta(n) = cplx(-0.1, 0.3);
  }
  REQUIRE(difference_norm(c, unit, p_inf, Boundary::periodic) == 0.0);

  SequencePair ramp(w);
  for (int n = 0; n <= 3; ++n) ramp.alpha(n) = cplx(n, 0);
  REQUIRE(difference_norm(ramp, unit, p_inf, Boundary::pad_zero) ==
          Catch::Approx(3.0));

  SequencePair spike(w);
  spike.alpha(0) = cplx(1, 0);
  REQUIRE(difference_norm(spike, unit, 1.0, Boundary::pad_zero) ==
          Catch::Approx(2.0));
}

TEST_CASE("profile worked examples") {
  Window w = make_window(-16, 15);

  SequencePair tail = profile_power_tail(w, 0.3, 0.3, 1.0);
  REQUIRE(tail.alpha(2) == cplx(0.15, 0));
  REQUIRE(tail.alpha(-5) == cplx(0, 0));
  REQUIRE(std::abs(tail.beta(3) - cplx(0.1, 0)) < 1e-15);

  SequencePair one_site = profile_compact(w, 0, 0, 0.5, 0.0);
  REQUIRE(one_site.alpha(0) == cplx(0.5, 0));
  REQUIRE(one_site.beta(0) == cplx(0, 0));
  REQUIRE(one_site.alpha(1) == cplx(0, 0));

  SequencePair step = profile_steplike(w, 0.0, 0.2, 0.0, 0.0);
  REQUIRE(step.alpha(-1) == cplx(0, 0));
  REQUIRE(step.alpha(0) == cplx(0.2, 0));
  REQUIRE(step.alpha(7) == cplx(0.2, 0));

  SequencePair bump = profile_gaussian(w, 0.3, 0.2, 4.0);
  REQUIRE(bump.alpha(0) == cplx(0.3, 0));
  REQUIRE(std::abs(bump.alpha(4)) == Catch::Approx(0.3 * std::exp(-1.0)));
}

TEST_CASE("profiles reject product one") {
  Window w = make_window(-16, 15);
  REQUIRE_THROWS_AS(profile_gaussian(w, 1.0, 1.0, 4.0), validation_error);
  REQUIRE_THROWS_AS(profile_power_tail(w, 0.3, 0.3, -0.5), validation_error);
}

TEST_CASE("norm monotone in the weight") {
  Rng rng(7);
  Window w = make_window(-16, 15);
  Weight w1 = Weight::one_plus_abs(w);
  Weight w2 = Weight::from_rule(
      w, [](int n) { return (1.0 + std::abs(n)) * (1.0 + std::abs(n)); });
  for (int trial = 0; trial < 20; ++trial) {
    SequencePair x = rand_pair(w, rng);
    for (double p : {1.0, 2.0, p_inf})
      REQUIRE(weighted_norm(x, w1, p) <= weighted_norm(x, w2, p) + 1e-12);
  }
}

TEST_CASE("shifts are norm bounded") {
  Rng rng(13);
  Window w = make_window(-16, 15);
  for (const Weight& wt :
       {Weight::one_plus_abs(w), Weight::power_plus(w, 1.5)}) {
    double bound = wt.shift_ratio_bound();
    REQUIRE(bound >= 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      SequencePair x = rand_pair(w, rng);
      for (int j : {1, -1}) {
        SequencePair moved = shift(x, j, Boundary::pad_zero);
        for (double p : {1.0, 2.0, 3.0}) {
          double lhs = weighted_norm(moved, wt, p);
          double rhs =
              std::pow(bound, 1.0 / p) * weighted_norm(x, wt, p);
          REQUIRE(lhs <= rhs * (1 + 1e-12));
        }
        REQUIRE(weighted_norm(moved, wt, p_inf) <=
                bound * weighted_norm(x, wt, p_inf) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("sup norm matches a brute-force scan") {
  Rng rng(17);
  Window w = make_window(-16, 15);
  Weight wt = Weight::power_plus(w, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    SequencePair x = rand_pair(w, rng);
    double brute = 0;
    for (int n = w.n_min; n <= w.n_max; ++n)
      brute = std::max(
          brute, wt.at(n) * (std::abs(x.alpha(n)) + std::abs(x.beta(n))));
    REQUIRE(weighted_norm(x, wt, p_inf) == brute);
  }
}

TEST_CASE("weight extension rule covers out-of-window sites") {
  Window w = make_window(-8, 7);
  Weight wt = Weight::power_plus(w, 1.0);
  REQUIRE(wt.at(9) == Catch::Approx(10.0));   // extended by the rule
  REQUIRE(wt.at(-20) == Catch::Approx(1.0));
  REQUIRE(wt.at(3) == Catch::Approx(4.0));
}
