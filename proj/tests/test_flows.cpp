#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "al/flows.hpp"

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

double max_dev(const FlowDerivative& a, const FlowDerivative& b) {
  double m = 0;
  for (int n = std::max(a.valid_lo, b.valid_lo);
       n <= std::min(a.valid_hi, b.valid_hi); ++n) {
    m = std::max(m, std::abs(a.da(n) - b.da(n)));
    m = std::max(m, std::abs(a.db(n) - b.db(n)));
  }
  return m;
}

}  // namespace

TEST_CASE("zero data is a fixed point of every flow") {
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair zero(w);
  for (const FlowSpec& s : {FlowSpec::al_system(), FlowSpec::phase(cplx(2, 0)),
                            FlowSpec::schur(),
                            FlowSpec{2, 2, {cplx(1, 0), cplx(0, 1), cplx(3, 0)},
                                     {cplx(2, 0), cplx(0, -1), cplx(1, 0)}}}) {
    FlowDerivative d = al_explicit_rhs(zero, s);
    for (int n = -8; n <= 7; ++n) {
      REQUIRE(d.da(n) == cplx(0, 0));
      REQUIRE(d.db(n) == cplx(0, 0));
    }
  }
}

TEST_CASE("constant data evolves by the cubic coupling") {
  // alpha = a, beta = b constant: alpha_t = -2i a^2 b, beta_t = 2i a b^2.
  Window w = make_window(-8, 7, Boundary::periodic);
  double a = 0.3, b = 0.2;
  SequencePair x(w);
  for (int n = -8; n <= 7; ++n) {
    x.alpha(n) = cplx(a, 0);
    x.beta(n) = cplx(b, 0);
  }
  FlowDerivative d = al_system_rhs(x);
  for (int n = -8; n <= 7; ++n) {
    REQUIRE(std::abs(d.da(n) - cplx(0, -2 * a * a * b)) < 1e-15);
    REQUIRE(std::abs(d.db(n) - cplx(0, 2 * a * b * b)) < 1e-15);
  }
}

TEST_CASE("single-site data spreads with the expected signs") {
  Window w = make_window(-8, 7, Boundary::pad_zero);
  SequencePair x(w);
  x.alpha(0) = cplx(0.5, 0);
  FlowDerivative d = al_system_rhs(x);
  REQUIRE(d.da(-1) == cplx(0, 0.5));
  REQUIRE(d.da(1) == cplx(0, 0.5));
  REQUIRE(d.da(0) == cplx(0, -1.0));
  for (int n = -7; n <= 6; ++n) {
    if (n >= -1 && n <= 1) continue;
    REQUIRE(d.da(n) == cplx(0, 0));
    REQUIRE(d.db(n) == cplx(0, 0));
  }
}

TEST_CASE("depth (1,1) with standard constants is the lattice system") {
  Rng rng(23);
  Window w = make_window(-16, 15, Boundary::periodic);
  SequencePair x = rand_pair(w, rng);
  FlowDerivative ref = al_system_rhs(x);
  FlowDerivative gen = al_explicit_rhs(x, FlowSpec::al_system());
  REQUIRE(gen.valid_lo == ref.valid_lo);
  REQUIRE(gen.valid_hi == ref.valid_hi);
  REQUIRE(max_dev(ref, gen) == 0.0);
}

TEST_CASE("depth (0,0) rotates the phases") {
  Rng rng(29);
  Window w = make_window(-8, 7);
  SequencePair x = rand_pair(w, rng);
  cplx c(0.7, -0.4);
  FlowDerivative d = al_explicit_rhs(x, FlowSpec::phase(c));
  const cplx I(0, 1);
  for (int n = -8; n <= 7; ++n) {
    REQUIRE(std::abs(d.da(n) - I * c * x.alpha(n)) < 1e-16);
    REQUIRE(std::abs(d.db(n) + I * c * x.beta(n)) < 1e-16);
  }
  REQUIRE(d.valid_lo == -8);
  REQUIRE(d.valid_hi == 7);
}

TEST_CASE("conjugate-coupled data stays conjugate-coupled") {
  Rng rng(31);
  Window w = make_window(-8, 7, Boundary::periodic);

  // Defocusing closure beta = conj(alpha): db = conj(da).
  SequencePair x(w);
  for (int n = -8; n <= 7; ++n) {
    x.alpha(n) = rng.disk(0.6);
    x.beta(n) = std::conj(x.alpha(n));
  }
  FlowDerivative d = al_system_rhs(x);
  for (int n = -8; n <= 7; ++n)
    REQUIRE(std::abs(d.db(n) - std::conj(d.da(n))) < 1e-15);

  // Focusing closure beta = -conj(alpha): db = -conj(da).
  SequencePair y(w);
  for (int n = -8; n <= 7; ++n) {
    y.alpha(n) = rng.disk(0.6);
    y.beta(n) = -std::conj(y.alpha(n));
  }
  FlowDerivative e = al_system_rhs(y);
  for (int n = -8; n <= 7; ++n)
    REQUIRE(std::abs(e.db(n) + std::conj(e.da(n))) < 1e-15);
}

TEST_CASE("unitary-constant depth (1,1) is the half-line difference flow") {
  // c_{0,-} = i, c_{0,+} = -i: alpha_t = (1 - alpha beta)(alpha^+ - alpha^-).
  Rng rng(37);
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair x(w);
  for (int n = -8; n <= 7; ++n) {
    x.alpha(n) = rng.disk(0.6);
    x.beta(n) = std::conj(x.alpha(n));
  }
  FlowDerivative d = al_explicit_rhs(x, FlowSpec::schur());
  for (int n = -8; n <= 7; ++n) {
    cplx g = 1.0 - x.alpha(n) * x.beta(n);
    cplx want = g * (x.alpha_ext(n + 1) - x.alpha_ext(n - 1));
    REQUIRE(std::abs(d.da(n) - want) < 1e-15);
    REQUIRE(std::abs(d.db(n) - std::conj(d.da(n))) < 1e-15);
  }
}

TEST_CASE("only the mean of the top constants matters") {
  Rng rng(41);
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair x = rand_pair(w, rng);
  cplx u(0.4, 0.9), v(-1.2, 0.1);
  FlowSpec split{1, 1, {cplx(1, 0), u}, {cplx(1, 0), v}};
  FlowSpec pooled{1, 1, {cplx(1, 0), 0.5 * (u + v)}, {cplx(1, 0), 0.5 * (u + v)}};
  REQUIRE(split.c_top() == 0.5 * (u + v));
  REQUIRE(max_dev(al_explicit_rhs(x, split), al_explicit_rhs(x, pooled)) <
          1e-15);
}

TEST_CASE("scaling is an involution and commutes with the flow") {
  Rng rng(43);
  Window w = make_window(-8, 7, Boundary::periodic);
  SequencePair x = rand_pair(w, rng);

  cplx two(2, 0);
  SequencePair back = scaling_transform(scaling_transform(x, two), 1.0 / two);
  for (int n = -8; n <= 7; ++n) {
    REQUIRE(back.alpha(n) == x.alpha(n));
    REQUIRE(back.beta(n) == x.beta(n));
  }

  FlowDerivative direct = al_system_rhs(scaling_transform(x, two));
  FlowDerivative pushed = scaling_transform(al_system_rhs(x), two);
  REQUIRE(max_dev(direct, pushed) == 0.0);

  cplx c(1.3, -0.4);
  FlowDerivative d2 = al_system_rhs(scaling_transform(x, c));
  FlowDerivative p2 = scaling_transform(al_system_rhs(x), c);
  REQUIRE(max_dev(d2, p2) < 1e-14);
}

TEST_CASE("flow spec validation") {
  REQUIRE_THROWS_AS((FlowSpec{-1, 0, {}, {cplx(1, 0)}}.validate()),
                    validation_error);
  REQUIRE_THROWS_AS((FlowSpec{1, 1, {cplx(1, 0)}, {cplx(1, 0), cplx(0, 0)}}
                         .validate()),
                    validation_error);
  Window w = make_window(-8, 7);
  SequencePair x(w);
  FlowSpec deep{3, 3,
                {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)},
                {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)}};
  REQUIRE_NOTHROW(deep.validate());
  REQUIRE_THROWS_AS(al_explicit_rhs(x, deep), validation_error);
  REQUIRE(scaling_transform(x, cplx(1, 0)).alpha(0) == x.alpha(0));
  REQUIRE_THROWS_AS(scaling_transform(x, cplx(0, 0)), validation_error);
}

TEST_CASE("derivative validity shrinks by the stencil reach") {
  Window pad = make_window(-8, 7, Boundary::pad_zero);
  SequencePair x(pad);
  x.alpha(0) = cplx(0.1, 0);
  FlowDerivative d1 = al_system_rhs(x);
  REQUIRE(d1.valid_lo == -7);
  REQUIRE(d1.valid_hi == 6);
  FlowSpec two{2, 2, {cplx(1, 0), cplx(0, 0), cplx(0, 0)},
               {cplx(1, 0), cplx(0, 0), cplx(0, 0)}};
  FlowDerivative d2 = al_explicit_rhs(x, two);
  REQUIRE(d2.valid_lo == -6);
  REQUIRE(d2.valid_hi == 5);
  REQUIRE(two.reach() == 2);

  Window per = make_window(-8, 7, Boundary::periodic);
  SequencePair y(per);
  FlowDerivative d3 = al_system_rhs(y);
  REQUIRE(d3.valid_lo == -8);
  REQUIRE(d3.valid_hi == 7);
}
