#include <doctest.h>

#include <random>

#include "cmvspec/gauge.hpp"
#include "support.hpp"

using namespace cmvspec;
using namespace cmvspec::gauge;
using model::SkewParams;
using model::VerblunskySource;
using model::WalkParams;
using numerics::Complex;
using operators::UsageError;
using torus::Rational;
using torus::RationalTurn;
using testing::unit_phase;

namespace {

template <class Number>
SkewParams<Number> random_skew(std::mt19937_64& rng, int d, bool real_coin);

template <>
SkewParams<Rational> random_skew(std::mt19937_64& rng, int d, bool real_coin) {
  SkewParams<Rational> p;
  p.d = d;
  p.omega = testing::random_rational_turn(rng, 1000);
  std::vector<RationalTurn> x;
  for (int k = 0; k < d; ++k) x.push_back(testing::random_rational_turn(rng, 1000));
  p.x = TorusPoint<Rational>(x);
  std::tie(p.a, p.b) = testing::random_coin(rng, real_coin);
  return p;
}

template <>
SkewParams<double> random_skew(std::mt19937_64& rng, int d, bool real_coin) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SkewParams<double> p;
  p.d = d;
  p.omega = Turn(u(rng));
  std::vector<Turn> x;
  for (int k = 0; k < d; ++k) x.push_back(Turn(u(rng)));
  p.x = TorusPoint<double>(x);
  std::tie(p.a, p.b) = testing::random_coin(rng, real_coin);
  return p;
}

WalkParams<double> random_walk(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WalkParams<double> p;
  p.omega = Turn(u(rng));
  p.theta = Turn(u(rng));
  p.eta = Turn(u(rng));
  std::tie(p.a, p.b) = testing::random_coin(rng);
  return p;
}

GaugePhases random_gauge(std::mt19937_64& rng, const Window& w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GaugePhases g = GaugePhases::zero(w);
  for (auto& l : g.lambda) l = Turn(u(rng));
  return g;
}

}  // namespace

TEST_CASE("beta_j in two dimensions") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x1 = testing::random_rational_turn(rng);
    const auto om = testing::random_rational_turn(rng);
    const TorusPoint<Rational> xm({x1});
    for (std::int64_t j = -30; j <= 30; ++j) {
      const Rational want = -(x1.value() + Rational(j) * om.value()) / 2;
      CHECK(beta_j(xm, om, j) == RationalTurn(want));
    }
  }
}

TEST_CASE("beta_0 is minus half the last coordinate") {
  std::mt19937_64 rng(52);
  for (int d = 2; d <= 5; ++d) {
    const auto p = random_skew<Rational>(rng, d, true);
    const auto xm = p.x_minus();
    CHECK(beta_j(xm, p.omega, 0) == RationalTurn(Rational(-xm.coords.back().value() / 2)));
  }
}

TEST_CASE("beta_j from consecutive psi lifts") {
  std::mt19937_64 rng(53);
  const auto p = random_skew<Rational>(rng, 4, true);
  for (std::int64_t j = -10; j <= 10; ++j) {
    const auto diff = torus::psi_lift(p.x, p.omega, j + 1) - torus::psi_lift(p.x, p.omega, j);
    CHECK(beta_j(p.x_minus(), p.omega, j) == -torus::half(diff));
  }
  const std::int64_t j = -3;
  const auto s = torus::psi_sequence(p.x, p.omega, j, j + 2);
  CHECK(beta_j(p.x_minus(), p.omega, j) + beta_j(p.x_minus(), p.omega, j) == s[0] - s[1]);
}

TEST_CASE("psi difference identity holds exactly") {
  std::mt19937_64 rng(54);
  for (int d = 2; d <= 5; ++d) {
    const auto p = random_skew<Rational>(rng, d, true);
    const auto psi = torus::psi_sequence(p.x, p.omega, -101, 101);
    for (std::int64_t j = -100; j <= 100; ++j) {
      const auto b = beta_j(p.x_minus(), p.omega, j - 1);
      REQUIRE(psi[static_cast<std::size_t>(j + 101)] - psi[static_cast<std::size_t>(j + 100)] + b + b == RationalTurn());
    }
  }
}

TEST_CASE("lambda_from_psi") {
  const std::vector<torus::TwoTurn<double>> zeros(6);
  const auto g0 = lambda_from_psi(zeros, -3);
  CHECK(g0.window == Window{-6, 6});
  for (const auto& l : g0.lambda) CHECK(l.value() == 0.0);

  const std::vector<torus::TwoTurn<double>> cst(4, torus::TwoTurn<double>(0.3));
  const auto gc = lambda_from_psi(cst, 0);
  for (std::size_t i = 0; i < gc.lambda.size(); ++i)
    CHECK(gc.lambda[i].value() == doctest::Approx(i % 2 == 0 ? 0.15 : 0.85).epsilon(1e-15));

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> psi(40);
  std::vector<torus::TwoTurn<double>> lifts;
  for (auto& x : psi) {
    x = u(rng);
    lifts.push_back(torus::TwoTurn<double>(x));
  }
  const std::int64_t j0 = -20;
  const auto g = lambda_from_psi(lifts, j0);
  auto P = [&](std::int64_t j) { return psi[static_cast<std::size_t>(j - j0)]; };
  auto L = [&](std::int64_t i) { return g.at(i).value(); };
  for (std::int64_t j = j0 + 1; j < j0 + 39; ++j) {
    const double lo = -0.5 * (P(j) - P(j - 1));
    const double hi = -0.5 * (P(j + 1) - P(j));
    CHECK(testing::circ_dist(-P(j) - L(2 * j - 1) + L(2 * j), lo) <= 1e-14);
    CHECK(testing::circ_dist(L(2 * j + 1) - L(2 * j - 1), lo) <= 1e-14);
    CHECK(testing::circ_dist(L(2 * j) - L(2 * j + 2), hi) <= 1e-14);
    CHECK(testing::circ_dist(P(j) + L(2 * j + 1) - L(2 * j + 2), hi) <= 1e-14);
  }
  CHECK_THROWS_AS(g.at(100), UsageError);
}

TEST_CASE("conjugate") {
  std::mt19937_64 rng(56);
  const auto p = random_walk(rng);
  const Window w{-16, 16};
  const auto op = operators::build_walk(p, w);
  CHECK(operators::max_difference(conjugate(op, GaugePhases::zero(w)), op) == 0.0);
  GaugePhases c = GaugePhases::zero(w);
  for (auto& l : c.lambda) l = Turn(0.377);
  CHECK(operators::max_difference(conjugate(op, c), op) <= 1e-15);
  CHECK_THROWS_AS(conjugate(op, GaugePhases::zero(Window{-4, 4})), UsageError);

  const auto g = random_gauge(rng, w);
  const auto co = conjugate(op, g);
  for (std::int64_t i = w.lo; i < w.hi; ++i)
    for (std::int64_t j = w.lo; j < w.hi; ++j) {
      CHECK(std::abs(std::abs(co.at(i, j)) - std::abs(op.at(i, j))) <= 1e-15);
      if (op.at(i, j) != Complex(0.0, 0.0))
        CHECK(std::abs(co.at(i, j) - op.at(i, j) * unit_phase(g.at(i).value() - g.at(j).value())) <= 1e-15);
    }
}

TEST_CASE("solve_gauge") {
  std::mt19937_64 rng(57);
  const auto p = random_walk(rng);
  const Window w{-32, 32};
  const auto op = operators::build_walk(p, w);
  const auto g0 = solve_gauge(op, op, 1e-12);
  for (const auto& l : g0.lambda) CHECK(testing::circ_dist(l.value(), 0.0) <= 1e-15);

  const auto g = random_gauge(rng, w);
  const auto target = conjugate(op, g);
  const auto found = solve_gauge(op, target, 1e-12);
  CHECK(operators::max_difference(conjugate(op, found), target) <= 1e-12);

  auto bad = target;
  bad.set(0, -1, 2.0 * target.at(0, -1));
  CHECK_THROWS_AS(solve_gauge(op, bad, 1e-12), GaugeError);

  auto twisted = target;
  twisted.set(0, -1, target.at(0, -1) * unit_phase(0.1));
  try {
    solve_gauge(op, twisted, 1e-12);
    FAIL("expected an inconsistent cycle");
  } catch (const GaugeError& e) {
    CHECK(e.residual() > 1e-3);
  }
  CHECK_THROWS_AS(solve_gauge(op, operators::build_walk(p, Window{-30, 30}), 1e-12), GaugeError);
}

TEST_CASE("verify_lemma1") {
  WalkParams<double> free;
  free.omega = Turn(0.3);
  free.theta = Turn(0.2);
  const auto r0 = verify_lemma1(free, Window::centered(64));
  CHECK(r0.max_residual <= 1e-14);
  CHECK(r0.passed());

  std::mt19937_64 rng(58);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = verify_lemma1(random_walk(rng), Window::centered(256));
    CHECK(r.max_residual <= 1e-10);
  }
  auto third = random_walk(rng);
  third.omega = Turn(1.0 / 3.0);
  CHECK(verify_lemma1(third, Window::centered(256)).passed());

  WalkParams<Rational> exact;
  exact.omega = RationalTurn(Rational(1, 3));
  exact.theta = RationalTurn(Rational(2, 11));
  exact.eta = RationalTurn(Rational(5, 17));
  exact.a = Complex(0.0, 0.6);
  exact.b = Complex(-0.8, 0.0);
  CHECK(verify_lemma1(exact, Window::centered(256)).passed());

  CHECK_THROWS_AS(verify_lemma1(third, Window::centered(12)), UsageError);
}

TEST_CASE("verify_lemma1 rejects coefficient conventions that differ from the walk") {
  std::mt19937_64 rng(59);
  const auto p = random_walk(rng);
  for (auto conv : {model::ElectricConvention{false, false}, model::ElectricConvention{true, false},
                    model::ElectricConvention{true, true}}) {
    try {
      verify_lemma1(p, Window::centered(64), conv);
      FAIL("expected GaugeError");
    } catch (const GaugeError& e) {
      CHECK(e.residual() > 1e-6);
    }
  }
}

TEST_CASE("d=2 skew model reproduces the electric CMV") {
  std::mt19937_64 rng(60);
  for (int trial = 0; trial < 5; ++trial) {
    WalkParams<Rational> w;
    w.omega = testing::random_rational_turn(rng, 1000);
    w.theta = testing::random_rational_turn(rng, 1000);
    w.eta = testing::random_rational_turn(rng, 1000);
    std::tie(w.a, w.b) = testing::random_coin(rng, true);
    SkewParams<Rational> s;
    s.d = 2;
    s.omega = w.omega + w.omega;
    const auto te = w.theta + w.eta;
    s.x = TorusPoint<Rational>({te + te + w.omega, RationalTurn()});
    s.a = w.a;
    s.b = w.b;
    const Window win = Window::centered(128);
    const auto e_skew = build_skew_cmv(s, win);
    const auto e_walk = operators::build_cmv_product(VerblunskySource::electric(w, {true, true}), win);
    CHECK(operators::max_difference(e_skew, e_walk) <= 1e-12);
    CHECK(verify_section4(s, win).passed());
  }
}

TEST_CASE("verify_section4") {
  std::mt19937_64 rng(61);
  for (int d = 2; d <= 4; ++d)
    for (bool real : {true, false}) {
      const auto r = verify_section4(random_skew<double>(rng, d, real), Window::centered(256));
      CHECK(r.max_residual <= 1e-10);
      const auto q = verify_section4(random_skew<Rational>(rng, d, real), Window::centered(256));
      CHECK(q.max_residual <= 1e-10);
    }

  auto free = random_skew<Rational>(rng, 3, true);
  free.a = 1.0;
  free.b = 0.0;
  const Window w = Window::centered(64);
  CHECK(verify_section4(free, w).max_residual <= 1e-15);
  const auto e = build_skew_cmv(free, w);
  CHECK(e == operators::build_walk(WalkParams<double>{}, w));
}

TEST_CASE("skew CMV for complex coins keeps the coin-slot form") {
  std::mt19937_64 rng(62);
  const auto p = random_skew<double>(rng, 3, false);
  const Window w = Window::centered(32);
  const auto e = build_skew_cmv(p, w);
  CHECK(operators::interior_unitarity_residual(e) <= 1e-12);
  for (std::int64_t j = -6; j < 6; ++j) {
    const auto psi = torus::project_last(torus::skew_iterate_closed(p.x, p.omega, j));
    CHECK(std::abs(e.at(2 * j + 1, 2 * j + 2) + std::conj(p.b) * torus::phase(psi)) <= 1e-14);
    CHECK(std::abs(e.at(2 * j, 2 * j + 2) - p.a) <= 1e-15);
  }
}

TEST_CASE("tau_shift_covariance") {
  std::mt19937_64 rng(63);
  const Window w = Window::centered(128);
  auto p = random_skew<double>(rng, 3, false);
  CHECK(tau_shift_covariance(p, Turn(0.0), w) == 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double tau = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(tau_shift_covariance(p, Turn(tau), w) <= 1e-14);
  }
  auto q = random_skew<Rational>(rng, 4, true);
  CHECK(tau_shift_covariance(q, RationalTurn(Rational(3, 7)), w) <= 1e-14);

  // A full turn on the lift of x_{d−1} flips the sign of every entry.
  const auto xm = p.x_minus();
  std::vector<torus::TwoTurn<double>> lifts;
  for (const auto& c : xm.coords) lifts.push_back(torus::lift(c));
  const auto om = torus::lift(p.omega);
  auto turned = lifts;
  turned.back() += torus::TwoTurn<double>(1.0);
  const auto base = operators::build_wbeta(
      [&](std::int64_t j) { return beta_j<double>(lifts, om, j); }, p.a, p.b, w);
  const auto flipped = operators::build_wbeta(
      [&](std::int64_t j) { return beta_j<double>(turned, om, j); }, p.a, p.b, w);
  const auto neg = operators::transform(base, [](auto, auto, Complex v) { return -v; }, "neg");
  CHECK(operators::max_difference(flipped, neg) <= 1e-14);
}

TEST_CASE("residual report JSON") {
  ResidualReport r;
  r.identity = "x";
  r.window = Window{-4, 4};
  r.max_residual = 1e-12;
  r.tolerance = 1e-10;
  r.anchor_convention = "zero";
  CHECK(to_json(r) ==
        R"({"identity":"x","window":[-4,4],"max_residual":1e-12,"tolerance":1e-10,"passed":true,"anchor_convention":"zero"})");
}
