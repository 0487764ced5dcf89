#include <doctest/doctest.h>

#include <cmath>
#include <stdexcept>

#include "tailsim/local_worker.hpp"

using namespace tailsim;

namespace {

LocalRunParams basic_params(long base_round, int steps, double eta, double u,
                            bool track_hessian = false) {
  LocalRunParams p;
  p.base_round = base_round;
  p.steps = steps;
  p.eta_local = PowerSchedule::constant(eta);
  p.u_local = u == kInfThreshold ? PowerSchedule::infinite() : PowerSchedule::constant(u);
  p.track_hessian = track_hessian;
  return p;
}

const NoiseSpec kZeroNoise1{NoiseKind::Zero, 1.5, 1.0, 1};

}  // namespace

TEST_CASE("single plain gradient step") {
  const Problem p = Problem::quadratic_diag({1.0}, {0.0});
  RngStream rng(1);
  const auto u = run_local(p, kZeroNoise1, {1.0}, 0, basic_params(1, 1, 0.1, kInfThreshold), rng);
  CHECK(u.delta[0] == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(u.client_id == 0);
  CHECK(u.base_round == 1);
  CHECK(!u.hessian_approx.has_value());
}

TEST_CASE("zero threshold kills the step") {
  const Problem p = Problem::quadratic_diag({1.0}, {0.0});
  RngStream rng(1);
  const auto u = run_local(p, kZeroNoise1, {1.0}, 0, basic_params(1, 1, 0.1, 0.0, true), rng);
  CHECK(u.delta == ModelVector{0.0});
  REQUIRE(u.hessian_approx.has_value());
  CHECK((*u.hessian_approx) == ModelVector{0.0});
}

TEST_CASE("two-step hand trace with hessian accumulation") {
  const Problem p = Problem::quadratic_diag({2.0}, {0.0});
  RngStream rng(1);
  const auto u = run_local(p, kZeroNoise1, {1.0}, 3, basic_params(1, 2, 0.1, kInfThreshold, true), rng);
  // step 1: g = 2, x -> 0.8; step 2: g = 1.6, x -> 0.64
  CHECK(u.delta[0] == doctest::Approx(-0.36).epsilon(1e-13));
  REQUIRE(u.hessian_approx.has_value());
  CHECK((*u.hessian_approx)[0] == doctest::Approx(0.01 * (4.0 + 2.56)).epsilon(1e-13));
}

TEST_CASE("zero-noise linear dynamics match the closed form") {
  const double h = 0.7, eta = 0.05, x0 = 1.3;
  const Problem p = Problem::quadratic_diag({h}, {0.0});
  for (int steps : {1, 3, 9, 20}) {
    RngStream rng(1);
    const auto u = run_local(p, kZeroNoise1, {x0}, 0, basic_params(1, steps, eta, kInfThreshold), rng);
    const double expected = x0 * (std::pow(1.0 - eta * h, steps) - 1.0);
    CHECK(std::abs(u.delta[0] - expected) < 1e-12);
  }
}

TEST_CASE("rates are frozen at the base round for all local steps") {
  // eta(t) = t^-1: at base round 4 every step uses 0.25 regardless of k.
  const Problem p = Problem::quadratic_diag({1.0}, {0.0});
  LocalRunParams params;
  params.base_round = 4;
  params.steps = 2;
  params.eta_local = PowerSchedule{1.0, -1.0, 0.0};
  params.u_local = PowerSchedule::infinite();
  RngStream rng(1);
  const auto u = run_local(p, kZeroNoise1, {1.0}, 0, params, rng);
  // x1 = 1 - 0.25, x2 = 0.75 - 0.25*0.75 = 0.5625
  CHECK(u.delta[0] == doctest::Approx(-0.4375).epsilon(1e-14));
}

TEST_CASE("step and hessian bounds hold under heavy noise") {
  const int d = 4;
  const Problem p = Problem::quadratic_diag(ModelVector(d, 1.0), ModelVector(d, 0.0));
  const NoiseSpec noise{NoiseKind::ParetoSymmetric, 1.5, 1.0, d};
  RngStream outer(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const int steps = 1 + static_cast<int>(outer.uniform() * 6);
    const double eta = outer.uniform(0.01, 0.5);
    const double u_thr = outer.uniform(0.0, 2.0);
    RngStream rng(static_cast<std::uint64_t>(trial) + 1000);
    ModelVector x0(d);
    for (auto& v : x0) v = outer.uniform(-2.0, 2.0);
    const auto upd = run_local(p, noise, x0, 0, basic_params(1, steps, eta, u_thr, true), rng);
    CHECK(linf_norm(upd.delta) <= steps * eta * u_thr * (1.0 + 1e-12) + 1e-13);
    REQUIRE(upd.hessian_approx.has_value());
    for (double a : *upd.hessian_approx) {
      CHECK(a >= 0.0);
      CHECK(a <= steps * eta * eta * u_thr * u_thr * (1.0 + 1e-12) + 1e-13);
    }
  }
}

TEST_CASE("identical inputs and seed give identical updates") {
  const Problem p = Problem::quadratic_diag({1.0, 2.0}, {0.0, 0.0});
  const NoiseSpec noise{NoiseKind::StudentT, 1.5, 1.0, 2};
  RngStream a(5), b(5);
  const auto u1 = run_local(p, noise, {1.0, -1.0}, 2, basic_params(3, 4, 0.1, 1.0, true), a);
  const auto u2 = run_local(p, noise, {1.0, -1.0}, 2, basic_params(3, 4, 0.1, 1.0, true), b);
  CHECK(u1.delta == u2.delta);
  CHECK(*u1.hessian_approx == *u2.hessian_approx);
}

TEST_CASE("hessian tracking does not change the model delta") {
  const Problem p = Problem::quadratic_diag({1.0, 2.0}, {0.0, 0.0});
  const NoiseSpec noise{NoiseKind::ParetoSymmetric, 1.5, 1.0, 2};
  RngStream a(8), b(8);
  const auto with = run_local(p, noise, {1.0, -1.0}, 0, basic_params(2, 3, 0.1, 1.0, true), a);
  const auto without = run_local(p, noise, {1.0, -1.0}, 0, basic_params(2, 3, 0.1, 1.0, false), b);
  CHECK(with.delta == without.delta);
}

TEST_CASE("argument errors") {
  const Problem p = Problem::quadratic_diag({1.0}, {0.0});
  RngStream rng(1);
  CHECK_THROWS_AS(run_local(p, kZeroNoise1, {1.0}, 0, basic_params(1, 0, 0.1, 1.0), rng),
                  std::invalid_argument);
}

TEST_CASE("non-finite gradients abort with a located diagnostic") {
  const Problem p = Problem::quadratic_diag({1.0}, {0.0});
  RngStream rng(1);
  ModelVector x0{std::numeric_limits<double>::infinity()};
  try {
    run_local(p, kZeroNoise1, x0, 7, basic_params(1, 2, 0.1, kInfThreshold), rng);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.client_id == 7);
    CHECK(e.step == 1);
  }
}
