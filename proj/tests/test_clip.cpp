#include <doctest/doctest.h>

#include <cmath>
#include <stdexcept>

#include "tailsim/clip.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/rng.hpp"

using namespace tailsim;

TEST_CASE("clip clamps coordinates at the threshold") {
  CHECK(clip(1.0, {2.0, -0.5, 3.0}) == ModelVector{1.0, -0.5, 1.0});
  CHECK(clip(10.0, {2.0, -0.5, 3.0}) == ModelVector{2.0, -0.5, 3.0});

  const ModelVector g{5.0, -3.0, 0.25};
  const ModelVector z = clip(0.0, g);
  for (double v : z) CHECK(v == 0.0);

  CHECK(clip(kInfThreshold, g) == g);
  CHECK_THROWS_AS(clip(-1.0, g), std::invalid_argument);
}

TEST_CASE("clip algebra properties hold on random vectors") {
  RngStream rng(12345);
  for (int trial = 0; trial < 100000; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 6);
    ModelVector g(static_cast<std::size_t>(d));
    for (auto& v : g) v = std::tan(rng.uniform(-1.5, 1.5));  // occasionally huge
    const double u1 = rng.uniform(0.0, 3.0);
    const double u2 = u1 + rng.uniform(0.0, 3.0);

    const ModelVector c1 = clip(u1, g);
    const ModelVector c2 = clip(u2, g);
    CHECK(l2_norm(c1) <= l2_norm(g) + 1e-15);
    CHECK(linf_norm(c1) <= u1 + 1e-15);
    CHECK(clip(u1, c1) == c1);  // idempotent, bit-exact
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(c1[i]) <= std::abs(c2[i]));  // monotone in the threshold
    }
  }
}

TEST_CASE("l2 clip projects onto the ball") {
  const ModelVector g{3.0, 4.0};
  const ModelVector c = clip_l2(1.0, g);
  CHECK(l2_norm(c) == doctest::Approx(1.0));
  CHECK(c[0] == doctest::Approx(0.6));
  CHECK(c[1] == doctest::Approx(0.8));
  CHECK(clip_l2(6.0, g) == g);
}

TEST_CASE("power schedule evaluates max(base*t^e, floor)") {
  const PowerSchedule constant{1.0, 0.0, 0.0};
  const PowerSchedule sqrt_decay{2.0, -0.5, 0.0};
  const PowerSchedule quarter_power{1.0, 0.25, 0.0};
  const PowerSchedule floored{0.5, -1.0, 0.2};
  CHECK(constant.value(17) == 1.0);
  CHECK(sqrt_decay.value(4) == doctest::Approx(1.0));
  CHECK(quarter_power.value(16) == doctest::Approx(2.0));
  CHECK(floored.value(10) == doctest::Approx(0.2));
  CHECK_THROWS_AS(constant.value(0), std::invalid_argument);
  CHECK(PowerSchedule::infinite().value(3) == kInfThreshold);
  CHECK(PowerSchedule::infinite().unbounded());
}

TEST_CASE("preset exponents resolve to their closed forms") {
  SUBCASE("sgdclip vanilla at alpha=1.5") {
    const auto r = resolve_preset({PresetName::SGDClipVanilla, 1.5, 100});
    CHECK(r.eta_outer.exponent == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(r.eta_local.exponent == -0.5);
    CHECK(r.u_local.exponent == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.u_outer.unbounded());
  }
  SUBCASE("clip2 vanilla at alpha=1.5") {
    const auto r = resolve_preset({PresetName::Clip2Vanilla, 1.5, 100});
    CHECK(r.eta_outer.exponent == -0.5);
    CHECK(r.eta_local.exponent == doctest::Approx(-0.375).epsilon(1e-15));
    CHECK(r.u_outer.exponent == 0.0);
    CHECK(r.u_local.exponent == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("dc preset reuses the clip2 assignment") {
    const auto a = resolve_preset({PresetName::Clip2Vanilla, 1.7, 100});
    const auto b = resolve_preset({PresetName::DCClip2, 1.7, 100});
    CHECK(a.eta_outer.exponent == b.eta_outer.exponent);
    CHECK(a.eta_local.exponent == b.eta_local.exponent);
    CHECK(a.u_local.exponent == b.u_local.exponent);
  }
  SUBCASE("alt clip2 assignment") {
    const auto r = resolve_preset({PresetName::Clip2VanillaAlt, 1.5, 100});
    CHECK(r.eta_outer.exponent == doctest::Approx(-0.75 + 1.0 / 6.0).epsilon(1e-15));
    CHECK(r.eta_local.exponent == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(r.u_local.exponent == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  }
  SUBCASE("constant preset has all exponents zero") {
    const auto r = resolve_preset({PresetName::Constant, 1.5, 100});
    CHECK(r.eta_outer.exponent == 0.0);
    CHECK(r.eta_local.exponent == 0.0);
    CHECK(r.u_local.exponent == 0.0);
    CHECK(r.u_outer.exponent == 0.0);
  }
  SUBCASE("alpha outside (1,2) rejected") {
    CHECK_THROWS_AS(resolve_preset({PresetName::Clip2Vanilla, 2.5, 100}), ConfigError);
    CHECK_THROWS_AS(resolve_preset({PresetName::SGDClipVanilla, 1.0, 100}), ConfigError);
  }
}

TEST_CASE("theoretical rates expose the closed forms exactly") {
  const auto r = theoretical_rates({PresetName::SGDClipVanilla, 1.5, 1000});
  CHECK(r.convergence_exponent == 0.5 / 3.0);  // (alpha-1)/(2 alpha) = 1/6
  CHECK(r.delay_tolerance_exponent == 1.0 / 3.0);

  const auto c = theoretical_rates({PresetName::Clip2Vanilla, 1.5, 1000});
  CHECK(c.convergence_exponent == doctest::Approx(0.125));  // (alpha-1)/(4 alpha - 2)
  CHECK(c.delay_tolerance_exponent == doctest::Approx(0.375));

  const auto sd = theoretical_rates({PresetName::SDClip2, 1.5, 1000});
  CHECK(sd.convergence_exponent == doctest::Approx(std::min(3.0 * 0.5 / 8.0, 0.5 / 6.0)));
  CHECK(sd.delay_tolerance_exponent == doctest::Approx(0.25 + 1.0 / 6.0));
}
