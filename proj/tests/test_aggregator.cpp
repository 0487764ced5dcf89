#include <doctest/doctest.h>

#include <cmath>

#include "tailsim/aggregator.hpp"

using namespace tailsim;

namespace {

ClientUpdate make_update(int client, long base_round, ModelVector delta) {
  ClientUpdate u;
  u.client_id = client;
  u.base_round = base_round;
  u.delta = std::move(delta);
  return u;
}

AggregationPolicy make_policy(PolicyKind kind, double eta, double u_thr) {
  AggregationPolicy p;
  p.kind = kind;
  p.eta_outer = PowerSchedule::constant(eta);
  p.u_outer = u_thr == kInfThreshold ? PowerSchedule::infinite() : PowerSchedule::constant(u_thr);
  return p;
}

// Advances the server n rounds with zero deltas so later updates can carry
// larger staleness.
void warm_up(ServerState& s, int n, std::size_t dim) {
  for (int i = 0; i < n; ++i) {
    s.aggregate({make_update(0, s.round(), ModelVector(dim, 0.0))});
  }
}

}  // namespace

TEST_CASE("compute_delta averages deltas; SD rescales by staleness") {
  SUBCASE("unit delay makes SD equal vanilla") {
    ServerState s({0.0, 0.0}, make_policy(PolicyKind::SgdClipSD, 1.0, kInfThreshold), 16);
    const auto d = s.compute_delta({make_update(0, 0, {2.0, -2.0})});  // p = 1
    CHECK(d == ModelVector{2.0, -2.0});
  }
  SUBCASE("vanilla mean of two updates") {
    ServerState s({0.0, 0.0}, make_policy(PolicyKind::SgdClip, 1.0, kInfThreshold), 16);
    const auto d = s.compute_delta({make_update(0, 0, {1.0, 1.0}), make_update(1, 0, {3.0, 3.0})});
    CHECK(d == ModelVector{2.0, 2.0});
  }
  SUBCASE("SD rescale with mixed delays") {
    ServerState s({0.0}, make_policy(PolicyKind::SgdClipSD, 1.0, kInfThreshold), 16);
    warm_up(s, 3, 1);  // t = 3; consuming round is 4
    const auto d = s.compute_delta({make_update(0, 0, {4.0}),    // p = 4
                                    make_update(1, 3, {2.0})});  // p = 1
    CHECK(d[0] == doctest::Approx(1.5));
  }
}

TEST_CASE("delays are measured against the round about to be produced") {
  ServerState s({0.0}, make_policy(PolicyKind::SgdClip, 1.0, kInfThreshold), 16);
  warm_up(s, 2, 1);  // t = 2
  const auto p = s.delays_of({make_update(0, 0, {0.0}), make_update(1, 2, {0.0})});
  CHECK(p == std::vector<long>{3, 1});
}

TEST_CASE("dc_correct applies the hessian-times-drift correction") {
  SUBCASE("hand-computed correction") {
    ServerState s({0.0, 0.0}, make_policy(PolicyKind::Clip2DC, 1.0, kInfThreshold), 16);
    // Move the model so that x_current - x_0 = [2, -1].
    auto mover = make_update(0, 0, {2.0, -1.0});
    mover.hessian_approx = ModelVector{0.0, 0.0};
    s.aggregate({mover});
    auto u = make_update(0, 0, {0.0, 0.0});
    u.hessian_approx = ModelVector{0.5, 2.0};
    const auto g = s.dc_correct({u}, {1.0, 1.0});
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[1] == doctest::Approx(3.0));
  }
  SUBCASE("zero drift leaves delta untouched") {
    ServerState s({1.0, 2.0}, make_policy(PolicyKind::Clip2DC, 1.0, kInfThreshold), 16);
    auto u = make_update(0, 0, {0.25, -0.5});
    u.hessian_approx = ModelVector{5.0, 7.0};
    const auto g = s.dc_correct({u}, {0.25, -0.5});
    CHECK(g == ModelVector{0.25, -0.5});
  }
  SUBCASE("zero approximator leaves delta untouched for any drift") {
    ServerState s({0.0}, make_policy(PolicyKind::Clip2DC, 1.0, kInfThreshold), 16);
    auto mover = make_update(0, 0, {42.0});
    mover.hessian_approx = ModelVector{0.0};
    s.aggregate({mover});
    auto u = make_update(0, 0, {0.75});
    u.hessian_approx = ModelVector{0.0};
    CHECK(s.dc_correct({u}, {0.75}) == ModelVector{0.75});
  }
  SUBCASE("missing approximator is a policy violation") {
    ServerState s({0.0}, make_policy(PolicyKind::Clip2DC, 1.0, kInfThreshold), 16);
    CHECK_THROWS_AS(s.dc_correct({make_update(0, 0, {1.0})}, {1.0}), PolicyViolationError);
    CHECK_THROWS_AS(s.aggregate({make_update(0, 0, {1.0})}), PolicyViolationError);
  }
}

TEST_CASE("aggregate moves the model by the scheduled step") {
  SUBCASE("plain step") {
    for (PolicyKind kind : {PolicyKind::SgdClip, PolicyKind::Clip2, PolicyKind::SgdClipSD}) {
      ServerState s({1.0}, make_policy(kind, 1.0, kInfThreshold), 16);
      s.aggregate({make_update(0, 0, {0.3})});
      CHECK(s.model()[0] == doctest::Approx(1.3));
      CHECK(s.round() == 1);
    }
  }
  SUBCASE("clipped outer step") {
    ServerState s({0.0, 0.0}, make_policy(PolicyKind::Clip2, 1.0, 0.1), 16);
    s.aggregate({make_update(0, 0, {0.3, -0.05})});
    CHECK(s.model()[0] == doctest::Approx(0.1));
    CHECK(s.model()[1] == doctest::Approx(-0.05));
  }
  SUBCASE("SD downplays a stale update") {
    ServerState s({0.0}, make_policy(PolicyKind::SgdClipSD, 0.5, kInfThreshold), 16);
    warm_up(s, 3, 1);
    s.aggregate({make_update(0, 0, {4.0})});  // p = 4
    CHECK(s.model()[0] == doctest::Approx(0.5));
  }
}

TEST_CASE("SD trajectories equal vanilla bit-exactly at unit delay") {
  const auto pairs = {std::pair{PolicyKind::SgdClipSD, PolicyKind::SgdClip},
                      std::pair{PolicyKind::Clip2SD, PolicyKind::Clip2}};
  for (const auto& [sd_kind, vanilla_kind] : pairs) {
    ServerState sd({0.5, -0.5}, make_policy(sd_kind, 0.7, 0.4), 16);
    ServerState vn({0.5, -0.5}, make_policy(vanilla_kind, 0.7, 0.4), 16);
    RngStream rng(3);
    for (int t = 0; t < 50; ++t) {
      std::vector<ClientUpdate> batch;
      for (int i = 0; i < 3; ++i) {
        ModelVector d{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        batch.push_back(make_update(i, sd.round(), d));  // p = 1 always
      }
      sd.aggregate(batch);
      vn.aggregate(batch);
      CHECK(sd.model() == vn.model());
    }
  }
}

TEST_CASE("SD genuinely rescales once delays exceed one") {
  // Guards the 1/p factor itself: dropping it would make SD collapse onto
  // vanilla for stale updates too.
  ServerState sd({0.0}, make_policy(PolicyKind::SgdClipSD, 1.0, kInfThreshold), 16);
  ServerState vn({0.0}, make_policy(PolicyKind::SgdClip, 1.0, kInfThreshold), 16);
  warm_up(sd, 2, 1);
  warm_up(vn, 2, 1);
  const auto stale = make_update(0, 0, {3.0});  // p = 3
  sd.aggregate({stale});
  vn.aggregate({stale});
  CHECK(sd.model()[0] == doctest::Approx(1.0));
  CHECK(vn.model()[0] == doctest::Approx(3.0));
}

TEST_CASE("DC equals Clip2 bit-exactly at zero staleness") {
  ServerState dc({0.5, -0.5}, make_policy(PolicyKind::Clip2DC, 0.7, 0.4), 16);
  ServerState c2({0.5, -0.5}, make_policy(PolicyKind::Clip2, 0.7, 0.4), 16);
  RngStream rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<ClientUpdate> batch;
    for (int i = 0; i < 2; ++i) {
      ModelVector d{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      auto u = make_update(i, dc.round(), d);  // base = t-1 of the produced round
      u.hessian_approx = ModelVector{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
      batch.push_back(std::move(u));
    }
    dc.aggregate(batch);
    c2.aggregate(batch);
    CHECK(dc.model() == c2.model());
  }
}

TEST_CASE("per-round movement bound under outer clipping") {
  AggregationPolicy pol;
  pol.kind = PolicyKind::Clip2;
  pol.eta_outer = PowerSchedule{0.9, -0.5, 0.0};
  pol.u_outer = PowerSchedule{0.8, 0.1, 0.0};
  ServerState s({0.0, 0.0, 0.0}, pol, 16);
  RngStream rng(6);
  for (int t = 0; t < 200; ++t) {
    const ModelVector before = s.model();
    std::vector<ClientUpdate> batch;
    for (int i = 0; i < 2; ++i) {
      batch.push_back(make_update(
          i, s.round(), {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)}));
    }
    s.aggregate(batch);
    const long t_now = s.round();
    const double bound = pol.eta_outer.value(t_now) * pol.u_outer.value(t_now);
    CHECK(linf_norm(sub(s.model(), before)) <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("exact-hessian oracle makes DC reproduce the fresh gradient") {
  // On a diagonal quadratic the Taylor expansion of the gradient is exact,
  // so overriding A with eta*h turns the corrected delta into
  // -eta * grad F(x_current) regardless of staleness.
  const ModelVector h{0.5, 1.0, 2.0};
  const ModelVector x_star{0.1, -0.2, 0.3};
  const Problem problem = Problem::quadratic_diag(h, x_star);
  const double eta_local = 0.05;

  ServerState s({1.0, 1.0, 1.0}, make_policy(PolicyKind::Clip2DC, 1.0, kInfThreshold), 64);
  for (int round = 0; round < 20; ++round) {
    const long base = std::max(0L, s.round() - 2);  // staleness 3 once warmed up
    const ModelVector& x_base = s.model_at(base);
    // One plain local step from the stale model.
    const ModelVector g_stale = problem.clean_grad(x_base);
    auto u = make_update(0, base, ModelVector{-eta_local * g_stale[0], -eta_local * g_stale[1],
                                              -eta_local * g_stale[2]});
    u.hessian_approx = ModelVector{eta_local * h[0], eta_local * h[1], eta_local * h[2]};

    const ModelVector corrected = s.dc_correct({u}, s.compute_delta({u}));
    const ModelVector g_fresh = problem.clean_grad(s.model());
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(corrected[i] + eta_local * g_fresh[i]) < 1e-12);
    }
    s.aggregate({u});
  }
}

TEST_CASE("history ring evicts old rounds and surfaces staleness overflow") {
  ServerState s({0.0}, make_policy(PolicyKind::SgdClip, 1.0, kInfThreshold), 3);
  warm_up(s, 5, 1);  // history now holds rounds {3, 4, 5}
  CHECK_NOTHROW(s.model_at(3));
  try {
    s.aggregate({make_update(0, 0, {1.0})});
    FAIL("expected StalenessOverflowError");
  } catch (const StalenessOverflowError& e) {
    CHECK(e.round == 0);
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
}

TEST_CASE("round counter increments by exactly one per aggregation") {
  ServerState s({0.0}, make_policy(PolicyKind::Clip2, 1.0, 1.0), 8);
  for (long t = 1; t <= 10; ++t) {
    s.aggregate({make_update(0, s.round(), {0.1})});
    CHECK(s.round() == t);
  }
}
