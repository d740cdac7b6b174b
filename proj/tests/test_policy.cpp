#include <doctest.h>

#include <string>

#include "critwin/error.hpp"
#include "critwin/localscore.hpp"
#include "critwin/policy.hpp"
#include "fixtures.hpp"

using namespace critwin;

namespace {
const NoiseSchedule kCos = NoiseSchedule::cosine();
}

TEST_CASE("a window covering everything gives the conditional score") {
  Stream rng(41);
  auto inst = fixture::random_instance(rng, 1, 6, 2);
  const DenoiserPolicy p({{0.0, 1.0, ScoreMode::cond(1), Scope::global()}}, ScoreMode::uncond(),
                         Scope::global());
  for (double t : {0.001, 0.2, 0.5, 0.77, 1.0}) {
    const Eigen::VectorXd x = rng.normal_vector(6);
    const auto got = policy_score(inst.model, kCos, p, x, t);
    CHECK((got.vector - score_conditional(inst.model, kCos, x, t, 1).vector).norm() < 1e-13);
    CHECK(got.mode == ScoreMode::cond(1));
  }
}

TEST_CASE("guidance with unit weight is the conditional score") {
  Stream rng(42);
  auto inst = fixture::random_instance(rng, 1, 6, 3);
  const auto p = DenoiserPolicy::constant(ScoreMode::cfg(2, 1.0));
  const Eigen::VectorXd x = rng.normal_vector(6);
  CHECK((policy_score(inst.model, kCos, p, x, 0.4).vector -
         score_conditional(inst.model, kCos, x, 0.4, 2).vector).norm() < 1e-12);
}

TEST_CASE("two-window policy dispatches to the matching score") {
  Stream rng(43);
  auto inst = fixture::random_instance(rng, 1, 10, 2);
  const DenoiserPolicy p({{0.0, 0.5, ScoreMode::uncond(), Scope::local(2)},
                          {0.5, 1.0, ScoreMode::cond(0), Scope::global()}},
                         ScoreMode::uncond(), Scope::global());
  const Eigen::VectorXd x = rng.normal_vector(10);
  CHECK((policy_score(inst.model, kCos, p, x, 0.7).vector -
         score_conditional(inst.model, kCos, x, 0.7, 0).vector).norm() < 1e-13);
  const auto low = policy_score(inst.model, kCos, p, x, 0.3);
  CHECK(low.scope == Scope::local(2));
  CHECK((low.vector - local_score_full(inst.model, kCos, x, 0.3, 2).vector).norm() < 1e-13);
  // Half-open windows: the shared edge belongs to the lower window.
  CHECK(p.resolve(0.5).scope == Scope::local(2));
  CHECK(p.resolve(0.5000001).mode == ScoreMode::cond(0));
}

TEST_CASE("local guidance mixes local scores") {
  Stream rng(44);
  auto inst = fixture::random_instance(rng, 1, 9, 2);
  const Eigen::VectorXd x = rng.normal_vector(9);
  const auto p = DenoiserPolicy::constant(ScoreMode::cfg(1, 2.5), Scope::local(1));
  const Eigen::VectorXd u = local_score_full(inst.model, kCos, x, 0.45, 1).vector;
  const Eigen::VectorXd c = local_score_full(inst.model, kCos, x, 0.45, 1, 1).vector;
  CHECK((policy_score(inst.model, kCos, p, x, 0.45).vector - (u + 2.5 * (c - u))).norm() < 1e-12);
}

TEST_CASE("uncovered times use the default") {
  const auto p = DenoiserPolicy::windowed(0.3, 0.4, ScoreMode::cond(0), Scope::global(),
                                          ScoreMode::uncond(), Scope::local(3));
  CHECK(p.resolve(0.2).scope == Scope::local(3));
  CHECK(p.resolve(0.35).mode == ScoreMode::cond(0));
  CHECK(p.resolve(0.4).mode == ScoreMode::cond(0));
  CHECK(p.resolve(0.3).mode == ScoreMode::uncond());
  CHECK(p.resolve(1.0).mode == ScoreMode::uncond());
}

TEST_CASE("windows are clipped to the unit interval") {
  const auto p = DenoiserPolicy::windowed(0.95, 1.05, ScoreMode::cond(0), Scope::global(),
                                          ScoreMode::uncond(), Scope::global());
  REQUIRE(p.windows().size() == 1);
  CHECK(p.windows()[0].t_hi == 1.0);
  CHECK(p.resolve(1.0).mode == ScoreMode::cond(0));
  const auto all = DenoiserPolicy::windowed(-0.5, 1.5, ScoreMode::cond(1), Scope::global(),
                                            ScoreMode::uncond(), Scope::global());
  CHECK(all.resolve(1e-9).mode == ScoreMode::cond(1));
  const auto none = DenoiserPolicy::windowed(1.2, 1.4, ScoreMode::cond(1), Scope::global(),
                                             ScoreMode::uncond(), Scope::global());
  CHECK(none.windows().empty());
}

TEST_CASE("overlapping windows are rejected with both intervals named") {
  try {
    DenoiserPolicy p({{0.2, 0.6, ScoreMode::cond(0), Scope::global()},
                      {0.5, 0.9, ScoreMode::uncond(), Scope::global()}},
                     ScoreMode::uncond(), Scope::global());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(0.2, 0.6]") != std::string::npos);
    CHECK(msg.find("(0.5, 0.9]") != std::string::npos);
  }
}

TEST_CASE("malformed policies are config errors") {
  using W = DenoiserPolicy::Window;
  CHECK_THROWS_AS(DenoiserPolicy({W{0.5, 0.5, ScoreMode::uncond(), Scope::global()}},
                                 ScoreMode::uncond(), Scope::global()),
                  ConfigError);
  CHECK_THROWS_AS(DenoiserPolicy({W{0.5, 1.2, ScoreMode::uncond(), Scope::global()}},
                                 ScoreMode::uncond(), Scope::global()),
                  ConfigError);
  const DenoiserPolicy bad_class({W{0.1, 0.2, ScoreMode::cond(5), Scope::global()}},
                                 ScoreMode::uncond(), Scope::global());
  CHECK_THROWS_AS(bad_class.validate(2), ConfigError);
  CHECK_THROWS_AS(DenoiserPolicy::constant(ScoreMode::cfg(0, -1.0)), ConfigError);
  const auto p = DenoiserPolicy::constant(ScoreMode::uncond());
  CHECK_THROWS_AS(p.resolve(0.0), ConfigError);
  CHECK_THROWS_AS(p.resolve(1.5), ConfigError);
}

TEST_CASE("policy ids describe the windows") {
  const DenoiserPolicy p({{0.2, 0.4, ScoreMode::cfg(1, 2.0), Scope::local(2)}}, ScoreMode::uncond(),
                         Scope::global());
  CHECK(p.id() == "uncond-global;(0.2, 0.4]:cfg(1,2)-local(2)");
}
