#include <catch2/catch_amalgamated.hpp>

#include "protox/env/corridor.hpp"

using namespace protox;
using namespace protox::env;

TEST_CASE("default config renders 64x64x3 observations") {
  CorridorConfig cfg;
  auto [env, obs] = reset(cfg);
  CHECK(obs.h == 64);
  CHECK(obs.w == 64);
  CHECK(obs.pixels.size() == 64u * 64u * 3u);
}

TEST_CASE("config validation") {
  CorridorConfig cfg;
  cfg.width = 5;
  CHECK_THROWS_AS(CorridorEnv(cfg), ConfigError);

  CorridorConfig bad_render;
  bad_render.render_h = 60;  // 60 % 8 != 0
  CHECK_THROWS_AS(CorridorEnv(bad_render), ConfigError);

  CorridorConfig bad_obstacles;
  bad_obstacles.obstacles = {{12, ObstacleKind::hole}, {6, ObstacleKind::pipe}};
  CHECK_THROWS_AS(CorridorEnv(bad_obstacles), ConfigError);

  CorridorConfig out_of_range;
  out_of_range.obstacles = {{0, ObstacleKind::hole}};
  CHECK_THROWS_AS(CorridorEnv(out_of_range), ConfigError);
}

TEST_CASE("same seed gives bit-identical initial observations") {
  CorridorConfig cfg;
  cfg.seed = 1234;
  auto [env1, obs1] = reset(cfg);
  auto [env2, obs2] = reset(cfg);
  CHECK(obs1 == obs2);
}

TEST_CASE("RIGHT advances one tile; stepping after done is an error") {
  CorridorConfig cfg;
  cfg.obstacles = {{20, ObstacleKind::pipe}};
  CorridorEnv env(cfg);
  CHECK(env.agent_x() == 0);
  env.step(ActionId::right);
  CHECK(env.agent_x() == 1);
  env.step(ActionId::noop);
  CHECK(env.agent_x() == 1);

  // Walk into the pipe.
  while (!env.done()) env.step(ActionId::right);
  CHECK_THROWS_AS(env.step(ActionId::right), StateError);
}

TEST_CASE("walking into a hole ends the episode") {
  CorridorConfig cfg;
  cfg.obstacles = {{4, ObstacleKind::hole}};
  CorridorEnv env(cfg);
  bool done = false;
  for (int i = 0; i < 4; ++i) done = env.step(ActionId::right).done;
  CHECK(done);
  CHECK(env.agent_x() == 4);
}

TEST_CASE("fixed action sequence under fixed seed is bit-reproducible") {
  CorridorConfig cfg;
  cfg.seed = 99;
  const std::vector<ActionId> seq = {ActionId::right, ActionId::right, ActionId::right_jump,
                                     ActionId::right, ActionId::right};
  std::vector<Observation> run1, run2;
  for (auto* out : {&run1, &run2}) {
    CorridorEnv env(cfg);
    out->push_back(env.render());
    for (auto a : seq) {
      auto r = env.step(a);
      out->push_back(r.observation);
      if (r.done) break;
    }
  }
  CHECK(run1 == run2);
}

TEST_CASE("expert rule: jump iff an obstacle is within lookahead") {
  CorridorConfig cfg;
  cfg.obstacles = {{6, ObstacleKind::pipe}};
  CorridorEnv env(cfg);
  ScriptedExpert expert;  // lookahead 3

  // Distance 6: walk.
  CHECK(expert_action(expert, env) == ActionId::right);
  env.step(ActionId::right);
  env.step(ActionId::right);
  env.step(ActionId::right);
  // Distance 3: jump.
  CHECK(env.agent_x() == 3);
  CHECK(expert_action(expert, env) == ActionId::right_jump);

  // Two tiles ahead with lookahead 3 also jumps.
  CorridorEnv env2(cfg);
  env2.step(ActionId::right);
  env2.step(ActionId::right);
  env2.step(ActionId::right);
  env2.step(ActionId::right);
  CHECK(env2.agent_x() == 4);
  CHECK(expert_action(expert, env2) == ActionId::right_jump);
}

TEST_CASE("expert completes 100 seeded procedural episodes") {
  ScriptedExpert expert;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CorridorConfig cfg;
    cfg.seed = seed;
    CorridorEnv env(cfg);
    REQUIRE(!env.layout().empty());
    int steps = 0;
    while (!env.done()) {
      env.step(expert_action(expert, env));
      REQUIRE(++steps < 1000);
    }
    // Survived: the episode ended at the right edge, not on an obstacle.
    CHECK(env.agent_x() >= cfg.width - 1);
  }
}

TEST_CASE("expert flips at least once per obstacle") {
  CorridorConfig cfg;
  cfg.seed = 7;
  CorridorEnv env(cfg);
  ScriptedExpert expert;
  std::vector<ActionId> actions;
  while (!env.done()) {
    actions.push_back(expert_action(expert, env));
    env.step(actions.back());
  }
  int flips = 0;
  for (std::size_t t = 1; t < actions.size(); ++t)
    if (actions[t] != actions[t - 1]) ++flips;
  CHECK(flips >= static_cast<int>(env.layout().size()));
}

TEST_CASE("both obstacle kinds elicit the same jump action") {
  ScriptedExpert expert;
  CHECK(expert.action_for(ObstacleKind::hole) == expert.action_for(ObstacleKind::pipe));
  CHECK(has_jump(expert.action_for(ObstacleKind::hole)));
}

TEST_CASE("bad expert never jumps and dies at the first obstacle") {
  auto expert = bad_expert();
  CHECK(!emits_jump(expert));
  CorridorConfig cfg;
  cfg.obstacles = {{8, ObstacleKind::pipe}};
  CorridorEnv env(cfg);
  while (!env.done()) env.step(expert_action(expert, env));
  CHECK(env.agent_x() == 8);
}

TEST_CASE("ASCII map parsing") {
  const auto obstacles = parse_ascii_map("....H....P..E.");
  REQUIRE(obstacles.size() == 3);
  CHECK(obstacles[0].position == 4);
  CHECK(obstacles[0].kind == ObstacleKind::hole);
  CHECK(obstacles[1].position == 9);
  CHECK(obstacles[1].kind == ObstacleKind::pipe);
  CHECK(obstacles[2].position == 12);
  CHECK(obstacles[2].kind == ObstacleKind::enemy);
  CHECK_THROWS_AS(parse_ascii_map("..X.."), ConfigError);
}

TEST_CASE("replay info reports the nearest obstacle and its on-screen box") {
  CorridorConfig cfg;
  cfg.obstacles = {{5, ObstacleKind::pipe}};
  CorridorEnv env(cfg);
  auto info = step_info(env);
  REQUIRE(info.nearest.has_value());
  CHECK(info.nearest->position == 5);
  CHECK(info.nearest_distance == 5);
  // 5 tiles ahead with the camera at column 2: on screen at tile column 7.
  REQUIRE(info.nearest_bbox.has_value());
  CHECK((*info.nearest_bbox)[0] == 7 * 8);

  env.step(ActionId::right);
  info = step_info(env);
  CHECK(info.nearest_distance == 4);
}

TEST_CASE("config json round trip") {
  CorridorConfig cfg;
  cfg.seed = 42;
  cfg.obstacles = {{4, ObstacleKind::hole}, {9, ObstacleKind::pipe}};
  Json j = cfg;
  const auto back = j.get<CorridorConfig>();
  CHECK(back == cfg);
}
