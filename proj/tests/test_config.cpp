// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "mimonerf/config.hpp"

using namespace mimonerf;

TEST_SUITE("config") {

TEST_CASE("defaults parse, round-trip, and validate") {
  const TrainConfig def = default_config();
  validate_config(def);
  const TrainConfig back = parse_config_text(config_to_text(def));
  CHECK(config_to_text(back) == config_to_text(def));
  CHECK(back.width == 64);
  CHECK(back.n_coarse == 32);
  CHECK(back.iters == 20000);
  CHECK(back.batch_rays == 256);
  CHECK(back.pos_freqs == 6);
}

TEST_CASE("key parsing: comments, spaces, overrides") {
  const TrainConfig cfg = parse_config_text(
      "# experiment\n"
      "scene = mix\n"
      "n_p=4\n"
      "lambda = 0.4\n"
      "jitter = false\n"
      "\n"
      "n_p=8\n");
  CHECK(cfg.scene == "mix");
  CHECK(cfg.n_p == 8);
  CHECK(cfg.lambda == 0.4);
  CHECK_FALSE(cfg.jitter);
}

TEST_CASE("unknown keys and malformed values are usage errors") {
  CHECK_THROWS_WITH_AS(parse_config_text("n_q=3\n"), doctest::Contains("unknown key"), UsageError);
  CHECK_THROWS_AS(parse_config_text("n_p=three\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text("just a line\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text("jitter=maybe\n"), UsageError);
}

TEST_CASE("validation: divisibility, variants, teacher requirement") {
  TrainConfig cfg = default_config();
  cfg.n_p = 4;
  cfg.n_coarse = 30;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("multiple"), UsageError);
  cfg.n_coarse = 32;
  validate_config(cfg);

  cfg.variant = "distill";
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("teacher"), UsageError);
  cfg.teacher = "somewhere.ckpt";
  validate_config(cfg);

  cfg.variant = "self";
  cfg.preset = "R4";
  cfg.n_p = 2;
  CHECK_THROWS_AS(validate_config(cfg), UsageError);
  cfg.n_p = 4;
  validate_config(cfg);

  cfg.grouping = "sideways";
  CHECK_THROWS_AS(validate_config(cfg), UsageError);
}

TEST_CASE("background parsing") {
  CHECK(parse_background("white") == Vec3d::Ones());
  CHECK(parse_background("black") == Vec3d::Zero());
  const Vec3d rgb = parse_background("0.25, 0.5,0.75");
  CHECK(rgb.x() == 0.25);
  CHECK(rgb.y() == 0.5);
  CHECK(rgb.z() == 0.75);
  CHECK_THROWS_AS(parse_background("0.5,0.5"), UsageError);
  CHECK_THROWS_AS(parse_background("2,0,0"), UsageError);
}

}  // TEST_SUITE
