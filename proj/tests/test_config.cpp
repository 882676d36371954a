#include "doctest.h"

#include "cdiff/config.hpp"
#include "cdiff/error.hpp"

using namespace cdiff;

TEST_CASE("defaults serialize to a fixed point") {
  RunConfig cfg;
  auto text = cfg.serialize();
  auto again = RunConfig::parse(text);
  CHECK(again.serialize() == text);
  CHECK(again.digest() == cfg.digest());
  CHECK(cfg.digest().size() == 16);
}

TEST_CASE("values are normalized") {
  auto cfg = RunConfig::parse("train.learning_rate = 1.0e-3\ntrain.record_wall_time = 1\n# comment\n\ntrain.loss = ce\n");
  CHECK(cfg.get("train.learning_rate") == "0.001");
  CHECK(cfg.get("train.record_wall_time") == "true");
  CHECK(cfg.get("train.loss") == "ce_simplified");
  CHECK(RunConfig::parse(cfg.serialize()).serialize() == cfg.serialize());
}

TEST_CASE("changing a value changes the digest") {
  RunConfig a, b;
  b.set("seed", "8");
  CHECK(a.digest() != b.digest());
  CHECK(b.get_uint("seed") == 8);
}

TEST_CASE("errors name the key and line") {
  try {
    RunConfig::parse("seed = 1\ntrain.stepz = 5\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("train.stepz") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
  CHECK_THROWS_AS(RunConfig::parse("train.steps = many\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("sample.kind = leapfrog\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("just text\n"), ConfigError);
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("data.dataset", "a#b"), ConfigError);
}

TEST_CASE("key table is consistent with defaults") {
  RunConfig cfg;
  for (const auto& k : config_keys()) {
    RunConfig fresh;
    fresh.set(k.key, k.default_value);
    CHECK(fresh.get(k.key) == cfg.get(k.key));
  }
  CHECK(cfg.values().size() == config_keys().size());
}

TEST_CASE("typed views") {
  auto cfg = RunConfig::parse(
      "data.dataset = moons\ndata.bits = 5\nmodel.kind = hollow\nmodel.hidden = 32\n"
      "train.loss = l2\ntrain.steps = 7\nsample.kind = euler\nsample.steps = 12\neval.repeats = 3\n");
  auto data = make_data_source(cfg);
  CHECK(data->space().dims() == 10);
  auto process = make_process(cfg, data->space());
  CHECK(process.rate.is_uniform());
  auto desc = model_descriptor(cfg, data->space());
  auto model = make_model(desc);
  CHECK(model->kind() == ModelKind::hollow);
  auto tc = make_train_config(cfg);
  CHECK(tc.loss == LossKind::l2_ratio_simplified);
  CHECK(tc.steps == 7);
  CHECK(make_sampler_config(cfg).steps == 12);
  CHECK(make_mmd_config(cfg).repeats == 3);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}
