#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "thermoedge/checkpoint.hpp"
#include "thermoedge/config.hpp"
#include "thermoedge/format.hpp"

using namespace thermoedge;

namespace {

Checkpoint sample_checkpoint(std::uint64_t seed, std::size_t epochs) {
  Checkpoint ck;
  ck.seed = seed;
  ck.history.initial = he_init(NetworkTopology{}, seed);
  Rng rng(seed);
  for (std::size_t e = 1; e <= epochs; ++e) {
    Mlp snap = he_init(NetworkTopology{}, derive_seed(seed, e));
    snap.b1[3] = rng.gaussian() * 1e-300;
    snap.b2[0] = rng.gaussian() * 1e12;
    ck.history.records.push_back({e, rng.uniform(), rng.uniform(), snap});
  }
  ck.history.stopped_epoch = epochs;
  ck.history.best_epoch = epochs == 0 ? 0 : 1 + rng.below(epochs);
  ck.metadata = {{"config_hash", "0123abcd"}, {"train_ids", "a,b,c"}};
  return ck;
}

Checkpoint decode(const std::string& text) {
  std::istringstream in(text);
  return read_checkpoint(in);
}

}  // namespace

TEST(Format, DoubleRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("1.5x"), DataError);
  EXPECT_EQ(parse_u64("18446744073709551615"), 18446744073709551615ULL);
  EXPECT_THROW(parse_u64("-1"), DataError);
}

TEST(Format, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Checkpoint, ExactRoundTrip) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (std::size_t epochs : {1u, 4u, 11u}) {
      const auto ck = sample_checkpoint(seed, epochs);
      const auto text = encode_checkpoint(ck);
      const auto back = decode(text);
      EXPECT_EQ(back, ck);
      EXPECT_EQ(encode_checkpoint(back), text);
    }
  }
}

TEST(Checkpoint, MalformedInputReportsLine) {
  const auto text = encode_checkpoint(sample_checkpoint(5, 2));
  EXPECT_THROW(decode("not-a-checkpoint 1\n"), DataError);
  EXPECT_THROW(decode(text.substr(0, text.size() / 2)), DataError);

  auto broken = text;
  broken.replace(broken.find("seed 5"), 6, "seed x");
  try {
    decode(broken);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.seed = 77;
  c.adam.lr = 0.003;
  c.quantization.hidden_bins = 9;
  c.synthetic_border = "interior";
  EXPECT_EQ(from_json(to_json(c)), c);
  EXPECT_EQ(config_hash(c), config_hash(from_json(to_json(c))));
  RunConfig d = c;
  d.seed = 78;
  EXPECT_NE(config_hash(c), config_hash(d));
}

TEST(Config, PartialOverlayKeepsDefaults) {
  const auto c = from_json(nlohmann::json{{"seed", 5}, {"quantization", {{"hidden_bins", 4}}}});
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.quantization.hidden_bins, 4u);
  EXPECT_EQ(c.quantization.gray_input_bins, 8u);
  EXPECT_EQ(c.batch_size, 128u);
}

TEST(Config, UnknownFieldsRejected) {
  EXPECT_THROW(from_json(nlohmann::json{{"sead", 5}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"adam", {{"learning_rate", 0.1}}}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"seed", "five"}}), ConfigError);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(from_json(nlohmann::json{{"topology", {{"input", 4}}}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"patience", 0}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"temperature", -1.0}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"synthetic_border", "wrap"}}), ConfigError);
}

TEST(Config, EnvironmentOverrides) {
  const std::map<std::string, std::string> env{{"THERMOEDGE_SEED", "9"},
                                               {"THERMOEDGE_EPOCHS", "3"},
                                               {"THERMOEDGE_SCHEME_BINS", "8"},
                                               {"THERMOEDGE_TEMPERATURE", "77.5"}};
  auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  const auto c = apply_env_overrides(RunConfig{}, lookup);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.max_epochs, 3u);
  EXPECT_EQ(c.quantization.hidden_bins, 8u);
  EXPECT_EQ(c.temperature, 77.5);
  EXPECT_EQ(c.patience, 5u);

  auto bad = [](const std::string& k) -> std::optional<std::string> {
    if (k == "THERMOEDGE_SEED") return "abc";
    return std::nullopt;
  };
  EXPECT_THROW(apply_env_overrides(RunConfig{}, bad), ConfigError);
}
