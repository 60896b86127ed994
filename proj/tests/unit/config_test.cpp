#include <cmath>

#include <gtest/gtest.h>

#include "qrng/config.hpp"

using qrng::ConfigError;
using qrng::json;
using qrng::PipelineConfig;

namespace {

PipelineConfig parse(const std::string& text) { return qrng::config_from_json(json::parse(text)); }

std::string config_error(const std::string& text) {
  try {
    qrng::validate(parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = parse("{}");
  EXPECT_EQ(c.bits, 12);
  EXPECT_EQ(c.epsilon, 1e-10);
  EXPECT_EQ(c.epsilon_hash, 1e-20);
  EXPECT_EQ(c.alpha, 0.01);
  EXPECT_EQ(c.extractor_input_bits, 900u);
  EXPECT_EQ(c.extractor_output_bits, 200u);
  EXPECT_NO_THROW(qrng::validate(c));
}

TEST(Config, ReadsEverySection) {
  const auto c = parse(R"({
    "seed": 99,
    "quantizer": {"range": 2048, "bits": 10},
    "noise": {"gain": 2.5, "mean_photon_number": 0.25, "electronic_variance": 0.5},
    "acquisition": {"sample_count": 1234, "sample_rate": 1e6, "sweep_gains": [1, 2], "threads": 4},
    "entropy": {"epsilon": 1e-12, "epsilon_hash": 1e-15, "effective_width": 3.0, "adc_collapse": 2,
                "classical_constants": {"c1": 0.125}},
    "extractor": {"input_bits": 64, "output_bits": 16, "seed": "os"},
    "battery": {"enabled": false, "alpha": 0.05, "tests": ["runs"]},
    "output": {"dir": "out", "hex": true}
  })");
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.range, 2048.0);
  EXPECT_EQ(c.bits, 10);
  EXPECT_EQ(c.gain, 2.5);
  EXPECT_EQ(c.mean_photon_number, 0.25);
  EXPECT_EQ(c.electronic_variance, 0.5);
  EXPECT_EQ(c.sample_count, 1234u);
  EXPECT_EQ(c.sample_rate, 1e6);
  EXPECT_EQ(c.sweep_gains, (std::vector<double>{1, 2}));
  EXPECT_EQ(c.threads, 4u);
  EXPECT_EQ(c.epsilon, 1e-12);
  EXPECT_EQ(c.epsilon_hash, 1e-15);
  EXPECT_EQ(c.effective_width, 3.0);
  EXPECT_EQ(c.adc_collapse, 2u);
  EXPECT_EQ(c.classical_constants.at("c1"), 0.125);
  EXPECT_EQ(c.extractor_input_bits, 64u);
  EXPECT_EQ(c.extractor_output_bits, 16u);
  EXPECT_EQ(c.extractor_seed, "os");
  EXPECT_FALSE(c.battery_enabled);
  EXPECT_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.battery_tests, std::vector<std::string>{"runs"});
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_TRUE(c.output_hex);
}

TEST(Config, UnknownKeysAreRejectedWithTheirPath) {
  EXPECT_NE(config_error(R"({"sed": 1})").find("'sed'"), std::string::npos);
  EXPECT_NE(config_error(R"({"entropy": {"eps": 1}})").find("'entropy.eps'"), std::string::npos);
  EXPECT_NE(config_error(R"({"noise": {"target_shannon": {"lo_on": 4, "lo_off": 2, "x": 1}}})")
                .find("'noise.target_shannon.x'"),
            std::string::npos);
}

TEST(Config, WrongTypesAreRejected) {
  EXPECT_NE(config_error(R"({"seed": -1})").find("'seed'"), std::string::npos);
  EXPECT_NE(config_error(R"({"quantizer": {"bits": 12.5}})").find("'quantizer.bits'"), std::string::npos);
  EXPECT_NE(config_error(R"({"noise": {"gain": "1"}})").find("'noise.gain'"), std::string::npos);
  EXPECT_NE(config_error(R"({"battery": {"enabled": 1}})").find("'battery.enabled'"), std::string::npos);
  EXPECT_NE(config_error(R"({"battery": {"tests": ["universal"]}})").find("universal"), std::string::npos);
  EXPECT_NE(config_error(R"({"entropy": {"adc_collapse": "estimated"}})").find("adc_collapse"), std::string::npos);
  EXPECT_NE(config_error(R"({"entropy": {"classical_constants": {"c2": 1}}})").find("c2"), std::string::npos);
  EXPECT_NE(config_error(R"({"quantizer": 4})").find("quantizer"), std::string::npos);
}

TEST(Config, OutOfRangeValuesAreRejected) {
  EXPECT_FALSE(config_error(R"({"entropy": {"epsilon": 0}})").empty());
  EXPECT_FALSE(config_error(R"({"entropy": {"epsilon_hash": 1}})").empty());
  EXPECT_FALSE(config_error(R"({"battery": {"alpha": 1}})").empty());
  EXPECT_FALSE(config_error(R"({"acquisition": {"sample_count": 0}})").empty());
  EXPECT_FALSE(config_error(R"({"acquisition": {"sweep_gains": [1]}})").empty());
  EXPECT_FALSE(config_error(R"({"extractor": {"input_bits": 100, "output_bits": 101}})").empty());
  EXPECT_FALSE(config_error(R"({"quantizer": {"bits": 17}})").empty());
  EXPECT_FALSE(config_error(R"({"noise": {"gain": 0}})").empty());
  EXPECT_FALSE(config_error(R"({"noise": {"target_shannon": {"lo_on": 4}}})").empty());
}

TEST(Config, NormalizedFormRoundTrips) {
  const auto c = parse(R"({"seed": 5, "noise": {"target_shannon": {"lo_on": 4.5, "lo_off": 2.5}},
                           "entropy": {"adc_collapse": "measured", "classical_constants": {"c1": 0.5}},
                           "extractor": {"seed": 17}})");
  const auto j = qrng::config_to_json(c);
  EXPECT_EQ(qrng::config_to_json(qrng::config_from_json(j)), j);
  EXPECT_EQ(j["entropy"]["adc_collapse"], "measured");
  EXPECT_EQ(j["extractor"]["seed"], "17");
}

TEST(Config, EchoOmitsExecutionDetails) {
  auto a = parse(R"({"acquisition": {"threads": 1}, "output": {"dir": "a"}})");
  auto b = parse(R"({"acquisition": {"threads": 8}, "output": {"dir": "b"}})");
  EXPECT_EQ(qrng::config_echo(a), qrng::config_echo(b));
  EXPECT_NE(qrng::config_to_json(a), qrng::config_to_json(b));
}

TEST(Override, SetsNestedValues) {
  json doc = json::parse(R"({"entropy": {"epsilon": 1e-10}})");
  qrng::apply_override(doc, "entropy.epsilon=1e-12");
  qrng::apply_override(doc, "quantizer.bits=10");
  qrng::apply_override(doc, "extractor.seed=os");
  qrng::apply_override(doc, "acquisition.sweep_gains=[1,2,3]");
  const auto c = qrng::config_from_json(doc);
  EXPECT_EQ(c.epsilon, 1e-12);
  EXPECT_EQ(c.bits, 10);
  EXPECT_EQ(c.extractor_seed, "os");
  EXPECT_EQ(c.sweep_gains.size(), 3u);
}

TEST(Override, MalformedAssignmentsAreConfigErrors) {
  json doc = json::object();
  EXPECT_THROW(qrng::apply_override(doc, "entropy.epsilon"), ConfigError);
  EXPECT_THROW(qrng::apply_override(doc, "=3"), ConfigError);
  EXPECT_THROW(qrng::apply_override(doc, "entropy..epsilon=3"), ConfigError);
  doc["seed"] = 1;
  EXPECT_THROW(qrng::apply_override(doc, "seed.x=3"), ConfigError);
}

TEST(ResolveModel, DirectParameters) {
  const auto c = parse(R"({"noise": {"gain": 2.0, "mean_photon_number": 0.5, "electronic_variance": 0.25}})");
  const auto m = qrng::resolve_model(c);
  EXPECT_EQ(m.gain, 2.0);
  EXPECT_DOUBLE_EQ(m.lo_on_variance, 4.0 * 2.0 + 0.25);
  EXPECT_EQ(m.lo_off_variance, 0.25);
}

TEST(ResolveModel, ShannonTargetsAreMet) {
  const auto c = parse(R"({"quantizer": {"range": 2048, "bits": 12},
                           "noise": {"target_shannon": {"lo_on": 4.518, "lo_off": 2.520}}})");
  const auto m = qrng::resolve_model(c);
  const qrng::QuantizerSpec q(2048.0, 12);
  EXPECT_NEAR(qrng::discretized_shannon(m.lo_on_variance, q), 4.518, 1e-9);
  EXPECT_NEAR(qrng::discretized_shannon(m.lo_off_variance, q), 2.520, 1e-9);
  EXPECT_NEAR(m.gain * m.gain + m.electronic_variance, m.lo_on_variance, 1e-9);
}

TEST(ResolveModel, UnreachableOrInvertedTargetsAreConfigErrors) {
  EXPECT_THROW(qrng::resolve_model(parse(R"({"noise": {"target_shannon": {"lo_on": 2.0, "lo_off": 3.0}}})")),
               ConfigError);
  EXPECT_THROW(qrng::resolve_model(parse(R"({"noise": {"target_shannon": {"lo_on": 13.0, "lo_off": 3.0}}})")),
               ConfigError);
}

TEST(Sessions, SeedsAreDerivedPerConfiguration) {
  const auto c = parse(R"({"seed": 42, "acquisition": {"sweep_gains": [1, 2]}})");
  const auto m = qrng::resolve_model(c);
  const auto off = qrng::session_config(c, m, qrng::Configuration::lo_off);
  const auto on = qrng::session_config(c, m, qrng::Configuration::lo_on);
  const auto sweep = qrng::session_config(c, m, qrng::Configuration::lo_sweep);
  EXPECT_NE(off.rng_seed, on.rng_seed);
  EXPECT_NE(on.rng_seed, sweep.rng_seed);
  EXPECT_EQ(qrng::session_variance(off), c.electronic_variance);
  EXPECT_EQ(sweep.sweep_gains.size(), 2u);
}

TEST(ExtractorSeed, Forms) {
  auto c = parse(R"({"seed": 3, "extractor": {"input_bits": 10, "output_bits": 4}})");
  EXPECT_EQ(qrng::extractor_seed(c).size(), 13u);
  EXPECT_EQ(qrng::extractor_seed(c), qrng::extractor_seed(c));
  c.extractor_seed = "12345";
  EXPECT_EQ(qrng::extractor_seed(c), qrng::toeplitz_seed_from_u64(13, 12345));
  c.extractor_seed = "0xfff8";  // 13 bits, all ones
  EXPECT_EQ(qrng::extractor_seed(c).popcount(), 13u);
  c.extractor_seed = "fff";
  EXPECT_THROW(qrng::extractor_seed(c), ConfigError);
  c.extractor_seed = "zzzz";
  EXPECT_THROW(qrng::extractor_seed(c), ConfigError);
  c.extractor_seed = "os";
  EXPECT_EQ(qrng::extractor_seed(c).size(), 13u);
}

TEST(BatteryOptions, SelectedTests) {
  const auto all = qrng::battery_options(parse("{}"));
  EXPECT_EQ(all.enabled.size(), 8u);
  const auto some = qrng::battery_options(parse(R"({"battery": {"tests": ["runs", "serial"], "alpha": 0.05}})"));
  EXPECT_EQ(some.enabled.size(), 2u);
  EXPECT_EQ(some.alpha, 0.05);
}

}  // namespace
