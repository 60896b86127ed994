#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "qrng/acquisition.hpp"
#include "qrng/calibration.hpp"
#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"
#include "qrng/file_io.hpp"
#include "qrng/rng.hpp"
#include "qrng/stat_tests.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {

using json = nlohmann::json;

// Pipeline configuration. Every key is optional in the file; absent keys take
// the defaults below. Unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 1;

  double range = 4.0;
  int bits = 12;

  double gain = 1.0;
  double mean_photon_number = 0.0;
  double electronic_variance = 0.1;
  // When set, the electronic variance and gain are solved so that the
  // quantized LO_OFF / LO_ON Gaussians have these Shannon entropies.
  std::optional<double> target_shannon_lo_on;
  std::optional<double> target_shannon_lo_off;

  std::uint64_t sample_count = 100'000;
  double sample_rate = 500'000.0;
  std::vector<double> sweep_gains;
  unsigned threads = 1;  // 0 = all hardware threads

  double epsilon = 1e-10;
  double epsilon_hash = 1e-20;
  std::optional<double> effective_width;
  std::uint64_t adc_collapse = 1;
  bool adc_collapse_measured = false;
  std::map<std::string, double> classical_constants;

  std::size_t extractor_input_bits = 900;
  std::size_t extractor_output_bits = 200;
  // Integer (expanded with SplitMix64), hex string, "os", or "derive" (from
  // the master seed).
  std::string extractor_seed = "derive";

  bool battery_enabled = true;
  double alpha = 0.01;
  std::vector<std::string> battery_tests;  // empty = all

  std::string output_dir = "run";
  bool output_hex = false;
};

// Physical parameters after calibration.
struct ResolvedModel {
  double gain;
  double electronic_variance;
  double lo_on_variance;
  double lo_off_variance;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
}

inline double get_number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("config key '" + path + "' must be a number");
  return v.get<double>();
}

inline std::uint64_t get_uint(const json& obj, const std::string& key, const std::string& path, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError("config key '" + path + "' must be a non-negative integer");
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError("config key '" + path + "' must be true or false");
  return v.get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("config key '" + path + "' must be a string");
  return v.get<std::string>();
}

inline const json& section(const json& root, const std::string& key, const std::set<std::string>& allowed) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  reject_unknown(root.at(key), key, allowed);
  return root.at(key);
}

}  // namespace detail

inline PipelineConfig config_from_json(const json& root) {
  using namespace detail;
  reject_unknown(root, "", {"seed", "quantizer", "noise", "acquisition", "entropy", "extractor", "battery", "output"});
  PipelineConfig c;
  c.seed = get_uint(root, "seed", "seed", c.seed);

  const auto& q = section(root, "quantizer", {"range", "bits"});
  c.range = get_number(q, "range", "quantizer.range", c.range);
  c.bits = static_cast<int>(get_uint(q, "bits", "quantizer.bits", static_cast<std::uint64_t>(c.bits)));

  const auto& n =
      section(root, "noise", {"gain", "mean_photon_number", "electronic_variance", "target_shannon"});
  c.gain = get_number(n, "gain", "noise.gain", c.gain);
  c.mean_photon_number = get_number(n, "mean_photon_number", "noise.mean_photon_number", c.mean_photon_number);
  c.electronic_variance = get_number(n, "electronic_variance", "noise.electronic_variance", c.electronic_variance);
  if (n.contains("target_shannon") && !n.at("target_shannon").is_null()) {
    const auto& t = n.at("target_shannon");
    reject_unknown(t, "noise.target_shannon", {"lo_on", "lo_off"});
    if (!t.contains("lo_on") || !t.contains("lo_off"))
      throw ConfigError("config key 'noise.target_shannon' needs both lo_on and lo_off");
    c.target_shannon_lo_on = get_number(t, "lo_on", "noise.target_shannon.lo_on", 0.0);
    c.target_shannon_lo_off = get_number(t, "lo_off", "noise.target_shannon.lo_off", 0.0);
  }

  const auto& a = section(root, "acquisition", {"sample_count", "sample_rate", "sweep_gains", "threads"});
  c.sample_count = get_uint(a, "sample_count", "acquisition.sample_count", c.sample_count);
  c.sample_rate = get_number(a, "sample_rate", "acquisition.sample_rate", c.sample_rate);
  if (a.contains("sweep_gains")) {
    const auto& g = a.at("sweep_gains");
    if (!g.is_array()) throw ConfigError("config key 'acquisition.sweep_gains' must be an array of numbers");
    for (const auto& v : g) {
      if (!v.is_number()) throw ConfigError("config key 'acquisition.sweep_gains' must be an array of numbers");
      c.sweep_gains.push_back(v.get<double>());
    }
  }
  c.threads = static_cast<unsigned>(get_uint(a, "threads", "acquisition.threads", c.threads));

  const auto& e = section(root, "entropy",
                          {"epsilon", "epsilon_hash", "effective_width", "adc_collapse", "classical_constants"});
  c.epsilon = get_number(e, "epsilon", "entropy.epsilon", c.epsilon);
  c.epsilon_hash = get_number(e, "epsilon_hash", "entropy.epsilon_hash", c.epsilon_hash);
  if (e.contains("effective_width") && !e.at("effective_width").is_null())
    c.effective_width = get_number(e, "effective_width", "entropy.effective_width", 0.0);
  if (e.contains("adc_collapse")) {
    const auto& v = e.at("adc_collapse");
    if (v.is_string()) {
      if (v.get<std::string>() != "measured")
        throw ConfigError("config key 'entropy.adc_collapse' must be an integer >= 1 or \"measured\"");
      c.adc_collapse_measured = true;
    } else {
      c.adc_collapse = get_uint(e, "adc_collapse", "entropy.adc_collapse", 1);
    }
  }
  if (e.contains("classical_constants")) {
    const auto& cc = e.at("classical_constants");
    if (!cc.is_object()) throw ConfigError("config key 'entropy.classical_constants' must be an object");
    for (const auto& [label, v] : cc.items()) {
      if (label == "c2") throw ConfigError("config key 'entropy.classical_constants.c2' is measured, not configured");
      if (!v.is_number()) throw ConfigError("config key 'entropy.classical_constants." + label + "' must be a number");
      c.classical_constants[label] = v.get<double>();
    }
  }

  const auto& x = section(root, "extractor", {"input_bits", "output_bits", "seed"});
  c.extractor_input_bits = get_uint(x, "input_bits", "extractor.input_bits", c.extractor_input_bits);
  c.extractor_output_bits = get_uint(x, "output_bits", "extractor.output_bits", c.extractor_output_bits);
  if (x.contains("seed")) {
    const auto& s = x.at("seed");
    if (s.is_number()) c.extractor_seed = std::to_string(get_uint(x, "seed", "extractor.seed", 0));
    else if (s.is_string()) c.extractor_seed = s.get<std::string>();
    else throw ConfigError("config key 'extractor.seed' must be an integer, a hex string, \"os\" or \"derive\"");
  }

  const auto& b = section(root, "battery", {"enabled", "alpha", "tests"});
  c.battery_enabled = get_bool(b, "enabled", "battery.enabled", c.battery_enabled);
  c.alpha = get_number(b, "alpha", "battery.alpha", c.alpha);
  if (b.contains("tests")) {
    const auto& t = b.at("tests");
    if (!t.is_array()) throw ConfigError("config key 'battery.tests' must be an array of test names");
    for (const auto& v : t) {
      if (!v.is_string() || !test_id_from_string(v.get<std::string>()))
        throw ConfigError("config key 'battery.tests' has unknown test " + v.dump());
      c.battery_tests.push_back(v.get<std::string>());
    }
  }

  const auto& o = section(root, "output", {"dir", "hex"});
  c.output_dir = get_string(o, "dir", "output.dir", c.output_dir);
  c.output_hex = get_bool(o, "hex", "output.hex", c.output_hex);
  return c;
}

// Normalized form: every key present, as written to a run directory.
inline json config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["quantizer"] = {{"range", c.range}, {"bits", c.bits}};
  j["noise"] = {{"gain", c.gain},
                {"mean_photon_number", c.mean_photon_number},
                {"electronic_variance", c.electronic_variance},
                {"target_shannon", nullptr}};
  if (c.target_shannon_lo_on)
    j["noise"]["target_shannon"] = {{"lo_on", *c.target_shannon_lo_on}, {"lo_off", *c.target_shannon_lo_off}};
  j["acquisition"] = {{"sample_count", c.sample_count},
                      {"sample_rate", c.sample_rate},
                      {"sweep_gains", c.sweep_gains},
                      {"threads", c.threads}};
  json classical = json::object();
  for (const auto& [k, v] : c.classical_constants) classical[k] = v;
  j["entropy"] = {{"epsilon", c.epsilon},
                  {"epsilon_hash", c.epsilon_hash},
                  {"effective_width", c.effective_width ? json(*c.effective_width) : json(nullptr)},
                  {"adc_collapse", c.adc_collapse_measured ? json("measured") : json(c.adc_collapse)},
                  {"classical_constants", classical}};
  j["extractor"] = {
      {"input_bits", c.extractor_input_bits}, {"output_bits", c.extractor_output_bits}, {"seed", c.extractor_seed}};
  j["battery"] = {{"enabled", c.battery_enabled}, {"alpha", c.alpha}, {"tests", c.battery_tests}};
  j["output"] = {{"dir", c.output_dir}, {"hex", c.output_hex}};
  return j;
}

// Threads are an execution detail and do not affect any artifact, so they are
// left out of the echo written into run directories.
inline json config_echo(const PipelineConfig& c) {
  auto j = config_to_json(c);
  j["acquisition"].erase("threads");
  j["output"].erase("dir");
  return j;
}

inline void validate(const PipelineConfig& c) {
  QuantizerSpec(c.range, c.bits);
  if (c.sample_count == 0) throw ConfigError("config key 'acquisition.sample_count' must be > 0");
  if (!(c.sample_rate > 0.0)) throw ConfigError("config key 'acquisition.sample_rate' must be > 0");
  if (!c.sweep_gains.empty() && c.sweep_gains.size() < 2)
    throw ConfigError("config key 'acquisition.sweep_gains' needs at least 2 values (or none)");
  for (double g : c.sweep_gains)
    if (!(std::isfinite(g) && g > 0.0)) throw ConfigError("config key 'acquisition.sweep_gains' values must be > 0");
  if (!c.target_shannon_lo_on) NoiseModel(c.gain, c.mean_photon_number, c.electronic_variance);
  else if (!(c.mean_photon_number >= 0.0)) throw ConfigError("config key 'noise.mean_photon_number' must be >= 0");
  if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) throw ConfigError("config key 'entropy.epsilon' must lie in (0, 1]");
  if (!(c.epsilon_hash > 0.0 && c.epsilon_hash < 1.0))
    throw ConfigError("config key 'entropy.epsilon_hash' must lie in (0, 1)");
  if (c.effective_width && !(*c.effective_width > 0.0))
    throw ConfigError("config key 'entropy.effective_width' must be > 0");
  if (c.adc_collapse < 1) throw ConfigError("config key 'entropy.adc_collapse' must be >= 1");
  if (c.extractor_input_bits == 0 || c.extractor_output_bits == 0 || c.extractor_output_bits > c.extractor_input_bits)
    throw ConfigError("config keys 'extractor.input_bits'/'extractor.output_bits' need 0 < output <= input");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("config key 'battery.alpha' must lie in (0, 1)");
  if (c.output_dir.empty()) throw ConfigError("config key 'output.dir' must not be empty");
}

// Applies "a.b.c=value" to a raw config document. The value is parsed as JSON
// when possible and taken as a string otherwise.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

inline json load_config_document(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file_text(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  json j = json::parse(text, nullptr, false, true);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  if (!j.is_object()) throw ConfigError("config " + path.string() + " must be a JSON object");
  return j;
}

inline ResolvedModel resolve_model(const PipelineConfig& c) {
  const QuantizerSpec q(c.range, c.bits);
  ResolvedModel m{};
  if (c.target_shannon_lo_on) {
    // Centre the calibration Gaussian on the bin edge at 0, as simulated.
    m.lo_off_variance = variance_for_shannon(*c.target_shannon_lo_off, q);
    m.lo_on_variance = variance_for_shannon(*c.target_shannon_lo_on, q);
    if (!(m.lo_on_variance > m.lo_off_variance))
      throw ConfigError("noise.target_shannon: lo_on must exceed lo_off");
    m.electronic_variance = m.lo_off_variance;
    m.gain = std::sqrt((m.lo_on_variance - m.lo_off_variance) / (1.0 + 2.0 * c.mean_photon_number));
  } else {
    m.gain = c.gain;
    m.electronic_variance = c.electronic_variance;
    m.lo_off_variance = c.electronic_variance;
    m.lo_on_variance = output_variance(NoiseModel(c.gain, c.mean_photon_number, c.electronic_variance));
  }
  return m;
}

inline NoiseModel noise_model(const PipelineConfig& c, const ResolvedModel& m) {
  return NoiseModel(m.gain, c.mean_photon_number, m.electronic_variance);
}

inline unsigned resolved_threads(const PipelineConfig& c) {
  if (c.threads != 0) return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Stream ids for the session seeds derived from the master seed.
inline constexpr std::uint64_t lo_off_stream = 1;
inline constexpr std::uint64_t lo_on_stream = 2;
inline constexpr std::uint64_t extractor_stream = 3;
inline constexpr std::uint64_t sweep_stream = 16;

inline SessionConfig session_config(const PipelineConfig& c, const ResolvedModel& m, Configuration tag) {
  const std::uint64_t stream = tag == Configuration::lo_off  ? lo_off_stream
                               : tag == Configuration::lo_on ? lo_on_stream
                                                             : sweep_stream;
  SessionConfig s{tag, noise_model(c, m), QuantizerSpec(c.range, c.bits), c.sample_count, derive_seed(c.seed, stream),
                  c.sample_rate, {}};
  if (tag == Configuration::lo_sweep) s.sweep_gains = c.sweep_gains;
  return s;
}

inline CertifyParams certify_params(const PipelineConfig& c, const ResolvedModel& m) {
  CertifyParams p;
  p.epsilon = c.epsilon;
  p.epsilon_hash = c.epsilon_hash;
  p.mean_photon_number = c.mean_photon_number;
  p.gain = m.gain;
  p.effective_width = c.effective_width;
  p.max_preimage = c.adc_collapse;
  p.measured_collapse = c.adc_collapse_measured;
  p.classical_constants = c.classical_constants;
  return p;
}

inline BitBlock extractor_seed(const PipelineConfig& c) {
  const std::size_t len = c.extractor_input_bits + c.extractor_output_bits - 1;
  const auto& s = c.extractor_seed;
  if (s == "derive") return toeplitz_seed_from_u64(len, derive_seed(c.seed, extractor_stream));
  if (s == "os") return toeplitz_seed_from_os(len);
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos)
    return toeplitz_seed_from_u64(len, std::stoull(s));
  std::string hex = s;
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex = hex.substr(2);
  if (hex.size() != (len + 7) / 8 * 2)
    throw ConfigError("config key 'extractor.seed': hex seed must have " + std::to_string((len + 7) / 8 * 2) +
                      " digits for a " + std::to_string(len) + "-bit seed, got " + std::to_string(hex.size()));
  try {
    return bits_from_hex(hex, len);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config key 'extractor.seed': ") + e.what());
  }
}

inline BatteryOptions battery_options(const PipelineConfig& c) {
  BatteryOptions o;
  o.alpha = c.alpha;
  if (!c.battery_tests.empty()) {
    o.enabled.clear();
    for (const auto& name : c.battery_tests) o.enabled.insert(*test_id_from_string(name));
  }
  return o;
}

}  // namespace qrng
