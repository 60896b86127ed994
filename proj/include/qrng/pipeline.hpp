#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qrng/acquisition.hpp"
#include "qrng/bits_io.hpp"
#include "qrng/config.hpp"
#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"
#include "qrng/file_io.hpp"
#include "qrng/raw_io.hpp"
#include "qrng/report_json.hpp"
#include "qrng/stat_tests.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int acquisition = 3;
inline constexpr int certification = 4;
inline constexpr int battery = 5;
}  // namespace exit_code

enum class Stage { config, simulate, certify, extract, test, report };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::config: return "config";
    case Stage::simulate: return "simulate";
    case Stage::certify: return "certify";
    case Stage::extract: return "extract";
    case Stage::test: return "test";
    case Stage::report: return "report";
  }
  return "?";
}

// Error raised by a pipeline stage, tagged with the stage and the process
// exit status it maps to.
class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, int code, const std::string& message)
      : std::runtime_error("[" + std::string(to_string(stage)) + "] " + message), stage_(stage), code_(code) {}

  Stage stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return code_; }

 private:
  Stage stage_;
  int code_;
};

// File layout of a run directory.
struct RunPaths {
  std::filesystem::path dir;

  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path raw_lo_off() const { return dir / "raw_lo_off.qrng"; }
  std::filesystem::path raw_lo_on() const { return dir / "raw_lo_on.qrng"; }
  std::filesystem::path raw_sweep(std::size_t i) const { return dir / ("raw_lo_sweep_" + std::to_string(i) + ".qrng"); }
  std::filesystem::path entropy() const { return dir / "entropy.json"; }
  std::filesystem::path extraction() const { return dir / "extraction.json"; }
  std::filesystem::path bits() const { return dir / "extracted.bits"; }
  std::filesystem::path hex() const { return dir / "extracted.hex"; }
  std::filesystem::path battery() const { return dir / "battery.json"; }
  std::filesystem::path report() const { return dir / "report.json"; }
  std::filesystem::path timings() const { return dir / "timings.json"; }
};

// Certified output over raw input quoted for the flight hardware: 19.5 Kbit
// from about 1 Mbit of raw samples. Reported for comparison only.
inline constexpr double reference_ratio = 0.0195;

namespace detail {

// Runs f, converting library exceptions into a StageError for `stage`.
template <class F>
auto in_stage(Stage stage, int io_code, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(stage, exit_code::config, e.what());
  } catch (const ParseError& e) {
    throw StageError(stage, io_code, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, stage == Stage::simulate ? exit_code::acquisition : exit_code::failure, e.what());
  }
}

inline json read_json(const std::filesystem::path& path, Stage stage) {
  if (!std::filesystem::exists(path))
    throw StageError(stage, exit_code::failure, "missing input file " + path.string());
  auto j = json::parse(read_file_text(path), nullptr, false);
  if (j.is_discarded())
    throw StageError(stage, exit_code::failure, path.filename().string() + " is not valid JSON");
  return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_file_atomic(path, dump_document(j)); }

// The first stage to touch a run directory records the configuration echo;
// later stages refuse to mix artifacts produced under a different one.
inline void bind_config(const RunPaths& paths, const PipelineConfig& c, Stage stage, bool overwrite) {
  const json echo = config_echo(c);
  if (!overwrite && std::filesystem::exists(paths.config())) {
    const json recorded = read_json(paths.config(), stage);
    if (recorded != echo) {
      const auto patch = json::diff(recorded, echo);
      const std::string where = patch.empty() ? std::string("?") : patch[0].value("path", std::string("?"));
      throw StageError(stage, exit_code::config,
                       "config differs from the one recorded in " + paths.config().string() + " (at " + where + ")");
    }
    return;
  }
  write_json(paths.config(), echo);
}

inline SampleBlock load_session(const std::filesystem::path& path, Configuration expected, const QuantizerSpec& q,
                                Stage stage) {
  if (!std::filesystem::exists(path))
    throw StageError(stage, exit_code::acquisition, "missing raw file " + path.string());
  SampleBlock block = [&] {
    try {
      return load_raw(path);
    } catch (const ParseError& e) {
      throw StageError(stage, exit_code::acquisition, path.filename().string() + ": " + e.what());
    }
  }();
  if (block.tag() != expected)
    throw StageError(stage, exit_code::acquisition,
                     path.filename().string() + ": field 'tag' is " + std::string(to_string(block.tag())) +
                         ", expected " + std::string(to_string(expected)));
  if (!(block.quantizer() == q))
    throw StageError(stage, exit_code::config,
                     "quantizer mismatch: " + path.filename().string() + " has bits=" +
                         std::to_string(block.quantizer().bits()) + " range=" + json(block.quantizer().range()).dump() +
                         ", config has bits=" + std::to_string(q.bits()) + " range=" + json(q.range()).dump());
  return block;
}

inline double sample_variance(const SampleBlock& b) {
  double mean = 0.0;
  for (auto c : b.codes()) mean += dequantize(c, b.quantizer());
  mean /= static_cast<double>(b.size());
  double var = 0.0;
  for (auto c : b.codes()) {
    const double d = dequantize(c, b.quantizer()) - mean;
    var += d * d;
  }
  return b.size() > 1 ? var / static_cast<double>(b.size() - 1) : 0.0;
}

inline void prefix_warnings(json& out, const json& warnings, std::string_view stage) {
  if (!warnings.is_array()) return;
  for (const auto& w : warnings) out.push_back("[" + std::string(stage) + "] " + w.get<std::string>());
}

}  // namespace detail

inline ResolvedModel resolve_stage_model(const PipelineConfig& c, Stage stage) {
  return detail::in_stage(stage, exit_code::config, [&] {
    validate(c);
    return resolve_model(c);
  });
}

// LO_OFF, then LO_ON, then the optional LO_SWEEP sessions, one raw file each.
inline void stage_simulate(const PipelineConfig& c, const std::filesystem::path& dir) {
  const RunPaths paths{dir};
  const auto model = resolve_stage_model(c, Stage::simulate);
  const unsigned threads = resolved_threads(c);
  detail::in_stage(Stage::simulate, exit_code::acquisition, [&] {
    std::filesystem::create_directories(dir);
    // Outputs of an earlier run in the same directory would otherwise mix
    // with the new sessions.
    for (const auto& stale : {paths.entropy(), paths.extraction(), paths.bits(), paths.hex(), paths.battery(),
                              paths.report(), paths.timings()})
      std::filesystem::remove(stale);
    for (std::size_t i = 0; std::filesystem::remove(paths.raw_sweep(i)); ++i) {
    }
    detail::bind_config(paths, c, Stage::simulate, true);
    store_raw(simulate_session(session_config(c, model, Configuration::lo_off), threads), paths.raw_lo_off());
    store_raw(simulate_session(session_config(c, model, Configuration::lo_on), threads), paths.raw_lo_on());
    if (!c.sweep_gains.empty()) {
      const auto sweep = simulate_sweep(session_config(c, model, Configuration::lo_sweep), threads);
      for (std::size_t i = 0; i < sweep.size(); ++i) store_raw(sweep[i], paths.raw_sweep(i));
    }
  });
}

inline EntropyReport stage_certify(const PipelineConfig& c, const std::filesystem::path& dir) {
  const RunPaths paths{dir};
  const auto model = resolve_stage_model(c, Stage::certify);
  const QuantizerSpec q(c.range, c.bits);
  const auto off = detail::load_session(paths.raw_lo_off(), Configuration::lo_off, q, Stage::certify);
  const auto on = detail::load_session(paths.raw_lo_on(), Configuration::lo_on, q, Stage::certify);
  detail::bind_config(paths, c, Stage::certify, false);
  return detail::in_stage(Stage::certify, exit_code::acquisition, [&] {
    const auto report = certify(histogram(on), histogram(off), certify_params(c, model));
    json sweep = json::array();
    for (std::size_t i = 0; i < c.sweep_gains.size(); ++i) {
      const auto block = detail::load_session(paths.raw_sweep(i), Configuration::lo_sweep, q, Stage::certify);
      const double g = c.sweep_gains[i];
      sweep.push_back({{"gain", g},
                       {"model_variance", g * g * (1.0 + 2.0 * c.mean_photon_number) + model.electronic_variance},
                       {"measured_variance", detail::sample_variance(block)},
                       {"samples", block.size()}});
    }
    const json doc = {{"entropy", entropy_to_json(report)},
                      {"model",
                       {{"gain", model.gain},
                        {"electronic_variance", model.electronic_variance},
                        {"lo_on_variance", model.lo_on_variance},
                        {"lo_off_variance", model.lo_off_variance},
                        {"lo_on_measured_variance", detail::sample_variance(on)},
                        {"lo_off_measured_variance", detail::sample_variance(off)}}},
                      {"sweep", sweep}};
    detail::write_json(paths.entropy(), doc);
    return report;
  });
}

inline EntropyReport load_entropy(const std::filesystem::path& dir, Stage stage) {
  const auto doc = detail::read_json(RunPaths{dir}.entropy(), stage);
  return detail::in_stage(stage, exit_code::failure, [&] {
    if (!doc.contains("entropy")) throw ParseError(ParseErrorKind::bad_field, "entropy.json: missing field 'entropy'");
    return entropy_from_json(doc.at("entropy"));
  });
}

inline ExtractionResult stage_extract(const PipelineConfig& c, const std::filesystem::path& dir) {
  const RunPaths paths{dir};
  resolve_stage_model(c, Stage::extract);
  const QuantizerSpec q(c.range, c.bits);
  const auto on = detail::load_session(paths.raw_lo_on(), Configuration::lo_on, q, Stage::extract);
  detail::bind_config(paths, c, Stage::extract, false);
  const auto entropy = load_entropy(dir, Stage::extract);
  return detail::in_stage(Stage::extract, exit_code::failure, [&] {
    if (entropy.sample_count != on.size())
      throw ParseError(ParseErrorKind::bad_field, "entropy.json: field 'sample_count' is " +
                                                      std::to_string(entropy.sample_count) + " but raw_lo_on holds " +
                                                      std::to_string(on.size()) + " samples");
    const auto seed = extractor_seed(c);
    const ToeplitzOperator op(ToeplitzSpec{c.extractor_input_bits, c.extractor_output_bits, seed});
    const auto raw = codes_to_bits(on);
    auto result = extract_with_budget(op, raw, entropy.extractable_length);
    if (entropy.certification_failed())
      result.warnings.push_back("no quantum entropy surplus; certified output is empty");
    store_bits(result.bits, paths.bits());
    if (c.output_hex) write_file_atomic(paths.hex(), result.bits.to_hex() + "\n");
    const double raw_bits = static_cast<double>(result.raw_bits);
    const json doc = {
        {"raw_bits_in", result.raw_bits},
        {"certified_bits_out", result.bits.size()},
        {"budget", result.budget},
        {"block_aligned_output", result.blocks_available * c.extractor_output_bits},
        {"blocks_available", result.blocks_available},
        {"blocks_used", result.blocks_used},
        {"truncated", result.truncated},
        {"input_bits", c.extractor_input_bits},
        {"output_bits", c.extractor_output_bits},
        {"seed_source", c.extractor_seed},
        {"seed_hex", seed.to_hex()},
        {"realized_ratio", static_cast<double>(result.bits.size()) / raw_bits},
        {"reference_ratio", reference_ratio},
        {"output_digest", fnv1a64_digest(result.bits)},
        {"warnings", result.warnings},
    };
    detail::write_json(paths.extraction(), doc);
    return result;
  });
}

inline json stage_test(const PipelineConfig& c, const std::filesystem::path& dir) {
  const RunPaths paths{dir};
  resolve_stage_model(c, Stage::test);
  detail::bind_config(paths, c, Stage::test, false);
  if (!std::filesystem::exists(paths.bits()))
    throw StageError(Stage::test, exit_code::failure, "missing input file " + paths.bits().string());
  return detail::in_stage(Stage::test, exit_code::failure, [&] {
    const auto bits = load_bits(paths.bits());
    json doc;
    if (!c.battery_enabled) {
      doc = {{"enabled", false}, {"ran", false}, {"note", "battery disabled"}};
    } else if (bits.empty()) {
      doc = {{"enabled", true}, {"ran", false}, {"note", "no extracted bits to test"}};
    } else {
      doc = battery_to_json(run_battery(bits, battery_options(c)));
      doc["enabled"] = true;
      doc["ran"] = true;
    }
    detail::write_json(paths.battery(), doc);
    return doc;
  });
}

struct RunOutcome {
  json report;
  int exit_code = exit_code::ok;
};

// Exit status implied by a completed run: no quantum surplus first, then a
// failed battery.
inline int outcome_code(const json& entropy, const json& battery) {
  if (entropy.value("certification_failed", false)) return exit_code::certification;
  if (battery.value("ran", false) && !battery.value("overall_pass", true)) return exit_code::battery;
  return exit_code::ok;
}

// Assembles report.json from the stage files of a run directory.
inline RunOutcome stage_report(const std::filesystem::path& dir) {
  const RunPaths paths{dir};
  const auto config = detail::read_json(paths.config(), Stage::report);
  const auto entropy_doc = detail::read_json(paths.entropy(), Stage::report);
  const auto extraction = detail::read_json(paths.extraction(), Stage::report);
  const auto battery = detail::read_json(paths.battery(), Stage::report);
  return detail::in_stage(Stage::report, exit_code::failure, [&] {
    for (const char* key : {"entropy", "model", "sweep"})
      if (!entropy_doc.contains(key))
        throw ParseError(ParseErrorKind::bad_field, std::string("entropy.json: missing field '") + key + "'");
    const auto& entropy = entropy_doc.at("entropy");
    RunOutcome out;
    out.exit_code = outcome_code(entropy, battery);
    json warnings = json::array();
    detail::prefix_warnings(warnings, entropy.value("warnings", json::array()), "certify");
    detail::prefix_warnings(warnings, extraction.value("warnings", json::array()), "extract");
    if (!battery.value("ran", false)) warnings.push_back("[test] " + battery.value("note", std::string("not run")));
    out.report = {
        {"schema", "report_v1"},
        {"config", config},
        {"model", entropy_doc.at("model")},
        {"sweep", entropy_doc.at("sweep")},
        {"entropy", entropy},
        {"extraction", extraction},
        {"battery", battery},
        {"status",
         {{"exit_code", out.exit_code},
          {"certification_failed", out.exit_code == exit_code::certification},
          {"battery_failed", battery.value("ran", false) && !battery.value("overall_pass", true)},
          {"warnings", warnings}}},
    };
    detail::write_json(paths.report(), out.report);
    return out;
  });
}

// Stage by stage, in order, timing each into timings.json (kept out of the
// report so that reports of identical runs are byte-identical).
inline RunOutcome run_pipeline(const PipelineConfig& c, const std::filesystem::path& dir) {
  json timings = json::object();
  const auto timed = [&](const char* name, auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  RunOutcome out;
  timed("simulate_s", [&] { stage_simulate(c, dir); });
  timed("certify_s", [&] { stage_certify(c, dir); });
  timed("extract_s", [&] { stage_extract(c, dir); });
  timed("test_s", [&] { stage_test(c, dir); });
  timed("report_s", [&] { out = stage_report(dir); });
  double total = 0.0;
  for (const auto& [k, v] : timings.items()) total += v.get<double>();
  timings["total_s"] = total;
  detail::write_json(RunPaths{dir}.timings(), timings);
  return out;
}

}  // namespace qrng
