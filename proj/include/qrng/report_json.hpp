#pragma once

#include <string>

#include "json.hpp"

#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"
#include "qrng/stat_tests.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {

using json = nlohmann::json;

inline json entropy_to_json(const EntropyReport& r) {
  json classical = json::object();
  for (const auto& [k, v] : r.shannon_classical) classical[k] = v;
  return {
      {"shannon_total", r.shannon_total},
      {"shannon_classical", classical},
      {"shannon_quantum", r.shannon_quantum},
      {"shannon_quantum_clamped", r.shannon_quantum_clamped},
      {"min_entropy_unconditional", r.min_entropy_unconditional},
      {"min_entropy_classical", r.min_entropy_classical},
      {"max_entropy_total", r.max_entropy_total},
      {"conditional_min_entropy_ideal", r.conditional_min_entropy_ideal},
      {"max_preimage", r.max_preimage},
      {"adc_penalty", r.adc_penalty},
      {"conditional_min_entropy_final", r.conditional_min_entropy_final},
      {"secure_rate_single_shot", r.secure_rate_single_shot},
      {"secure_rate_usable", r.secure_rate_usable},
      {"hash_penalty", r.hash_penalty},
      {"extractable_length", r.extractable_length},
      {"epsilon", r.epsilon},
      {"epsilon_hash", r.epsilon_hash},
      {"sample_count", r.sample_count},
      {"mean_photon_number", r.mean_photon_number},
      {"gain", r.gain},
      {"bin_width", r.bin_width},
      {"effective_width", r.effective_width},
      {"cardinality", r.cardinality},
      {"distinct_codes", r.distinct_codes},
      {"certification_failed", r.certification_failed()},
      {"warnings", r.warnings},
  };
}

namespace detail {

template <class T>
T field(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ParseError(ParseErrorKind::bad_field, std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(ParseErrorKind::bad_field, std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline EntropyReport entropy_from_json(const json& j) {
  using detail::field;
  constexpr const char* where = "entropy report";
  if (!j.is_object()) throw ParseError(ParseErrorKind::bad_field, "entropy report is not an object");
  EntropyReport r;
  r.shannon_total = field<double>(j, "shannon_total", where);
  r.shannon_classical = field<std::map<std::string, double>>(j, "shannon_classical", where);
  r.shannon_quantum = field<double>(j, "shannon_quantum", where);
  r.shannon_quantum_clamped = field<bool>(j, "shannon_quantum_clamped", where);
  r.min_entropy_unconditional = field<double>(j, "min_entropy_unconditional", where);
  r.min_entropy_classical = field<double>(j, "min_entropy_classical", where);
  r.max_entropy_total = field<double>(j, "max_entropy_total", where);
  r.conditional_min_entropy_ideal = field<double>(j, "conditional_min_entropy_ideal", where);
  r.max_preimage = field<std::uint64_t>(j, "max_preimage", where);
  r.adc_penalty = field<double>(j, "adc_penalty", where);
  r.conditional_min_entropy_final = field<double>(j, "conditional_min_entropy_final", where);
  r.secure_rate_single_shot = field<double>(j, "secure_rate_single_shot", where);
  r.secure_rate_usable = field<double>(j, "secure_rate_usable", where);
  r.hash_penalty = field<double>(j, "hash_penalty", where);
  r.extractable_length = field<std::uint64_t>(j, "extractable_length", where);
  r.epsilon = field<double>(j, "epsilon", where);
  r.epsilon_hash = field<double>(j, "epsilon_hash", where);
  r.sample_count = field<std::uint64_t>(j, "sample_count", where);
  r.mean_photon_number = field<double>(j, "mean_photon_number", where);
  r.gain = field<double>(j, "gain", where);
  r.bin_width = field<double>(j, "bin_width", where);
  r.effective_width = field<double>(j, "effective_width", where);
  r.cardinality = field<std::uint32_t>(j, "cardinality", where);
  r.distinct_codes = field<std::size_t>(j, "distinct_codes", where);
  r.warnings = field<std::vector<std::string>>(j, "warnings", where);
  return r;
}

inline json test_result_to_json(const TestResult& r) {
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  return {{"test", std::string(to_string(r.id))},
          {"p_value", r.p_value},
          {"pass", r.pass},
          {"skipped", r.skipped},
          {"statistic", r.statistic},
          {"bit_count", r.bit_count},
          {"sub_p_values", r.sub_p_values},
          {"parameters", params},
          {"note", r.note}};
}

inline json battery_to_json(const BatteryReport& b) {
  json tests = json::array();
  for (const auto& r : b.results) tests.push_back(test_result_to_json(r));
  return {{"alpha", b.alpha},
          {"overall_pass", b.overall_pass},
          {"bit_count", b.bit_count},
          {"input_digest", b.input_digest},
          {"tests", tests}};
}

// Pretty-printed with sorted keys and a trailing newline, so equal documents
// are byte-identical on disk.
inline std::string dump_document(const json& j) { return j.dump(2) + "\n"; }

}  // namespace qrng
