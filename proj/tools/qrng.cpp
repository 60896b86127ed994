// qrng: simulate, certify, extract and test a homodyne vacuum-noise random
// number stream. `qrng run` executes every stage; the other subcommands run
// one stage each against a run directory.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qrng/config.hpp"
#include "qrng/pipeline.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> overrides;
  bool hex = false;
  bool json = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-d,--dir", o.dir, "run directory (overrides output.dir)");
  cmd->add_option("--seed", o.seed, "master simulation seed (overrides seed)");
  cmd->add_option("--threads", o.threads, "simulation threads, 0 = all cores");
  cmd->add_option("--set", o.overrides, "override a config key, e.g. --set entropy.epsilon=1e-12")
      ->type_name("KEY=VALUE");
  cmd->add_flag("--hex", o.hex, "also write extracted bits as hex text");
  cmd->add_flag("--json", o.json, "print the stage document as JSON on stdout");
}

qrng::PipelineConfig load(const Options& o) {
  try {
    qrng::json doc = o.config_path.empty() ? qrng::json::object() : qrng::load_config_document(o.config_path);
    for (const auto& s : o.overrides) qrng::apply_override(doc, s);
    auto c = qrng::config_from_json(doc);
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (o.hex) c.output_hex = true;
    if (!o.dir.empty()) c.output_dir = o.dir;
    qrng::validate(c);
    return c;
  } catch (const qrng::ConfigError& e) {
    throw qrng::StageError(qrng::Stage::config, qrng::exit_code::config, e.what());
  }
}

void print_json(const qrng::json& j) { std::cout << qrng::dump_document(j); }

void print_summary(const qrng::json& report) {
  const auto& e = report.at("entropy");
  const auto& x = report.at("extraction");
  const auto& b = report.at("battery");
  std::printf("H(X) total           %.4f bits\n", e.at("shannon_total").get<double>());
  for (const auto& [label, v] : e.at("shannon_classical").items())
    std::printf("H(X) classical %-6s %.4f bits\n", label.c_str(), v.get<double>());
  std::printf("H(X) quantum         %.4f bits\n", e.at("shannon_quantum").get<double>());
  std::printf("H_min conditional    %.4f bits/sample\n", e.at("conditional_min_entropy_final").get<double>());
  std::printf("budget               %llu bits\n",
              static_cast<unsigned long long>(e.at("extractable_length").get<std::uint64_t>()));
  std::printf("certified / raw      %llu / %llu bits (ratio %.4f, reference %.4f)\n",
              static_cast<unsigned long long>(x.at("certified_bits_out").get<std::uint64_t>()),
              static_cast<unsigned long long>(x.at("raw_bits_in").get<std::uint64_t>()),
              x.at("realized_ratio").get<double>(), x.at("reference_ratio").get<double>());
  if (b.value("ran", false)) {
    for (const auto& t : b.at("tests"))
      std::printf("  %-22s p=%.6f %s\n", t.at("test").get<std::string>().c_str(), t.at("p_value").get<double>(),
                  t.at("skipped").get<bool>() ? "skipped" : (t.at("pass").get<bool>() ? "pass" : "FAIL"));
  }
  for (const auto& w : report.at("status").at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vacuum-noise QRNG post-processing pipeline"};
  app.require_subcommand(1);

  Options o;
  auto* run = app.add_subcommand("run", "all stages: simulate, certify, extract, test, report");
  auto* simulate = app.add_subcommand("simulate", "simulate LO_OFF, LO_ON (and LO_SWEEP) sessions into raw files");
  auto* certify = app.add_subcommand("certify", "entropy accounting over the raw files");
  auto* extract = app.add_subcommand("extract", "Toeplitz extraction within the certified budget");
  auto* test = app.add_subcommand("test", "statistical battery over the extracted bits");
  auto* report = app.add_subcommand("report", "assemble report.json from a run directory");
  for (auto* cmd : {run, simulate, certify, extract, test}) add_common(cmd, o);
  report->add_option("-d,--dir", o.dir, "run directory")->required();
  report->add_flag("--json", o.json, "print the report as JSON on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qrng::exit_code::config;
  }

  try {
    if (report->parsed()) {
      const auto out = qrng::stage_report(o.dir);
      if (o.json) print_json(out.report);
      else print_summary(out.report);
      return out.exit_code;
    }

    const auto c = load(o);
    const std::filesystem::path dir = c.output_dir;

    if (run->parsed()) {
      const auto out = qrng::run_pipeline(c, dir);
      if (o.json) print_json(out.report);
      else print_summary(out.report);
      return out.exit_code;
    }
    if (simulate->parsed()) {
      qrng::stage_simulate(c, dir);
      if (o.json) print_json(qrng::config_echo(c));
      return qrng::exit_code::ok;
    }
    if (certify->parsed()) {
      const auto r = qrng::stage_certify(c, dir);
      if (o.json) print_json(qrng::entropy_to_json(r));
      for (const auto& w : r.warnings) std::cerr << "warning: [certify] " << w << "\n";
      return r.certification_failed() ? qrng::exit_code::certification : qrng::exit_code::ok;
    }
    if (extract->parsed()) {
      const auto r = qrng::stage_extract(c, dir);
      if (o.json) std::cout << qrng::read_file_text(qrng::RunPaths{dir}.extraction());
      for (const auto& w : r.warnings) std::cerr << "warning: [extract] " << w << "\n";
      return qrng::exit_code::ok;
    }
    if (test->parsed()) {
      const auto doc = qrng::stage_test(c, dir);
      if (o.json) print_json(doc);
      return doc.value("ran", false) && !doc.value("overall_pass", true) ? qrng::exit_code::battery
                                                                          : qrng::exit_code::ok;
    }
  } catch (const qrng::StageError& e) {
    std::cerr << "qrng: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "qrng: " << e.what() << "\n";
    return qrng::exit_code::failure;
  }
  return qrng::exit_code::failure;
}
