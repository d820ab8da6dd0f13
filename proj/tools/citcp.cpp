// citcp: replay CI test histories and compare prioritization techniques.
//
// Subcommands:
//   validate <csv>          check a dataset and list violations
//   synth <cfg> -o <csv>    generate a synthetic dataset
//   run <cfg>               execute the configured experiment
//   compare <dir...>        merge run outputs and print comparison tables
//   report <dir>            re-render tables from a run's CSV outputs
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 unexpected runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "citcp/csv.hpp"
#include "citcp/errors.hpp"
#include "citcp/experiment_config.hpp"
#include "citcp/report.hpp"
#include "citcp/synth.hpp"
#include "citcp/textcfg.hpp"

namespace {

namespace fs = std::filesystem;
using namespace citcp;

// --out beats the config; $CITCP_OUT_ROOT anchors relative paths.
std::string effective_out_dir(const std::string& cli_out, const std::string& cfg_out) {
  std::string dir = !cli_out.empty() ? cli_out : cfg_out;
  if (dir.empty()) dir = "citcp-out";
  const char* root = std::getenv("CITCP_OUT_ROOT");
  if (root != nullptr && *root != '\0' && fs::path(dir).is_relative())
    dir = (fs::path(root) / dir).string();
  return dir;
}

int cmd_validate(const std::string& path) {
  const Subject subject = load_subject(path);
  const std::vector<Violation> violations = validate_subject(subject);
  for (const Violation& v : violations) std::cout << to_string(v) << '\n';
  std::cout << violations.size() << " violations\n";
  if (!violations.empty())
    throw DataError("dataset " + path + " has " + std::to_string(violations.size()) +
                    " violations");
  return 0;
}

int cmd_synth(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_path) {
  TextConfig text = parse_text_config_file(config_path);
  for (const std::string& o : overrides) apply_override(text, o);
  const SynthConfig cfg = synth_from_config(text);
  const Subject subject = generate_synthetic(cfg);
  write_subject(subject, out_path);
  std::cout << "wrote " << out_path << " (" << subject.cycles.size() << " cycles, "
            << subject.total_records() << " records)\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& cli_out, long long cli_seed, int cli_jobs) {
  TextConfig text = parse_text_config_file(config_path);
  for (const std::string& o : overrides) apply_override(text, o);
  if (cli_seed >= 0) text.set("seed", std::to_string(cli_seed));
  if (cli_jobs > 0) text.set("jobs", std::to_string(cli_jobs));

  ExperimentConfig cfg = experiment_from_config(text);
  cfg.out_dir = effective_out_dir(cli_out, cfg.out_dir);

  const RunResult result = run_experiment(cfg);
  write_run_outputs(result, cfg.out_dir);
  {
    const std::string echo_path = (fs::path(cfg.out_dir) / "config_echo.ini").string();
    std::ofstream echo(echo_path, std::ios::binary);
    if (!echo) throw DataError("cannot write " + echo_path);
    echo << render_text_config(resolved_config(cfg));
  }
  std::cout << summary_table(result.summary);
  std::cout << "outputs in " << cfg.out_dir << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_dir) {
  std::vector<CycleRow> rows;
  std::vector<SummaryRow> summaries;
  for (const std::string& dir : dirs) {
    std::vector<CycleRow> r = read_per_cycle_file((fs::path(dir) / "per_cycle.csv").string());
    rows.insert(rows.end(), r.begin(), r.end());
    std::vector<SummaryRow> s = read_summary_file((fs::path(dir) / "summary.csv").string());
    summaries.insert(summaries.end(), s.begin(), s.end());
  }
  const std::string report = compare_report(rows, summaries);
  std::cout << report;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string path = (fs::path(out_dir) / "compare.txt").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << report;
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

int cmd_report(const std::string& dir) {
  const std::vector<SummaryRow> summaries =
      read_summary_file((fs::path(dir) / "summary.csv").string());
  const std::vector<CycleRow> rows =
      read_per_cycle_file((fs::path(dir) / "per_cycle.csv").string());
  std::cout << "== summary ==\n" << summary_table(summaries) << '\n';
  std::cout << "== applicability ==\n" << applicability_table(summaries) << '\n';
  try {
    std::cout << "== rank statistics ==\n" << friedman_report(failing_cycle_matrix(rows));
  } catch (const ConfigError& e) {
    std::cout << "rank statistics unavailable: " << e.what() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"test-case prioritization lab for CI histories"};
  app.require_subcommand(1);

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a dataset CSV");
  validate->add_option("csv", validate_path, "dataset file")->required();

  std::string synth_cfg, synth_out;
  std::vector<std::string> synth_sets;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("config", synth_cfg, "generator config file")->required();
  synth->add_option("-o,--out", synth_out, "output CSV path")->required();
  synth->add_option("--set", synth_sets, "override key=value (repeatable)");

  std::string run_cfg, run_out;
  std::vector<std::string> run_sets;
  long long run_seed = -1;
  int run_jobs = 0;
  CLI::App* run = app.add_subcommand("run", "execute an experiment");
  run->add_option("config_file", run_cfg, "experiment config file");
  run->add_option("--config", run_cfg, "experiment config file (alternative to positional)");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--seed", run_seed, "override the experiment seed");
  run->add_option("--set", run_sets, "override key=value (repeatable)");
  run->add_option("--jobs", run_jobs, "worker threads");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  CLI::App* compare = app.add_subcommand("compare", "merge runs and compare techniques");
  compare->add_option("dirs", compare_dirs, "run output directories")->required();
  compare->add_option("--out", compare_out, "directory for compare.txt");

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "re-render tables from run outputs");
  report->add_option("dir", report_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_path);
    if (synth->parsed()) return cmd_synth(synth_cfg, synth_sets, synth_out);
    if (run->parsed()) {
      if (run_cfg.empty()) throw ConfigError("run needs a config file (positional or --config)");
      return cmd_run(run_cfg, run_sets, run_out, run_seed, run_jobs);
    }
    if (compare->parsed()) return cmd_compare(compare_dirs, compare_out);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "citcp: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "citcp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "citcp: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
