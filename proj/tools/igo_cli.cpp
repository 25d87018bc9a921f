// Command-line front end: scheme constants, the Monte-Carlo verification
// suite, gated optimization runs and rank-correlation of value files.
//
// Exit codes: 0 when every executed check holds, 1 when any check reports a
// violation, 2 on configuration or input errors.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "igo/experiment.hpp"

namespace {

void write_output(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw igo::ConfigError("cannot open output file: " + out_path);
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  f.flush();
  if (!f) throw igo::ConfigError("failed writing output file: " + out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-based Gaussian search with gated surrogate evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string filter = "*";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string file_f, file_g;

  auto* constants = app.add_subcommand(
      "constants", "print the scheme constants and guaranteed decrease rates");
  constants->add_option("--config", config_path, "experiment config file");
  constants->add_option("--out", out_path, "write CSV here instead of stdout");
  auto* constants_seed = constants->add_option("--seed", seed, "override the config seed");

  auto* verify =
      app.add_subcommand("verify", "run the Monte-Carlo bound and identity check suite");
  verify->add_option("--config", config_path, "experiment config file");
  verify->add_option("--out", out_path, "write CSV here instead of stdout");
  verify->add_option("--filter", filter, "glob selecting check names (* and ?)");
  verify->add_option("--threads", threads, "worker threads (default: IGO_THREADS or hardware)");
  auto* verify_seed = verify->add_option("--seed", seed, "override the config seed");

  auto* optimize = app.add_subcommand("optimize", "run one gated optimization trajectory");
  optimize->add_option("--config", config_path, "experiment config file");
  optimize->add_option("--out", out_path, "write CSV here instead of stdout");
  optimize->add_option("--threads", threads, "worker threads (default: IGO_THREADS or hardware)");
  auto* optimize_seed = optimize->add_option("--seed", seed, "override the config seed");

  auto* correlate =
      app.add_subcommand("correlate", "rank correlations between two files of values");
  correlate->add_option("file_f", file_f, "first value file (one value per whitespace token)")
      ->required();
  correlate->add_option("file_g", file_g, "second value file")->required();
  correlate->add_option("--config", config_path,
                        "experiment config supplying the weight scheme (default: truncation)");
  correlate->add_option("--out", out_path, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    igo::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = igo::load_config_file(config_path);
    if (constants_seed->count() || verify_seed->count() || optimize_seed->count()) {
      cfg.seed = seed;
    }

    if (constants->parsed()) {
      std::vector<std::vector<std::string>> rows;
      for (const auto& [name, value] : igo::constants_table(cfg)) {
        rows.push_back({name, igo::format_real(value)});
      }
      write_output(out_path, igo::to_csv({"constant", "value"}, rows));
      return 0;
    }

    if (verify->parsed()) {
      const std::vector<igo::BoundCheckReport> reports =
          igo::run_verify_suite(cfg, filter, threads);
      if (reports.empty()) throw igo::ConfigError("filter matched no checks: " + filter);
      write_output(out_path, igo::reports_to_csv(reports));
      for (const auto& r : reports) {
        if (r.verdict != igo::Verdict::holds) return 1;
      }
      return 0;
    }

    if (optimize->parsed()) {
      write_output(out_path, igo::trajectory_to_csv(igo::run_optimize(cfg, threads)));
      return 0;
    }

    // correlate
    std::optional<igo::WeightScheme> scheme;
    if (!config_path.empty()) scheme = igo::scheme_from_config(cfg);
    const igo::CorrelateResult res = igo::correlate_files(file_f, file_g, scheme);
    write_output(out_path,
                 igo::to_csv({"n", "tau_b", "rho_w"},
                             {{std::to_string(res.n), igo::format_real(res.tau),
                               igo::format_real(res.rho)}}));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
