#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ehg/commands.hpp"
#include "ehg/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("ehg"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"EHG preterm-birth pipeline: ingest records, extract features, evaluate classifiers"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the verb

  ehg::CommandOptions opts;
  std::string config_path, out_dir, features_path, log_level = "info";
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  bool print_config = false;

  app.add_option("--config", config_path, "configuration file (defaults apply when omitted)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides evaluation.master_seed");
  auto* out_opt = app.add_option("--out", out_dir, "output directory, overrides run.output_dir");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads, overrides run.jobs");
  auto* features_opt = app.add_option("--features", features_path, "feature CSV for evaluate");
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error")->capture_default_str();
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  auto* ingest = app.add_subcommand("ingest", "parse every record and write an inventory");
  auto* features = app.add_subcommand("features", "extract the per-segment feature matrix");
  auto* evaluate = app.add_subcommand("evaluate", "run the repeated balanced cross-validation protocol");
  auto* ablate = app.add_subcommand("ablate", "run the KLT x TOCO x segmentation grid");
  auto* report = app.add_subcommand("report", "render report.csv / ablation.csv as text tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  opts.config_path = config_path;
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out = out_dir;
  if (*jobs_opt) opts.jobs = jobs;
  if (*features_opt) opts.features = features_path;

  try {
    const auto config = ehg::resolve_config(opts);
    if (print_config) {
      std::cout << ehg::emit_config(config);
      return kExitOk;
    }
    if (ingest->parsed()) {
      const auto s = ehg::cmd_ingest(config);
      std::cout << s.records << " records (" << s.preterm << " preterm, " << s.term << " term), " << s.skipped
                << " skipped, " << s.annotations << " annotated intervals\n";
    } else if (features->parsed()) {
      const auto run = ehg::cmd_features(config);
      std::cout << run.data.rows() << " rows x " << run.data.features() << " features from " << run.n_segments
                << " segments (" << run.failures.size() << " failed) -> " << (config.output_dir / "features.csv").string()
                << '\n';
    } else if (evaluate->parsed()) {
      const auto r = ehg::cmd_evaluate(config);
      std::cout << r.cells.size() << " cells over " << r.model_names.size() << " models -> "
                << (config.output_dir / "report.csv").string() << '\n';
    } else if (ablate->parsed()) {
      const auto results = ehg::cmd_ablate(config);
      std::cout << results.size() << " ablation cells -> " << (config.output_dir / "ablation.csv").string() << '\n';
    } else if (report->parsed()) {
      ehg::cmd_report(config, std::cout);
    } else {
      std::cout << app.help();
    }
  } catch (const ehg::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
