// corrnet command-line driver. Talks to the shared library exclusively
// through the public C API.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "corrnet/corrnet.h"

namespace {

corrnet_run_overrides make_overrides() {
  corrnet_run_overrides ov;
  ov.out_dir = nullptr;
  ov.trim_k = -1;
  ov.quantile = -1.0;
  ov.seed = -1;
  ov.threads = 0;
  return ov;
}

int finish(corrnet_status status, const char* action) {
  if (status == CORRNET_OK) return 0;
  std::fprintf(stderr, "corrnet: %s failed: %s\n", action, corrnet_errmsg());
  return int(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-resolved market correlation networks and sector statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(corrnet_version()));

  std::string config_path;
  std::string out_dir;
  std::string window = "all";
  std::string format = "edge_list";
  int trim_k = -1;
  double quantile = -1.0;
  long long seed = -1;
  int threads = 0;

  CLI::App* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline");
  analyze->add_option("--config", config_path, "Run configuration file")->required();
  analyze->add_option("--out", out_dir, "Output directory (overrides config)");
  analyze->add_option("--trim", trim_k, "Primary trim count k (overrides config)");
  analyze->add_option("--quantile", quantile, "Threshold quantile (overrides config)");
  analyze->add_option("--threads", threads, "Worker threads (overrides CORRNET_THREADS)");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic factor-model panel");
  synth->add_option("--config", config_path, "Factor model spec file")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--seed", seed, "Seed override");

  CLI::App* exp = app.add_subcommand("export", "Export thresholded networks");
  exp->add_option("--config", config_path, "Run configuration file")->required();
  exp->add_option("--window", window, "Window selector: year, YYYY-YYYY range, or 'all'");
  exp->add_option("--format", format, "edge_list, graphml, or dot");
  exp->add_option("--out", out_dir, "Output directory (overrides config)");
  exp->add_option("--trim", trim_k, "Primary trim count k (overrides config)");
  exp->add_option("--quantile", quantile, "Threshold quantile (overrides config)");

  CLI11_PARSE(app, argc, argv);

  corrnet_run_overrides ov = make_overrides();
  if (!out_dir.empty()) ov.out_dir = out_dir.c_str();
  ov.trim_k = trim_k;
  ov.quantile = quantile;
  ov.seed = seed;
  ov.threads = threads;

  if (analyze->parsed()) {
    return finish(corrnet_analyze(config_path.c_str(), &ov), "analyze");
  }
  if (synth->parsed()) {
    return finish(corrnet_synth(config_path.c_str(), out_dir.c_str(), &ov), "synth");
  }
  return finish(corrnet_export(config_path.c_str(), window.c_str(), format.c_str(), &ov),
                "export");
}
