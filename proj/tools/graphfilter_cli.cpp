#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "graphfilter/app.hpp"

namespace {

void add_common(CLI::App* cmd, graphfilter::RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "Dataset (JSON lines with instruction/response)");
  cmd->add_option("--budget", cfg.budget, "Number of records to select");
  cmd->add_option("--orders", cfg.orders, "N-gram orders, e.g. 1,2,3")->delimiter(',');
  cmd->add_option("--side", cfg.side, "instruction | response | both");
  cmd->add_option("--quality", cfg.quality, "file | builtin | uniform");
  cmd->add_option("--quality-file", cfg.quality_file, "Quality sidecar (JSON lines)");
  cmd->add_option("--missing-quality", cfg.missing_quality, "fail | median");
  cmd->add_option("--priority", cfg.priority, "combined | quality | diversity | uniform");
  cmd->add_option("--tokenizer", cfg.tokenizer, "default | whitespace | words");
  cmd->add_option("--seed", cfg.seed, "Seed for randomized baselines");
  cmd->add_option("--report", cfg.report, "Report path (JSON lines; table at <path>.txt)");
  cmd->add_flag("--timing", cfg.timing, "Include wall-clock seconds in the report file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GraphFilter: quality/diversity-aware subset selection for instruction data"};
  app.set_version_flag("--version", graphfilter::kVersion);
  app.require_subcommand(1);

  graphfilter::RunConfig cfg;
  auto* select = app.add_subcommand("select", "Select a subset with GraphFilter");
  add_common(select, cfg);
  select->add_option("--output", cfg.output, "Output path for the selected records");
  select->add_option("--trace", cfg.trace, "Per-step trace (JSON lines)");

  auto* compare = app.add_subcommand("compare", "Run several strategies and report side by side");
  add_common(compare, cfg);
  compare->add_option("--strategies", cfg.strategies,
                      "Comma-separated: graphfilter[-combined|-quality|-diversity|-uniform], "
                      "random, longest, quality-topk")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : graphfilter::kExitConfig;
  }

  if (select->parsed()) return graphfilter::run_select(cfg, std::cout, std::cerr);
  return graphfilter::run_compare(cfg, std::cout, std::cerr);
}
