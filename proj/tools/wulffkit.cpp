#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "wulffkit/scenario.hpp"

namespace fs = std::filesystem;
namespace ws = wulffkit::scenario;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfig = 2;

struct RunOptions {
  std::string config;
  unsigned jobs = 1;
  std::optional<int> quad_order;
  std::optional<int> grid;
  std::optional<int> max_depth;
  std::optional<std::uint64_t> seed;
  std::string out;
};

fs::path output_dir(const RunOptions& opts, const ws::Scenario& sc) {
  if (const char* env = std::getenv("WULFFKIT_OUT"); env != nullptr && *env != '\0') return env;
  if (!opts.out.empty()) return opts.out;
  if (!sc.output_dir.empty()) return sc.output_dir;
  return "wulffkit-out";
}

int run(const RunOptions& opts) {
  ws::Scenario sc;
  try {
    sc = ws::load_scenario(opts.config, {opts.quad_order, opts.grid, opts.max_depth, opts.seed});
  } catch (const wulffkit::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto outcomes = ws::run_checks(sc, opts.jobs);

  const fs::path dir = output_dir(opts, sc);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << dir << ": " << ec.message() << "\n";
    return kExitConfig;
  }
  for (const auto& file : ws::report_files(sc, outcomes)) {
    std::ofstream out(dir / file.filename, std::ios::binary);
    out << file.content;
    if (!out) {
      std::cerr << "cannot write " << (dir / file.filename) << "\n";
      return kExitConfig;
    }
  }

  std::size_t rows = 0, failed = 0, info = 0;
  std::cout << "scenario " << sc.name << "\n";
  for (const auto& o : outcomes) {
    for (const auto& row : o.rows) {
      std::cout << "  " << ws::summary_line(row) << "\n";
      ++rows;
      if (row.status == ws::Status::Fail || row.status == ws::Status::Error) ++failed;
      if (row.status == ws::Status::Info) ++info;
    }
  }
  std::cout << rows << " results, " << failed << " failed, " << info << " informational; reports in " << dir.string()
            << "\n";
  return ws::exit_code(outcomes) == 0 ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wulffkit: numerical checks for anisotropic monotonicity identities"};
  app.require_subcommand(1);

  RunOptions opts;
  auto* run_cmd = app.add_subcommand("run", "run every check of a scenario");
  run_cmd->add_option("--config", opts.config, "scenario JSON file")->required();
  run_cmd->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--quad-order", opts.quad_order, "Gauss-Legendre order per cell axis");
  run_cmd->add_option("--grid", opts.grid, "base cells per parameter axis");
  run_cmd->add_option("--max-depth", opts.max_depth, "bisection depth for clipped regions");
  run_cmd->add_option("--seed", opts.seed, "override the scenario seed");
  run_cmd->add_option("--out", opts.out, "output directory (WULFFKIT_OUT takes precedence)");

  auto* list_cmd = app.add_subcommand("list", "list norm families, surfaces and checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (list_cmd->parsed()) {
    std::cout << ws::list_text();
    return kExitPass;
  }
  return run(opts);
}
