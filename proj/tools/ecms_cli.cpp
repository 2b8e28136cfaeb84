#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ecms/sweep.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

int cmd_run(const std::string &config, const std::string &out_dir) {
  const ecms::RunConfig cfg = ecms::load_config(config);
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / (cfg.problem.name + ".csv");
  const ecms::SweepResult result = ecms::run_sweep(cfg, &std::cerr);
  std::ofstream os(path);
  if (!os)
    throw ecms::ConfigError("cannot write " + path.string());
  ecms::write_csv(os, result.rows);
  std::cerr << "wrote " << result.rows.size() << " rows to " << path.string() << "\n";
  return result.any_error ? kNumericalError : 0;
}

int cmd_reference(const std::string &config) {
  const ecms::RunConfig cfg = ecms::load_config(config);
  const ecms::HalvingReport r = ecms::verify_reference(cfg.problem, cfg.grid);
  std::printf("h vs h/2  relative L2 difference     %.3e  (threshold %.0e)  %s\n", r.diff_L2,
              ecms::HalvingReport::kL2Threshold, r.pass_L2 ? "pass" : "FAIL");
  std::printf("h vs h/2  relative energy difference %.3e  (threshold %.0e)  %s\n", r.diff_H,
              ecms::HalvingReport::kEnergyThreshold, r.pass_H ? "pass" : "FAIL");
  return 0;
}

int cmd_spectrum(const std::string &config, int edge) {
  const ecms::RunConfig cfg = ecms::load_config(config);
  const ecms::RealVector lambda = ecms::edge_spectrum(cfg, edge);
  std::printf("edge,j,lambda\n");
  for (Eigen::Index j = 0; j < lambda.size(); ++j)
    std::printf("%d,%ld,%.17g\n", edge, static_cast<long>(j + 1), lambda(j));
  return 0;
}

int cmd_describe(const std::string &config) {
  std::cout << ecms::describe(ecms::load_config(config));
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multiscale Helmholtz solver with spectral edge bases"};
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  int edge = 0;

  auto *run = app.add_subcommand("run", "m-sweep for one problem, written as CSV");
  run->add_option("--config", config, "JSON run configuration")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  auto *reference = app.add_subcommand("reference", "compare the fine solutions at h and h/2");
  reference->add_option("--config", config, "JSON run configuration")->required();

  auto *spectrum = app.add_subcommand("spectrum", "singular values of one edge as CSV");
  spectrum->add_option("--config", config, "JSON run configuration")->required();
  spectrum->add_option("--edge", edge, "edge id")->required();

  auto *describe = app.add_subcommand("describe", "mesh and mesh-size check report");
  describe->add_option("--config", config, "JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run)
      return cmd_run(config, out_dir);
    if (*reference)
      return cmd_reference(config);
    if (*spectrum)
      return cmd_spectrum(config, edge);
    return cmd_describe(config);
  } catch (const ecms::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ecms::NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
}
