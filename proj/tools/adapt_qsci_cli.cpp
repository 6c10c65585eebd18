#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "adapt_qsci/runner.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string hamiltonian;
  std::string format;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string noise;
  bool mitigate = false;
  int fold = 0;
  bool verbose = false;
  std::size_t r_max = 0;
  double delta = 0.0;
  std::uint64_t shots = 0;
  std::vector<double> deltas;
  double epsilon = 0.0;
  unsigned threads = 0;
};

aqsci::NoiseModel parse_noise(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw aqsci::InputError("--noise expects P2Q,PM");
  try {
    return aqsci::NoiseModel(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
  } catch (const std::invalid_argument& e) {
    throw aqsci::InputError(std::string("--noise: ") + e.what());
  }
}

aqsci::RunConfig resolve(const Overrides& o) {
  aqsci::RunConfig cfg;
  if (!o.config_path.empty()) cfg = aqsci::RunConfig::load(o.config_path);
  if (!o.hamiltonian.empty()) cfg.hamiltonian_path = o.hamiltonian;
  if (!o.format.empty()) cfg.format = aqsci::RunConfig::parse_format(o.format);
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.noise.empty()) cfg.noise = parse_noise(o.noise);
  if (o.mitigate) cfg.mitigate = true;
  if (o.fold != 0) cfg.fold = o.fold;
  if (o.verbose) cfg.verbose = true;
  if (o.r_max != 0) {
    cfg.r_max = o.r_max;
    cfg.delta.reset();
  }
  if (o.delta != 0.0) {
    cfg.delta = o.delta;
    cfg.r_max.reset();
  }
  if (o.shots != 0) cfg.shots = o.shots;
  if (!o.deltas.empty()) cfg.deltas = o.deltas;
  if (o.epsilon != 0.0) cfg.epsilon = o.epsilon;
  if (o.threads != 0) cfg.threads = o.threads;
  return cfg;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--hamiltonian", o.hamiltonian, "Hamiltonian file (overrides the config)");
  cmd->add_option("--format", o.format, "fcidump or qubit");
  cmd->add_option("--seed", o.seeds, "seed(s), replaces the configured list");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads for independent seeds");
  cmd->add_option("--shots", o.shots, "shots per QSCI sampling step");
  cmd->add_option("--r-max", o.r_max, "subspace size R");
  cmd->add_option("--delta", o.delta, "choose R as R_delta of the exact ground state");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADAPT-QSCI simulator"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "ADAPT-QSCI runs over the configured seeds");
  add_common(run, o);
  run->add_option("--noise", o.noise, "noise model P2Q,PM");
  run->add_flag("--mitigate", o.mitigate, "ZNE + readout mitigation + post-selection");
  run->add_option("--fold", o.fold, "folding factor (1 or 3) for unmitigated noisy runs");
  run->add_flag("--verbose", o.verbose, "dump mitigation diagnostics");

  auto* exact = app.add_subcommand("exact", "sector ground state, amplitude spectrum and R_delta");
  add_common(exact, o);
  exact->add_option("--deltas", o.deltas, "delta values for R_delta");

  int pool_qubits = 0;
  bool pool_list = false;
  auto* pool = app.add_subcommand("pool", "operator pool size and listing");
  pool->add_option("n_qubits", pool_qubits, "number of qubits")->required();
  pool->add_flag("--list", pool_list, "print every operator");

  auto* est = app.add_subcommand("estimate-shots", "VQE measurement estimate next to the ADAPT-QSCI ledger");
  add_common(est, o);
  est->add_option("--epsilon", o.epsilon, "target energy standard deviation (Ha)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (pool->parsed()) return aqsci::cmd_pool(pool_qubits, pool_list, std::cout);
    const aqsci::RunConfig cfg = resolve(o);
    if (run->parsed()) return aqsci::cmd_run(cfg, std::cout);
    if (exact->parsed()) return aqsci::cmd_exact(cfg, std::cout);
    return aqsci::cmd_estimate_shots(cfg, std::cout);
  } catch (const aqsci::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const aqsci::AlgorithmError& e) {
    std::cerr << "algorithm failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
