#pragma once

// Batch front-end used by the adapt_qsci command-line tool: run configuration,
// the run / exact / pool / estimate-shots commands and their output files.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "adapt_qsci/adapt.hpp"
#include "adapt_qsci/chem.hpp"
#include "adapt_qsci/errors.hpp"
#include "adapt_qsci/mitigation.hpp"
#include "adapt_qsci/qsci.hpp"
#include "adapt_qsci/resources.hpp"

namespace aqsci {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct RunConfig {
  std::string hamiltonian_path;
  HamiltonianFormat format = HamiltonianFormat::kFcidump;
  std::optional<std::size_t> r_max;
  std::optional<double> delta;
  std::uint64_t shots = 100000;
  std::vector<std::uint64_t> seeds{0};
  std::size_t max_iters = 100;
  double conv_tol = 1e-5;
  std::size_t conv_window = 1;
  double stagnation_tol = 1e-8;
  double freq_floor = 1e-10;
  std::optional<NoiseModel> noise;
  bool mitigate = false;
  int fold = 1;
  std::vector<double> deltas{1e-4};
  double epsilon = 1e-3;
  std::uint64_t vqe_iterations_plus_one = 11;
  std::string output_dir = "out";
  bool verbose = false;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Relative hamiltonian paths resolve against base_dir.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    try {
      if (j.contains("hamiltonian")) {
        const auto& h = j.at("hamiltonian");
        std::filesystem::path p = h.at("path").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.hamiltonian_path = p.lexically_normal().string();
        c.format = parse_format(h.value("format", std::string("fcidump")));
      }
      if (j.contains("r_max")) c.r_max = j.at("r_max").get<std::size_t>();
      if (j.contains("delta")) c.delta = j.at("delta").get<double>();
      c.shots = j.value("shots", c.shots);
      if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      c.max_iters = j.value("max_iters", c.max_iters);
      c.conv_tol = j.value("conv_tol", c.conv_tol);
      c.conv_window = j.value("conv_window", c.conv_window);
      c.stagnation_tol = j.value("stagnation_tol", c.stagnation_tol);
      c.freq_floor = j.value("freq_floor", c.freq_floor);
      if (j.contains("noise") && !j.at("noise").is_null())
        c.noise = NoiseModel(j.at("noise").at("p_2q").get<double>(), j.at("noise").at("p_m").get<double>());
      c.mitigate = j.value("mitigation", c.mitigate);
      c.fold = j.value("fold", c.fold);
      if (j.contains("deltas")) c.deltas = j.at("deltas").get<std::vector<double>>();
      c.epsilon = j.value("epsilon", c.epsilon);
      c.vqe_iterations_plus_one = j.value("vqe_iterations_plus_one", c.vqe_iterations_plus_one);
      c.output_dir = j.value("output_dir", c.output_dir);
      c.verbose = j.value("verbose", c.verbose);
      c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InputError("config " + path + ": " + e.what());
    }
    return from_json(j, std::filesystem::path(path).parent_path());
  }

  static HamiltonianFormat parse_format(const std::string& s) {
    if (s == "fcidump") return HamiltonianFormat::kFcidump;
    if (s == "qubit" || s == "qubit-json") return HamiltonianFormat::kQubitJson;
    throw InputError("unknown Hamiltonian format '" + s + "' (expected fcidump or qubit)");
  }

  /// Canonical echo; also the input of the config hash. Threads and verbosity
  /// do not affect results and are left out.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["hamiltonian"] = {{"path", hamiltonian_path}, {"format", format == HamiltonianFormat::kFcidump ? "fcidump" : "qubit"}};
    j["r_max"] = r_max ? nlohmann::json(*r_max) : nlohmann::json(nullptr);
    j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json(nullptr);
    j["shots"] = shots;
    j["seeds"] = seeds;
    j["max_iters"] = max_iters;
    j["conv_tol"] = conv_tol;
    j["conv_window"] = conv_window;
    j["stagnation_tol"] = stagnation_tol;
    j["freq_floor"] = freq_floor;
    j["noise"] = noise ? nlohmann::json{{"p_2q", noise->p_2q}, {"p_m", noise->p_m}} : nlohmann::json(nullptr);
    j["mitigation"] = mitigate;
    j["fold"] = fold;
    j["deltas"] = deltas;
    j["epsilon"] = epsilon;
    j["vqe_iterations_plus_one"] = vqe_iterations_plus_one;
    return j;
  }

  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
    return buf;
  }

  void validate() const {
    if (hamiltonian_path.empty()) throw InputError("config: no Hamiltonian path given");
    if (r_max.has_value() == delta.has_value()) throw InputError("config: exactly one of r_max and delta must be set");
    if (r_max && *r_max == 0) throw InputError("config: r_max must be positive");
    if (delta && !(*delta > 0.0 && *delta <= 1.0)) throw InputError("config: delta must lie in (0, 1]");
    if (seeds.empty()) throw InputError("config: seed list is empty");
    if (shots == 0) throw InputError("config: shots must be positive");
    if (fold != 1 && fold != 3) throw InputError("config: fold must be 1 or 3");
    if (!(epsilon > 0.0)) throw InputError("config: epsilon must be positive");
    if (mitigate && !noise) throw InputError("config: mitigation requires a noise model");
  }

  unsigned worker_count() const {
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    return threads == 0 ? hw : threads;
  }
};

inline MolecularSystem load_system_checked(const RunConfig& cfg) {
  if (!std::filesystem::exists(cfg.hamiltonian_path))
    throw InputError("Hamiltonian file not found: " + cfg.hamiltonian_path);
  return load_system(cfg.hamiltonian_path, cfg.format);
}

// ---------------------------------------------------------------------------
// Serialization of results

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json record_to_json(const AdaptIterationRecord& r, std::uint64_t seed, const std::string& config_hash) {
  return {{"seed", seed},
          {"config_hash", config_hash},
          {"k", r.k},
          {"energy", r.energy},
          {"subspace_dim", r.subspace_dim},
          {"selected", r.selected ? nlohmann::json(*r.selected) : nlohmann::json(nullptr)},
          {"operator", r.selected_label ? nlohmann::json(*r.selected_label) : nlohmann::json(nullptr)},
          {"gradient", r.gradient},
          {"theta", r.theta},
          {"predicted_energy", r.selected ? nlohmann::json(r.predicted_energy) : nlohmann::json(nullptr)},
          {"input_state_energy", optional_json(r.input_state_energy)},
          {"next_state_energy", optional_json(r.next_state_energy)},
          {"cnots", r.cnot_count},
          {"shots", r.shots}};
}

inline nlohmann::json subspace_to_json(const SubspaceSolution& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < s.eigvec.size(); ++i) coeffs.push_back({s.eigvec(i).real(), s.eigvec(i).imag()});
  return {{"configs", s.configs}, {"energy", s.energy}, {"eigvec", coeffs}, {"shots", s.shots}};
}

inline nlohmann::json diagnostics_to_json(const MitigationDiagnostics& d, std::uint64_t seed) {
  auto table = [](const std::vector<std::pair<Config, double>>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [cfg, f] : v) a.push_back({cfg, f});
    return a;
  };
  return {{"seed", seed}, {"k", d.iteration}, {"raw", table(d.raw)}, {"zne", table(d.zne)},
          {"rem", table(d.rem)}, {"post_selected", table(d.post_selected)}};
}

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write output file: " + p.string());
  out << content;
}

inline std::filesystem::path prepare_output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory: " + dir.string());
  return dir;
}

// ---------------------------------------------------------------------------
// Commands

struct SeedOutcome {
  std::uint64_t seed = 0;
  AdaptResult result;
  std::vector<MitigationDiagnostics> diagnostics;
};

struct RunSummary {
  double exact_energy = 0.0;
  std::size_t r_used = 0;
  std::vector<SeedOutcome> outcomes;
};

/// Runs every configured seed (parallel worker slots, results kept in seed order).
inline RunSummary execute_runs(const RunConfig& cfg, const MolecularSystem& sys) {
  RunSummary summary;
  const GroundState gs = exact_ground_state(sys);
  summary.exact_energy = gs.energy;
  summary.r_used = cfg.r_max ? *cfg.r_max : r_delta(gs.state, *cfg.delta);
  const OperatorPool pool = build_pool(sys.n_qubits);
  const SelectionPolicy policy(summary.r_used, sys.sector(), cfg.freq_floor);
  AdaptOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.conv_tol = cfg.conv_tol;
  opts.conv_window = cfg.conv_window;
  opts.stagnation_tol = cfg.stagnation_tol;

  summary.outcomes.resize(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  auto run_one = [&](std::size_t i) {
    try {
      SeedOutcome& out = summary.outcomes[i];
      out.seed = cfg.seeds[i];
      if (cfg.noise) {
        NoisyRunOptions noisy;
        noisy.noise = *cfg.noise;
        noisy.mitigate = cfg.mitigate;
        noisy.unmitigated_fold = cfg.fold;
        if (cfg.verbose && cfg.mitigate)
          noisy.diagnostics = [&out](const MitigationDiagnostics& d) { out.diagnostics.push_back(d); };
        out.result = run_noisy_adapt_qsci(sys, pool, policy, noisy, cfg.shots, out.seed, opts);
      } else {
        out.result = run_adapt_qsci(sys, pool, policy, cfg.shots, out.seed, opts);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned workers = std::min<unsigned>(cfg.worker_count(), static_cast<unsigned>(cfg.seeds.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool_threads;
    for (unsigned w = 0; w < workers; ++w)
      pool_threads.emplace_back([&] {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) run_one(i);
      });
    pool_threads.clear();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summary;
}

inline const char* kSummaryHeader =
    "seed,final_energy,exact_energy,error,iterations,stop_reason,cnots,shots,subspace_dim,config_hash\n";

/// Writes trace_seed<s>.jsonl, subspace_seed<s>.json, summary.csv and manifest.json.
inline int cmd_run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const MolecularSystem sys = load_system_checked(cfg);
  const auto dir = prepare_output_dir(cfg);
  const std::string hash = cfg.hash();
  const RunSummary summary = execute_runs(cfg, sys);

  std::string csv = kSummaryHeader;
  for (const auto& o : summary.outcomes) {
    std::string trace;
    for (const auto& r : o.result.trace) trace += record_to_json(r, o.seed, hash).dump() + "\n";
    write_text(dir / ("trace_seed" + std::to_string(o.seed) + ".jsonl"), trace);
    nlohmann::json sub = subspace_to_json(o.result.solution);
    sub["seed"] = o.seed;
    sub["config_hash"] = hash;
    write_text(dir / ("subspace_seed" + std::to_string(o.seed) + ".json"), sub.dump(2) + "\n");
    if (!o.diagnostics.empty()) {
      std::string diag;
      for (const auto& d : o.diagnostics) diag += diagnostics_to_json(d, o.seed).dump() + "\n";
      write_text(dir / ("mitigation_seed" + std::to_string(o.seed) + ".jsonl"), diag);
    }
    const double err = o.result.solution.energy - summary.exact_energy;
    csv += std::to_string(o.seed) + "," + format_double(o.result.solution.energy) + "," +
           format_double(summary.exact_energy) + "," + format_double(err) + "," +
           std::to_string(o.result.trace.size()) + "," + to_string(o.result.reason) + "," +
           std::to_string(o.result.ledger.cnot_count) + "," + std::to_string(o.result.ledger.shot_total) + "," +
           std::to_string(o.result.solution.dimension()) + "," + hash + "\n";
    log << "seed " << o.seed << ": E = " << format_double(o.result.solution.energy) << " Ha, error "
        << format_double(err) << " Ha, " << o.result.trace.size() << " QSCI runs, "
        << o.result.ledger.cnot_count << " CNOTs, " << o.result.ledger.shot_total << " shots ("
        << to_string(o.result.reason) << ")\n";
  }
  write_text(dir / "summary.csv", csv);

  nlohmann::json manifest = {{"config", cfg.to_json()},
                             {"config_hash", hash},
                             {"version", kVersion},
                             {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                   std::to_string(EIGEN_MINOR_VERSION)},
                             {"exact_energy", summary.exact_energy},
                             {"r_max_used", summary.r_used},
                             {"n_qubits", sys.n_qubits},
                             {"pool_size", build_pool(sys.n_qubits).size()}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  log << "exact sector energy " << format_double(summary.exact_energy) << " Ha, R = " << summary.r_used
      << ", outputs in " << dir.string() << "\n";
  return 0;
}

/// Prints the sector ground energy; writes spectrum.csv (rank, weight), r_delta.csv and exact.json.
inline int cmd_exact(const RunConfig& cfg, std::ostream& log) {
  if (cfg.hamiltonian_path.empty()) throw InputError("config: no Hamiltonian path given");
  if (cfg.deltas.empty()) throw InputError("config: delta list is empty");
  for (double d : cfg.deltas)
    if (!(d > 0.0 && d <= 1.0)) throw InputError("config: every delta must lie in (0, 1]");
  const MolecularSystem sys = load_system_checked(cfg);
  const auto dir = prepare_output_dir(cfg);
  const GroundState gs = exact_ground_state(sys);
  const auto spectrum = amplitude_spectrum(gs.state);

  std::string csv = "rank,weight\n";
  for (std::size_t r = 0; r < spectrum.size(); ++r) csv += std::to_string(r) + "," + format_double(spectrum[r]) + "\n";
  write_text(dir / "spectrum.csv", csv);

  std::string rcsv = "delta,R\n";
  nlohmann::json rows = nlohmann::json::array();
  for (double d : cfg.deltas) {
    const std::size_t r = r_delta(gs.state, d);
    rcsv += format_double(d) + "," + std::to_string(r) + "\n";
    rows.push_back({{"delta", d}, {"R", r}});
  }
  write_text(dir / "r_delta.csv", rcsv);
  const nlohmann::json report = {{"exact_energy", gs.energy},
                                 {"sector_dimension", gs.state.size()},
                                 {"n_electrons", sys.n_electrons},
                                 {"sz_doubled", sys.sz_doubled},
                                 {"r_delta", rows},
                                 {"config_hash", cfg.hash()}};
  write_text(dir / "exact.json", report.dump(2) + "\n");

  log << "exact sector ground energy: " << format_double(gs.energy) << " Ha (sector dimension " << gs.state.size()
      << ")\n";
  for (const auto& row : rows) log << "R_delta(" << format_double(row["delta"].get<double>()) << ") = " << row["R"] << "\n";
  return 0;
}

inline int cmd_pool(int n_qubits, bool list, std::ostream& log) {
  if (n_qubits < 4 || n_qubits % 2 != 0) throw InputError("pool: qubit count must be even and >= 4");
  const OperatorPool pool = build_pool(n_qubits);
  log << "pool size: " << pool.size() << "\n";
  if (list)
    for (std::size_t j = 0; j < pool.size(); ++j) log << j << " " << pool[j].label() << "\n";
  return 0;
}

struct ComparisonReport {
  double adapt_qsci_shots = 0.0;
  double adapt_qsci_cnots = 0.0;
  double vqe_once = 0.0;
  double vqe_lower_bound = 0.0;
  std::size_t n_groups = 0;
};

/// Exact ground state -> SortedInsertion -> optimal-allocation estimate, next
/// to the mean ADAPT-QSCI ledger over the configured seeds.
inline ComparisonReport estimate_shots(const RunConfig& cfg, const MolecularSystem& sys) {
  const GroundState gs = exact_ground_state(sys);
  const ShotEstimate est = vqe_shot_estimate_detailed(sys.hamiltonian, StateVector::from_sparse(gs.state), cfg.epsilon);
  ComparisonReport rep;
  rep.vqe_once = est.shots;
  rep.n_groups = est.grouping.groups.size();
  rep.vqe_lower_bound = vqe_total_estimate(est.shots, cfg.vqe_iterations_plus_one);
  const RunSummary runs = execute_runs(cfg, sys);
  for (const auto& o : runs.outcomes) {
    rep.adapt_qsci_shots += static_cast<double>(o.result.ledger.shot_total);
    rep.adapt_qsci_cnots += static_cast<double>(o.result.ledger.cnot_count);
  }
  rep.adapt_qsci_shots /= static_cast<double>(runs.outcomes.size());
  rep.adapt_qsci_cnots /= static_cast<double>(runs.outcomes.size());
  return rep;
}

inline int cmd_estimate_shots(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const MolecularSystem sys = load_system_checked(cfg);
  const auto dir = prepare_output_dir(cfg);
  const ComparisonReport rep = estimate_shots(cfg, sys);
  const nlohmann::json j = {{"adapt_qsci_shots", rep.adapt_qsci_shots},
                            {"adapt_qsci_cnots", rep.adapt_qsci_cnots},
                            {"vqe_once", rep.vqe_once},
                            {"vqe_lower_bound", rep.vqe_lower_bound},
                            {"n_groups", rep.n_groups},
                            {"epsilon", cfg.epsilon},
                            {"config_hash", cfg.hash()}};
  write_text(dir / "shot_estimate.json", j.dump(2) + "\n");
  log << j.dump(2) << "\n";
  return 0;
}

}  // namespace aqsci
