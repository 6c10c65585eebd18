#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "adapt_qsci/runner.hpp"

using namespace aqsci;
namespace fs = std::filesystem;

namespace {

const std::string kH4 = std::string(ADAPT_QSCI_FIXTURE_DIR) + "/h4_sto3g.fcidump";
const std::string kCli = ADAPT_QSCI_CLI_PATH;

/// Fresh scratch directory per test, removed afterwards.
class TempDir {
 public:
  TempDir() {
    const auto* info = testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("aqsci_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>" + stderr_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig h4_config(const fs::path& out) {
  RunConfig c;
  c.hamiltonian_path = kH4;
  c.r_max = 14;
  c.seeds = {0, 1, 2};
  c.output_dir = out.string();
  return c;
}

void write_diagonal_qubit_json(const fs::path& p) {
  std::ofstream(p) << R"({
  "metadata": {"n_qubits": 4, "n_electrons": 2, "sz_doubled": 0},
  "terms": [
    {"coefficient": 1.0, "pauli": "Z0"}, {"coefficient": 1.0, "pauli": "Z1"},
    {"coefficient": -0.5, "pauli": "Z2"}, {"coefficient": -0.5, "pauli": "Z3"},
    {"coefficient": 0.1, "pauli": "Z0 Z2"}, {"coefficient": 0.25, "pauli": "I"}
  ]
})";
}

}  // namespace

TEST(CliPool, SizesAndListing) {
  std::ostringstream a, b, c;
  EXPECT_EQ(cmd_pool(8, false, a), 0);
  EXPECT_EQ(a.str(), "pool size: 164\n");
  EXPECT_EQ(cmd_pool(12, false, b), 0);
  EXPECT_EQ(b.str(), "pool size: 1050\n");
  EXPECT_EQ(cmd_pool(4, true, c), 0);
  EXPECT_EQ(c.str(),
            "pool size: 6\n0 X0 Y2\n1 X1 Y3\n2 X0 X1 X2 Y3\n3 X0 X1 Y2 X3\n4 X0 Y1 X2 X3\n5 Y0 X1 X2 X3\n");
  std::ostringstream d;
  EXPECT_THROW(cmd_pool(5, false, d), InputError);
}

TEST(CliExact, DeltaOneAndH4Spectrum) {
  TempDir tmp;
  RunConfig c = h4_config(tmp.path());
  c.deltas = {1.0, 1e-4};
  std::ostringstream log;
  ASSERT_EQ(cmd_exact(c, log), 0);
  EXPECT_NE(log.str().find("R_delta(1) = 1"), std::string::npos) << log.str();
  const auto report = nlohmann::json::parse(slurp(tmp.path() / "exact.json"));
  EXPECT_NEAR(report["exact_energy"].get<double>(), -2.166387448635, 1e-9);
  EXPECT_EQ(report["sector_dimension"].get<std::size_t>(), 36U);
  const std::size_t r = report["r_delta"][1]["R"].get<std::size_t>();
  EXPECT_GE(r, 11U);
  EXPECT_LE(r, 17U);

  std::istringstream csv(slurp(tmp.path() / "spectrum.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "rank,weight");
  double total = 0, prev = 2.0;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    const double w = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(w, prev);
    prev = w;
    total += w;
    ++rows;
  }
  EXPECT_EQ(rows, 36U);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(slurp(tmp.path() / "r_delta.csv").substr(0, 8), "delta,R\n");
}

TEST(CliRun, OutputsAreByteIdenticalAcrossRerunsAndThreadCounts) {
  TempDir a, b;
  RunConfig ca = h4_config(a.path());
  ca.threads = 1;
  RunConfig cb = h4_config(b.path());
  cb.threads = 3;
  std::ostringstream la, lb;
  ASSERT_EQ(cmd_run(ca, la), 0);
  ASSERT_EQ(cmd_run(cb, lb), 0);
  const auto fa = directory_contents(a.path());
  const auto fb = directory_contents(b.path());
  EXPECT_EQ(fa.size(), 3U * 2U + 2U);
  EXPECT_EQ(fa, fb);

  std::istringstream csv(fa.at("summary.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "seed,final_energy,exact_energy,error,iterations,stop_reason,cnots,shots,subspace_dim,config_hash");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_NE(line.find("," + ca.hash()), std::string::npos);
    ++rows;
  }
  EXPECT_EQ(rows, 3U);

  std::istringstream trace(fa.at("trace_seed1.jsonl"));
  std::size_t k = 0;
  while (std::getline(trace, line)) {
    const auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec["k"].get<std::size_t>(), k++);
    EXPECT_EQ(rec["seed"].get<std::uint64_t>(), 1U);
    for (const char* key : {"energy", "subspace_dim", "selected", "operator", "gradient", "theta", "predicted_energy",
                            "cnots", "shots", "config_hash"})
      EXPECT_TRUE(rec.contains(key)) << key;
  }
  EXPECT_GE(k, 2U);
  const auto manifest = nlohmann::json::parse(fa.at("manifest.json"));
  EXPECT_EQ(manifest["pool_size"].get<std::size_t>(), 164U);
  EXPECT_EQ(manifest["r_max_used"].get<std::size_t>(), 14U);
}

TEST(CliRun, DeltaSelectsSubspaceSizeFromExactState) {
  TempDir tmp;
  RunConfig c = h4_config(tmp.path());
  c.r_max.reset();
  c.delta = 1e-4;
  c.seeds = {0};
  std::ostringstream log;
  ASSERT_EQ(cmd_run(c, log), 0);
  const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
  const std::size_t r = manifest["r_max_used"].get<std::size_t>();
  EXPECT_GE(r, 11U);
  EXPECT_LE(r, 17U);
}

TEST(CliRun, MissingHamiltonianIsInputError) {
  TempDir tmp;
  RunConfig c = h4_config(tmp.path());
  c.hamiltonian_path = (tmp.path() / "absent.fcidump").string();
  std::ostringstream log;
  try {
    cmd_run(c, log);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(c.hamiltonian_path), std::string::npos);
  }
}

TEST(CliBinary, ExitCodes) {
  TempDir tmp;
  const fs::path err = tmp.path() / "stderr.txt";
  const std::string missing = (tmp.path() / "absent.fcidump").string();
  EXPECT_EQ(run_cli("run --hamiltonian " + missing + " --r-max 14 --out " + (tmp.path() / "o").string(), err), 2);
  EXPECT_NE(slurp(err).find(missing), std::string::npos) << slurp(err);
  EXPECT_EQ(run_cli("pool 8", err), 0);
  EXPECT_EQ(run_cli("--help", err), 0);
  EXPECT_EQ(run_cli("frobnicate", err), 2);
  EXPECT_EQ(run_cli("run --hamiltonian " + kH4 + " --out " + (tmp.path() / "o").string(), err), 2);
  EXPECT_NE(slurp(err).find("r_max"), std::string::npos);
  EXPECT_EQ(run_cli("run --hamiltonian " + kH4 + " --r-max 14 --mitigate --out " + (tmp.path() / "o").string(), err), 2);
}

TEST(CliBinary, RunWritesOutputs) {
  TempDir tmp;
  const fs::path out = tmp.path() / "o";
  ASSERT_EQ(run_cli("run --hamiltonian " + kH4 + " --r-max 14 --seed 4 --shots 20000 --out " + out.string(),
                    tmp.path() / "e.txt"),
            0);
  EXPECT_TRUE(fs::exists(out / "trace_seed4.jsonl"));
  EXPECT_TRUE(fs::exists(out / "subspace_seed4.json"));
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
}

TEST(CliEstimateShots, DiagonalEigenstateAndEpsilonScaling) {
  TempDir tmp;
  const fs::path ham = tmp.path() / "diag.json";
  write_diagonal_qubit_json(ham);
  RunConfig c;
  c.hamiltonian_path = ham.string();
  c.format = HamiltonianFormat::kQubitJson;
  c.r_max = 6;
  c.shots = 1000;
  const MolecularSystem sys = load_system_checked(c);
  const ComparisonReport rep = estimate_shots(c, sys);
  EXPECT_EQ(rep.vqe_once, 0.0);
  EXPECT_EQ(rep.vqe_lower_bound, 0.0);
  EXPECT_EQ(rep.adapt_qsci_shots, 1000.0);
  EXPECT_EQ(rep.adapt_qsci_cnots, 0.0);
  EXPECT_EQ(rep.n_groups, 1U);

  RunConfig h = h4_config(tmp.path());
  h.seeds = {0};
  const MolecularSystem h4 = load_system_checked(h);
  const ComparisonReport r1 = estimate_shots(h, h4);
  h.epsilon = 2e-3;
  const ComparisonReport r2 = estimate_shots(h, h4);
  EXPECT_NEAR(r2.vqe_once, r1.vqe_once / 4, r1.vqe_once * 1e-14);
  EXPECT_EQ(r1.vqe_lower_bound, 11 * r1.vqe_once);
  EXPECT_EQ(r1.adapt_qsci_shots, r2.adapt_qsci_shots);

  h.epsilon = 1e-3;
  std::ostringstream log;
  ASSERT_EQ(cmd_estimate_shots(h, log), 0);
  const auto j = nlohmann::json::parse(slurp(tmp.path() / "shot_estimate.json"));
  EXPECT_EQ(j["vqe_once"].get<double>(), r1.vqe_once);
}

TEST(RunConfigTest, JsonLoadingAndValidation) {
  TempDir tmp;
  fs::create_directories(tmp.path() / "cfg");
  std::ofstream(tmp.path() / "cfg" / "run.json") << R"({
    "hamiltonian": {"path": "../h.fcidump", "format": "fcidump"},
    "r_max": 10, "shots": 5000, "seeds": [3, 4],
    "noise": {"p_2q": 0.01, "p_m": 0.02}, "mitigation": true
  })";
  const RunConfig c = RunConfig::load((tmp.path() / "cfg" / "run.json").string());
  EXPECT_EQ(c.hamiltonian_path, (tmp.path() / "h.fcidump").lexically_normal().string());
  EXPECT_EQ(c.r_max, 10U);
  EXPECT_EQ(c.shots, 5000U);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  ASSERT_TRUE(c.noise.has_value());
  EXPECT_EQ(c.noise->p_m, 0.02);
  EXPECT_TRUE(c.mitigate);
  EXPECT_NO_THROW(c.validate());

  RunConfig t = c;
  t.threads = 7;
  t.verbose = true;
  EXPECT_EQ(t.hash(), c.hash());
  EXPECT_EQ(c.hash().size(), 16U);
  t.shots = 5001;
  EXPECT_NE(t.hash(), c.hash());

  auto invalid = [&](auto mutate) {
    RunConfig x = c;
    mutate(x);
    EXPECT_THROW(x.validate(), InputError);
  };
  invalid([](RunConfig& x) { x.hamiltonian_path.clear(); });
  invalid([](RunConfig& x) { x.delta = 0.1; });
  invalid([](RunConfig& x) { x.r_max.reset(); });
  invalid([](RunConfig& x) { x.r_max = 0; });
  invalid([](RunConfig& x) { x.r_max.reset(), x.delta = 1.5; });
  invalid([](RunConfig& x) { x.seeds.clear(); });
  invalid([](RunConfig& x) { x.shots = 0; });
  invalid([](RunConfig& x) { x.fold = 2; });
  invalid([](RunConfig& x) { x.epsilon = 0.0; });
  invalid([](RunConfig& x) { x.noise.reset(); });

  EXPECT_THROW(RunConfig::load((tmp.path() / "nope.json").string()), InputError);
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"shots": "many"})")), InputError);
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"noise": {"p_2q": 2.0, "p_m": 0.0}})")), InputError);
  EXPECT_THROW(RunConfig::parse_format("xyz"), InputError);
}
