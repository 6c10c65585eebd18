#pragma once

// Quantum-selected configuration interaction: pick the most frequent sampled
// configurations, project the Hamiltonian onto them and diagonalize.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "adapt_qsci/chem.hpp"
#include "adapt_qsci/errors.hpp"
#include "adapt_qsci/pauli.hpp"
#include "adapt_qsci/simulator.hpp"

namespace aqsci {

using FrequencyMap = std::map<Config, double>;
using HermitianMatrix = Eigen::MatrixXcd;

struct SelectionPolicy {
  std::size_t r_max = 1;
  double freq_floor = 1e-10;
  SectorLabel sector;

  SelectionPolicy() = default;
  SelectionPolicy(std::size_t r, SectorLabel target, double floor = 1e-10)
      : r_max(r), freq_floor(floor), sector(target) {
    if (r_max < 1) throw std::invalid_argument("SelectionPolicy: R_max must be at least 1");
    if (!(freq_floor >= 0.0 && freq_floor < 1.0)) throw std::invalid_argument("SelectionPolicy: freq_floor must lie in [0, 1)");
  }
};

struct SubspaceSolution {
  std::vector<Config> configs;
  HermitianMatrix projected_h;
  double energy = 0.0;
  Eigen::VectorXcd eigvec;
  std::uint64_t shots = 0;

  std::size_t dimension() const { return configs.size(); }

  /// |c> = sum_l c_l |r_l>.
  SparseStateVec state(int n_qubits) const {
    std::vector<std::pair<Config, cplx>> e;
    e.reserve(configs.size());
    for (std::size_t l = 0; l < configs.size(); ++l) e.emplace_back(configs[l], eigvec(static_cast<Eigen::Index>(l)));
    return SparseStateVec(n_qubits, std::move(e));
  }
};

/// Drops entries below the floor or outside the target sector, then keeps the
/// R_max most frequent (ties by ascending configuration).
inline std::vector<Config> select_subspace(const FrequencyMap& freqs, const SelectionPolicy& policy, int n_qubits) {
  std::vector<std::pair<Config, double>> kept;
  for (const auto& [cfg, f] : freqs) {
    if (f < policy.freq_floor) continue;
    if (symmetry_of(cfg, n_qubits) != policy.sector) continue;
    kept.emplace_back(cfg, f);
  }
  if (kept.empty()) throw AlgorithmError("empty subspace: no sampled configuration survives selection");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (kept.size() > policy.r_max) kept.resize(policy.r_max);
  std::vector<Config> out;
  out.reserve(kept.size());
  for (const auto& k : kept) out.push_back(k.first);
  return out;
}

/// M_kl = <r_k|H|r_l>, assembled by applying every term to every ket.
inline HermitianMatrix project_hamiltonian(const PauliSum& h, const std::vector<Config>& configs) {
  std::unordered_map<Config, Eigen::Index> index;
  index.reserve(configs.size() * 2);
  for (std::size_t k = 0; k < configs.size(); ++k)
    if (!index.emplace(configs[k], static_cast<Eigen::Index>(k)).second)
      throw std::invalid_argument("project_hamiltonian: configurations must be distinct");
  const auto n = static_cast<Eigen::Index>(configs.size());
  HermitianMatrix m = HermitianMatrix::Zero(n, n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (const auto& e : h.entries()) {
      auto [to, s] = apply_term_to_basis(e.term, configs[l]);
      auto it = index.find(to);
      if (it != index.end()) m(it->second, l) += e.coeff * s;
    }
  return m;
}

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXcd vector;
};

/// Lowest eigenpair; the largest-magnitude component of the vector is made real-positive.
inline Eigenpair lowest_eigenpair(const HermitianMatrix& m) {
  constexpr Eigen::Index kMaxDimension = 10000;
  if (m.rows() != m.cols() || m.rows() == 0) throw std::invalid_argument("lowest_eigenpair: matrix must be square and nonempty");
  if (m.rows() > kMaxDimension) throw std::invalid_argument("lowest_eigenpair: dimension exceeds guard");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8) throw std::invalid_argument("lowest_eigenpair: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw AlgorithmError("lowest_eigenpair: eigensolver failed");
  Eigenpair out{solver.eigenvalues()(0), solver.eigenvectors().col(0)};
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < out.vector.size(); ++i) {
    const double a = std::abs(out.vector(i));
    if (a > best + 1e-12) {
      best = a;
      arg = i;
    }
  }
  out.vector *= std::conj(out.vector(arg)) / std::abs(out.vector(arg));
  out.vector(arg) = out.vector(arg).real();
  out.vector.normalize();
  return out;
}

/// Select, project and diagonalize from an observed (or mitigated) frequency table.
inline SubspaceSolution qsci_from_frequencies(const PauliSum& h, const FrequencyMap& freqs,
                                              const SelectionPolicy& policy, std::uint64_t shots) {
  SubspaceSolution sol;
  sol.configs = select_subspace(freqs, policy, h.n_qubits());
  sol.projected_h = project_hamiltonian(h, sol.configs);
  auto pair = lowest_eigenpair(sol.projected_h);
  sol.energy = pair.value;
  sol.eigvec = std::move(pair.vector);
  sol.shots = shots;
  return sol;
}

/// Sample the input state N_s times, then select, project and diagonalize.
inline SubspaceSolution run_qsci(const PauliSum& h, const StateVector& input, const SelectionPolicy& policy,
                                 std::uint64_t shots, Rng& rng) {
  const SampleTable table = sample(input, shots, rng);
  return qsci_from_frequencies(h, table.frequencies(), policy, shots);
}

/// All configurations of the system's (electron count, S_z) sector, ascending.
inline std::vector<Config> sector_configurations(int n_qubits, SectorLabel sector) {
  if (n_qubits > 30) throw std::invalid_argument("sector_configurations: too many qubits to enumerate");
  std::vector<Config> out;
  for (Config cfg = 0; cfg < (Config{1} << n_qubits); ++cfg)
    if (popcount(cfg) == sector.n_electrons && symmetry_of(cfg, n_qubits) == sector) out.push_back(cfg);
  return out;
}

struct GroundState {
  double energy = 0.0;
  SparseStateVec state;
};

/// Dense diagonalization inside the system's symmetry sector.
inline GroundState exact_ground_state(const MolecularSystem& system) {
  constexpr std::size_t kMaxSector = 100000;
  const auto configs = sector_configurations(system.n_qubits, system.sector());
  if (configs.empty()) throw InputError("exact_ground_state: empty symmetry sector");
  if (configs.size() > kMaxSector) throw InputError("exact_ground_state: sector too large for dense diagonalization");
  const auto pair = lowest_eigenpair(project_hamiltonian(system.hamiltonian, configs));
  std::vector<std::pair<Config, cplx>> e;
  e.reserve(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) e.emplace_back(configs[k], pair.vector(static_cast<Eigen::Index>(k)));
  return {pair.value, SparseStateVec(system.n_qubits, std::move(e))};
}

/// (configuration, |amplitude|^2) sorted by weight descending, ties by ascending configuration.
inline std::vector<std::pair<Config, double>> ranked_weights(const SparseStateVec& v) {
  std::vector<std::pair<Config, double>> w;
  w.reserve(v.size());
  for (const auto& [cfg, a] : v.entries()) w.emplace_back(cfg, std::norm(a));
  std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return w;
}

/// Smallest R whose top-R weights sum to at least 1 - delta.
inline std::size_t r_delta(const SparseStateVec& gs, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("r_delta: delta must lie in (0, 1]");
  require_normalized(gs, 1e-8);
  const auto w = ranked_weights(gs);
  double acc = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    acc += w[r].second;
    if (acc >= 1.0 - delta) return r + 1;
  }
  return std::max<std::size_t>(w.size(), 1);
}

inline std::vector<double> amplitude_spectrum(const SparseStateVec& gs) {
  require_normalized(gs, 1e-8);
  std::vector<double> out;
  for (const auto& [cfg, w] : ranked_weights(gs)) out.push_back(w);
  return out;
}

}  // namespace aqsci
