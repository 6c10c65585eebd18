#pragma once

// Error mitigation on sampled configuration frequencies: two-point digital
// zero-noise extrapolation, tensor-product readout-error mitigation and
// symmetry post-selection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "adapt_qsci/adapt.hpp"
#include "adapt_qsci/chem.hpp"
#include "adapt_qsci/qsci.hpp"
#include "adapt_qsci/simulator.hpp"

namespace aqsci {

/// f_zne = (3 f_obs - f_obs3) / 2 over the union of supports.
inline FrequencyMap zne_frequencies(const FrequencyMap& f_obs, const FrequencyMap& f_obs3) {
  FrequencyMap out;
  for (const auto& [cfg, f] : f_obs) out[cfg] += 1.5 * f;
  for (const auto& [cfg, f] : f_obs3) out[cfg] -= 0.5 * f;
  return out;
}

using Matrix2 = std::array<std::array<double, 2>, 2>;

inline Matrix2 inverse(const Matrix2& a) {
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (std::abs(det) < 1e-12) throw AlgorithmError("calibration matrix is singular (readout error near 0.5)");
  return {{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
}

/// Per-qubit matrices A^(q)[observed][prepared] and their inverses.
struct CalibrationSet {
  std::vector<Matrix2> matrices;
  std::vector<Matrix2> inverses;
  std::uint64_t shots = 0;

  int n_qubits() const { return static_cast<int>(matrices.size()); }

  static CalibrationSet from_matrices(std::vector<Matrix2> m, std::uint64_t shots = 0) {
    CalibrationSet c;
    c.matrices = std::move(m);
    for (const auto& a : c.matrices) c.inverses.push_back(inverse(a));
    c.shots = shots;
    return c;
  }

  static CalibrationSet identity(int n_qubits) {
    return from_matrices(std::vector<Matrix2>(n_qubits, Matrix2{{{1.0, 0.0}, {0.0, 1.0}}}));
  }
};

/// Infinite-shot calibration of the independent bit-flip model.
inline CalibrationSet exact_calibration(const NoiseModel& noise, int n_qubits) {
  const double p = noise.p_m;
  return CalibrationSet::from_matrices(std::vector<Matrix2>(n_qubits, Matrix2{{{1.0 - p, p}, {p, 1.0 - p}}}));
}

/// Column 0 of A^(q) from reading out |0...0>, column 1 from |2^q>; N_s shots
/// each, 2 n N_s in total. Only readout noise acts (no gates are executed).
inline CalibrationSet estimate_calibration(const NoiseModel& noise, int n_qubits, std::uint64_t shots,
                                           std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("estimate_calibration: shot count must be positive");
  std::vector<Matrix2> mats;
  for (int q = 0; q < n_qubits; ++q) {
    Matrix2 a{};
    for (int prepared = 0; prepared < 2; ++prepared) {
      const Config cfg = prepared ? (Config{1} << q) : 0;
      Rng rng = make_rng(seed, {0xCA1B, static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(prepared)});
      const SampleTable t = sample_basis_readout(cfg, n_qubits, noise.p_m, shots, rng);
      std::uint64_t ones = 0;
      for (const auto& [c, n] : t.counts)
        if ((c >> q) & 1U) ones += n;
      const double p1 = static_cast<double>(ones) / static_cast<double>(shots);
      a[1][prepared] = p1;
      a[0][prepared] = 1.0 - p1;
    }
    mats.push_back(a);
  }
  return CalibrationSet::from_matrices(std::move(mats), 2 * static_cast<std::uint64_t>(n_qubits) * shots);
}

/// p_exact = (A^(1) x ... x A^(n))^{-1} p_obs, applied one qubit at a time.
inline std::vector<double> apply_rem(const FrequencyMap& f, const CalibrationSet& cal) {
  constexpr int kMaxQubits = 24;
  const int n = cal.n_qubits();
  if (n > kMaxQubits) throw std::invalid_argument("apply_rem: dense readout mitigation limited to 24 qubits");
  std::vector<double> p(std::size_t{1} << n, 0.0);
  for (const auto& [cfg, v] : f) p.at(cfg) += v;
  for (int q = 0; q < n; ++q) {
    const Matrix2& inv = cal.inverses[q];
    const std::size_t m = std::size_t{1} << q;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i & m) continue;
      const double p0 = p[i], p1 = p[i | m];
      p[i] = inv[0][0] * p0 + inv[0][1] * p1;
      p[i | m] = inv[1][0] * p0 + inv[1][1] * p1;
    }
  }
  return p;
}

/// Removes configurations outside the target sector; no renormalization.
inline FrequencyMap post_select(const FrequencyMap& f, SectorLabel sector, int n_qubits) {
  FrequencyMap out;
  for (const auto& [cfg, v] : f)
    if (symmetry_of(cfg, n_qubits) == sector) out.emplace(cfg, v);
  return out;
}

/// Dense-vector overload; zero entries are omitted.
inline FrequencyMap post_select(const std::vector<double>& p, SectorLabel sector, int n_qubits) {
  FrequencyMap out;
  for (Config cfg = 0; cfg < p.size(); ++cfg)
    if (p[cfg] != 0.0 && symmetry_of(cfg, n_qubits) == sector) out.emplace(cfg, p[cfg]);
  return out;
}

/// Intermediate tables of one mitigated measurement, largest entries first.
struct MitigationDiagnostics {
  std::size_t iteration = 0;
  std::vector<std::pair<Config, double>> raw, zne, rem, post_selected;
};

inline std::vector<std::pair<Config, double>> top_entries(const FrequencyMap& f, std::size_t count) {
  std::vector<std::pair<Config, double>> v(f.begin(), f.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (v.size() > count) v.resize(count);
  return v;
}

struct NoisyRunOptions {
  NoiseModel noise;
  bool mitigate = true;
  int unmitigated_fold = 1;  // circuit folding used when mitigation is off
  int qubit_guard = DensityMatrix::kDefaultQubitGuard;
  std::function<void(const MitigationDiagnostics&)> diagnostics;
};

/// Fold-1 and fold-3 sampling (N_s each) -> ZNE -> REM -> post-selection.
/// Fold 1 draws from stream (seed, k) and fold 3 from (seed, k, 3).
inline Measurement mitigated_measurement(const AnsatzProgram& program, std::size_t k, const NoiseModel& noise,
                                         const CalibrationSet& cal, SectorLabel sector, std::uint64_t shots,
                                         std::uint64_t seed, int qubit_guard = DensityMatrix::kDefaultQubitGuard,
                                         const std::function<void(const MitigationDiagnostics&)>& sink = {}) {
  Rng rng1 = make_rng(seed, {k});
  Rng rng3 = make_rng(seed, {k, 3});
  const FrequencyMap f1 = sample_noisy(run_noisy(program, noise, 1, qubit_guard), noise.p_m, shots, rng1).frequencies();
  const FrequencyMap f3 = sample_noisy(run_noisy(program, noise, 3, qubit_guard), noise.p_m, shots, rng3).frequencies();
  const FrequencyMap zne = zne_frequencies(f1, f3);
  const std::vector<double> rem = apply_rem(zne, cal);
  FrequencyMap mitigated = post_select(rem, sector, program.n_qubits);
  if (sink) {
    FrequencyMap rem_map;
    for (Config cfg = 0; cfg < rem.size(); ++cfg)
      if (rem[cfg] != 0.0) rem_map.emplace(cfg, rem[cfg]);
    constexpr std::size_t kTop = 20;
    sink({k, top_entries(f1, kTop), top_entries(zne, kTop), top_entries(rem_map, kTop), top_entries(mitigated, kTop)});
  }
  return {std::move(mitigated), 2 * shots};
}

/// Single QSCI step on a mitigated measurement of the program's state.
inline SubspaceSolution mitigated_pipeline(const PauliSum& h, const AnsatzProgram& program, const NoiseModel& noise,
                                           const CalibrationSet& cal, const SelectionPolicy& policy,
                                           std::uint64_t shots, std::uint64_t seed, std::size_t k = 0) {
  const Measurement m = mitigated_measurement(program, k, noise, cal, policy.sector, shots, seed);
  return qsci_from_frequencies(h, m.frequencies, policy, m.shots);
}

/// Noisy density-matrix measurement source; with mitigation the calibration
/// must have been estimated before iteration 0.
inline MeasurementSource noisy_source(const NoisyRunOptions& opts, const CalibrationSet& cal, SectorLabel sector,
                                      std::uint64_t shots, std::uint64_t seed) {
  if (opts.mitigate)
    return [opts, cal, sector, shots, seed](const AnsatzProgram& program, std::size_t k) {
      return mitigated_measurement(program, k, opts.noise, cal, sector, shots, seed, opts.qubit_guard, opts.diagnostics);
    };
  return [opts, shots, seed](const AnsatzProgram& program, std::size_t k) {
    Rng rng = make_rng(seed, {k});
    const DensityMatrix rho = run_noisy(program, opts.noise, opts.unmitigated_fold, opts.qubit_guard);
    return Measurement{sample_noisy(rho, opts.noise.p_m, shots, rng).frequencies(), shots};
  };
}

/// Noisy ADAPT-QSCI. With mitigation the shot ledger is 2 n N_s (calibration)
/// plus 2 N_s per iteration; without it N_s per iteration.
inline AdaptResult run_noisy_adapt_qsci(const MolecularSystem& system, const OperatorPool& pool,
                                        const SelectionPolicy& policy, const NoisyRunOptions& opts,
                                        std::uint64_t shots, std::uint64_t seed, const AdaptOptions& options = {}) {
  CalibrationSet cal = CalibrationSet::identity(system.n_qubits);
  std::uint64_t initial = 0;
  if (opts.mitigate) {
    cal = estimate_calibration(opts.noise, system.n_qubits, shots, seed);
    initial = cal.shots;
  }
  return run_adapt_qsci(system, pool, policy, noisy_source(opts, cal, system.sector(), shots, seed), options, initial);
}

}  // namespace aqsci
