#pragma once

// ADAPT-QSCI outer loop: run QSCI on the current input state, rank the pool by
// the subspace gradient <c|i[H,P]|c>, fix the new rotation angle in closed
// form on the classical eigenvector, append the rotation and repeat.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "adapt_qsci/chem.hpp"
#include "adapt_qsci/pauli.hpp"
#include "adapt_qsci/qsci.hpp"
#include "adapt_qsci/resources.hpp"
#include "adapt_qsci/simulator.hpp"

namespace aqsci {

struct OperatorPool {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;

  std::size_t size() const { return terms.size(); }
  const PauliTerm& operator[](std::size_t i) const { return terms[i]; }
};

/// Qubit-excitation pool on the interleaved spin layout:
///   X_{2i} Y_{2j}, X_{2i+1} Y_{2j+1}                    (0 <= i < j < n/2)
///   X_p X_q X_r Y_s, X_p X_q Y_r X_s, X_p Y_q X_r X_s, Y_p X_q X_r X_s
///                                   (p < q < r < s, p + q + r + s even)
inline OperatorPool build_pool(int n_qubits) {
  if (n_qubits < 4 || n_qubits % 2 != 0) throw std::invalid_argument("build_pool: qubit count must be even and >= 4");
  OperatorPool pool{n_qubits, {}};
  auto bit = [](int q) { return std::uint64_t{1} << q; };
  const int n_orb = n_qubits / 2;
  for (int i = 0; i < n_orb; ++i)
    for (int j = i + 1; j < n_orb; ++j)
      for (int spin = 0; spin < 2; ++spin) {
        const int a = 2 * i + spin, b = 2 * j + spin;
        pool.terms.emplace_back(n_qubits, bit(a) | bit(b), bit(b));
      }
  for (int p = 0; p < n_qubits; ++p)
    for (int q = p + 1; q < n_qubits; ++q)
      for (int r = q + 1; r < n_qubits; ++r)
        for (int s = r + 1; s < n_qubits; ++s) {
          if ((p + q + r + s) % 2 != 0) continue;
          const std::uint64_t x = bit(p) | bit(q) | bit(r) | bit(s);
          for (int y : {s, r, q, p}) pool.terms.emplace_back(n_qubits, x, bit(y));
        }
  return pool;
}

/// h_j = <c|i[H,P]|c> = -2 Im <c|H P|c>.
inline double subspace_gradient(const PauliSum& h, const PauliTerm& p, const SparseStateVec& c) {
  require_same_qubits(h.n_qubits(), p.n_qubits());
  require_normalized(c);
  return -2.0 * sparse_bracket(c, h, c.apply(p)).imag();
}

/// Precomputes H|c> once so each pool gradient costs O(|support of c|).
class GradientScanner {
 public:
  GradientScanner(const PauliSum& h, const SparseStateVec& c) : c_(c) {
    require_same_qubits(h.n_qubits(), c.n_qubits());
    require_normalized(c);
    for (const auto& e : h.entries())
      for (const auto& [cfg, amp] : c.entries()) {
        auto [to, s] = apply_term_to_basis(e.term, cfg);
        h_c_[to] += e.coeff * s * amp;
      }
  }

  double gradient(const PauliTerm& p) const {
    cplx z = 0.0;  // <Hc|Pc> = <c|HP|c>
    for (const auto& [cfg, amp] : c_.entries()) {
      auto [to, s] = apply_term_to_basis(p, cfg);
      auto it = h_c_.find(to);
      if (it != h_c_.end()) z += std::conj(it->second) * s * amp;
    }
    return -2.0 * z.imag();
  }

 private:
  const SparseStateVec& c_;
  std::unordered_map<Config, cplx> h_c_;
};

struct OperatorChoice {
  std::size_t index = 0;
  double gradient = 0.0;  // signed h_j of the chosen operator

  double magnitude() const { return std::abs(gradient); }
};

/// argmax |g_j|, ties to the smallest index.
inline OperatorChoice select_largest(std::span<const double> gradients) {
  if (gradients.empty()) throw std::invalid_argument("select_largest: empty gradient list");
  OperatorChoice best{0, gradients[0]};
  for (std::size_t j = 1; j < gradients.size(); ++j)
    if (std::abs(gradients[j]) > std::abs(best.gradient)) best = {j, gradients[j]};
  return best;
}

/// All pool gradients on |c>, evaluated over `threads` contiguous index blocks.
inline std::vector<double> pool_gradients(const PauliSum& h, const OperatorPool& pool, const SparseStateVec& c,
                                          unsigned threads = 1) {
  const GradientScanner scanner(h, c);
  std::vector<double> g(pool.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) g[j] = scanner.gradient(pool[j]);
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(pool.size())));
  if (threads == 1) {
    work(0, pool.size());
    return g;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (pool.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk, e = std::min(pool.size(), b + chunk);
    if (b < e) workers.emplace_back(work, b, e);
  }
  workers.clear();
  return g;
}

inline OperatorChoice rank_and_select(const PauliSum& h, const OperatorPool& pool, const SparseStateVec& c,
                                      unsigned threads = 1) {
  if (pool.size() == 0) throw std::invalid_argument("rank_and_select: empty pool");
  const auto g = pool_gradients(h, pool, c, threads);
  return select_largest(g);
}

/// f(theta) = <c|exp(-i theta P) H exp(i theta P)|c>
///          = (a+b)/2 + (a-b)/2 cos 2theta + g/2 sin 2theta
/// with a = <c|H|c>, b = <c|PHP|c>, g = <c|i[H,P]|c>.
struct AngleOptimum {
  double theta = 0.0;
  double value = 0.0;
  double a = 0.0, b = 0.0, g = 0.0;

  double f(double t) const { return 0.5 * (a + b) + 0.5 * (a - b) * std::cos(2.0 * t) + 0.5 * g * std::sin(2.0 * t); }
};

inline AngleOptimum minimize_rotation_energy(double a, double b, double g) {
  AngleOptimum opt{0.0, a, a, b, g};
  const double amp_cos = 0.5 * (a - b), amp_sin = 0.5 * g;
  if (amp_cos == 0.0 && amp_sin == 0.0) return opt;
  double theta = 0.5 * std::atan2(-amp_sin, -amp_cos);
  if (theta <= -0.5 * std::numbers::pi) theta += std::numbers::pi;
  opt.theta = theta;
  opt.value = opt.f(theta);
  return opt;
}

inline AngleOptimum optimal_angle(const PauliSum& h, const PauliTerm& p, const SparseStateVec& c) {
  require_same_qubits(h.n_qubits(), p.n_qubits());
  require_normalized(c);
  const SparseStateVec pc = c.apply(p);
  const double a = sparse_bracket(c, h, c).real();
  const double b = sparse_bracket(pc, h, pc).real();
  const double g = -2.0 * sparse_bracket(c, h, pc).imag();
  return minimize_rotation_energy(a, b, g);
}

/// Exact-state ADAPT-VQE gradient <psi|i[H,P]|psi> = -2 Im <psi|H P|psi>.
inline double exact_pool_gradient(const PauliSum& h, const PauliTerm& p, const StateVector& state) {
  require_same_qubits(h.n_qubits(), state.n_qubits());
  if (std::abs(state.norm() - 1.0) > 1e-10) throw std::invalid_argument("exact_pool_gradient: state not normalized");
  const StateVector hpsi = apply_pauli_sum(state, h);
  const StateVector ppsi = apply_pauli(state, p);
  cplx z = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) z += std::conj(hpsi[i]) * ppsi[i];
  return -2.0 * z.imag();
}

// ---------------------------------------------------------------------------
// Outer loop

struct Measurement {
  FrequencyMap frequencies;
  std::uint64_t shots = 0;
};

/// Measurement callback: (program for Phi_k, iteration k) -> frequencies and shots spent.
using MeasurementSource = std::function<Measurement(const AnsatzProgram&, std::size_t)>;

/// Ideal statevector sampling with an independent RNG stream per iteration.
inline MeasurementSource noiseless_source(std::uint64_t shots, std::uint64_t seed) {
  return [shots, seed](const AnsatzProgram& program, std::size_t k) {
    Rng rng = make_rng(seed, {k});
    const SampleTable t = sample(prepare_state(program), shots, rng);
    return Measurement{t.frequencies(), shots};
  };
}

struct AdaptOptions {
  std::size_t max_iters = 100;
  double conv_tol = 1e-5;
  std::size_t conv_window = 1;
  double stagnation_tol = 1e-8;
  bool track_exact_energy = true;
  unsigned threads = 1;
};

enum class StopReason { kConverged, kStagnated, kMaxIterations };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kConverged: return "converged";
    case StopReason::kStagnated: return "stagnated";
    default: return "max_iterations";
  }
}

struct AdaptIterationRecord {
  std::size_t k = 0;
  double energy = 0.0;                        // E_k
  std::size_t subspace_dim = 0;               // R_k
  std::optional<std::size_t> selected;        // t_k
  std::optional<std::string> selected_label;  // P_{t_k}
  double gradient = 0.0;                      // h_{t_k}
  double theta = 0.0;                         // theta*_k
  double predicted_energy = 0.0;              // f_k(theta*_k)
  std::optional<double> input_state_energy;   // <Phi_k|H|Phi_k>
  std::optional<double> next_state_energy;    // <Phi_{k+1}|H|Phi_{k+1}>
  std::uint64_t cnot_count = 0;               // CNOTs to prepare Phi_k
  std::uint64_t shots = 0;                    // cumulative, including iteration k
};

struct AdaptResult {
  SubspaceSolution solution;
  AnsatzProgram program;
  std::vector<AdaptIterationRecord> trace;
  StopReason reason = StopReason::kMaxIterations;
  ResourceLedger ledger;
};

inline AdaptResult run_adapt_qsci(const MolecularSystem& system, const OperatorPool& pool,
                                  const SelectionPolicy& policy, const MeasurementSource& measure,
                                  const AdaptOptions& options, std::uint64_t initial_shots = 0) {
  if (pool.size() == 0) throw std::invalid_argument("run_adapt_qsci: empty pool");
  require_same_qubits(system.n_qubits, pool.n_qubits);
  const PauliSum& h = system.hamiltonian;

  AdaptResult result;
  result.program = AnsatzProgram{system.n_qubits, system.reference_cfg, {}};
  result.ledger.shot_total = initial_shots;

  for (std::size_t k = 0;; ++k) {
    const Measurement m = measure(result.program, k);
    result.ledger.shot_total += m.shots;
    SubspaceSolution sol = qsci_from_frequencies(h, m.frequencies, policy, m.shots);

    AdaptIterationRecord rec;
    rec.k = k;
    rec.energy = sol.energy;
    rec.subspace_dim = sol.dimension();
    rec.cnot_count = result.ledger.cnot_count;
    rec.shots = result.ledger.shot_total;
    if (options.track_exact_energy && k == 0)
      rec.input_state_energy = exact_expectation(prepare_state(result.program), h);
    else if (options.track_exact_energy)
      rec.input_state_energy = result.trace.back().next_state_energy;

    bool converged = k >= options.conv_window && options.conv_window > 0;
    for (std::size_t j = 1; converged && j <= options.conv_window; ++j)
      converged = std::abs(sol.energy - result.trace[k - j].energy) < options.conv_tol;

    result.solution = std::move(sol);
    if (converged) {
      result.reason = StopReason::kConverged;
      result.trace.push_back(rec);
      break;
    }
    if (k >= options.max_iters) {
      result.reason = StopReason::kMaxIterations;
      result.trace.push_back(rec);
      break;
    }

    const SparseStateVec c = result.solution.state(system.n_qubits);
    const OperatorChoice choice = select_largest(pool_gradients(h, pool, c, options.threads));
    if (choice.magnitude() < options.stagnation_tol) {
      rec.gradient = choice.gradient;
      result.reason = StopReason::kStagnated;
      result.trace.push_back(rec);
      break;
    }
    const PauliTerm& p = pool[choice.index];
    const AngleOptimum opt = optimal_angle(h, p, c);
    result.program.append(p, opt.theta);
    result.ledger += gate_cost(p);

    rec.selected = choice.index;
    rec.selected_label = p.label();
    rec.gradient = choice.gradient;
    rec.theta = opt.theta;
    rec.predicted_energy = opt.value;
    if (options.track_exact_energy) rec.next_state_energy = exact_expectation(prepare_state(result.program), h);
    result.trace.push_back(rec);
  }
  return result;
}

/// Noiseless ADAPT-QSCI from the reference determinant.
inline AdaptResult run_adapt_qsci(const MolecularSystem& system, const OperatorPool& pool,
                                  const SelectionPolicy& policy, std::uint64_t shots, std::uint64_t seed,
                                  const AdaptOptions& options = {}) {
  return run_adapt_qsci(system, pool, policy, noiseless_source(shots, seed), options);
}

}  // namespace aqsci
