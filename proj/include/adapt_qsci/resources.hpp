#pragma once

// Gate and measurement accounting: CNOT counts for Pauli-rotation circuits and
// SortedInsertion grouping with optimal-allocation shot estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "adapt_qsci/pauli.hpp"
#include "adapt_qsci/simulator.hpp"

namespace aqsci {

struct ResourceLedger {
  std::uint64_t cnot_count = 0;
  std::uint64_t single_rot_count = 0;
  std::uint64_t shot_total = 0;

  ResourceLedger& operator+=(const ResourceLedger& o) {
    cnot_count += o.cnot_count;
    single_rot_count += o.single_rot_count;
    shot_total += o.shot_total;
    return *this;
  }
  friend ResourceLedger operator+(ResourceLedger a, const ResourceLedger& b) { return a += b; }
  bool operator==(const ResourceLedger&) const = default;
};

/// exp(i theta P2): 2 CNOTs + 5 single-qubit rotations; exp(i theta P4): 6 + 9.
/// All-to-all connectivity, no cancellation between neighbouring rotations.
inline ResourceLedger gate_cost(const PauliTerm& p) {
  switch (p.weight()) {
    case 2: return {2, 5, 0};
    case 4: return {6, 9, 0};
    default: throw std::invalid_argument("gate_cost: unsupported Pauli weight " + std::to_string(p.weight()));
  }
}

/// The reference determinant is a product state and costs nothing.
inline ResourceLedger cnot_cost(const AnsatzProgram& program) {
  ResourceLedger total;
  for (const auto& g : program.gates) total += gate_cost(g.pauli);
  return total;
}

struct MeasurementGrouping {
  std::vector<std::vector<PauliSum::Entry>> groups;

  std::size_t term_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

/// Terms sorted by |coefficient| (descending, ties by masks); each joins the
/// first group it fully commutes with, otherwise opens a new group.
inline MeasurementGrouping sorted_insertion(const PauliSum& h) {
  std::vector<PauliSum::Entry> terms;
  for (const auto& e : h.entries())
    if (!e.term.is_identity()) terms.push_back(e);
  std::stable_sort(terms.begin(), terms.end(), [](const PauliSum::Entry& a, const PauliSum::Entry& b) {
    const double ma = std::abs(a.coeff), mb = std::abs(b.coeff);
    if (ma != mb) return ma > mb;
    return std::pair(a.term.x_mask(), a.term.z_mask()) < std::pair(b.term.x_mask(), b.term.z_mask());
  });
  MeasurementGrouping out;
  for (const auto& t : terms) {
    auto fits = [&t](const std::vector<PauliSum::Entry>& g) {
      return std::all_of(g.begin(), g.end(), [&t](const PauliSum::Entry& m) { return commutes(m.term, t.term); });
    };
    auto it = std::find_if(out.groups.begin(), out.groups.end(), fits);
    if (it == out.groups.end())
      out.groups.push_back({t});
    else
      it->push_back(t);
  }
  return out;
}

struct ShotEstimate {
  MeasurementGrouping grouping;
  std::vector<double> group_variances;
  double shots = 0.0;
};

/// Optimal shot allocation over commuting groups: N = (sum_g sqrt(V_g))^2 / eps^2,
/// with exact group variances V_g = <O_g^2> - <O_g>^2 on the given state.
inline ShotEstimate vqe_shot_estimate_detailed(const PauliSum& h, const StateVector& state, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("vqe_shot_estimate: epsilon must be positive");
  if (!h.is_hermitian()) throw std::invalid_argument("vqe_shot_estimate: Hamiltonian is not Hermitian");
  ShotEstimate est;
  est.grouping = sorted_insertion(h);
  double root_sum = 0.0;
  for (const auto& g : est.grouping.groups) {
    std::vector<std::pair<cplx, PauliTerm>> pairs;
    for (const auto& e : g) pairs.emplace_back(e.coeff, e.term);
    const StateVector applied = apply_pauli_sum(state, PauliSum(h.n_qubits(), pairs));
    double second = 0.0;
    cplx first = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
      second += std::norm(applied[i]);
      first += std::conj(state[i]) * applied[i];
    }
    double v = second - first.real() * first.real();
    if (v < -1e-10) throw std::runtime_error("vqe_shot_estimate: negative group variance");
    v = std::max(v, 0.0);
    est.group_variances.push_back(v);
    root_sum += std::sqrt(v);
  }
  est.shots = root_sum * root_sum / (epsilon * epsilon);
  return est;
}

inline double vqe_shot_estimate(const PauliSum& h, const StateVector& state, double epsilon) {
  return vqe_shot_estimate_detailed(h, state, epsilon).shots;
}

/// Lower bound on total ADAPT-VQE shots: one energy estimate per iteration.
inline double vqe_total_estimate(double n_once, std::uint64_t iterations_plus_one) {
  if (!(n_once >= 0.0) || iterations_plus_one == 0) throw std::invalid_argument("vqe_total_estimate: invalid inputs");
  return n_once * static_cast<double>(iterations_plus_one);
}

}  // namespace aqsci
