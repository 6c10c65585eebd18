#pragma once

// Statevector and density-matrix simulation of Pauli-rotation circuits
// exp(i theta P) acting on a computational-basis reference, plus shot sampling.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "adapt_qsci/pauli.hpp"

namespace aqsci {

// ---------------------------------------------------------------------------
// Random numbers

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream ids...). std::seed_seq and
/// mt19937_64 are fully specified, so streams are portable.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (auto s : stream) {
    words.push_back(static_cast<std::uint32_t>(s));
    words.push_back(static_cast<std::uint32_t>(s >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Circuits

struct NoiseModel {
  double p_2q = 0.0;  // CNOT error rate
  double p_m = 0.0;   // per-qubit readout flip probability

  NoiseModel() = default;
  NoiseModel(double two_qubit, double measurement) : p_2q(two_qubit), p_m(measurement) {
    if (!(p_2q >= 0.0 && p_2q <= 1.0) || !(p_m >= 0.0 && p_m <= 1.0))
      throw std::invalid_argument("NoiseModel: error rates must lie in [0, 1]");
  }

  /// Depolarizing strength after a two-qubit rotation (two CNOTs).
  double p_two_qubit_rotation() const { return p_2q; }
  /// After a four-qubit rotation: (1 - p'')^4 = (1 - p_2q)^6.
  double p_four_qubit_rotation() const { return 1.0 - std::pow(1.0 - p_2q, 1.5); }
  bool is_noiseless() const { return p_2q == 0.0 && p_m == 0.0; }
};

struct RotationGate {
  PauliTerm pauli;  // phase +1
  double angle = 0.0;
};

/// exp(i angle_{m-1} P_{m-1}) ... exp(i angle_0 P_0) |reference>.
struct AnsatzProgram {
  int n_qubits = 1;
  Config reference_cfg = 0;
  std::vector<RotationGate> gates;

  void append(const PauliTerm& p, double angle) {
    require_same_qubits(n_qubits, p.n_qubits());
    if (p.phase() != Phase::one()) throw std::invalid_argument("AnsatzProgram: generator phase must be +1");
    if (p.is_identity()) throw std::invalid_argument("AnsatzProgram: generator must act on at least one qubit");
    if (!std::isfinite(angle)) throw std::invalid_argument("AnsatzProgram: angle must be finite");
    gates.push_back({p, angle});
  }
};

// ---------------------------------------------------------------------------
// Statevector

class StateVector {
 public:
  StateVector(int n_qubits, std::vector<cplx> amplitudes) : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != (std::size_t{1} << n_qubits)) throw std::invalid_argument("StateVector: wrong dimension");
  }

  static StateVector basis(int n_qubits, Config cfg) {
    if (n_qubits > 30) throw std::invalid_argument("StateVector: too many qubits for a dense vector");
    std::vector<cplx> a(std::size_t{1} << n_qubits, 0.0);
    a.at(cfg) = 1.0;
    return StateVector(n_qubits, std::move(a));
  }

  static StateVector from_sparse(const SparseStateVec& v) {
    std::vector<cplx> a(std::size_t{1} << v.n_qubits(), 0.0);
    for (const auto& [cfg, amp] : v.entries()) a[cfg] = amp;
    return StateVector(v.n_qubits(), std::move(a));
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }
  cplx operator[](Config cfg) const { return amps_[cfg]; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
  }

 private:
  int n_qubits_;
  std::vector<cplx> amps_;
};

namespace detail {

/// The four possible scalars i^k of a term on a basis state, indexed by k.
inline const std::array<cplx, 4>& phase_table() {
  static const std::array<cplx, 4> t{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  return t;
}

/// Exponent k with P|cfg> = i^k |cfg ^ x>.
inline int term_power(const PauliTerm& p, Config cfg) {
  return (p.phase().power() + popcount(p.x_mask() & p.z_mask()) + 2 * popcount(p.z_mask() & cfg)) & 3;
}

/// Highest set bit of a nonzero mask: cfg < cfg ^ x iff this bit is clear in cfg.
inline Config pivot_bit(std::uint64_t x) { return std::uint64_t{1} << (63 - std::countl_zero(x)); }

}  // namespace detail

/// P|psi>.
inline StateVector apply_pauli(const StateVector& state, const PauliTerm& p) {
  require_same_qubits(state.n_qubits(), p.n_qubits());
  const auto& tab = detail::phase_table();
  std::vector<cplx> out(state.dim());
  for (Config cfg = 0; cfg < state.dim(); ++cfg) out[cfg ^ p.x_mask()] = tab[detail::term_power(p, cfg)] * state[cfg];
  return StateVector(state.n_qubits(), std::move(out));
}

/// H|psi>.
inline StateVector apply_pauli_sum(const StateVector& state, const PauliSum& h) {
  require_same_qubits(state.n_qubits(), h.n_qubits());
  const auto& tab = detail::phase_table();
  std::vector<cplx> out(state.dim(), 0.0);
  for (const auto& e : h.entries())
    for (Config cfg = 0; cfg < state.dim(); ++cfg)
      out[cfg ^ e.term.x_mask()] += e.coeff * tab[detail::term_power(e.term, cfg)] * state[cfg];
  return StateVector(state.n_qubits(), std::move(out));
}

/// psi <- cos(theta) psi + i sin(theta) P psi, in a single pass over (cfg, cfg ^ x) pairs.
inline void apply_pauli_rotation(StateVector& state, const PauliTerm& p, double theta) {
  require_same_qubits(state.n_qubits(), p.n_qubits());
  if (p.phase() != Phase::one()) throw std::invalid_argument("apply_pauli_rotation: generator phase must be +1");
  const auto& tab = detail::phase_table();
  const cplx c = std::cos(theta);
  const cplx is = cplx(0.0, std::sin(theta));
  auto& a = state.amplitudes();
  const std::uint64_t x = p.x_mask();
  if (x == 0) {
    for (Config cfg = 0; cfg < a.size(); ++cfg) a[cfg] *= c + is * tab[detail::term_power(p, cfg)];
    return;
  }
  const Config pivot = detail::pivot_bit(x);
  for (Config cfg = 0; cfg < a.size(); ++cfg) {
    if (cfg & pivot) continue;
    const Config partner = cfg ^ x;
    const cplx lo = a[cfg], hi = a[partner];
    a[cfg] = c * lo + is * tab[detail::term_power(p, partner)] * hi;
    a[partner] = c * hi + is * tab[detail::term_power(p, cfg)] * lo;
  }
}

inline StateVector prepare_state(const AnsatzProgram& program) {
  StateVector s = StateVector::basis(program.n_qubits, program.reference_cfg);
  for (const auto& g : program.gates) apply_pauli_rotation(s, g.pauli, g.angle);
  return s;
}

/// <psi|H|psi> for Hermitian H.
inline double exact_expectation(const StateVector& state, const PauliSum& h) {
  require_same_qubits(state.n_qubits(), h.n_qubits());
  if (!h.is_hermitian()) throw std::invalid_argument("exact_expectation: operator is not Hermitian");
  const auto& tab = detail::phase_table();
  cplx total = 0.0;
  for (const auto& e : h.entries()) {
    cplx acc = 0.0;
    for (Config cfg = 0; cfg < state.dim(); ++cfg)
      acc += std::conj(state[cfg ^ e.term.x_mask()]) * tab[detail::term_power(e.term, cfg)] * state[cfg];
    total += e.coeff * acc;
  }
  if (std::abs(total.imag()) > 1e-9) throw std::logic_error("exact_expectation: non-real expectation value");
  return total.real();
}

// ---------------------------------------------------------------------------
// Sampling

struct SampleTable {
  std::uint64_t total_shots = 0;
  std::map<Config, std::uint64_t> counts;

  /// f_i = n_i / N_s.
  std::map<Config, double> frequencies() const {
    std::map<Config, double> f;
    for (const auto& [cfg, n] : counts) f[cfg] = static_cast<double>(n) / static_cast<double>(total_shots);
    return f;
  }
};

/// Cumulative-weight inversion over an (unnormalized, nonnegative) weight vector.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& weights) : cumulative_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += std::max(weights[i], 0.0);
      cumulative_[i] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("DiscreteSampler: weights sum to zero");
  }

  Config draw(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<Config>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

inline SampleTable sample(const StateVector& state, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw std::invalid_argument("sample: shot count must be positive");
  const DiscreteSampler sampler(state.probabilities());
  SampleTable t;
  t.total_shots = shots;
  for (std::uint64_t s = 0; s < shots; ++s) ++t.counts[sampler.draw(rng)];
  return t;
}

// ---------------------------------------------------------------------------
// Density matrix

class DensityMatrix {
 public:
  static constexpr int kDefaultQubitGuard = 12;

  static DensityMatrix basis(int n_qubits, Config cfg, int guard = kDefaultQubitGuard) {
    DensityMatrix rho(n_qubits, guard);
    rho.at(cfg, cfg) = 1.0;
    return rho;
  }

  static DensityMatrix from_pure(const StateVector& s, int guard = kDefaultQubitGuard) {
    DensityMatrix rho(s.n_qubits(), guard);
    for (std::size_t i = 0; i < rho.dim_; ++i)
      for (std::size_t j = 0; j < rho.dim_; ++j) rho.at(i, j) = s[i] * std::conj(s[j]);
    return rho;
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return dim_; }
  cplx& at(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  cplx at(std::size_t row, std::size_t col) const { return data_[row * dim_ + col]; }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += at(i, i);
    return t;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) d[i] = at(i, i).real();
    return d;
  }

  double hermiticity_error() const {
    double e = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) e = std::max(e, std::abs(at(i, j) - std::conj(at(j, i))));
    return e;
  }

  double frobenius_distance(const DensityMatrix& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("frobenius_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k) s += std::norm(data_[k] - o.data_[k]);
    return std::sqrt(s);
  }

  /// rho <- U rho U^dagger with U = exp(i theta P).
  void rotate(const PauliTerm& p, double theta) {
    require_same_qubits(n_qubits_, p.n_qubits());
    if (p.phase() != Phase::one()) throw std::invalid_argument("DensityMatrix::rotate: generator phase must be +1");
    const auto& tab = detail::phase_table();
    const cplx c = std::cos(theta);
    const cplx is = cplx(0.0, std::sin(theta));
    const std::uint64_t x = p.x_mask();
    std::vector<cplx> row_factor(dim_);  // i sin * <b ^ x|P|b>
    for (Config b = 0; b < dim_; ++b) row_factor[b] = is * tab[detail::term_power(p, b)];

    if (x == 0) {
      for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) at(i, j) *= (c + row_factor[i]) * std::conj(c + row_factor[j]);
      return;
    }
    const Config pivot = detail::pivot_bit(x);
    // Left: rows r, r ^ x.
    for (std::size_t r = 0; r < dim_; ++r) {
      if (r & pivot) continue;
      const std::size_t partner = r ^ x;
      cplx* lo = &data_[r * dim_];
      cplx* hi = &data_[partner * dim_];
      const cplx f_lo = row_factor[partner], f_hi = row_factor[r];
      for (std::size_t j = 0; j < dim_; ++j) {
        const cplx a = lo[j], b = hi[j];
        lo[j] = c * a + f_lo * b;
        hi[j] = c * b + f_hi * a;
      }
    }
    // Right (U^dagger): columns j, j ^ x with conjugated factors.
    for (std::size_t i = 0; i < dim_; ++i) {
      cplx* row = &data_[i * dim_];
      for (std::size_t j = 0; j < dim_; ++j) {
        if (j & pivot) continue;
        const std::size_t partner = j ^ x;
        const cplx a = row[j], b = row[partner];
        row[j] = c * a + std::conj(row_factor[partner]) * b;
        row[partner] = c * b + std::conj(row_factor[j]) * a;
      }
    }
  }

  /// D_q(p): rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)
  ///            = (1 - 4p/3) rho + (4p/3) Tr_q(rho) (x) I/2.
  void depolarize(int qubit, double p) {
    if (qubit < 0 || qubit >= n_qubits_) throw std::invalid_argument("depolarize: qubit out of range");
    if (p == 0.0) return;
    const std::size_t m = std::size_t{1} << qubit;
    const double keep = 1.0 - 4.0 * p / 3.0;
    const double mix = 2.0 * p / 3.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (i & m) continue;
      for (std::size_t j = 0; j < dim_; ++j) {
        if (j & m) {
          at(i, j) *= keep;                 // off-diagonal block (0,1)
          at(i | m, j & ~m) *= keep;        // off-diagonal block (1,0)
        } else {
          const cplx a = at(i, j), b = at(i | m, j | m);
          const cplx avg = mix * (a + b);
          at(i, j) = keep * a + avg;
          at(i | m, j | m) = keep * b + avg;
        }
      }
    }
  }

 private:
  DensityMatrix(int n_qubits, int guard) : n_qubits_(n_qubits), dim_(std::size_t{1} << n_qubits) {
    if (n_qubits > guard) throw std::invalid_argument("DensityMatrix: qubit count exceeds density-matrix guard");
    data_.assign(dim_ * dim_, 0.0);
  }

  int n_qubits_;
  std::size_t dim_;
  std::vector<cplx> data_;
};

/// Executes U (fold 1) or U U^dagger U (fold 3) from |reference><reference|,
/// applying single-qubit depolarizing noise to every qubit a rotation touches.
inline DensityMatrix run_noisy(const AnsatzProgram& program, const NoiseModel& noise, int fold_factor,
                               int qubit_guard = DensityMatrix::kDefaultQubitGuard) {
  if (fold_factor != 1 && fold_factor != 3) throw std::invalid_argument("run_noisy: fold factor must be 1 or 3");
  DensityMatrix rho = DensityMatrix::basis(program.n_qubits, program.reference_cfg, qubit_guard);

  auto apply = [&](const RotationGate& g, double angle) {
    rho.rotate(g.pauli, angle);
    if (noise.p_2q == 0.0) return;
    const int w = g.pauli.weight();
    double p = 0.0;
    if (w == 1) return;  // single-qubit rotations are treated as noiseless
    if (w == 2)
      p = noise.p_two_qubit_rotation();
    else if (w == 4)
      p = noise.p_four_qubit_rotation();
    else
      throw std::invalid_argument("run_noisy: unsupported Pauli weight " + std::to_string(w));
    const std::uint64_t support = g.pauli.x_mask() | g.pauli.z_mask();
    for (int q = 0; q < program.n_qubits; ++q)
      if ((support >> q) & 1U) rho.depolarize(q, p);
  };

  for (const auto& g : program.gates) apply(g, g.angle);
  if (fold_factor == 3) {
    for (auto it = program.gates.rbegin(); it != program.gates.rend(); ++it) apply(*it, -it->angle);
    for (const auto& g : program.gates) apply(g, g.angle);
  }
  return rho;
}

/// Flips each of the n bits independently with probability p_m (no draws when p_m = 0).
inline Config apply_readout_noise(Config cfg, int n_qubits, double p_m, Rng& rng) {
  if (p_m > 0.0)
    for (int q = 0; q < n_qubits; ++q)
      if (uniform01(rng) < p_m) cfg ^= Config{1} << q;
  return cfg;
}

/// Draws from diag(rho), then flips each bit independently with probability p_m.
inline SampleTable sample_noisy(const DensityMatrix& rho, double p_m, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw std::invalid_argument("sample_noisy: shot count must be positive");
  if (!(p_m >= 0.0 && p_m <= 1.0)) throw std::invalid_argument("sample_noisy: p_m must lie in [0, 1]");
  const auto diag = rho.diagonal();
  for (double d : diag)
    if (d < -1e-9) throw std::runtime_error("sample_noisy: negative population in density matrix");
  const DiscreteSampler sampler(diag);
  SampleTable t;
  t.total_shots = shots;
  for (std::uint64_t s = 0; s < shots; ++s) ++t.counts[apply_readout_noise(sampler.draw(rng), rho.n_qubits(), p_m, rng)];
  return t;
}

/// Readout of a prepared basis state through the bit-flip channel only.
inline SampleTable sample_basis_readout(Config cfg, int n_qubits, double p_m, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw std::invalid_argument("sample_basis_readout: shot count must be positive");
  SampleTable t;
  t.total_shots = shots;
  for (std::uint64_t s = 0; s < shots; ++s) ++t.counts[apply_readout_noise(cfg, n_qubits, p_m, rng)];
  return t;
}

}  // namespace aqsci
