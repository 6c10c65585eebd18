#pragma once

// Pauli-string algebra on up to 64 qubits using the symplectic (x, z) bitmask
// encoding. Qubit q is bit q of every mask and of every configuration integer.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adapt_qsci/errors.hpp"

namespace aqsci {

using cplx = std::complex<double>;

/// Computational-basis label; bit q is the occupation of spin-orbital q.
using Config = std::uint64_t;

/// Exact phase i^k, k in {0,1,2,3}.
class Phase {
 public:
  constexpr Phase() = default;
  constexpr explicit Phase(int power) : power_(static_cast<std::uint8_t>(((power % 4) + 4) % 4)) {}

  static constexpr Phase one() { return Phase(0); }
  static constexpr Phase i() { return Phase(1); }
  static constexpr Phase minus_one() { return Phase(2); }
  static constexpr Phase minus_i() { return Phase(3); }

  constexpr int power() const { return power_; }
  constexpr bool is_real() const { return (power_ & 1) == 0; }

  cplx value() const {
    switch (power_) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }

  constexpr Phase operator*(Phase o) const { return Phase(power_ + o.power_); }
  constexpr Phase conj() const { return Phase(4 - power_); }
  constexpr bool operator==(const Phase&) const = default;

 private:
  std::uint8_t power_ = 0;
};

inline int popcount(std::uint64_t v) { return std::popcount(v); }

inline std::uint64_t qubit_mask(int n_qubits) {
  return n_qubits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_qubits) - 1);
}

/// phase * (tensor product of I/X/Y/Z); Y on q iff bit q set in both masks.
class PauliTerm {
 public:
  PauliTerm() = default;
  PauliTerm(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask, Phase phase = Phase::one())
      : n_qubits_(n_qubits), x_(x_mask), z_(z_mask), phase_(phase) {
    if (n_qubits <= 0 || n_qubits > 64) throw std::invalid_argument("PauliTerm: n_qubits must be in [1, 64]");
    const auto m = qubit_mask(n_qubits);
    if ((x_mask & ~m) != 0 || (z_mask & ~m) != 0)
      throw std::invalid_argument("PauliTerm: mask exceeds qubit count");
  }

  static PauliTerm identity(int n_qubits) { return PauliTerm(n_qubits, 0, 0); }

  /// Single-qubit factor builder: op is one of 'I', 'X', 'Y', 'Z'.
  static PauliTerm single(int n_qubits, int qubit, char op) {
    if (qubit < 0 || qubit >= n_qubits) throw std::invalid_argument("PauliTerm: qubit index out of range");
    const std::uint64_t b = std::uint64_t{1} << qubit;
    switch (op) {
      case 'I': return identity(n_qubits);
      case 'X': return PauliTerm(n_qubits, b, 0);
      case 'Y': return PauliTerm(n_qubits, b, b);
      case 'Z': return PauliTerm(n_qubits, 0, b);
      default: throw std::invalid_argument(std::string("PauliTerm: unknown Pauli factor '") + op + "'");
    }
  }

  /// Parses "X0 Y3 Z5" (empty or "I" gives the identity).
  static PauliTerm parse(int n_qubits, std::string_view text);

  int n_qubits() const { return n_qubits_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  Phase phase() const { return phase_; }
  int weight() const { return popcount(x_ | z_); }
  bool is_identity() const { return x_ == 0 && z_ == 0; }

  /// The factor on qubit q: 'I', 'X', 'Y' or 'Z'.
  char factor(int q) const {
    const bool xb = (x_ >> q) & 1U;
    const bool zb = (z_ >> q) & 1U;
    return xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
  }

  PauliTerm with_phase(Phase p) const {
    PauliTerm t = *this;
    t.phase_ = p;
    return t;
  }

  /// Factors only, e.g. "X0 Y3"; the identity renders as "I".
  std::string label() const;

  bool same_string(const PauliTerm& o) const { return x_ == o.x_ && z_ == o.z_; }
  bool operator==(const PauliTerm&) const = default;

 private:
  int n_qubits_ = 1;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  Phase phase_{};
};

inline void require_same_qubits(int a, int b) {
  if (a != b) throw std::invalid_argument("qubit-count mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

// With Y = i X Z per qubit, a term is i^(phase + |x&z|) X^x Z^z, and
// (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^|z1&x2| X^(x1^x2) Z^(z1^z2).
inline PauliTerm multiply(const PauliTerm& a, const PauliTerm& b) {
  require_same_qubits(a.n_qubits(), b.n_qubits());
  const std::uint64_t x = a.x_mask() ^ b.x_mask();
  const std::uint64_t z = a.z_mask() ^ b.z_mask();
  const int power = a.phase().power() + b.phase().power() + popcount(a.x_mask() & a.z_mask()) +
                    popcount(b.x_mask() & b.z_mask()) + 2 * popcount(a.z_mask() & b.x_mask()) -
                    popcount(x & z);
  return PauliTerm(a.n_qubits(), x, z, Phase(power));
}

/// Symplectic inner product parity.
inline bool commutes(const PauliTerm& a, const PauliTerm& b) {
  require_same_qubits(a.n_qubits(), b.n_qubits());
  return (popcount((a.x_mask() & b.z_mask()) ^ (a.z_mask() & b.x_mask())) & 1) == 0;
}

/// P|cfg> = scalar |cfg ^ x_mask>, |scalar| = 1.
inline std::pair<Config, cplx> apply_term_to_basis(const PauliTerm& p, Config cfg) {
  if ((cfg & ~qubit_mask(p.n_qubits())) != 0) throw std::out_of_range("configuration exceeds qubit count");
  const int power = p.phase().power() + popcount(p.x_mask() & p.z_mask()) + 2 * popcount(p.z_mask() & cfg);
  return {cfg ^ p.x_mask(), Phase(power).value()};
}

inline std::string PauliTerm::label() const {
  std::string out;
  for (int q = 0; q < n_qubits_; ++q) {
    const char f = factor(q);
    if (f == 'I') continue;
    if (!out.empty()) out += ' ';
    out += f;
    out += std::to_string(q);
  }
  return out.empty() ? std::string("I") : out;
}

inline PauliTerm PauliTerm::parse(int n_qubits, std::string_view text) {
  PauliTerm acc = identity(n_qubits);
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    const char op = static_cast<char>(std::toupper(static_cast<unsigned char>(text[pos])));
    ++pos;
    std::size_t end = pos;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) {
      if (op == 'I') continue;
      throw InputError("malformed Pauli factor in '" + std::string(text) + "'");
    }
    const int q = std::stoi(std::string(text.substr(pos, end - pos)));
    pos = end;
    if (q >= n_qubits) throw InputError("Pauli factor index " + std::to_string(q) + " exceeds qubit count");
    if (op != 'X' && op != 'Y' && op != 'Z' && op != 'I')
      throw InputError(std::string("unknown Pauli factor '") + op + "'");
    if (acc.factor(q) != 'I') throw InputError("repeated qubit " + std::to_string(q) + " in Pauli string");
    acc = multiply(acc, single(n_qubits, q, op));
  }
  return acc;
}

/// Weighted sum of Pauli strings, unique per (x_mask, z_mask), phases folded
/// into the coefficients, sorted by (x_mask, z_mask).
class PauliSum {
 public:
  struct Entry {
    cplx coeff;
    PauliTerm term;  // phase always +1
  };

  static constexpr double kDropTolerance = 1e-12;

  PauliSum() = default;
  explicit PauliSum(int n_qubits) : n_qubits_(n_qubits) {}
  PauliSum(int n_qubits, const std::vector<std::pair<cplx, PauliTerm>>& terms) : n_qubits_(n_qubits) {
    Accumulator acc(n_qubits);
    for (const auto& [c, t] : terms) acc.add(c, t);
    *this = std::move(acc).build();
  }
  PauliSum(const PauliTerm& t, cplx coeff = 1.0) : PauliSum(t.n_qubits(), {{coeff, t}}) {}

  /// Collects (coefficient, term) pairs and folds them into a PauliSum.
  class Accumulator {
   public:
    explicit Accumulator(int n_qubits) : n_qubits_(n_qubits) {}
    void add(cplx coeff, const PauliTerm& t) {
      require_same_qubits(n_qubits_, t.n_qubits());
      map_[{t.x_mask(), t.z_mask()}] += coeff * t.phase().value();
    }
    void add(const PauliSum& s, cplx scale = 1.0) {
      require_same_qubits(n_qubits_, s.n_qubits());
      for (const auto& e : s.entries()) map_[{e.term.x_mask(), e.term.z_mask()}] += scale * e.coeff;
    }
    PauliSum build() && {
      PauliSum out(n_qubits_);
      out.entries_.reserve(map_.size());
      for (const auto& [key, c] : map_) {
        if (std::abs(c) < kDropTolerance) continue;
        out.entries_.push_back({c, PauliTerm(n_qubits_, key.first, key.second)});
      }
      std::sort(out.entries_.begin(), out.entries_.end(), [](const Entry& a, const Entry& b) {
        return std::pair(a.term.x_mask(), a.term.z_mask()) < std::pair(b.term.x_mask(), b.term.z_mask());
      });
      return out;
    }

   private:
    struct KeyHash {
      std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
        return std::hash<std::uint64_t>{}(k.first * 0x9E3779B97F4A7C15ULL ^ k.second);
      }
    };
    int n_qubits_;
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, cplx, KeyHash> map_;
  };

  int n_qubits() const { return n_qubits_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Coefficient of the string with the given masks (0 if absent).
  cplx coefficient(std::uint64_t x_mask, std::uint64_t z_mask) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair(x_mask, z_mask),
                               [](const Entry& e, const std::pair<std::uint64_t, std::uint64_t>& k) {
                                 return std::pair(e.term.x_mask(), e.term.z_mask()) < k;
                               });
    if (it != entries_.end() && it->term.x_mask() == x_mask && it->term.z_mask() == z_mask) return it->coeff;
    return 0.0;
  }
  cplx coefficient(const PauliTerm& t) const { return coefficient(t.x_mask(), t.z_mask()); }

  /// Real-coefficient check (equivalent to Hermiticity for folded sums).
  bool is_hermitian(double tol = 1e-10) const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [tol](const Entry& e) { return std::abs(e.coeff.imag()) <= tol; });
  }

  /// Coefficient of the identity string.
  double constant() const { return coefficient(0, 0).real(); }

  /// Lines of "c * X0 Y3"; real coefficients print as plain numbers.
  std::string to_string() const;

  friend PauliSum operator+(const PauliSum& a, const PauliSum& b) {
    require_same_qubits(a.n_qubits(), b.n_qubits());
    Accumulator acc(a.n_qubits());
    acc.add(a);
    acc.add(b);
    return std::move(acc).build();
  }
  friend PauliSum operator-(const PauliSum& a, const PauliSum& b) {
    require_same_qubits(a.n_qubits(), b.n_qubits());
    Accumulator acc(a.n_qubits());
    acc.add(a);
    acc.add(b, -1.0);
    return std::move(acc).build();
  }
  friend PauliSum operator*(cplx s, const PauliSum& a) {
    Accumulator acc(a.n_qubits());
    acc.add(a, s);
    return std::move(acc).build();
  }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    require_same_qubits(a.n_qubits(), b.n_qubits());
    Accumulator acc(a.n_qubits());
    for (const auto& ea : a.entries())
      for (const auto& eb : b.entries()) acc.add(ea.coeff * eb.coeff, multiply(ea.term, eb.term));
    return std::move(acc).build();
  }

  /// Exact structural equality (masks and bitwise-equal coefficients).
  bool operator==(const PauliSum& o) const {
    if (n_qubits_ != o.n_qubits_ || entries_.size() != o.entries_.size()) return false;
    for (std::size_t k = 0; k < entries_.size(); ++k)
      if (!(entries_[k].term == o.entries_[k].term) || entries_[k].coeff != o.entries_[k].coeff) return false;
    return true;
  }

  /// Equality up to an absolute coefficient tolerance.
  bool approx_equal(const PauliSum& o, double tol) const {
    if (n_qubits_ != o.n_qubits_) return false;
    const PauliSum d = *this - o;
    return std::all_of(d.entries_.begin(), d.entries_.end(),
                       [tol](const Entry& e) { return std::abs(e.coeff) <= tol; });
  }

 private:
  int n_qubits_ = 1;
  std::vector<Entry> entries_;
};

inline std::string format_coefficient(cplx c) {
  std::ostringstream os;
  os.precision(17);
  if (c.imag() == 0.0)
    os << c.real();
  else
    os << '(' << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "j)";
  return os.str();
}

inline std::string PauliSum::to_string() const {
  std::string out;
  for (const auto& e : entries_) {
    out += format_coefficient(e.coeff);
    out += " * ";
    out += e.term.label();
    out += '\n';
  }
  return out;
}

/// Returns i(HP - PH). Terms of h commuting with p drop out.
inline PauliSum commutator_i(const PauliSum& h, const PauliTerm& p) {
  require_same_qubits(h.n_qubits(), p.n_qubits());
  PauliSum::Accumulator acc(h.n_qubits());
  for (const auto& e : h.entries()) {
    if (commutes(e.term, p)) continue;
    // anticommuting: HP - PH = 2 QP
    acc.add(cplx(0.0, 2.0) * e.coeff, multiply(e.term, p));
  }
  return std::move(acc).build();
}

/// Returns P H P for a Hermitian Pauli P (phase +-1).
inline PauliSum conjugate(const PauliSum& h, const PauliTerm& p) {
  require_same_qubits(h.n_qubits(), p.n_qubits());
  if (!p.phase().is_real()) throw std::invalid_argument("conjugate: Pauli phase must be +1 or -1");
  PauliSum::Accumulator acc(h.n_qubits());
  for (const auto& e : h.entries()) acc.add(commutes(e.term, p) ? e.coeff : -e.coeff, e.term);
  return std::move(acc).build();
}

/// <bra|h|ket>.
inline cplx matrix_element(const PauliSum& h, Config bra, Config ket) {
  const Config flip = bra ^ ket;
  cplx sum = 0.0;
  for (const auto& e : h.entries()) {
    if (e.term.x_mask() != flip) continue;
    sum += e.coeff * apply_term_to_basis(e.term, ket).second;
  }
  return sum;
}

/// Sparse amplitude vector over configurations, sorted by configuration.
class SparseStateVec {
 public:
  SparseStateVec() = default;
  explicit SparseStateVec(int n_qubits) : n_qubits_(n_qubits) {}
  SparseStateVec(int n_qubits, std::vector<std::pair<Config, cplx>> entries) : n_qubits_(n_qubits) {
    std::map<Config, cplx> merged;
    const auto m = qubit_mask(n_qubits);
    for (const auto& [cfg, a] : entries) {
      if ((cfg & ~m) != 0) throw std::out_of_range("SparseStateVec: configuration exceeds qubit count");
      merged[cfg] += a;
    }
    entries_.assign(merged.begin(), merged.end());
  }

  static SparseStateVec basis(int n_qubits, Config cfg) { return SparseStateVec(n_qubits, {{cfg, 1.0}}); }

  int n_qubits() const { return n_qubits_; }
  const std::vector<std::pair<Config, cplx>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  cplx amplitude(Config cfg) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), cfg,
                               [](const std::pair<Config, cplx>& e, Config c) { return e.first < c; });
    return (it != entries_.end() && it->first == cfg) ? it->second : cplx{0.0};
  }

  double norm() const {
    double s = 0.0;
    for (const auto& e : entries_) s += std::norm(e.second);
    return std::sqrt(s);
  }

  /// P|v>.
  SparseStateVec apply(const PauliTerm& p) const {
    std::vector<std::pair<Config, cplx>> out;
    out.reserve(entries_.size());
    for (const auto& [cfg, a] : entries_) {
      auto [to, s] = apply_term_to_basis(p, cfg);
      out.emplace_back(to, s * a);
    }
    return SparseStateVec(n_qubits_, std::move(out));
  }

 private:
  int n_qubits_ = 1;
  std::vector<std::pair<Config, cplx>> entries_;
};

/// <a|h|b> by applying every term of h to the support of b.
inline cplx sparse_bracket(const SparseStateVec& a, const PauliSum& h, const SparseStateVec& b) {
  cplx sum = 0.0;
  for (const auto& e : h.entries()) {
    for (const auto& [cfg, amp] : b.entries()) {
      auto [to, s] = apply_term_to_basis(e.term, cfg);
      const cplx target = a.amplitude(to);
      if (target != 0.0) sum += std::conj(target) * e.coeff * s * amp;
    }
  }
  return sum;
}

inline void require_normalized(const SparseStateVec& v, double tol = 1e-10) {
  if (std::abs(v.norm() - 1.0) > tol) throw std::invalid_argument("state vector is not normalized");
}

/// <v|h|v> for Hermitian h and normalized v.
inline double sparse_expectation(const PauliSum& h, const SparseStateVec& v) {
  require_same_qubits(h.n_qubits(), v.n_qubits());
  if (!h.is_hermitian()) throw std::invalid_argument("sparse_expectation: operator is not Hermitian");
  require_normalized(v);
  const cplx r = sparse_bracket(v, h, v);
  if (std::abs(r.imag()) > 1e-10) throw std::logic_error("sparse_expectation: non-real expectation value");
  return r.real();
}

}  // namespace aqsci
