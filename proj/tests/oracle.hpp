#pragma once

// Brute-force dense references built from 2x2 matrices and Kronecker products.
// Nothing here goes through the bitmask kernels under test.

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "adapt_qsci/pauli.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat pauli2(char c) {
  Mat m(2, 2);
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

/// Qubit 0 is the least significant index: M = M_{n-1} (x) ... (x) M_0.
inline Mat kron_chain(const std::vector<Mat>& per_qubit) {
  Mat out = Mat::Identity(1, 1);
  for (auto it = per_qubit.rbegin(); it != per_qubit.rend(); ++it) {
    Mat next = Eigen::kroneckerProduct(out, *it).eval();
    out = std::move(next);
  }
  return out;
}

/// Factors come from the label string ("X0 Y3"), so the mask-to-letter mapping is
/// exercised through the public text form.
inline Mat dense(const aqsci::PauliTerm& t) {
  std::vector<Mat> f(t.n_qubits(), pauli2('I'));
  const std::string label = t.label();
  for (std::size_t i = 0; i < label.size();) {
    if (label[i] == ' ') {
      ++i;
      continue;
    }
    const char op = label[i];
    std::size_t j = i + 1;
    while (j < label.size() && label[j] != ' ') ++j;
    if (op != 'I') f[std::stoi(label.substr(i + 1, j - i - 1))] = pauli2(op);
    i = j;
  }
  return t.phase().value() * kron_chain(f);
}

inline Mat dense(const aqsci::PauliSum& h) {
  const auto d = std::size_t{1} << h.n_qubits();
  Mat m = Mat::Zero(d, d);
  for (const auto& e : h.entries()) m += e.coeff * dense(e.term);
  return m;
}

inline Vec dense(const aqsci::SparseStateVec& v) {
  Vec out = Vec::Zero(std::size_t{1} << v.n_qubits());
  for (const auto& [cfg, a] : v.entries()) out(cfg) = a;
  return out;
}

/// Fermionic annihilation a_q = |0><1|_q (x) Z_{q-1} ... Z_0.
inline Mat annihilator(int q, int n) {
  std::vector<Mat> f(n, pauli2('I'));
  for (int k = 0; k < q; ++k) f[k] = pauli2('Z');
  Mat lower(2, 2);
  lower << 0, 1, 0, 0;
  f[q] = lower;
  return kron_chain(f);
}

inline Mat rotation(const aqsci::PauliTerm& p, double theta) {
  const Mat pm = dense(p);
  return std::cos(theta) * Mat::Identity(pm.rows(), pm.cols()) + cplx(0, std::sin(theta)) * pm;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Random instances

using Rng = std::mt19937_64;

inline aqsci::PauliTerm random_term(int n, Rng& rng, bool unit_phase = false) {
  std::uniform_int_distribution<std::uint64_t> mask(0, (std::uint64_t{1} << n) - 1);
  std::uniform_int_distribution<int> ph(0, 3);
  const int p = unit_phase ? 2 * (ph(rng) % 2) : ph(rng);
  aqsci::Phase phase = aqsci::Phase::one();
  for (int k = 0; k < p; ++k) phase = phase * aqsci::Phase::i();
  return aqsci::PauliTerm(n, mask(rng), mask(rng), phase);
}

inline aqsci::PauliSum random_hermitian(int n, int n_terms, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<cplx, aqsci::PauliTerm>> terms;
  for (int k = 0; k < n_terms; ++k) {
    const aqsci::PauliTerm t = random_term(n, rng);
    terms.emplace_back(u(rng), aqsci::PauliTerm(n, t.x_mask(), t.z_mask()));
  }
  return aqsci::PauliSum(n, terms);
}

inline aqsci::SparseStateVec random_sparse(int n, std::size_t support, Rng& rng) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::uint64_t> cfg(0, (std::uint64_t{1} << n) - 1);
  std::vector<std::pair<aqsci::Config, cplx>> e;
  double norm = 0.0;
  std::vector<bool> used(std::size_t{1} << n, false);
  while (e.size() < support) {
    const auto c = cfg(rng);
    if (used[c]) continue;
    used[c] = true;
    const cplx a(g(rng), g(rng));
    norm += std::norm(a);
    e.emplace_back(c, a);
  }
  for (auto& [c, a] : e) a /= std::sqrt(norm);
  return aqsci::SparseStateVec(n, e);
}

inline Mat random_hermitian_matrix(int d, Rng& rng) {
  std::normal_distribution<double> g;
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

}  // namespace oracle
