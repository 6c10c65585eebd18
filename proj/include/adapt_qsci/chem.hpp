#pragma once

// Molecular Hamiltonian ingestion: FCIDUMP integrals mapped through
// Jordan-Wigner, or qubit Hamiltonians stored as JSON.
//
// Spin-orbital layout interleaves spins: MO i spin up -> qubit 2i, MO i spin
// down -> qubit 2i+1. Occupied spin-orbital <=> bit set.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adapt_qsci/errors.hpp"
#include "adapt_qsci/pauli.hpp"

namespace aqsci {

/// Electron count and twice the S_z of a configuration.
struct SectorLabel {
  int n_electrons = 0;
  int sz_doubled = 0;
  bool operator==(const SectorLabel&) const = default;
};

/// Up spins live on even qubits, down spins on odd qubits.
inline SectorLabel symmetry_of(Config cfg, int n_qubits) {
  if ((cfg & ~qubit_mask(n_qubits)) != 0) throw std::out_of_range("symmetry_of: configuration exceeds qubit count");
  constexpr std::uint64_t kEven = 0x5555555555555555ULL;
  const int up = popcount(cfg & kEven);
  const int down = popcount(cfg & ~kEven);
  return {up + down, up - down};
}

struct MolecularSystem {
  int n_qubits = 0;
  PauliSum hamiltonian;
  int n_electrons = 0;
  int sz_doubled = 0;
  Config reference_cfg = 0;

  SectorLabel sector() const { return {n_electrons, sz_doubled}; }
  bool in_sector(Config cfg) const { return symmetry_of(cfg, n_qubits) == sector(); }

  /// Throws InputError when the metadata is inconsistent.
  void validate() const {
    if (n_qubits <= 0 || n_qubits % 2 != 0) throw InputError("MolecularSystem: qubit count must be positive and even");
    if (hamiltonian.n_qubits() != n_qubits) throw InputError("MolecularSystem: Hamiltonian qubit count mismatch");
    if (!hamiltonian.is_hermitian()) throw InputError("MolecularSystem: Hamiltonian is not Hermitian");
    if ((reference_cfg & ~qubit_mask(n_qubits)) != 0) throw InputError("MolecularSystem: reference exceeds qubit count");
    if (symmetry_of(reference_cfg, n_qubits) != sector())
      throw InputError("MolecularSystem: reference configuration does not match electron count / S_z");
  }
};

/// Lowest-energy-style reference: n_up up spins on the lowest even qubits, n_down
/// down spins on the lowest odd qubits.
inline Config hartree_fock_reference(int n_qubits, int n_electrons, int sz_doubled) {
  if (n_electrons < 0 || n_electrons > n_qubits) throw InputError("electron count exceeds spin-orbital count");
  if ((n_electrons + sz_doubled) % 2 != 0 || std::abs(sz_doubled) > n_electrons)
    throw InputError("inconsistent electron count and MS2");
  const int n_up = (n_electrons + sz_doubled) / 2;
  const int n_down = (n_electrons - sz_doubled) / 2;
  if (n_up > n_qubits / 2 || n_down > n_qubits / 2) throw InputError("spin occupation exceeds orbital count");
  Config cfg = 0;
  for (int i = 0; i < n_up; ++i) cfg |= Config{1} << (2 * i);
  for (int i = 0; i < n_down; ++i) cfg |= Config{1} << (2 * i + 1);
  return cfg;
}

// ---------------------------------------------------------------------------
// Fermion operators and Jordan-Wigner

struct Ladder {
  int mode = 0;
  bool dagger = false;
};

/// Sum of coefficient * (product of ladder operators, left to right).
struct FermionOp {
  std::vector<std::pair<cplx, std::vector<Ladder>>> terms;

  FermionOp& add(cplx coeff, std::vector<Ladder> ops) {
    terms.emplace_back(coeff, std::move(ops));
    return *this;
  }
};

/// a_q = (X_q + iY_q)/2 Z_{q-1}...Z_0, a_q^dagger = (X_q - iY_q)/2 Z_{q-1}...Z_0.
inline PauliSum jordan_wigner_ladder(Ladder op, int n_qubits) {
  if (op.mode < 0 || op.mode >= n_qubits) throw std::invalid_argument("jordan_wigner: mode index overflow");
  const std::uint64_t bit = std::uint64_t{1} << op.mode;
  const std::uint64_t string = bit - 1;
  const PauliTerm x(n_qubits, bit, string);
  const PauliTerm y(n_qubits, bit, bit | string);
  return PauliSum(n_qubits, {{0.5, x}, {cplx(0.0, op.dagger ? -0.5 : 0.5), y}});
}

inline PauliSum jordan_wigner(const FermionOp& f, int n_qubits) {
  std::vector<PauliSum> annihilate, create;
  for (int q = 0; q < n_qubits; ++q) {
    annihilate.push_back(jordan_wigner_ladder({q, false}, n_qubits));
    create.push_back(jordan_wigner_ladder({q, true}, n_qubits));
  }
  PauliSum::Accumulator acc(n_qubits);
  for (const auto& [coeff, ops] : f.terms) {
    PauliSum prod(PauliTerm::identity(n_qubits), coeff);
    for (const auto& op : ops) {
      if (op.mode < 0 || op.mode >= n_qubits) throw std::invalid_argument("jordan_wigner: mode index overflow");
      prod = prod * (op.dagger ? create[op.mode] : annihilate[op.mode]);
      if (prod.empty()) break;
    }
    acc.add(prod);
  }
  return std::move(acc).build();
}

// ---------------------------------------------------------------------------
// FCIDUMP

/// Spatial-orbital integrals in chemist notation, all symmetry images filled.
struct Integrals {
  int n_orbitals = 0;
  int n_electrons = 0;
  int ms2 = 0;
  double core_energy = 0.0;
  std::vector<double> one_body;  // h[p * n + q]
  std::vector<double> two_body;  // (pq|rs) at ((p * n + q) * n + r) * n + s

  double h(int p, int q) const { return one_body[static_cast<std::size_t>(p) * n_orbitals + q]; }
  double eri(int p, int q, int r, int s) const {
    const std::size_t n = n_orbitals;
    return two_body[((p * n + q) * n + r) * n + s];
  }

  static Integrals zeros(int n_orbitals, int n_electrons, int ms2) {
    Integrals ints;
    ints.n_orbitals = n_orbitals;
    ints.n_electrons = n_electrons;
    ints.ms2 = ms2;
    const std::size_t n = n_orbitals;
    ints.one_body.assign(n * n, 0.0);
    ints.two_body.assign(n * n * n * n, 0.0);
    return ints;
  }
};

namespace detail {

inline std::optional<long> namelist_int(const std::string& header, const std::string& key) {
  std::size_t pos = 0;
  while ((pos = header.find(key, pos)) != std::string::npos) {
    const bool boundary = pos == 0 || !std::isalnum(static_cast<unsigned char>(header[pos - 1]));
    std::size_t p = pos + key.size();
    while (p < header.size() && header[p] == ' ') ++p;
    if (boundary && p < header.size() && header[p] == '=') {
      ++p;
      while (p < header.size() && header[p] == ' ') ++p;
      std::size_t end = p;
      if (end < header.size() && (header[end] == '-' || header[end] == '+')) ++end;
      while (end < header.size() && std::isdigit(static_cast<unsigned char>(header[end]))) ++end;
      if (end == p) throw InputError("FCIDUMP: malformed value for " + key);
      return std::stol(header.substr(p, end - p));
    }
    pos += key.size();
  }
  return std::nullopt;
}

inline double parse_fortran_double(std::string token) {
  for (char& c : token)
    if (c == 'D' || c == 'd') c = 'E';
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw InputError("FCIDUMP: malformed number '" + token + "'");
  }
  if (used != token.size()) throw InputError("FCIDUMP: malformed number '" + token + "'");
  return v;
}

class SymmetricFiller {
 public:
  explicit SymmetricFiller(std::vector<double>& target) : target_(target), set_(target.size(), false) {}
  void put(std::size_t idx, double v) {
    if (set_[idx] && std::abs(target_[idx] - v) > 1e-8)
      throw InputError("FCIDUMP: symmetry-equivalent records disagree");
    target_[idx] = v;
    set_[idx] = true;
  }

 private:
  std::vector<double>& target_;
  std::vector<bool> set_;
};

}  // namespace detail

inline Integrals parse_fcidump_stream(std::istream& in) {
  std::string header, line;
  bool closed = false;
  while (std::getline(in, line)) {
    header += line;
    header += ' ';
    std::string upper = line;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper.find("&END") != std::string::npos || upper.find('/') != std::string::npos) {
      closed = true;
      break;
    }
  }
  if (!closed) throw InputError("FCIDUMP: header not terminated by &END");
  for (char& c : header) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (header.find("&FCI") == std::string::npos) throw InputError("FCIDUMP: missing &FCI namelist");
  const auto norb = detail::namelist_int(header, "NORB");
  const auto nelec = detail::namelist_int(header, "NELEC");
  if (!norb || !nelec) throw InputError("FCIDUMP: header lacks NORB or NELEC");
  if (*norb <= 0 || *norb > 32) throw InputError("FCIDUMP: NORB out of supported range");
  if (*nelec < 0 || *nelec > 2 * *norb) throw InputError("FCIDUMP: NELEC inconsistent with NORB");
  const int ms2 = static_cast<int>(detail::namelist_int(header, "MS2").value_or(0));

  Integrals ints = Integrals::zeros(static_cast<int>(*norb), static_cast<int>(*nelec), ms2);
  const std::size_t n = ints.n_orbitals;
  detail::SymmetricFiller one(ints.one_body), two(ints.two_body);
  auto eri_index = [n](std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    return ((p * n + q) * n + r) * n + s;
  };

  std::string value_token;
  long i = 0, j = 0, k = 0, l = 0;
  while (in >> value_token) {
    if (!(in >> i >> j >> k >> l)) throw InputError("FCIDUMP: truncated integral record");
    const double v = detail::parse_fortran_double(value_token);
    for (long idx : {i, j, k, l})
      if (idx < 0 || idx > static_cast<long>(n)) throw InputError("FCIDUMP: orbital index out of range");
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.core_energy = v;
    } else if (k == 0 && l == 0) {
      if (i == 0 || j == 0) {
        if (j == 0 && i > 0) continue;  // orbital energy record
        throw InputError("FCIDUMP: malformed one-electron record");
      }
      one.put((i - 1) * n + (j - 1), v);
      one.put((j - 1) * n + (i - 1), v);
    } else {
      if (i == 0 || j == 0 || k == 0 || l == 0) throw InputError("FCIDUMP: malformed two-electron record");
      const std::size_t p = i - 1, q = j - 1, r = k - 1, s = l - 1;
      for (auto [a, b, c, d] : {std::array{p, q, r, s}, std::array{q, p, r, s}, std::array{p, q, s, r},
                                std::array{q, p, s, r}, std::array{r, s, p, q}, std::array{s, r, p, q},
                                std::array{r, s, q, p}, std::array{s, r, q, p}})
        two.put(eri_index(a, b, c, d), v);
    }
  }
  if (!in.eof()) throw InputError("FCIDUMP: malformed integral record");
  return ints;
}

inline Integrals parse_fcidump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open FCIDUMP file: " + path);
  return parse_fcidump_stream(in);
}

/// Second-quantized spin-orbital Hamiltonian in chemist notation,
///   H = E0 + sum_{pq,s} h_pq a+_{ps} a_{qs}
///          + 1/2 sum_{pqrs,st} (pq|rs) a+_{ps} a+_{rt} a_{st} a_{qs},
/// mapped through Jordan-Wigner.
inline MolecularSystem build_molecular_hamiltonian(const Integrals& ints) {
  const int norb = ints.n_orbitals;
  const int nq = 2 * norb;
  if (ints.n_electrons > nq) throw InputError("electron count exceeds spin-orbital count");

  std::vector<PauliSum> a, ad;
  for (int q = 0; q < nq; ++q) {
    a.push_back(jordan_wigner_ladder({q, false}, nq));
    ad.push_back(jordan_wigner_ladder({q, true}, nq));
  }
  auto so = [](int orbital, int spin) { return 2 * orbital + spin; };

  PauliSum::Accumulator acc(nq);
  acc.add(ints.core_energy, PauliTerm::identity(nq));
  for (int p = 0; p < norb; ++p)
    for (int q = 0; q < norb; ++q) {
      const double v = ints.h(p, q);
      if (v == 0.0) continue;
      for (int s = 0; s < 2; ++s) acc.add(ad[so(p, s)] * a[so(q, s)], v);
    }

  // Pair products a+_P a+_R and a_S a_Q reused across the integral loop.
  std::vector<PauliSum> create_pair(static_cast<std::size_t>(nq) * nq), destroy_pair(static_cast<std::size_t>(nq) * nq);
  for (int x = 0; x < nq; ++x)
    for (int y = 0; y < nq; ++y) {
      if (x == y) continue;
      create_pair[x * nq + y] = ad[x] * ad[y];
      destroy_pair[x * nq + y] = a[x] * a[y];
    }
  for (int p = 0; p < norb; ++p)
    for (int q = 0; q < norb; ++q)
      for (int r = 0; r < norb; ++r)
        for (int s = 0; s < norb; ++s) {
          const double v = ints.eri(p, q, r, s);
          if (v == 0.0) continue;
          for (int sig = 0; sig < 2; ++sig)
            for (int tau = 0; tau < 2; ++tau) {
              const int P = so(p, sig), Q = so(q, sig), R = so(r, tau), S = so(s, tau);
              if (P == R || S == Q) continue;
              acc.add(create_pair[P * nq + R] * destroy_pair[S * nq + Q], 0.5 * v);
            }
        }

  MolecularSystem sys;
  sys.n_qubits = nq;
  sys.hamiltonian = std::move(acc).build();
  sys.n_electrons = ints.n_electrons;
  sys.sz_doubled = ints.ms2;
  sys.reference_cfg = hartree_fock_reference(nq, ints.n_electrons, ints.ms2);
  // Folding leaves ~1e-17 imaginary residue from the ladder algebra.
  PauliSum::Accumulator real_part(nq);
  for (const auto& e : sys.hamiltonian.entries()) {
    if (std::abs(e.coeff.imag()) > 1e-10) throw AlgorithmError("built Hamiltonian is not Hermitian");
    real_part.add(e.coeff.real(), e.term);
  }
  sys.hamiltonian = std::move(real_part).build();
  sys.validate();
  return sys;
}

// ---------------------------------------------------------------------------
// Qubit-Hamiltonian JSON
//
// {
//   "metadata": {"n_qubits": 4, "n_electrons": 2, "sz_doubled": 0, "reference_cfg": 3},
//   "terms": [{"coefficient": -0.5, "pauli": "Z0 Z1"}, {"coefficient": [0.0, 0.0], "pauli": ""}]
// }
// A coefficient is a number or a [real, imag] pair; "" or "I" is the identity.

inline MolecularSystem qubit_hamiltonian_from_json(const nlohmann::json& doc) {
  try {
    const auto& meta = doc.at("metadata");
    MolecularSystem sys;
    sys.n_qubits = meta.at("n_qubits").get<int>();
    sys.n_electrons = meta.at("n_electrons").get<int>();
    sys.sz_doubled = meta.at("sz_doubled").get<int>();
    if (sys.n_qubits <= 0 || sys.n_qubits > 64) throw InputError("qubit Hamiltonian: n_qubits out of range");
    sys.reference_cfg = meta.contains("reference_cfg")
                            ? meta.at("reference_cfg").get<Config>()
                            : hartree_fock_reference(sys.n_qubits, sys.n_electrons, sys.sz_doubled);
    PauliSum::Accumulator acc(sys.n_qubits);
    for (const auto& t : doc.at("terms")) {
      const auto& c = t.at("coefficient");
      cplx coeff = c.is_array() ? cplx(c.at(0).get<double>(), c.at(1).get<double>()) : cplx(c.get<double>(), 0.0);
      acc.add(coeff, PauliTerm::parse(sys.n_qubits, t.at("pauli").get<std::string>()));
    }
    sys.hamiltonian = std::move(acc).build();
    sys.validate();
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("qubit Hamiltonian: ") + e.what());
  }
}

inline MolecularSystem parse_qubit_hamiltonian(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open qubit Hamiltonian file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("qubit Hamiltonian " + path + ": " + e.what());
  }
  return qubit_hamiltonian_from_json(doc);
}

inline nlohmann::json qubit_hamiltonian_to_json(const MolecularSystem& sys) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& e : sys.hamiltonian.entries()) {
    nlohmann::json coeff = e.coeff.imag() == 0.0 ? nlohmann::json(e.coeff.real())
                                                 : nlohmann::json::array({e.coeff.real(), e.coeff.imag()});
    terms.push_back({{"coefficient", coeff}, {"pauli", e.term.is_identity() ? std::string() : e.term.label()}});
  }
  return {{"metadata",
           {{"n_qubits", sys.n_qubits},
            {"n_electrons", sys.n_electrons},
            {"sz_doubled", sys.sz_doubled},
            {"reference_cfg", sys.reference_cfg}}},
          {"terms", terms}};
}

enum class HamiltonianFormat { kFcidump, kQubitJson };

inline MolecularSystem load_system(const std::string& path, HamiltonianFormat format) {
  if (format == HamiltonianFormat::kFcidump) return build_molecular_hamiltonian(parse_fcidump(path));
  return parse_qubit_hamiltonian(path);
}

}  // namespace aqsci
