#include <gtest/gtest.h>

#include "adapt_qsci/adapt.hpp"
#include "adapt_qsci/chem.hpp"
#include "adapt_qsci/resources.hpp"
#include "oracle.hpp"

using namespace aqsci;

namespace {

const std::string kH4 = std::string(ADAPT_QSCI_FIXTURE_DIR) + "/h4_sto3g.fcidump";

const MolecularSystem& h4() {
  static const MolecularSystem s = build_molecular_hamiltonian(parse_fcidump(kH4));
  return s;
}

PauliTerm t(int n, const char* s) { return PauliTerm::parse(n, s); }

/// Dense oracle: (sum_g sqrt(Var_g))^2 / eps^2 for a given partition.
double dense_shots(const MeasurementGrouping& grouping, int n, const oracle::Vec& psi, double eps) {
  double root_sum = 0;
  for (const auto& g : grouping.groups) {
    oracle::Mat o = oracle::Mat::Zero(std::int64_t{1} << n, std::int64_t{1} << n);
    for (const auto& e : g) o += e.coeff * oracle::dense(e.term);
    const double mean = (psi.adjoint() * o * psi)(0, 0).real();
    const double second = (psi.adjoint() * o * o * psi)(0, 0).real();
    root_sum += std::sqrt(std::max(second - mean * mean, 0.0));
  }
  return root_sum * root_sum / (eps * eps);
}

}  // namespace

TEST(CnotCost, Examples) {
  EXPECT_EQ(cnot_cost(AnsatzProgram{4, 0b0011, {}}), (ResourceLedger{0, 0, 0}));
  AnsatzProgram p{4, 0b0011, {}};
  p.append(t(4, "X0 Y2"), 0.1);
  p.append(t(4, "X0 X1 X2 Y3"), 0.2);
  EXPECT_EQ(cnot_cost(p), (ResourceLedger{8, 14, 0}));
  EXPECT_EQ(gate_cost(t(4, "Y1 X3")), (ResourceLedger{2, 5, 0}));
  EXPECT_EQ(gate_cost(t(4, "Y0 X1 X2 X3")), (ResourceLedger{6, 9, 0}));
  EXPECT_THROW(gate_cost(t(4, "X0 X1 Y2")), std::invalid_argument);
  AnsatzProgram bad{4, 0, {}};
  bad.append(t(4, "Y3"), 0.5);
  EXPECT_THROW(cnot_cost(bad), std::invalid_argument);
}

TEST(CnotCost, AdditiveOverConcatenation) {
  const OperatorPool pool = build_pool(8);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    AnsatzProgram a{8, 0b1111, {}}, b{8, 0b1111, {}}, ab{8, 0b1111, {}};
    for (int i = 0; i < 5; ++i) {
      const PauliTerm& p = pool[rng() % pool.size()];
      a.append(p, 0.1);
      ab.append(p, 0.1);
    }
    for (int i = 0; i < 7; ++i) {
      const PauliTerm& p = pool[rng() % pool.size()];
      b.append(p, 0.2);
      ab.append(p, 0.2);
    }
    EXPECT_EQ(cnot_cost(ab), cnot_cost(a) + cnot_cost(b));
  }
}

TEST(SortedInsertion, Example) {
  const PauliSum h(2, {{2.0, t(2, "Z0 Z1")}, {1.0, t(2, "X0")}, {0.5, t(2, "Z0")}});
  const MeasurementGrouping g = sorted_insertion(h);
  ASSERT_EQ(g.groups.size(), 2U);
  ASSERT_EQ(g.groups[0].size(), 2U);
  EXPECT_EQ(g.groups[0][0].term, t(2, "Z0 Z1"));
  EXPECT_EQ(g.groups[0][1].term, t(2, "Z0"));
  ASSERT_EQ(g.groups[1].size(), 1U);
  EXPECT_EQ(g.groups[1][0].term, t(2, "X0"));
}

TEST(SortedInsertion, ExtremeCases) {
  const PauliSum commuting(3, {{1.0, t(3, "Z0 Z1")}, {0.3, t(3, "Z2")}, {0.2, t(3, "X0 X1")}, {-0.7, t(3, "Y0 Y1")}});
  EXPECT_EQ(sorted_insertion(commuting).groups.size(), 1U);
  const PauliSum anti(1, {{1.0, t(1, "X0")}, {0.5, t(1, "Y0")}, {0.25, t(1, "Z0")}});
  EXPECT_EQ(sorted_insertion(anti).groups.size(), 3U);
  const PauliSum constant(2, {{3.0, PauliTerm::parse(2, "")}});
  EXPECT_TRUE(sorted_insertion(constant).groups.empty());
}

TEST(SortedInsertion, PartitionProperties) {
  oracle::Rng rng(8);
  for (int n = 2; n <= 6; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      const PauliSum h = oracle::random_hermitian(n, 25, rng);
      const MeasurementGrouping g = sorted_insertion(h);
      std::size_t non_identity = 0;
      for (const auto& e : h.entries()) non_identity += !e.term.is_identity();
      EXPECT_EQ(g.term_count(), non_identity);
      for (const auto& grp : g.groups)
        for (std::size_t i = 0; i < grp.size(); ++i)
          for (std::size_t j = i + 1; j < grp.size(); ++j) EXPECT_TRUE(commutes(grp[i].term, grp[j].term));
      const MeasurementGrouping again = sorted_insertion(h);
      ASSERT_EQ(again.groups.size(), g.groups.size());
      for (std::size_t k = 0; k < g.groups.size(); ++k)
        for (std::size_t i = 0; i < g.groups[k].size(); ++i) EXPECT_EQ(again.groups[k][i].term, g.groups[k][i].term);
    }
}

TEST(ShotEstimate, Examples) {
  const PauliSum diag(2, {{1.0, t(2, "Z0")}, {0.4, t(2, "Z0 Z1")}});
  EXPECT_EQ(vqe_shot_estimate(diag, StateVector::basis(2, 1), 1e-3), 0.0);
  EXPECT_NEAR(vqe_shot_estimate(PauliSum(t(1, "X0")), StateVector::basis(1, 0), 1e-3), 1e6, 1e-6);
  EXPECT_THROW(vqe_shot_estimate(diag, StateVector::basis(2, 1), 0.0), std::invalid_argument);
}

TEST(ShotEstimate, ScalesAsInverseEpsilonSquared) {
  const MolecularSystem& sys = h4();
  const StateVector hf = StateVector::basis(8, sys.reference_cfg);
  const double n1 = vqe_shot_estimate(sys.hamiltonian, hf, 1e-3);
  const double n2 = vqe_shot_estimate(sys.hamiltonian, hf, 2e-3);
  EXPECT_GT(n1, 0.0);
  EXPECT_NEAR(n2, n1 / 4, n1 * 1e-14);
}

TEST(ShotEstimate, MatchesDenseVarianceOracle) {
  oracle::Rng rng(17);
  for (int n = 2; n <= 5; ++n) {
    const PauliSum h = oracle::random_hermitian(n, 12, rng);
    const SparseStateVec s = oracle::random_sparse(n, std::size_t{1} << (n - 1), rng);
    const ShotEstimate est = vqe_shot_estimate_detailed(h, StateVector::from_sparse(s), 1e-3);
    EXPECT_NEAR(est.shots, dense_shots(est.grouping, n, oracle::dense(s), 1e-3), 1e-6 * est.shots + 1e-6);
  }
}

TEST(ShotEstimate, H4GroundStateMagnitude) {
  const MolecularSystem& sys = h4();
  const GroundState gs = exact_ground_state(sys);
  const ShotEstimate est = vqe_shot_estimate_detailed(sys.hamiltonian, StateVector::from_sparse(gs.state), 1e-3);
  EXPECT_NEAR(est.shots, dense_shots(est.grouping, 8, oracle::dense(gs.state), 1e-3), 1e-6 * est.shots);
  EXPECT_GT(est.shots, 1.02e6 / 3);
  EXPECT_LT(est.shots, 1.02e6 * 3);
}

TEST(VqeTotal, Examples) {
  EXPECT_EQ(vqe_total_estimate(1e6, 11), 1.1e7);
  EXPECT_EQ(vqe_total_estimate(123.5, 1), 123.5);
  EXPECT_LT(vqe_total_estimate(1e6, 3), vqe_total_estimate(1e6, 4));
  EXPECT_THROW(vqe_total_estimate(1e6, 0), std::invalid_argument);
  EXPECT_THROW(vqe_total_estimate(-1.0, 2), std::invalid_argument);
}
