#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "deepmusic/array_sim.hpp"
#include "deepmusic/error.hpp"

namespace dm {
namespace {

const ArrayConfig kUla16{16, 0.5};

TEST(SteeringVector, Broadside) {
  const CVector a = steering_vector(0.0, {4, 0.5});
  for (int m = 0; m < 4; ++m) EXPECT_EQ(a(m), cdouble(1.0, 0.0));
}

TEST(SteeringVector, ThirtyDegreesIsMinusJ) {
  const CVector a = steering_vector(30.0, {2, 0.5});
  EXPECT_EQ(a(0), cdouble(1.0, 0.0));
  EXPECT_NEAR(a(1).real(), 0.0, 1e-15);
  EXPECT_NEAR(a(1).imag(), -1.0, 1e-15);
}

TEST(SteeringVector, NegativeAngleIsConjugate) {
  const CVector a = steering_vector(-30.0, {2, 0.5});
  EXPECT_NEAR(a(1).imag(), 1.0, 1e-15);
  for (double theta : {-71.3, -12.0, 5.5, 44.4, 89.0}) {
    const CVector p = steering_vector(theta, kUla16), n = steering_vector(-theta, kUla16);
    EXPECT_LT((p.conjugate() - n).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((p.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-15);
  }
}

TEST(SteeringVector, RejectsOutOfRange) {
  EXPECT_THROW(steering_vector(90.0, kUla16), Error);
  EXPECT_THROW(steering_vector(-95.0, kUla16), Error);
}

TEST(SteeringMatrix, RankMatchesDistinctAngles) {
  const std::vector<double> one{12.0};
  const CMatrix a1 = steering_matrix(one, kUla16);
  EXPECT_EQ(a1.cols(), 1);
  EXPECT_LT((a1.col(0) - steering_vector(12.0, kUla16)).norm(), 1e-15);

  const std::vector<double> two{-3.0, 40.0};
  EXPECT_EQ(oracle::numerical_rank(steering_matrix(two, {2, 0.5}), 1e-10), 2);

  const std::vector<double> five{-52.0, -31.0, -5.0, 18.0, 47.0};
  EXPECT_EQ(oracle::numerical_rank(steering_matrix(five, kUla16), 1e-10), 5);

  const std::vector<double> dup{10.0, 10.0};
  EXPECT_THROW(steering_matrix(dup, kUla16), Error);
}

TEST(IdealCovariance, NoiseOnly) {
  SourceConfig src = SourceConfig::uncorrelated({}, 1.0, 2.0);
  const CovMatrix r = ideal_covariance(src, kUla16);
  EXPECT_LT((r.data - 2.0 * CMatrix::Identity(16, 16)).norm(), 1e-15);
}

TEST(IdealCovariance, SingleNoiselessSourceHasTraceM) {
  const CovMatrix r = ideal_covariance(SourceConfig::uncorrelated({23.0}, 1.0, 0.0), kUla16);
  EXPECT_NEAR(r.data.trace().real(), 16.0, 1e-12);
  EXPECT_EQ(oracle::numerical_rank(r.data, 1e-10), 1);
}

TEST(IdealCovariance, NoiseEigenvaluesAreOne) {
  const CovMatrix r =
      ideal_covariance(SourceConfig::uncorrelated({-50.0, -20.0, 0.0, 25.0, 55.0}, 1.0, 1.0), kUla16);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r.data);
  const auto& ev = es.eigenvalues();  // ascending
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(ev(i), 1.0, 1e-10);
  for (int i = 11; i < 16; ++i) EXPECT_GT(ev(i), 1.0 + 1e-3);
  EXPECT_LT((r.data - oracle::covariance({-50.0, -20.0, 0.0, 25.0, 55.0}, CMatrix::Identity(5, 5), 1.0, 16, 0.5))
                .norm(),
            1e-10);
  EXPECT_EQ(r.data, r.data.adjoint().eval());
}

TEST(IdealCovariance, ScalesLinearly) {
  SourceConfig src = SourceConfig::uncorrelated({-10.0, 30.0}, 1.5, 0.25);
  const CovMatrix base = ideal_covariance(src, kUla16);
  src.signal_covariance *= 4.0;
  src.noise_variance *= 4.0;
  const CovMatrix scaled = ideal_covariance(src, kUla16);
  EXPECT_LT((scaled.data - 4.0 * base.data).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CorrelatedPair, Cases) {
  EXPECT_EQ(correlated_pair_covariance(1, 1, 0), CMatrix::Identity(2, 2).eval());
  const CMatrix coherent = correlated_pair_covariance(1, 1, 1);
  EXPECT_EQ(coherent, CMatrix::Ones(2, 2).eval());
  EXPECT_EQ(oracle::numerical_rank(coherent, 1e-12), 1);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(correlated_pair_covariance(1, 1, 0.5));
  EXPECT_NEAR(es.eigenvalues()(0), 0.5, 1e-15);
  EXPECT_NEAR(es.eigenvalues()(1), 1.5, 1e-15);
  EXPECT_THROW(correlated_pair_covariance(0.5, 0.5, 0.9), Error);
  EXPECT_THROW(correlated_pair_covariance(1, 1, -0.1), Error);
}

TEST(SimulateSnapshots, NoiselessSingleSourceStaysInSpan) {
  const SnapshotMatrix y = simulate_snapshots(SourceConfig::uncorrelated({17.0}, 1.0, 0.0), kUla16, 64, 11u);
  const CVector a = steering_vector(17.0, kUla16);
  for (int t = 0; t < y.num_snapshots(); ++t) {
    const CVector col = y.data.col(t);
    const CVector resid = col - a * (a.adjoint() * col)(0) / 16.0;
    EXPECT_LT(resid.norm(), 1e-10);
  }
}

TEST(SimulateSnapshots, DeterministicGivenSeed) {
  const SourceConfig src = SourceConfig::uncorrelated({-20.0, 35.0}, 1.0, 0.1);
  const SnapshotMatrix a = simulate_snapshots(src, kUla16, 50, 99u);
  const SnapshotMatrix b = simulate_snapshots(src, kUla16, 50, 99u);
  EXPECT_EQ(a.data, b.data);
  const SnapshotMatrix c = simulate_snapshots(src, kUla16, 50, 100u);
  EXPECT_NE(a.data, c.data);
}

TEST(SimulateSnapshots, CoherentPairCollapsesRank) {
  SourceConfig src;
  src.doas_deg = {-20.0, 30.0};
  src.signal_covariance = correlated_pair_covariance(1, 1, 1);
  src.noise_variance = 0.0;
  const CovMatrix r = sample_covariance(simulate_snapshots(src, kUla16, 10000, 5u));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r.data);
  const auto& ev = es.eigenvalues();
  EXPECT_LT(ev(14), 1e-2 * ev(15));
}

TEST(SampleCovariance, SingleSnapshotRankOne) {
  SnapshotMatrix y{CMatrix::Random(16, 1)};
  const CovMatrix r = sample_covariance(y);
  EXPECT_LT((r.data - y.data * y.data.adjoint()).norm(), 1e-14);
  EXPECT_EQ(oracle::numerical_rank(r.data, 1e-10), 1);
}

TEST(SampleCovariance, ScaledBasisIsDiagonal) {
  SnapshotMatrix y{CMatrix::Zero(4, 4)};
  for (int i = 0; i < 4; ++i) y.data(i, i) = cdouble(i + 1.0, 0.0);
  const CovMatrix r = sample_covariance(y);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(r.data(i, j), i == j ? cdouble((i + 1.0) * (i + 1.0) / 4.0) : cdouble(0));
}

TEST(SampleCovariance, ConvergesToIdeal) {
  const SourceConfig src = SourceConfig::uncorrelated({-25.0, 10.0}, 1.0, 0.5);
  const CovMatrix ideal = ideal_covariance(src, kUla16);
  const CovMatrix r = sample_covariance(simulate_snapshots(src, kUla16, 100000, 2024u));
  // 5% of the diagonal scale, entrywise.
  const double scale = ideal.data(0, 0).real();
  EXPECT_LT((r.data - ideal.data).cwiseAbs().maxCoeff(), 0.05 * scale);
}

TEST(SampleCovariance, PositiveSemidefiniteProperty) {
  Philox rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int t = 1 + static_cast<int>(rng.below(30));
    SnapshotMatrix y{CMatrix(8, t)};
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < t; ++j) y.data(i, j) = rng.complex_normal(1.0 + i);
    const CovMatrix r = sample_covariance(y);
    EXPECT_EQ(r.data, r.data.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r.data);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
  }
}

}  // namespace
}  // namespace dm
