// Copyright 2026 The swaybench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "swaybench/scoring.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "swaybench/errors.h"

namespace swaybench {
namespace {

ReferenceStats MakeRef(const Eigen::MatrixXd& sigma, std::vector<double> w,
                       std::vector<double> scores = {1.0, 2.0, 3.0, 4.0}) {
  ReferenceStats ref;
  ref.plan = DefaultBandPlan();
  ref.mu = Eigen::VectorXd::LinSpaced(22, -1.0, 1.0);
  ref.sigma = sigma;
  ref.weights = w;
  ref.weights_normalized = NormalizeWeights(w);
  ref.sample_scores = scores;
  ref.n_subjects = static_cast<int>(scores.size());
  return ref;
}

Eigen::MatrixXd RandomSpd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = d(rng);
  return a * a.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

Frf FrfAt(const ReferenceStats& ref, const Eigen::VectorXd& delta) {
  return PackFrf(ref.mu + delta, ref.plan);
}

ScoreOptions Raw() {
  ScoreOptions o;
  o.weights = WeightChoice::kRaw;
  o.n_bootstrap = 10;
  return o;
}

TEST(ExpandFrfTest, RealAndImaginaryBlocks) {
  Frf ones{std::vector<Complex>(11, Complex(1, 0)), DefaultBandPlan()};
  Frf js{std::vector<Complex>(11, Complex(0, 1)), DefaultBandPlan()};
  const Eigen::VectorXd a = ExpandFrf(ones);
  const Eigen::VectorXd b = ExpandFrf(js);
  ASSERT_EQ(a.size(), 22);
  for (int i = 0; i < 11; ++i) {
    EXPECT_EQ(a(i), 1.0);
    EXPECT_EQ(a(i + 11), 0.0);
    EXPECT_EQ(b(i), 0.0);
    EXPECT_EQ(b(i + 11), 1.0);
  }
}

TEST(ExpandFrfTest, PackRejectsWrongLength) {
  EXPECT_THROW(PackFrf(Eigen::VectorXd::Zero(21), DefaultBandPlan()),
               DimensionError);
}

TEST(ScoreTest, MeanFrfScoresZero) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto ref = MakeRef(RandomSpd(rng, 22), std::vector<double>(11, 0.7));
    const auto r = Score(FrfAt(ref, Eigen::VectorXd::Zero(22)), ref);
    EXPECT_LE(r.score_d, 1e-12);
    EXPECT_LE(r.mahalanobis, 1e-12);
    EXPECT_EQ(r.weights_used, "normalized");
  }
}

TEST(ScoreTest, IdentityCovarianceIsEuclidean) {
  const auto ref = MakeRef(Eigen::MatrixXd::Identity(22, 22),
                           std::vector<double>(11, 1.0));
  for (int i = 0; i < 22; ++i) {
    const auto r = Score(FrfAt(ref, Eigen::VectorXd::Unit(22, i)), ref, Raw());
    EXPECT_NEAR(r.score_d, 1.0, 1e-12);
    EXPECT_NEAR(r.mahalanobis, 1.0, 1e-12);
  }
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  Eigen::VectorXd delta(22);
  for (int i = 0; i < 22; ++i) delta(i) = d(rng);
  const auto r = Score(FrfAt(ref, delta), ref, Raw());
  EXPECT_NEAR(r.score_d, delta.norm(), 1e-12);
}

TEST(ScoreTest, HalfWeightsHalveTheScore) {
  const auto ref = MakeRef(Eigen::MatrixXd::Identity(22, 22),
                           std::vector<double>(11, 0.5));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd delta(22);
    for (int i = 0; i < 22; ++i) delta(i) = d(rng);
    const auto r = Score(FrfAt(ref, delta), ref, Raw());
    EXPECT_NEAR(r.score_d, 0.5 * r.mahalanobis, 1e-12);
    EXPECT_EQ(r.weights_used, "raw");
  }
}

TEST(ScoreTest, InvariantUnderConsistentPermutation) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd sigma = RandomSpd(rng, 22);
    std::vector<double> w(11);
    for (double& v : w) v = u(rng);
    Eigen::VectorXd delta(22);
    for (int i = 0; i < 22; ++i) delta(i) = d(rng);

    // Permute bands (same permutation on both blocks) and swap the blocks.
    std::vector<int> band(11);
    std::iota(band.begin(), band.end(), 0);
    std::shuffle(band.begin(), band.end(), rng);
    Eigen::VectorXi perm(22);
    for (int k = 0; k < 11; ++k) {
      perm(k) = 11 + band[k];
      perm(k + 11) = band[k];
    }
    Eigen::PermutationMatrix<Eigen::Dynamic> p(perm);
    std::vector<double> wp(11);
    for (int k = 0; k < 11; ++k) wp[band[k]] = w[k];

    const auto a = WeightedDistances(delta, FactorCovariance(sigma), w);
    const auto b = WeightedDistances(
        p * delta, FactorCovariance(p * sigma * p.transpose()), wp);
    EXPECT_NEAR(a.score_d, b.score_d, 1e-10 * a.score_d);
    EXPECT_NEAR(a.mahalanobis, b.mahalanobis, 1e-10 * a.mahalanobis);
  }
}

TEST(ScoreTest, WeightsAtMostOneNeverIncreaseDiagonalDistance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd diag(22), delta(22);
    for (int i = 0; i < 22; ++i) {
      diag(i) = 0.01 + u(rng);
      delta(i) = d(rng);
    }
    std::vector<double> w(11);
    for (double& v : w) v = u(rng);
    const auto r = WeightedDistances(
        delta, FactorCovariance(diag.asDiagonal().toDenseMatrix()),
        NormalizeWeights(w));
    EXPECT_LE(r.score_d, r.mahalanobis);
  }
}

// (S d)' P (S d) <= d' P d needs P - S P S to be positive semi-definite,
// which correlated precision matrices need not satisfy.
TEST(ScoreTest, WeightedScoreCanExceedDistanceForCorrelatedCovariance) {
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(22, 22);
  precision(0, 1) = precision(1, 0) = -0.99;
  const Eigen::MatrixXd sigma = precision.inverse();
  std::vector<double> w(11, 0.0);
  w[0] = 1.0;  // S keeps only component 0 (Re h_1)
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(22);
  delta(0) = 1.0;
  delta(1) = 1.0;
  const auto r = WeightedDistances(delta, FactorCovariance(sigma), w);
  EXPECT_NEAR(r.score_d * r.score_d, 1.0, 1e-9);
  EXPECT_NEAR(r.mahalanobis * r.mahalanobis, 0.02, 1e-9);
  EXPECT_GT(r.score_d, r.mahalanobis);
}

TEST(ScoreTest, QuadraticFormResidualIsSmall) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> d;
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd sigma = RandomSpd(rng, 22);
    Eigen::VectorXd delta(22);
    for (int i = 0; i < 22; ++i) delta(i) = d(rng);
    std::vector<double> w(11, 0.8);
    const auto chol = FactorCovariance(sigma);
    const double score = WeightedDistances(delta, chol, w).score_d;
    const Eigen::VectorXd sd = 0.8 * delta;
    const Eigen::VectorXd z = chol.solve(sd);
    EXPECT_LE((sigma * z - sd).norm() / sd.norm(), 1e-8);
    EXPECT_NEAR(score * score, sd.dot(z), 1e-8 * score * score);
  }
}

TEST(ScoreTest, RejectsIndefiniteCovariance) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(22, 22);
  sigma(3, 3) = -1.0;
  const auto ref = MakeRef(sigma, std::vector<double>(11, 1.0));
  EXPECT_THROW(Score(FrfAt(ref, Eigen::VectorXd::Zero(22)), ref),
               StatisticsError);
  EXPECT_THROW(ref.Validate(), StatisticsError);
}

TEST(ScoreTest, RejectsBandPlanMismatch) {
  const auto ref = MakeRef(Eigen::MatrixXd::Identity(22, 22),
                           std::vector<double>(11, 1.0));
  BandPlan other = DefaultBandPlan();
  other.bands[10].pop_back();
  Frf frf{std::vector<Complex>(11), other};
  EXPECT_THROW(Score(frf, ref), DimensionError);
}

TEST(CdfTest, Extremes) {
  const std::vector<double> s = {1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(ComputeCdfPosition(0.5, s, 100, 1).cdf, 0.0);
  EXPECT_EQ(ComputeCdfPosition(9.0, s, 100, 1).cdf, 1.0);
  EXPECT_EQ(ComputeCdfPosition(2.5, s, 100, 1).cdf, 0.5);
}

TEST(CdfTest, StrictCountReportsTies) {
  const std::vector<double> s = {1.0, 2.0, 2.0, 4.0};
  const auto c = ComputeCdfPosition(2.0, s, 100, 1);
  EXPECT_EQ(c.cdf, 0.25);
  EXPECT_EQ(c.ties, 2);
}

TEST(CdfTest, EmptyReferenceThrows) {
  EXPECT_THROW(ComputeCdfPosition(1.0, {}, 100, 1), StatisticsError);
}

TEST(CdfTest, MonotoneInScore) {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> s(38);
  for (double& v : s) v = e(rng);
  double previous = -1.0;
  for (double q = 0.0; q < 6.0; q += 0.01) {
    const double c = ComputeCdfPosition(q, s, 1, 0).cdf;
    EXPECT_GE(c, previous);
    previous = c;
  }
}

TEST(CdfTest, BootstrapIsSeededAndBracketsEstimate) {
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> s(38);
  for (double& v : s) v = e(rng);
  const auto a = ComputeCdfPosition(1.0, s, 2000, 42);
  const auto b = ComputeCdfPosition(1.0, s, 2000, 42);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
  EXPECT_LE(a.ci_low, a.cdf);
  EXPECT_GE(a.ci_high, a.cdf);
  EXPECT_GE(a.ci_low, 0.0);
  EXPECT_LE(a.ci_high, 1.0);
  EXPECT_LT(a.ci_low, a.ci_high);
}

TEST(FitReferenceTest, IdenticalFrfsEngageRidge) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> d;
  Frf f{std::vector<Complex>(11), DefaultBandPlan()};
  for (auto& h : f.h) h = Complex(d(rng), d(rng));
  const auto ref = FitReference({f, f}, WeightVector{std::vector<double>(11, 2.0)});
  EXPECT_GT(ref.ridge, 0.0);
  EXPECT_EQ(ref.ridge, kRidgeEpsilon);  // zero trace: absolute ridge
  EXPECT_EQ(ref.mu, ExpandFrf(f));
  EXPECT_NO_THROW(ref.Validate());
  EXPECT_EQ(ref.weights_normalized, std::vector<double>(11, 1.0));
  EXPECT_EQ(ref.sample_scores, std::vector<double>(2, 0.0));
}

TEST(FitReferenceTest, MeanOfTwo) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> d;
  Frf a{std::vector<Complex>(11), DefaultBandPlan()};
  Frf b = a;
  for (int k = 0; k < 11; ++k) {
    a.h[k] = Complex(d(rng), d(rng));
    b.h[k] = Complex(d(rng), d(rng));
  }
  const auto ref = FitReference({a, b}, WeightVector{std::vector<double>(11, 1.0)});
  const Eigen::VectorXd want = (ExpandFrf(a) + ExpandFrf(b)) / 2.0;
  EXPECT_EQ(ref.mu, want);
  EXPECT_GT(ref.ridge, 0.0);  // rank one
  EXPECT_EQ(ref.n_subjects, 2);
}

TEST(FitReferenceTest, RecoversDiagonalCovariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  Eigen::VectorXd sd(22), mean(22);
  for (int i = 0; i < 22; ++i) {
    sd(i) = 0.05 + 0.02 * i;
    mean(i) = 0.1 * i - 1.0;
  }
  std::vector<Frf> frfs;
  for (int s = 0; s < 500; ++s) {
    Eigen::VectorXd x(22);
    for (int i = 0; i < 22; ++i) x(i) = mean(i) + sd(i) * d(rng);
    frfs.push_back(PackFrf(x, DefaultBandPlan()));
  }
  const auto ref = FitReference(frfs, WeightVector{std::vector<double>(11, 1.0)});
  EXPECT_EQ(ref.ridge, 0.0);
  // A variance estimate from 500 draws has a relative standard error of
  // sqrt(2 / 499) = 6.3%, so each entry is checked through its standard
  // deviation (3.2% standard error) and the variances on average.
  double ratio_sum = 0.0;
  for (int i = 0; i < 22; ++i) {
    EXPECT_NEAR(std::sqrt(ref.sigma(i, i)) / sd(i), 1.0, 0.10) << i;
    ratio_sum += ref.sigma(i, i) / (sd(i) * sd(i));
  }
  EXPECT_NEAR(ratio_sum / 22.0, 1.0, 0.10);
  EXPECT_EQ(static_cast<int>(ref.sample_scores.size()), 500);
  for (double s : ref.sample_scores) EXPECT_GE(s, 0.0);
}

TEST(FitReferenceTest, NeedsTwoFrfs) {
  Frf f{std::vector<Complex>(11), DefaultBandPlan()};
  EXPECT_THROW(FitReference({f}, WeightVector{std::vector<double>(11, 1.0)}),
               StatisticsError);
}

TEST(RidgeTest, WellConditionedIsUntouched) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(22, 22);
  EXPECT_EQ(RegularizeCovariance(s), 0.0);
  EXPECT_EQ(s, Eigen::MatrixXd::Identity(22, 22));
}

TEST(RidgeTest, IllConditionedGetsTraceScaledRidge) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(22, 22);
  s(0, 0) = 22.0;
  const double ridge = RegularizeCovariance(s);
  EXPECT_DOUBLE_EQ(ridge, kRidgeEpsilon * 22.0 / 22.0);
  EXPECT_DOUBLE_EQ(s(5, 5), ridge);
}

TEST(ReferenceFileTest, RoundTripIsExact) {
  std::mt19937_64 rng(12);
  auto ref = MakeRef(RandomSpd(rng, 22),
                     {3.0, 2.5, 2.0, 1.0, 0.9, 0.5, 0.3, 0.2, 0.1, 0.05, 0.01},
                     {0.1, 0.25, 1.0 / 3.0});
  ref.provenance = {{"generator", "external"}};
  const auto path =
      (std::filesystem::temp_directory_path() / "swaybench_ref_test.json")
          .string();
  SaveReference(ref, path);
  const ReferenceStats back = LoadReference(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.mu, ref.mu);
  EXPECT_EQ(back.sigma, ref.sigma);
  EXPECT_EQ(back.weights, ref.weights);
  EXPECT_EQ(back.weights_normalized, ref.weights_normalized);
  EXPECT_EQ(back.sample_scores, ref.sample_scores);
  EXPECT_EQ(back.provenance, ref.provenance);
  EXPECT_TRUE(back.plan.SameAs(ref.plan));
}

TEST(ReferenceFileTest, RejectsAsymmetricSigma) {
  auto j = nlohmann::json(MakeRef(Eigen::MatrixXd::Identity(22, 22),
                                  std::vector<double>(11, 1.0)));
  j["sigma"][0][1] = 0.5;
  EXPECT_THROW(j.get<ReferenceStats>(), StatisticsError);
}

}  // namespace
}  // namespace swaybench
