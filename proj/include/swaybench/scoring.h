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

#ifndef SWAYBENCH_SCORING_H_
#define SWAYBENCH_SCORING_H_

// Human-likeness score against a reference population.
//
// An FRF is expanded to x = [Re h_1..Re h_K, Im h_1..Im h_K]. With
// reference mean mu, covariance Sigma and band weights w,
//
//   D        = sqrt((S d)' Sigma^-1 (S d)),  d = x - mu,  S = diag([w, w])
//   distance = sqrt(d' Sigma^-1 d)
//
// Sigma^-1 is never formed; both quadratic forms go through a Cholesky
// factor of Sigma.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "swaybench/spectral.h"

namespace swaybench {

inline constexpr int kReferenceSchemaVersion = 1;
inline constexpr int kDefaultBootstrap = 2000;

// Covariance ridge rule: when lambda_min < kRidgeTrigger * lambda_max the
// diagonal is raised by kRidgeEpsilon * trace / dim (kRidgeEpsilon when
// the trace is zero).
inline constexpr double kRidgeTrigger = 1e-10;
inline constexpr double kRidgeEpsilon = 1e-6;

struct ReferenceStats {
  BandPlan plan;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  std::vector<double> weights;             // as computed from the input
  std::vector<double> weights_normalized;  // weights / max(weights)
  std::vector<double> sample_scores;
  int n_subjects = 0;
  double ridge = 0.0;  // added to the diagonal of sigma, 0 if none
  nlohmann::json provenance = nlohmann::json::object();

  int Dimension() const { return 2 * plan.NumBands(); }
  // Throws DimensionError on shape problems and StatisticsError when
  // sigma is asymmetric or not positive definite.
  void Validate() const;
};

enum class WeightChoice { kNormalized, kRaw };

struct ScoreOptions {
  WeightChoice weights = WeightChoice::kNormalized;
  int n_bootstrap = kDefaultBootstrap;
  std::uint64_t seed = 0;
};

struct CdfPosition {
  double cdf = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int ties = 0;  // reference scores exactly equal to the query
};

struct ScoreReport {
  double score_d = 0.0;
  double mahalanobis = 0.0;
  double cdf = 0.0;
  double cdf_ci_low = 0.0;
  double cdf_ci_high = 0.0;
  int ties = 0;
  std::string weights_used;  // "normalized" or "raw"
};

Eigen::VectorXd ExpandFrf(const Frf& frf);
Frf PackFrf(const Eigen::VectorXd& x, const BandPlan& plan);

// Divides by the largest weight; all-zero weights stay zero.
std::vector<double> NormalizeWeights(const std::vector<double>& w);

// Weighted and plain distances of d under the Cholesky factor of sigma.
struct Distances {
  double score_d = 0.0;
  double mahalanobis = 0.0;
};
Distances WeightedDistances(const Eigen::VectorXd& delta,
                            const Eigen::LLT<Eigen::MatrixXd>& chol,
                            const std::vector<double>& band_weights);

// Cholesky factor of a reference covariance; StatisticsError if sigma is
// not positive definite.
Eigen::LLT<Eigen::MatrixXd> FactorCovariance(const Eigen::MatrixXd& sigma);

// Strict count: fraction of reference scores < score_d. The interval is
// the 2.5/97.5 percentile of the same fraction over bootstrap resamples.
CdfPosition ComputeCdfPosition(double score_d,
                               const std::vector<double>& sample_scores,
                               int n_bootstrap, std::uint64_t seed);

ScoreReport Score(const Frf& frf, const ReferenceStats& ref,
                  const ScoreOptions& options = {});

// Returns the ridge added (0 if none) and modifies sigma in place.
double RegularizeCovariance(Eigen::MatrixXd& sigma);

// Mean, unbiased covariance (ridge-regularized when ill-conditioned) and
// in-sample scores of each subject.
ReferenceStats FitReference(const std::vector<Frf>& frfs,
                            const WeightVector& weights);

void to_json(nlohmann::json& j, const ReferenceStats& ref);
void from_json(const nlohmann::json& j, ReferenceStats& ref);
void to_json(nlohmann::json& j, const ScoreReport& r);

ReferenceStats LoadReference(const std::string& path);
void SaveReference(const ReferenceStats& ref, const std::string& path);

}  // namespace swaybench

#endif  // SWAYBENCH_SCORING_H_
