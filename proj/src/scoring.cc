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
#include <fstream>
#include <random>

#include "swaybench/errors.h"

namespace swaybench {
namespace {

// Linear interpolation between order statistics (R type 7).
double Percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

int CountBelow(const std::vector<double>& scores, double x) {
  int n = 0;
  for (double s : scores) n += s < x ? 1 : 0;
  return n;
}

Eigen::VectorXd DiagonalScale(const std::vector<double>& band_weights) {
  const int k = static_cast<int>(band_weights.size());
  Eigen::VectorXd s(2 * k);
  for (int i = 0; i < k; ++i) {
    s(i) = band_weights[i];
    s(i + k) = band_weights[i];
  }
  return s;
}

nlohmann::json MatrixToJson(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void ReferenceStats::Validate() const {
  plan.Validate();
  const int dim = Dimension();
  if (mu.size() != dim) {
    throw DimensionError("mu has " + std::to_string(mu.size()) +
                         " entries, band plan needs " + std::to_string(dim));
  }
  if (sigma.rows() != dim || sigma.cols() != dim) {
    throw DimensionError("sigma must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }
  if (static_cast<int>(weights.size()) != plan.NumBands() ||
      static_cast<int>(weights_normalized.size()) != plan.NumBands()) {
    throw DimensionError("one weight per band required");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0) || !(weights_normalized[k] >= 0.0)) {
      throw StatisticsError("weights must be non-negative");
    }
  }
  for (double s : sample_scores) {
    if (!(s >= 0.0)) throw StatisticsError("sample scores must be >= 0");
  }
  if (!sample_scores.empty() &&
      n_subjects != static_cast<int>(sample_scores.size())) {
    throw StatisticsError("n_subjects disagrees with sample_scores");
  }
  if (!mu.allFinite() || !sigma.allFinite()) {
    throw StatisticsError("mu and sigma must be finite");
  }
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw StatisticsError("sigma is not symmetric");
  }
  FactorCovariance(sigma);
}

Eigen::VectorXd ExpandFrf(const Frf& frf) {
  const int k = static_cast<int>(frf.h.size());
  Eigen::VectorXd x(2 * k);
  for (int i = 0; i < k; ++i) {
    x(i) = frf.h[i].real();
    x(i + k) = frf.h[i].imag();
  }
  return x;
}

Frf PackFrf(const Eigen::VectorXd& x, const BandPlan& plan) {
  if (x.size() != 2 * plan.NumBands()) {
    throw DimensionError("expanded FRF length " + std::to_string(x.size()) +
                         " does not match " +
                         std::to_string(plan.NumBands()) + " bands");
  }
  const int k = plan.NumBands();
  Frf frf{std::vector<Complex>(k), plan};
  for (int i = 0; i < k; ++i) frf.h[i] = Complex(x(i), x(i + k));
  return frf;
}

std::vector<double> NormalizeWeights(const std::vector<double>& w) {
  std::vector<double> out(w);
  const double top =
      w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
  if (top > 0.0) {
    for (double& v : out) v /= top;
  }
  return out;
}

Eigen::LLT<Eigen::MatrixXd> FactorCovariance(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> chol(sigma);
  if (chol.info() != Eigen::Success) {
    throw StatisticsError("covariance is not positive definite");
  }
  // LLT only inspects one triangle and accepts tiny pivots; require every
  // pivot to be positive.
  const auto diag = chol.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
    throw StatisticsError("covariance is not positive definite");
  }
  return chol;
}

Distances WeightedDistances(const Eigen::VectorXd& delta,
                            const Eigen::LLT<Eigen::MatrixXd>& chol,
                            const std::vector<double>& band_weights) {
  if (delta.size() != 2 * static_cast<Eigen::Index>(band_weights.size()) ||
      delta.size() != chol.rows()) {
    throw DimensionError("delta, sigma and weights disagree in size");
  }
  const Eigen::VectorXd scaled =
      DiagonalScale(band_weights).cwiseProduct(delta);
  const Eigen::VectorXd a = chol.matrixL().solve(scaled);
  const Eigen::VectorXd b = chol.matrixL().solve(delta);
  return {a.norm(), b.norm()};
}

CdfPosition ComputeCdfPosition(double score_d,
                               const std::vector<double>& sample_scores,
                               int n_bootstrap, std::uint64_t seed) {
  if (sample_scores.empty()) {
    throw StatisticsError("reference has no sample scores");
  }
  if (n_bootstrap < 1) throw ConfigError("n_bootstrap", "must be >= 1");
  const auto n = static_cast<int>(sample_scores.size());
  CdfPosition out;
  out.cdf = static_cast<double>(CountBelow(sample_scores, score_d)) / n;
  out.ties = static_cast<int>(
      std::count(sample_scores.begin(), sample_scores.end(), score_d));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<double> fractions(n_bootstrap);
  for (int b = 0; b < n_bootstrap; ++b) {
    int below = 0;
    for (int i = 0; i < n; ++i) below += sample_scores[pick(rng)] < score_d;
    fractions[b] = static_cast<double>(below) / n;
  }
  out.ci_low = Percentile(fractions, 0.025);
  out.ci_high = Percentile(fractions, 0.975);
  return out;
}

ScoreReport Score(const Frf& frf, const ReferenceStats& ref,
                  const ScoreOptions& options) {
  if (!frf.plan.SameAs(ref.plan) ||
      static_cast<int>(frf.h.size()) != ref.plan.NumBands()) {
    throw DimensionError("FRF band plan differs from the reference");
  }
  const auto chol = FactorCovariance(ref.sigma);
  const bool normalized = options.weights == WeightChoice::kNormalized;
  const auto d = WeightedDistances(
      ExpandFrf(frf) - ref.mu, chol,
      normalized ? ref.weights_normalized : ref.weights);

  ScoreReport report;
  report.score_d = d.score_d;
  report.mahalanobis = d.mahalanobis;
  report.weights_used = normalized ? "normalized" : "raw";
  const auto cdf = ComputeCdfPosition(d.score_d, ref.sample_scores,
                                      options.n_bootstrap, options.seed);
  report.cdf = cdf.cdf;
  report.cdf_ci_low = cdf.ci_low;
  report.cdf_ci_high = cdf.ci_high;
  report.ties = cdf.ties;
  return report;
}

double RegularizeCovariance(Eigen::MatrixXd& sigma) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (hi > 0.0 && lo >= kRidgeTrigger * hi) return 0.0;
  const double trace = sigma.trace();
  const double ridge = trace > 0.0
                           ? kRidgeEpsilon * trace / sigma.rows()
                           : kRidgeEpsilon;
  sigma.diagonal().array() += ridge;
  return ridge;
}

ReferenceStats FitReference(const std::vector<Frf>& frfs,
                            const WeightVector& weights) {
  if (frfs.size() < 2) {
    throw StatisticsError("at least two FRFs are needed, got " +
                          std::to_string(frfs.size()));
  }
  ReferenceStats ref;
  ref.plan = frfs.front().plan;
  const int dim = ref.Dimension();
  if (static_cast<int>(weights.w.size()) != ref.plan.NumBands()) {
    throw DimensionError("one weight per band required");
  }
  const auto n = static_cast<int>(frfs.size());
  Eigen::MatrixXd x(dim, n);
  for (int s = 0; s < n; ++s) {
    if (!frfs[s].plan.SameAs(ref.plan) ||
        static_cast<int>(frfs[s].h.size()) != ref.plan.NumBands()) {
      throw DimensionError("FRF " + std::to_string(s) +
                           " uses a different band plan");
    }
    x.col(s) = ExpandFrf(frfs[s]);
  }
  ref.mu = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - ref.mu;
  ref.sigma = centered * centered.transpose() / (n - 1.0);
  ref.sigma = 0.5 * (ref.sigma + ref.sigma.transpose());
  ref.ridge = RegularizeCovariance(ref.sigma);
  ref.weights = weights.w;
  ref.weights_normalized = NormalizeWeights(weights.w);
  ref.n_subjects = n;

  const auto chol = FactorCovariance(ref.sigma);
  ref.sample_scores.resize(n);
  for (int s = 0; s < n; ++s) {
    ref.sample_scores[s] =
        WeightedDistances(centered.col(s), chol, ref.weights_normalized)
            .score_d;
  }
  return ref;
}

void to_json(nlohmann::json& j, const ReferenceStats& ref) {
  j = nlohmann::json{
      {"schema", "swaybench.reference"},
      {"schema_version", kReferenceSchemaVersion},
      {"band_plan", ref.plan},
      {"mu", std::vector<double>(ref.mu.data(), ref.mu.data() + ref.mu.size())},
      {"sigma", MatrixToJson(ref.sigma)},
      {"ridge", ref.ridge},
      {"weights_raw", ref.weights},
      {"weights_normalized", ref.weights_normalized},
      {"sample_scores", ref.sample_scores},
      {"n_subjects", ref.n_subjects},
      {"provenance", ref.provenance},
  };
}

void from_json(const nlohmann::json& j, ReferenceStats& ref) {
  if (j.value("schema", std::string()) != "swaybench.reference") {
    throw ConfigError("schema", "not a swaybench reference file");
  }
  if (j.at("schema_version").get<int>() != kReferenceSchemaVersion) {
    throw ConfigError("schema_version", "unsupported reference version");
  }
  ref.plan = j.at("band_plan").get<BandPlan>();
  const auto mu = j.at("mu").get<std::vector<double>>();
  ref.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(),
                                             static_cast<Eigen::Index>(mu.size()));
  const auto rows = j.at("sigma").get<std::vector<std::vector<double>>>();
  ref.sigma.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) {
      throw DimensionError("sigma must be square");
    }
    for (std::size_t c = 0; c < rows.size(); ++c) ref.sigma(r, c) = rows[r][c];
  }
  ref.ridge = j.value("ridge", 0.0);
  ref.weights = j.at("weights_raw").get<std::vector<double>>();
  ref.weights_normalized =
      j.contains("weights_normalized")
          ? j.at("weights_normalized").get<std::vector<double>>()
          : NormalizeWeights(ref.weights);
  ref.sample_scores = j.value("sample_scores", std::vector<double>());
  ref.n_subjects =
      j.value("n_subjects", static_cast<int>(ref.sample_scores.size()));
  ref.provenance = j.value("provenance", nlohmann::json::object());
  ref.Validate();
}

void to_json(nlohmann::json& j, const ScoreReport& r) {
  j = nlohmann::json{{"score_d", r.score_d},
                     {"mahalanobis", r.mahalanobis},
                     {"cdf", r.cdf},
                     {"cdf_ci", {r.cdf_ci_low, r.cdf_ci_high}},
                     {"ties", r.ties},
                     {"weights_used", r.weights_used}};
}

ReferenceStats LoadReference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("reference", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("reference", path + ": " + e.what());
  }
  return j.get<ReferenceStats>();
}

void SaveReference(const ReferenceStats& ref, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("reference", "cannot write " + path);
  out << nlohmann::json(ref).dump(2) << '\n';
}

}  // namespace swaybench
