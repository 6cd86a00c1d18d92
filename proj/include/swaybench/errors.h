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

#ifndef SWAYBENCH_ERRORS_H_
#define SWAYBENCH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace swaybench {

// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration. field() names the offending parameter.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Signal length or lag does not fit the stimulus period.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class StatisticsError : public Error {
 public:
  using Error::Error;
};

// A band of the input spectrum carries (numerically) no power.
class DegenerateExcitationError : public Error {
 public:
  DegenerateExcitationError(int band, const std::string& what)
      : Error(what), band_(band) {}
  int band() const { return band_; }

 private:
  int band_;
};

// CSV ingestion failure. row() is the 1-based data row, 0 when not row
// specific.
class IngestError : public Error {
 public:
  IngestError(int row, const std::string& what)
      : Error(row > 0 ? "row " + std::to_string(row) + ": " + what : what),
        row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

// Error raised inside the analysis chain, tagged with the stage name
// ("align", "extract_peaks", "estimate_frf", "score", ...).
class AnalysisError : public Error {
 public:
  AnalysisError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace swaybench

#endif  // SWAYBENCH_ERRORS_H_
