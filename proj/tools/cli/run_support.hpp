// Copyright 2026 The qfb Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfb/model.hpp"

namespace qfb::cli {

/// Process exit codes. Stable contract for scripts.
enum class ExitCode : int { Ok = 0, Validation = 1, Tolerance = 2, Io = 3 };

ExitCode exit_code_for(ErrorCode code);

/// A named operator whose expectation value is tabulated.
struct Observable {
  std::string name;
  CMatrix op;
  bool hermitian = true;
};

/// Resolves a comma-separated observable list. Built-ins: sx, sy, sz (qubit
/// only) and n, which is |e><e| for a qubit and a^dagger a otherwise. Any
/// other entry must be name=path to a matrix file.
std::vector<Observable> resolve_observables(const std::vector<std::string>& names, Eigen::Index dim);

/// Default observables: sx, sy, sz for a qubit, n otherwise.
std::vector<std::string> default_observables(Eigen::Index dim);

/// Column names for a list of observables: one column per Hermitian
/// observable, name_re and name_im otherwise.
std::vector<std::string> observable_columns(const std::vector<Observable>& obs, const std::string& suffix = "");

/// Appends the values of `obs` on rho in the column layout above.
void append_expectations(std::vector<double>& row, const std::vector<Observable>& obs, const CMatrix& rho);

/// Where an initial or reference state comes from.
struct StateSource {
  std::optional<std::filesystem::path> file;
  std::optional<Eigen::Index> basis_state;
  bool steady = false;

  /// One-line description of an explicit choice; "default" when none is set.
  std::string describe() const;
};

/// Builds the state for `model`. With nothing set this is the steady state of
/// the feedback generator if `steady_default`, else basis state 0. A state file
/// is checked against `state_tol`; the steady state uses `steady_tol`.
CMatrix resolve_state(const StateSource& src, const SystemModel& model, bool steady_default, double state_tol,
                      double steady_tol);

/// Comma-separated list of doubles, whitespace tolerated.
std::vector<double> parse_number_list(const std::string& text);

/// Shortest round-trip text for a double.
std::string format_double(double x);

/// CSV file with '#'-prefixed metadata lines followed by a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& meta,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace qfb::cli
