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

#include "run_support.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "qfb/correlation.hpp"
#include "qfb/liouvillian.hpp"
#include "qfb/model_io.hpp"

namespace qfb::cli {

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
      return ExitCode::Io;
    case ErrorCode::StateDiverged:
    case ErrorCode::NoSteadyState:
    case ErrorCode::GridMismatch:
      return ExitCode::Tolerance;
    default:
      return ExitCode::Validation;
  }
}

namespace {

Observable builtin(const std::string& name, Eigen::Index dim) {
  const bool qubit_only = name == "sx" || name == "sy" || name == "sz";
  if (qubit_only && dim != 2) {
    throw Error(ErrorCode::InvalidModel, "observable " + name + " needs a two-level model, got dim " +
                                             std::to_string(dim));
  }
  if (name == "sx") return {name, qubit::sigma_x(), true};
  if (name == "sy") return {name, qubit::sigma_y(), true};
  if (name == "sz") return {name, qubit::sigma_z(), true};
  if (dim == 2) return {name, qubit::excited(), true};
  const CMatrix a = destroy(dim);
  return {name, a.adjoint() * a, true};
}

}  // namespace

std::vector<Observable> resolve_observables(const std::vector<std::string>& names, Eigen::Index dim) {
  std::vector<Observable> out;
  for (const auto& raw : names) {
    if (raw.empty()) continue;
    if (raw == "sx" || raw == "sy" || raw == "sz" || raw == "n") {
      out.push_back(builtin(raw, dim));
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == raw.size()) {
      throw Error(ErrorCode::InvalidModel, "unknown observable '" + raw + "' (use sx, sy, sz, n or name=file)");
    }
    Observable o;
    o.name = raw.substr(0, eq);
    o.op = load_matrix(raw.substr(eq + 1));
    if (o.op.rows() != dim || o.op.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "observable " + o.name + " is " + std::to_string(o.op.rows()) + "x" +
                                                    std::to_string(o.op.cols()) + ", model dim is " +
                                                    std::to_string(dim));
    }
    o.hermitian = is_hermitian(o.op, kModelTol);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<std::string> default_observables(Eigen::Index dim) {
  if (dim == 2) return {"sx", "sy", "sz"};
  return {"n"};
}

std::vector<std::string> observable_columns(const std::vector<Observable>& obs, const std::string& suffix) {
  std::vector<std::string> cols;
  for (const auto& o : obs) {
    if (o.hermitian) {
      cols.push_back(o.name + suffix);
    } else {
      cols.push_back(o.name + "_re" + suffix);
      cols.push_back(o.name + "_im" + suffix);
    }
  }
  return cols;
}

void append_expectations(std::vector<double>& row, const std::vector<Observable>& obs, const CMatrix& rho) {
  for (const auto& o : obs) {
    const Complex v = o.op.cwiseProduct(rho.transpose()).sum();
    row.push_back(v.real());
    if (!o.hermitian) row.push_back(v.imag());
  }
}

std::string StateSource::describe() const {
  if (file) return "file " + file->string();
  if (basis_state) return "basis state " + std::to_string(*basis_state);
  if (steady) return "steady state";
  return "default";
}

CMatrix resolve_state(const StateSource& src, const SystemModel& model, bool steady_default, double state_tol,
                      double steady_tol) {
  const int chosen = int(src.file.has_value()) + int(src.basis_state.has_value()) + int(src.steady);
  if (chosen > 1) throw Error(ErrorCode::InvalidState, "choose one of --rho0, --basis-state and --steady");
  const Eigen::Index d = model.dim();
  if (src.file) {
    CMatrix rho = load_matrix(*src.file);
    require_density_matrix(rho, d, state_tol);
    return rho;
  }
  if (src.steady || (chosen == 0 && steady_default)) return steady_state(build_lmfb(model), steady_tol);
  const Eigen::Index k = src.basis_state.value_or(0);
  if (k < 0 || k >= d) {
    throw Error(ErrorCode::InvalidState, "basis state " + std::to_string(k) + " outside 0.." + std::to_string(d - 1));
  }
  CMatrix rho = CMatrix::Zero(d, d);
  rho(k, k) = 1.0;
  return rho;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorCode::ParseError, "empty entry in list '" + text + "'");
    const std::string tok = item.substr(b, e - b + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error(ErrorCode::ParseError, "not a number: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, std::string>>& meta,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary), columns_(columns.size()) {
  if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& [key, value] : meta) out_ << "# " << key << ": " << value << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw Error(ErrorCode::DimensionMismatch, "CSV row has " + std::to_string(values.size()) + " values for " +
                                                  std::to_string(columns_) + " columns");
  }
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << "\n";
  if (!out_) throw Error(ErrorCode::IoError, "write failed for " + path_.string());
}

}  // namespace qfb::cli
