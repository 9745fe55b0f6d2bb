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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "qfb/model.hpp"

namespace qfb {

/// Model files are a small TOML subset:
///
///   [system]       dim, hbar (default 1), H1 (default 0)
///   [measurement]  c (list of matrices) and either M, or
///                  preset = "homodyne" | "heterodyne" with eta
///   [feedback]     f (list of Hermitian matrices; default zeros)
///
/// A matrix is a list of rows; each entry is a real number or a [re, im]
/// pair. Values may span several lines; '#' starts a comment.
/// `tol` is the validation tolerance handed to SystemModel.
SystemModel parse_model(std::string_view text, std::optional<double> hbar_override = std::nullopt,
                        double tol = kModelTol);

SystemModel load_model(const std::filesystem::path& path, std::optional<double> hbar_override = std::nullopt,
                       double tol = kModelTol);

/// Writes a model with an explicit M; parse_model(format_model(m)) == m.
std::string format_model(const SystemModel& model);

/// Matrix files hold a single `matrix = [...]` entry.
CMatrix parse_matrix(std::string_view text);
CMatrix load_matrix(const std::filesystem::path& path);
std::string format_matrix(const CMatrix& m);

std::string read_text_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the bytes, as 16 hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace qfb
