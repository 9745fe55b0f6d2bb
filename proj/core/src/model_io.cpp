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

#include "qfb/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace qfb {

namespace {

using json = nlohmann::json;
using Section = std::map<std::string, json>;
using Document = std::map<std::string, Section>;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (s[i] == '[' || s[i] == '{') ++depth;
    if (s[i] == ']' || s[i] == '}') --depth;
  }
  return depth;
}

Document parse_document(std::string_view text) {
  Document doc;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') parse_fail("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (doc.contains(section)) parse_fail("line " + std::to_string(line_no) + ": duplicate section [" + section + "]");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const int start_line = line_no;
    while (bracket_balance(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += " " + trim(strip_comment(raw));
    }
    if (bracket_balance(value) != 0) parse_fail("line " + std::to_string(start_line) + ": unbalanced brackets in " + key);
    // TOML tolerates trailing commas inside arrays; JSON does not.
    static const std::regex trailing_comma(",\\s*\\]");
    value = std::regex_replace(value, trailing_comma, "]");
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error& e) {
      parse_fail("line " + std::to_string(start_line) + ": cannot parse value of " + key + ": " + e.what());
    }
    auto& sec = doc[section];
    if (sec.contains(key)) parse_fail("line " + std::to_string(start_line) + ": duplicate key " + key);
    sec[key] = std::move(parsed);
  }
  return doc;
}

std::string field_path(const std::string& section, const std::string& key) {
  return section.empty() ? key : "[" + section + "]." + key;
}

Complex parse_entry(const json& e, const std::string& path) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return {e[0].get<double>(), e[1].get<double>()};
  }
  parse_fail(path + ": matrix entries must be numbers or [re, im] pairs");
}

CMatrix parse_matrix_value(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path + ": expected a matrix (list of rows)");
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (rows == 0) return CMatrix(0, 0);
  if (!v[0].is_array()) parse_fail(path + ": expected a matrix (list of rows)");
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      parse_fail(path + ": row " + std::to_string(i) + " has the wrong length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = parse_entry(row[static_cast<std::size_t>(j)],
                            path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return m;
}

VOp parse_vop(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path + ": expected a list of matrices");
  VOp out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(parse_matrix_value(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

const json* find(const Document& doc, const std::string& section, const std::string& key) {
  const auto s = doc.find(section);
  if (s == doc.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

double get_number(const Document& doc, const std::string& section, const std::string& key, double fallback) {
  const json* v = find(doc, section, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) parse_fail(field_path(section, key) + ": expected a number");
  return v->get<double>();
}

void check_keys(const Document& doc) {
  static const std::map<std::string, std::vector<std::string>> allowed = {
      {"system", {"dim", "hbar", "H1"}},
      {"measurement", {"c", "M", "preset", "eta"}},
      {"feedback", {"f"}},
  };
  for (const auto& [section, keys] : doc) {
    const auto a = allowed.find(section);
    if (a == allowed.end()) parse_fail("unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      if (std::find(a->second.begin(), a->second.end(), key) == a->second.end()) {
        parse_fail("unknown key " + field_path(section, key));
      }
    }
  }
}

}  // namespace

SystemModel parse_model(std::string_view text, std::optional<double> hbar_override, double tol) {
  const Document doc = parse_document(text);
  check_keys(doc);
  if (!doc.contains("system")) parse_fail("missing [system] section");

  const double dim_value = get_number(doc, "system", "dim", -1.0);
  if (dim_value < 1.0 || dim_value != std::floor(dim_value)) parse_fail("[system].dim must be a positive integer");
  const auto dim = static_cast<Eigen::Index>(dim_value);
  const double hbar = hbar_override.value_or(get_number(doc, "system", "hbar", 1.0));

  CMatrix h1 = CMatrix::Zero(dim, dim);
  if (const json* v = find(doc, "system", "H1")) h1 = parse_matrix_value(*v, "[system].H1");

  VOp c;
  if (const json* v = find(doc, "measurement", "c")) c = parse_vop(*v, "[measurement].c");
  VOp f;
  const bool has_f = find(doc, "feedback", "f") != nullptr;
  if (has_f) f = parse_vop(*find(doc, "feedback", "f"), "[feedback].f");

  const json* preset = find(doc, "measurement", "preset");
  const json* m_value = find(doc, "measurement", "M");
  if (preset != nullptr && m_value != nullptr) parse_fail("[measurement] sets both preset and M");
  if (preset == nullptr && find(doc, "measurement", "eta") != nullptr) {
    parse_fail("[measurement].eta is only meaningful with a preset");
  }

  if (preset != nullptr) {
    if (!preset->is_string()) parse_fail("[measurement].preset must be a string");
    const std::string type = preset->get<std::string>();
    const double eta = get_number(doc, "measurement", "eta", 1.0);
    if (c.size() != 1) parse_fail("[measurement].c must hold exactly one operator for preset " + type);
    if (type == "homodyne") {
      if (!has_f) f = VOp{CMatrix::Zero(dim, dim)};
      if (f.size() != 1) parse_fail("[feedback].f must hold one operator for a homodyne preset");
      const SystemModel p = homodyne_model(c[0], f[0], eta, hbar, h1);
      return SystemModel(p.h1(), p.c(), p.f(), p.mrep(), tol);
    }
    if (type == "heterodyne") {
      if (!has_f) f = VOp(2, CMatrix::Zero(dim, dim));
      if (f.size() != 2) parse_fail("[feedback].f must hold two operators for a heterodyne preset");
      const SystemModel p = heterodyne_model(c[0], f[0], f[1], eta, hbar, h1);
      return SystemModel(p.h1(), p.c(), p.f(), p.mrep(), tol);
    }
    parse_fail("[measurement].preset must be \"homodyne\" or \"heterodyne\", got \"" + type + "\"");
  }

  const auto num_l = static_cast<Eigen::Index>(c.size());
  CMatrix m;
  if (m_value != nullptr) {
    m = parse_matrix_value(*m_value, "[measurement].M");
    if (m.rows() == 0) m.resize(num_l, 0);
    if (!has_f) f = VOp(static_cast<std::size_t>(m.cols()), CMatrix::Zero(dim, dim));
  } else {
    m = CMatrix::Zero(num_l, static_cast<Eigen::Index>(f.size()));
  }
  return SystemModel(std::move(h1), std::move(c), std::move(f), MRep{std::move(m), hbar}, tol);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemModel load_model(const std::filesystem::path& path, std::optional<double> hbar_override, double tol) {
  return parse_model(read_text_file(path), hbar_override, tol);
}

namespace {

void write_number(std::ostream& os, double x) {
  std::ostringstream tmp;
  tmp << std::setprecision(17) << x;
  os << tmp.str();
}

void write_matrix(std::ostream& os, const CMatrix& m, const std::string& indent) {
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? ",\n" + indent + " [" : "[");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << "[";
      write_number(os, m(i, j).real());
      os << ", ";
      write_number(os, m(i, j).imag());
      os << "]";
    }
    os << "]";
  }
  os << "]";
}

void write_vop(std::ostream& os, const VOp& v) {
  os << "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    os << (k ? ",\n  " : "\n  ");
    write_matrix(os, v[k], "  ");
  }
  os << (v.empty() ? "]" : "\n]");
}

}  // namespace

std::string format_model(const SystemModel& model) {
  std::ostringstream os;
  os << "[system]\ndim = " << model.dim() << "\nhbar = ";
  write_number(os, model.hbar());
  os << "\nH1 = ";
  write_matrix(os, model.h1(), "     ");
  os << "\n\n[measurement]\nc = ";
  write_vop(os, model.c());
  os << "\nM = ";
  write_matrix(os, model.m(), "    ");
  os << "\n\n[feedback]\nf = ";
  write_vop(os, model.f());
  os << "\n";
  return os.str();
}

CMatrix parse_matrix(std::string_view text) {
  const Document doc = parse_document(text);
  const json* v = find(doc, "", "matrix");
  if (v == nullptr || doc.size() != 1 || doc.at("").size() != 1) {
    parse_fail("matrix files must contain exactly one top-level `matrix = [...]` entry");
  }
  return parse_matrix_value(*v, "matrix");
}

CMatrix load_matrix(const std::filesystem::path& path) { return parse_matrix(read_text_file(path)); }

std::string format_matrix(const CMatrix& m) {
  std::ostringstream os;
  os << "matrix = ";
  write_matrix(os, m, "         ");
  os << "\n";
  return os.str();
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace qfb
