#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agentlint/defects.hpp"
#include "agentlint/error.hpp"
#include "agentlint/text.hpp"

namespace agentlint {

enum class BackendKind { Heuristic, Remote };

struct BackendConfig {
  BackendKind kind = BackendKind::Heuristic;
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "AGENTLINT_API_KEY";
  std::uint32_t max_retries = 2;
  std::uint32_t parallelism = 4;
  std::uint32_t timeout_seconds = 60;

  void validate() const {
    if (kind == BackendKind::Remote && (endpoint.empty() || model.empty())) {
      throw Error(ErrorCode::ConfigError, "remote backend requires both endpoint and model");
    }
    if (parallelism == 0) throw Error(ErrorCode::ConfigError, "parallelism must be >= 1");
  }
};

enum class OutputFormat { Json, Markdown, Both };

struct AnalyzerConfig {
  BackendConfig backend;
  std::uint32_t batch_size = 10;
  std::set<DefectId> enabled{kAllDefects.begin(), kAllDefects.end()};
  bool strict = false;
  bool dump_graph = false;
  bool dump_unrt = false;
  std::filesystem::path out_dir = "agentlint-out";
  OutputFormat format = OutputFormat::Both;

  // ingest
  std::vector<std::string> ignore_globs;
  std::vector<std::string> excluded_dirs{"venv",  "env",  "virtualenv", "site-packages",
                                         "__pycache__", "node_modules", "build", "dist"};
  std::uintmax_t max_file_bytes = 1u << 20;

  // data-file overrides; empty means the bundled defaults
  std::filesystem::path markers_file;
  std::filesystem::path registry_file;
  std::filesystem::path stdlib_file;
  std::string registry_remote;  // optional model-card lookup base URL

  std::uint32_t literal_depth = 8;

  void validate() const {
    if (batch_size < 1) throw Error(ErrorCode::ConfigError, "batch size n must be >= 1");
    backend.validate();
  }
};

inline bool parse_bool(const std::string& key, std::string_view v) {
  const auto s = text::to_lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::ConfigError, "expected boolean for '" + key + "', got '" + std::string(v) + "'");
}

inline std::uint32_t parse_uint(const std::string& key, std::string_view v) {
  try {
    std::size_t used = 0;
    const auto value = std::stoul(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return static_cast<std::uint32_t>(value);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "expected unsigned integer for '" + key + "', got '" + std::string(v) + "'");
  }
}

inline std::set<DefectId> parse_defect_list(std::string_view v) {
  std::set<DefectId> out;
  for (const auto& raw : text::split(v, ',')) {
    const auto item = text::trim(raw);
    if (item.empty()) continue;
    const auto id = parse_defect_id(item);
    if (!id) throw Error(ErrorCode::ConfigError, "unknown defect id '" + std::string(item) + "'");
    out.insert(*id);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "empty oracle selection");
  return out;
}

inline OutputFormat parse_format(std::string_view v) {
  if (v == "json") return OutputFormat::Json;
  if (v == "md") return OutputFormat::Markdown;
  if (v == "both") return OutputFormat::Both;
  throw Error(ErrorCode::ConfigError, "format must be json, md or both");
}

inline BackendKind parse_backend_kind(std::string_view v) {
  if (v == "heuristic") return BackendKind::Heuristic;
  if (v == "remote") return BackendKind::Remote;
  throw Error(ErrorCode::ConfigError, "backend must be heuristic or remote");
}

// Applies one `key = value` setting. Keys mirror AnalyzerConfig fields.
inline void apply_setting(AnalyzerConfig& cfg, const std::string& key, std::string_view value) {
  if (key == "backend") cfg.backend.kind = parse_backend_kind(value);
  else if (key == "endpoint") cfg.backend.endpoint = value;
  else if (key == "path") cfg.backend.path = value;
  else if (key == "model") cfg.backend.model = value;
  else if (key == "api_key_env") cfg.backend.api_key_env = value;
  else if (key == "max_retries") cfg.backend.max_retries = parse_uint(key, value);
  else if (key == "parallelism") cfg.backend.parallelism = parse_uint(key, value);
  else if (key == "timeout") cfg.backend.timeout_seconds = parse_uint(key, value);
  else if (key == "n" || key == "batch_size") cfg.batch_size = parse_uint(key, value);
  else if (key == "only" || key == "enabled") cfg.enabled = parse_defect_list(value);
  else if (key == "strict") cfg.strict = parse_bool(key, value);
  else if (key == "dump_graph") cfg.dump_graph = parse_bool(key, value);
  else if (key == "dump_unrt") cfg.dump_unrt = parse_bool(key, value);
  else if (key == "out") cfg.out_dir = std::string(value);
  else if (key == "format") cfg.format = parse_format(value);
  else if (key == "ignore") {
    for (const auto& g : text::split(value, ',')) {
      const auto t = text::trim(g);
      if (!t.empty()) cfg.ignore_globs.emplace_back(t);
    }
  } else if (key == "exclude_dirs") {
    cfg.excluded_dirs.clear();
    for (const auto& g : text::split(value, ',')) {
      const auto t = text::trim(g);
      if (!t.empty()) cfg.excluded_dirs.emplace_back(t);
    }
  } else if (key == "max_file_bytes") cfg.max_file_bytes = parse_uint(key, value);
  else if (key == "markers") cfg.markers_file = std::string(value);
  else if (key == "registry") cfg.registry_file = std::string(value);
  else if (key == "stdlib") cfg.stdlib_file = std::string(value);
  else if (key == "registry_remote") cfg.registry_remote = value;
  else if (key == "literal_depth") cfg.literal_depth = parse_uint(key, value);
  else throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
}

// Flat `key = value` document; '#' starts a comment line. Surrounding quotes
// on values are stripped.
inline void load_config_text(AnalyzerConfig& cfg, std::string_view doc) {
  std::istringstream in{std::string(doc)};
  std::string line;
  std::uint32_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key{text::trim(body.substr(0, eq))};
    auto value = text::trim(body.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    apply_setting(cfg, key, value);
  }
}

inline void load_config_file(AnalyzerConfig& cfg, const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  load_config_text(cfg, ss.str());
}

}  // namespace agentlint
