#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentlint/data/markers.hpp"
#include "agentlint/data/python_stdlib.hpp"
#include "agentlint/error.hpp"
#include "agentlint/text.hpp"

namespace agentlint {

// Name lists driving the offline heuristics and the structural extractors.
struct Markers {
  std::vector<std::string> llm_client_constructors;
  std::vector<std::string> completion_calls;
  std::vector<std::string> llm_name_patterns;
  std::vector<std::string> agent_name_patterns;
  std::vector<std::string> tool_markers;
  std::vector<std::string> tool_decorators;
  std::vector<std::string> tool_directories;
  std::vector<std::string> tool_exec_names;
  std::vector<std::string> name_attributes;
  std::vector<std::string> description_attributes;
  std::vector<std::string> credential_patterns;
  std::vector<std::string> stop_keywords;
  std::vector<std::string> model_keywords;
  std::vector<std::string> parse_error_keywords;
  std::vector<std::string> tool_collection_hints;
  std::vector<std::string> dispatch_hints;  // selector variables compared in tool dispatch
  std::vector<std::string> type_check_calls;
  std::set<std::string> stopwords;

  static Markers from_json(const nlohmann::json& j) {
    Markers m;
    auto list = [&](const char* key, std::vector<std::string>& out) {
      if (!j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("markers: missing key '") + key + "'");
      out = j.at(key).get<std::vector<std::string>>();
    };
    list("llm_client_constructors", m.llm_client_constructors);
    list("completion_calls", m.completion_calls);
    list("llm_name_patterns", m.llm_name_patterns);
    list("agent_name_patterns", m.agent_name_patterns);
    list("tool_markers", m.tool_markers);
    list("tool_decorators", m.tool_decorators);
    list("tool_directories", m.tool_directories);
    list("tool_exec_names", m.tool_exec_names);
    list("name_attributes", m.name_attributes);
    list("description_attributes", m.description_attributes);
    list("credential_patterns", m.credential_patterns);
    list("stop_keywords", m.stop_keywords);
    list("model_keywords", m.model_keywords);
    list("parse_error_keywords", m.parse_error_keywords);
    list("tool_collection_hints", m.tool_collection_hints);
    list("dispatch_hints", m.dispatch_hints);
    list("type_check_calls", m.type_check_calls);
    std::vector<std::string> sw;
    list("stopwords", sw);
    m.stopwords.insert(sw.begin(), sw.end());
    return m;
  }

  static const Markers& defaults() {
    static const Markers m = from_json(nlohmann::json::parse(data::kMarkersJson));
    return m;
  }

  // --- predicates shared by extractors and the heuristic backend -------

  static bool in(const std::vector<std::string>& list, std::string_view s) {
    return std::find(list.begin(), list.end(), s) != list.end();
  }

  static bool dotted_suffix(std::string_view path, std::string_view suffix) {
    if (path == suffix) return true;
    return path.size() > suffix.size() && path.ends_with(suffix) && path[path.size() - suffix.size() - 1] == '.';
  }

  bool is_completion_call(std::string_view callee_path) const {
    for (const auto& c : completion_calls) {
      if (dotted_suffix(callee_path, c)) return true;
    }
    return false;
  }

  bool is_client_constructor(std::string_view callee_path) const {
    for (const auto& c : llm_client_constructors) {
      if (dotted_suffix(callee_path, c)) return true;
    }
    return false;
  }

  static bool matches_any(const std::vector<std::string>& globs, const std::string& name) {
    for (const auto& g : globs) {
      if (text::glob_match(g, name, true)) return true;
    }
    return false;
  }

  bool is_tool_base(std::string_view base) const {
    const auto last = text::last_component(base);
    for (const auto& t : tool_markers) {
      if (last.find(t) != std::string_view::npos) return true;
    }
    return false;
  }

  bool is_tool_decorator(std::string_view decorator) const { return in(tool_decorators, text::last_component(decorator)); }

  bool is_credential_name(std::string_view name) const {
    const auto lower = text::to_lower(name);
    for (const auto& p : credential_patterns) {
      if (lower.find(p) != std::string::npos) return true;
    }
    return false;
  }

  bool in_tool_directory(std::string_view file) const {
    const auto parts = text::split(file, '/');
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (in(tool_directories, text::to_lower(parts[i]))) return true;
    }
    return false;
  }

  // Content tokens: lowercased word pieces minus stopwords, with a crude
  // plural/verb "s" strip so "expressions" meets "expression".
  std::set<std::string> content_tokens(std::string_view s) const {
    std::set<std::string> out;
    for (auto w : text::word_tokens(s)) {
      if (w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's') w.pop_back();
      if (w.size() < 2 || stopwords.contains(w)) continue;
      if (std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
      out.insert(w);
    }
    return out;
  }
};

inline Markers load_markers(const std::filesystem::path& file) {
  if (file.empty()) return Markers::defaults();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read markers file " + file.string());
  try {
    return Markers::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "markers file " + file.string() + ": " + e.what());
  }
}

inline std::set<std::string> stdlib_from_json(const nlohmann::json& j) {
  const auto mods = j.at("modules").get<std::vector<std::string>>();
  return {mods.begin(), mods.end()};
}

inline const std::set<std::string>& default_stdlib() {
  static const std::set<std::string> s = stdlib_from_json(nlohmann::json::parse(data::kStdlibJson));
  return s;
}

inline std::set<std::string> load_stdlib(const std::filesystem::path& file) {
  if (file.empty()) return default_stdlib();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read stdlib list " + file.string());
  try {
    return stdlib_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "stdlib list " + file.string() + ": " + e.what());
  }
}

}  // namespace agentlint
