#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentlint/config.hpp"
#include "agentlint/cpg.hpp"
#include "agentlint/defects.hpp"
#include "agentlint/ingest.hpp"
#include "agentlint/oracles.hpp"
#include "agentlint/text.hpp"

#ifndef AGENTLINT_VERSION
#define AGENTLINT_VERSION "0.0.0"
#endif

namespace agentlint {

inline constexpr std::size_t kRationaleLimit = 2048;

struct ConfigEcho {
  std::string backend;
  std::string model;
  std::uint32_t n = 10;
  std::vector<std::string> enabled;
  bool strict = false;

  friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

inline ConfigEcho echo_config(const AnalyzerConfig& cfg) {
  ConfigEcho e;
  e.backend = cfg.backend.kind == BackendKind::Remote ? "remote" : "heuristic";
  e.model = cfg.backend.kind == BackendKind::Remote ? cfg.backend.model : "";
  e.n = cfg.batch_size;
  for (auto id : kAllDefects) {
    if (cfg.enabled.contains(id)) e.enabled.emplace_back(to_string(id));
  }
  e.strict = cfg.strict;
  return e;
}

struct DefectReport {
  std::string tool_version;
  std::string generated_at;
  std::string project_root;
  ConfigEcho config;
  std::vector<ParseFailureRecord> parse_failures;
  std::vector<SkippedEntry> skipped;
  nlohmann::json locators = nlohmann::json::object();
  std::vector<DefectFinding> findings;
  std::map<std::string, std::size_t> stats;
  std::vector<OracleError> errors;
  std::vector<std::string> notes;

  bool has_findings() const {
    for (const auto& [k, v] : stats) {
      if (v) return true;
    }
    return false;
  }

  friend bool operator==(const DefectReport&, const DefectReport&) = default;
};

struct ReportMeta {
  std::string project_root;
  AnalyzerConfig config;
  std::vector<ParseFailureRecord> parse_failures;
  std::vector<SkippedEntry> skipped;
  nlohmann::json locators = nlohmann::json::object();
  std::vector<OracleError> errors;
  std::vector<std::string> notes;
  std::string generated_at;  // empty: now
};

inline std::string utc_now_rfc3339() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string truncate_rationale(const std::string& s) {
  if (s.size() <= kRationaleLimit) return s;
  static constexpr std::string_view marker = " [truncated]";
  return s.substr(0, text::utf8_prefix(s, kRationaleLimit - marker.size())) + std::string(marker);
}

inline DefectReport build_report(std::vector<DefectFinding> findings, const ReportMeta& meta) {
  DefectReport r;
  r.tool_version = AGENTLINT_VERSION;
  r.generated_at = meta.generated_at.empty() ? utc_now_rfc3339() : meta.generated_at;
  r.project_root = meta.project_root;
  r.config = echo_config(meta.config);
  r.parse_failures = meta.parse_failures;
  r.skipped = meta.skipped;
  r.locators = meta.locators;
  r.errors = meta.errors;
  r.notes = meta.notes;
  for (auto id : kAllDefects) r.stats[std::string(to_string(id))] = 0;
  for (auto& f : findings) {
    f.rationale = truncate_rationale(f.rationale);
    f.remediation = std::string(remediation(f.defect));
    ++r.stats[std::string(to_string(f.defect))];
  }
  std::stable_sort(findings.begin(), findings.end(), finding_less);
  r.findings = std::move(findings);
  return r;
}

// --- JSON -----------------------------------------------------------------

namespace report_detail {

inline nlohmann::json snippet_json(const SourceSnippet& s) {
  return {{"file", s.file},
          {"start", s.span.start},
          {"end", s.span.end},
          {"byte_begin", s.bytes.begin},
          {"byte_end", s.bytes.end},
          {"text", s.text},
          {"enclosing", s.enclosing_qualname}};
}

inline SourceSnippet snippet_from(const nlohmann::json& j) {
  SourceSnippet s;
  s.file = j.at("file").get<std::string>();
  s.span = {j.at("start").get<std::uint32_t>(), j.at("end").get<std::uint32_t>()};
  s.bytes = {j.at("byte_begin").get<std::size_t>(), j.at("byte_end").get<std::size_t>(), s.span.start, s.span.end};
  s.text = j.at("text").get<std::string>();
  s.enclosing_qualname = j.at("enclosing").get<std::string>();
  return s;
}

inline ErrorCode parse_error_code(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::ConfigError); ++i) {
    if (to_string(static_cast<ErrorCode>(i)) == s) return static_cast<ErrorCode>(i);
  }
  throw Error(ErrorCode::IoError, "unknown error code '" + s + "' in report");
}

inline DefectId defect_from(const nlohmann::json& j) {
  const auto id = parse_defect_id(j.get<std::string>());
  if (!id) throw Error(ErrorCode::IoError, "unknown defect id in report");
  return *id;
}

}  // namespace report_detail

inline nlohmann::json finding_json(const DefectFinding& f) {
  nlohmann::json snippets = nlohmann::json::array();
  for (const auto& s : f.evidence.snippets) snippets.push_back(report_detail::snippet_json(s));
  return {{"defect", std::string(to_string(f.defect))},
          {"title", std::string(defect_title(f.defect))},
          {"severity", std::string(to_string(f.severity))},
          {"file", f.file},
          {"span", {{"start", f.span.start}, {"end", f.span.end}}},
          {"subject", f.subject},
          {"evidence", {{"snippets", snippets}, {"facts", f.evidence.facts}}},
          {"rationale", f.rationale},
          {"remediation", f.remediation}};
}

inline nlohmann::json report_json(const DefectReport& r) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : r.findings) findings.push_back(finding_json(f));
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& p : r.parse_failures) failures.push_back({{"file", p.file}, {"line", p.line}, {"message", p.message}});
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"path", s.path}, {"reason", s.reason}});
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : r.errors) {
    errors.push_back({{"oracle", std::string(to_string(e.oracle))},
                      {"code", std::string(to_string(e.code))},
                      {"message", e.message}});
  }
  return {{"tool", "agentlint"},
          {"tool_version", r.tool_version},
          {"generated_at", r.generated_at},
          {"project_root", r.project_root},
          {"config",
           {{"backend", r.config.backend},
            {"model", r.config.model},
            {"n", r.config.n},
            {"enabled", r.config.enabled},
            {"strict", r.config.strict}}},
          {"parse_failures", failures},
          {"skipped_files", skipped},
          {"locators", r.locators},
          {"findings", findings},
          {"stats", r.stats},
          {"oracle_errors", errors},
          {"notes", r.notes}};
}

// Canonical form: sorted keys, two-space indent, non-ASCII as \u escapes,
// LF line endings, trailing newline.
inline std::string render_json(const DefectReport& r) {
  return report_json(r).dump(2, ' ', true) + "\n";
}

inline DefectReport report_from_json(const nlohmann::json& j) {
  using namespace report_detail;
  DefectReport r;
  try {
    r.tool_version = j.at("tool_version").get<std::string>();
    r.generated_at = j.at("generated_at").get<std::string>();
    r.project_root = j.at("project_root").get<std::string>();
    const auto& c = j.at("config");
    r.config = {c.at("backend").get<std::string>(), c.at("model").get<std::string>(), c.at("n").get<std::uint32_t>(),
                c.at("enabled").get<std::vector<std::string>>(), c.at("strict").get<bool>()};
    for (const auto& p : j.at("parse_failures")) {
      r.parse_failures.push_back(
          {p.at("file").get<std::string>(), p.at("line").get<std::uint32_t>(), p.at("message").get<std::string>()});
    }
    for (const auto& s : j.at("skipped_files")) {
      r.skipped.push_back({s.at("path").get<std::string>(), s.at("reason").get<std::string>()});
    }
    r.locators = j.at("locators");
    for (const auto& fj : j.at("findings")) {
      DefectFinding f;
      f.defect = defect_from(fj.at("defect"));
      f.severity = fj.at("severity").get<std::string>() == "Warning" ? Severity::Warning : Severity::Defect;
      f.file = fj.at("file").get<std::string>();
      f.span = {fj.at("span").at("start").get<std::uint32_t>(), fj.at("span").at("end").get<std::uint32_t>()};
      f.subject = fj.at("subject").get<std::string>();
      for (const auto& s : fj.at("evidence").at("snippets")) f.evidence.snippets.push_back(snippet_from(s));
      f.evidence.facts = fj.at("evidence").at("facts");
      f.rationale = fj.at("rationale").get<std::string>();
      f.remediation = fj.at("remediation").get<std::string>();
      r.findings.push_back(std::move(f));
    }
    r.stats = j.at("stats").get<std::map<std::string, std::size_t>>();
    for (const auto& e : j.at("oracle_errors")) {
      r.errors.push_back({defect_from(e.at("oracle")), parse_error_code(e.at("code").get<std::string>()),
                          e.at("message").get<std::string>()});
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed report: ") + e.what());
  }
  return r;
}

inline DefectReport parse_report(std::string_view text) {
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::IoError, std::string("report is not JSON: ") + e.what());
  }
}

// --- markdown -------------------------------------------------------------

inline std::string render_markdown(const DefectReport& r) {
  std::ostringstream md;
  md << "# agentlint report\n\n";
  md << "- Project: `" << r.project_root << "`\n";
  md << "- Generated: " << r.generated_at << " (agentlint " << r.tool_version << ")\n";
  md << "- Backend: " << r.config.backend;
  if (!r.config.model.empty()) md << " (" << r.config.model << ")";
  md << ", n = " << r.config.n << (r.config.strict ? ", strict" : "") << "\n";
  md << "- Oracles: " << text::join(r.config.enabled, ", ") << "\n";
  if (!r.parse_failures.empty()) {
    md << "- Files that failed to parse: " << r.parse_failures.size() << "\n";
    for (const auto& p : r.parse_failures) md << "  - `" << p.file << "` line " << p.line << ": " << p.message << "\n";
  }
  for (const auto& e : r.errors) md << "- Oracle " << to_string(e.oracle) << " failed: " << e.message << "\n";
  for (const auto& n : r.notes) md << "- Note: " << n << "\n";
  md << "\n";

  if (r.findings.empty()) {
    md << "No defects detected.\n";
    return md.str();
  }
  md << "| Defect | Count |\n|---|---|\n";
  for (auto id : kAllDefects) {
    const auto it = r.stats.find(std::string(to_string(id)));
    md << "| " << to_string(id) << " " << defect_title(id) << " | " << (it == r.stats.end() ? 0 : it->second)
       << " |\n";
  }
  for (auto id : kAllDefects) {
    std::vector<const DefectFinding*> mine;
    for (const auto& f : r.findings) {
      if (f.defect == id) mine.push_back(&f);
    }
    if (mine.empty()) continue;
    md << "\n## " << to_string(id) << ": " << defect_title(id) << " (" << mine.size() << ")\n\n";
    md << defect_definition(id) << "\n";
    for (const auto* f : mine) {
      md << "\n### " << f->file << ":" << f->span.start << " " << f->subject << "\n\n";
      md << "- Severity: " << to_string(f->severity) << "\n";
      md << "- Location: `" << f->file << "` lines " << f->span.start << "-" << f->span.end << "\n";
      for (const auto& s : f->evidence.snippets) {
        if (s.text.empty()) continue;
        md << "\n`" << s.file << "` lines " << s.span.start << "-" << s.span.end << ":\n\n```python\n" << s.text;
        if (s.text.back() != '\n') md << "\n";
        md << "```\n";
      }
      md << "\nRationale: " << f->rationale << "\n\n";
      md << "Remediation: " << f->remediation << "\n";
    }
  }
  return md.str();
}

}  // namespace agentlint
