#pragma once

// Random reports for round-trip and purity properties.

#include <random>
#include <string>
#include <vector>

#include "agentlint/report.hpp"

namespace rnd {

using namespace agentlint;

inline DefectFinding finding(DefectId id, std::string file, std::uint32_t line, std::string subject) {
  DefectFinding f;
  f.defect = id;
  f.severity = id == DefectId::EPDD ? Severity::Warning : Severity::Defect;
  f.file = std::move(file);
  f.span = {line, line + 2};
  f.subject = std::move(subject);
  f.rationale = "because";
  return f;
}

inline std::string text(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {"a", "Z", " ", "\n", "\"", "\\", "\t", "é", "日本", "🙂", "{", "}", "\x01"};
  std::string s;
  const int n = std::uniform_int_distribution<int>(0, 12)(rng);
  for (int i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

inline agentlint::DefectReport report(std::mt19937& rng) {
  agentlint::ReportMeta meta;
  meta.generated_at = "2026-01-01T00:00:00Z";
  meta.project_root = "/" + text(rng);
  meta.config.strict = rng() % 2;
  meta.config.batch_size = 1 + rng() % 20;
  meta.parse_failures.push_back({"bad.py", static_cast<std::uint32_t>(rng() % 50), text(rng)});
  meta.skipped.push_back({"big.py", "too large"});
  meta.errors.push_back({DefectId::LARD, ErrorCode::BackendUnreachable, text(rng)});
  meta.notes.push_back(text(rng));
  meta.locators = {{"llm_init", nullptr}, {"tool_instances", {text(rng)}}};
  std::vector<agentlint::DefectFinding> fs;
  const int n = rng() % 6;
  for (int i = 0; i < n; ++i) {
    auto f = finding(kAllDefects[rng() % kAllDefects.size()], "f" + std::to_string(rng() % 3) + ".py",
                     1 + rng() % 40, text(rng));
    f.rationale = text(rng);
    SourceSnippet s;
    s.file = f.file;
    s.span = f.span;
    s.bytes = {rng() % 100, 100 + rng() % 100, f.span.start, f.span.end};
    s.text = text(rng);
    s.enclosing_qualname = "m.C.f";
    f.evidence.snippets.push_back(s);
    f.evidence.facts = {{"k", text(rng)}, {"n", static_cast<int>(rng() % 9)}, {"list", {1, "x", nullptr}}};
    fs.push_back(f);
  }
  return build_report(fs, meta);
}

}  // namespace rnd
