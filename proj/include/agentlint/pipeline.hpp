#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "agentlint/config.hpp"
#include "agentlint/cpg.hpp"
#include "agentlint/ingest.hpp"
#include "agentlint/markers.hpp"
#include "agentlint/oracles.hpp"
#include "agentlint/reasoner.hpp"
#include "agentlint/registry.hpp"
#include "agentlint/report.hpp"
#include "agentlint/unrt.hpp"

namespace agentlint {

// Exit codes of `agentlint analyze`.
enum ExitCode : int { kExitClean = 0, kExitFindings = 1, kExitUsage = 2, kExitFatal = 3 };

struct DataFiles {
  Markers markers;
  ModelCapabilityRegistry registry;
  std::set<std::string> stdlib;
};

inline DataFiles load_data_files(const AnalyzerConfig& cfg) {
  return {cfg.markers_file.empty() ? Markers::defaults() : load_markers(cfg.markers_file),
          cfg.registry_file.empty() ? ModelCapabilityRegistry::defaults() : ModelCapabilityRegistry::load(cfg.registry_file),
          cfg.stdlib_file.empty() ? default_stdlib() : load_stdlib(cfg.stdlib_file)};
}

struct AnalysisOutcome {
  DefectReport report;
  std::size_t files = 0;
  bool all_failed_to_parse = false;

  int exit_code() const {
    if (report.has_findings()) return kExitFindings;
    if (all_failed_to_parse || !report.errors.empty()) return kExitFatal;
    return kExitClean;
  }
};

struct AnalyzeOptions {
  Transport transport;       // remote backend only; empty = real HTTP
  std::string generated_at;  // empty = now
};

inline AnalysisOutcome analyze_snapshot(std::shared_ptr<const ProjectSnapshot> snapshot, const AnalyzerConfig& cfg,
                                        const AnalyzeOptions& opts = {}) {
  cfg.validate();
  auto data = load_data_files(cfg);
  std::shared_ptr<const ReasonerBackend> backend = make_backend(cfg, data.markers, opts.transport);
  OracleContext ctx(snapshot, cfg, backend, data.markers, data.registry, data.stdlib);

  if (cfg.dump_graph) export_graph(ctx.cpg(), cfg.out_dir / "graph");
  if (cfg.dump_unrt) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream(cfg.out_dir / "unrt.txt", std::ios::binary | std::ios::trunc) << dump_unrt(ctx.unrt());
  }

  auto run = run_all(ctx);
  ReportMeta meta;
  meta.project_root = snapshot->root.lexically_normal().generic_string();
  if (meta.project_root.size() > 1 && meta.project_root.back() == '/') meta.project_root.pop_back();
  meta.config = cfg;
  meta.parse_failures = ctx.cpg().parse_failures();
  meta.skipped = snapshot->skipped;
  meta.locators = locator_summary(ctx);
  meta.errors = run.errors;
  meta.notes = ctx.notes;
  meta.generated_at = opts.generated_at;

  AnalysisOutcome out;
  out.files = snapshot->files.size();
  out.all_failed_to_parse = out.files > 0 && meta.parse_failures.size() >= out.files;
  out.report = build_report(std::move(run.findings), meta);
  return out;
}

inline AnalysisOutcome analyze(const std::filesystem::path& root, const AnalyzerConfig& cfg,
                               const AnalyzeOptions& opts = {}) {
  cfg.validate();
  auto snapshot = std::make_shared<const ProjectSnapshot>(discover_project(root, cfg));
  return analyze_snapshot(std::move(snapshot), cfg, opts);
}

inline void write_text_file(const std::filesystem::path& file, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + file.string());
}

inline std::vector<std::filesystem::path> write_report(const DefectReport& r, const AnalyzerConfig& cfg) {
  std::vector<std::filesystem::path> written;
  if (cfg.format != OutputFormat::Markdown) {
    written.push_back(cfg.out_dir / "report.json");
    write_text_file(written.back(), render_json(r));
  }
  if (cfg.format != OutputFormat::Json) {
    written.push_back(cfg.out_dir / "report.md");
    write_text_file(written.back(), render_markdown(r));
  }
  return written;
}

}  // namespace agentlint
