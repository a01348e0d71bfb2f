// agentlint: static defect detection for LLM agent projects written in Python.
//
//   agentlint analyze <root> [--backend heuristic|remote] [--config f] [--out dir]
//                            [--format json|md|both] [--only IDS] [--strict]
//                            [--dump-graph] [--dump-unrt]
//   agentlint dump-graph <root> [--config f] [--out dir]
//
// Exit: 0 clean, 1 findings, 2 usage/config error, 3 fatal analysis error.
// Nothing goes to stdout; progress and diagnostics go to stderr.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "agentlint/agentlint.hpp"

namespace {

using namespace agentlint;

struct Flags {
  std::string root;
  std::string config_file;
  std::optional<std::string> backend, out, format, only;
  bool strict = false, dump_graph = false, dump_unrt = false;
};

// file first, flags on top
AnalyzerConfig resolve_config(const Flags& f) {
  AnalyzerConfig cfg;
  if (!f.config_file.empty()) load_config_file(cfg, f.config_file);
  if (f.backend) apply_setting(cfg, "backend", *f.backend);
  if (f.out) apply_setting(cfg, "out", *f.out);
  if (f.format) apply_setting(cfg, "format", *f.format);
  if (f.only) apply_setting(cfg, "only", *f.only);
  if (f.strict) cfg.strict = true;
  if (f.dump_graph) cfg.dump_graph = true;
  if (f.dump_unrt) cfg.dump_unrt = true;
  cfg.validate();
  return cfg;
}

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::RootNotFound:
    case ErrorCode::ConfigError:
    case ErrorCode::AuthMissing:
      return kExitUsage;
    default:
      return kExitFatal;
  }
}

int run_analyze(const Flags& f) {
  const auto cfg = resolve_config(f);
  std::cerr << "agentlint: analyzing " << f.root << " (backend "
            << (cfg.backend.kind == BackendKind::Remote ? "remote" : "heuristic") << ")\n";
  const auto outcome = analyze(f.root, cfg);
  const auto& r = outcome.report;
  for (const auto& p : r.parse_failures) std::cerr << "agentlint: parse failure " << p.file << ":" << p.line << ": " << p.message << "\n";
  for (const auto& e : r.errors) std::cerr << "agentlint: oracle " << to_string(e.oracle) << " failed: " << e.message << "\n";
  for (const auto& n : r.notes) std::cerr << "agentlint: note: " << n << "\n";
  for (const auto& p : write_report(r, cfg)) std::cerr << "agentlint: wrote " << p.string() << "\n";
  std::cerr << "agentlint: " << outcome.files << " files, " << r.findings.size() << " findings\n";
  if (outcome.all_failed_to_parse) std::cerr << "agentlint: every source file failed to parse\n";
  return outcome.exit_code();
}

int run_dump_graph(const Flags& f) {
  const auto cfg = resolve_config(f);
  const auto snapshot = std::make_shared<const ProjectSnapshot>(discover_project(f.root, cfg));
  const auto g = build_cpg(parse_project(snapshot));
  const auto files = export_graph(g, cfg.out_dir);
  std::cerr << "agentlint: " << g.nodes().size() << " nodes, " << g.edges().size() << " edges -> "
            << files.nodes.string() << ", " << files.edges.string() << "\n";
  for (const auto& p : g.parse_failures()) std::cerr << "agentlint: parse failure " << p.file << ":" << p.line << ": " << p.message << "\n";
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agentlint: find agent-specific defects in LLM agent projects"};
  app.require_subcommand(1);
  Flags f;

  auto* analyze_cmd = app.add_subcommand("analyze", "Run every enabled defect oracle and write the report");
  analyze_cmd->add_option("root", f.root, "Project root directory")->required();
  analyze_cmd->add_option("--config", f.config_file, "Flat key = value config file");
  analyze_cmd->add_option("--backend", f.backend, "Reasoner backend: heuristic or remote");
  analyze_cmd->add_option("--out", f.out, "Output directory (default ./agentlint-out)");
  analyze_cmd->add_option("--format", f.format, "json, md or both");
  analyze_cmd->add_option("--only", f.only, "Comma-separated defect ids to run");
  analyze_cmd->add_flag("--strict", f.strict, "Unknown model capability becomes a warning");
  analyze_cmd->add_flag("--dump-graph", f.dump_graph, "Also write graph/nodes.jsonl and graph/edges.jsonl");
  analyze_cmd->add_flag("--dump-unrt", f.dump_unrt, "Also write unrt.txt");

  auto* dump_cmd = app.add_subcommand("dump-graph", "Write nodes.jsonl and edges.jsonl only");
  dump_cmd->add_option("root", f.root, "Project root directory")->required();
  dump_cmd->add_option("--config", f.config_file, "Flat key = value config file");
  dump_cmd->add_option("--out", f.out, "Output directory (default ./agentlint-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "agentlint: " << e.what() << "\n" << "run 'agentlint --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (analyze_cmd->parsed()) return run_analyze(f);
    return run_dump_graph(f);
  } catch (const Error& e) {
    std::cerr << "agentlint: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "agentlint: fatal: " << e.what() << "\n";
    return kExitFatal;
  }
}
