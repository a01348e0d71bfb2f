#pragma once

#include <memory>
#include <sstream>
#include <string>

#include "agentlint/ingest.hpp"
#include "agentlint/oracles.hpp"

namespace fixtures {

inline std::filesystem::path path(const std::string& name) { return std::filesystem::path(AGENTLINT_FIXTURES) / name; }

inline std::shared_ptr<const agentlint::ProjectSnapshot> snapshot(const std::string& name,
                                                                  const agentlint::AnalyzerConfig& cfg = {}) {
  return std::make_shared<agentlint::ProjectSnapshot>(agentlint::discover_project(path(name), cfg));
}

inline std::unique_ptr<agentlint::OracleContext> context(const std::string& name, agentlint::AnalyzerConfig cfg = {}) {
  auto snap = snapshot(name, cfg);
  auto backend = std::make_shared<agentlint::HeuristicBackend>();
  backend->set_batch_limit(cfg.batch_size);
  return std::make_unique<agentlint::OracleContext>(snap, cfg, backend);
}

inline std::unique_ptr<agentlint::OracleContext> context_from_sources(
    std::vector<std::pair<std::string, std::string>> sources, agentlint::AnalyzerConfig cfg = {}) {
  auto snap = std::make_shared<agentlint::ProjectSnapshot>(agentlint::snapshot_from_sources(std::move(sources)));
  auto backend = std::make_shared<agentlint::HeuristicBackend>();
  backend->set_batch_limit(cfg.batch_size);
  return std::make_unique<agentlint::OracleContext>(snap, cfg, backend);
}

inline std::string describe(const std::vector<agentlint::DefectFinding>& fs) {
  std::ostringstream out;
  for (const auto& f : fs) {
    out << to_string(f.defect) << ' ' << f.file << ':' << f.span.start << ' ' << f.subject << " | " << f.rationale
        << '\n';
  }
  return out.str();
}

}  // namespace fixtures
