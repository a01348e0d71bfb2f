// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "agentlint/agentlint.hpp"
#include "support/fixtures.hpp"
#include "support/random_report.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace agentlint;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

int failures = 0;

void report_line(const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream line;
  line << (o.ok ? "PASS" : "FAIL") << "  " << name << "  (" << std::fixed;
  line.precision(2);
  line << secs << " s)";
  if (!o.detail.empty()) line << "  " << o.detail;
  std::cout << line.str() << std::endl;
  if (!o.ok) ++failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("agentlint-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the installed CLI with an empty environment (no secrets, no proxies).
int run_cli(const std::string& args) {
  const std::string cmd = "env -i " + std::string(AGENTLINT_BIN) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const std::vector<std::string> kFixtures = {"adal_code_model", "ieti_blank_registration", "lope_parsing_disabled",    "tre_bare_return",
                                            "als_mnft_final_tool", "lard_empty_key", "epdd_shared_package", "clean"};

// --- criteria -------------------------------------------------------------------

Outcome seeded_recall() {
  Outcome o;
  const std::map<std::string, std::set<std::string>> seeded = {
      {"adal_code_model", {"ADAL"}}, {"ieti_blank_registration", {"IETI"}},         {"lope_parsing_disabled", {"LOPE"}}, {"tre_bare_return", {"TRE"}},
      {"als_mnft_final_tool", {"ALS", "MNFT"}}, {"lard_empty_key", {"LARD"}}, {"epdd_shared_package", {"EPDD"}}};
  const auto t0 = std::chrono::steady_clock::now();
  std::set<std::string> types_found;
  std::size_t seeded_total = 0, seeded_hit = 0;
  for (const auto& fx : kFixtures) {
    const auto out = scratch("recall") / fx;
    const int rc = run_cli("analyze " + fixtures::path(fx).string() + " --backend heuristic --format json --out " +
                           out.string());
    const auto report = parse_report(slurp(out / "report.json"));
    if (fx == "clean") {
      if (!report.findings.empty() || rc != kExitClean) {
        o.fail("clean fixture: " + std::to_string(report.findings.size()) + " findings, exit " + std::to_string(rc));
      }
      continue;
    }
    if (rc != kExitFindings) o.fail(fx + ": exit " + std::to_string(rc));
    for (const auto& id : seeded.at(fx)) {
      ++seeded_total;
      if (report.stats.at(id) > 0) {
        ++seeded_hit;
        types_found.insert(id);
      } else {
        o.fail(fx + ": missed " + id);
      }
    }
  }
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 10.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.ok) {
    o.detail = std::to_string(seeded_hit) + "/" + std::to_string(seeded_total) + " seeded defects, " +
               std::to_string(types_found.size()) + "/8 types, clean fixture silent";
  }
  return o;
}

Outcome unrt_equivalence() {
  Outcome o;
  std::mt19937 rng(2024);
  std::size_t occ = 0;
  for (int round = 0; round < 200; ++round) {
    const auto p = synth::generate(rng, 20, 50);
    const auto g = build_cpg(snapshot_from_sources(p.sources));
    const auto got = synth::occurrences(build_unrt(g));
    const auto want = synth::enumerate_unrt(g);
    occ += want.size();
    if (got != want) o.fail("project " + std::to_string(round) + ": occurrence multisets differ");
  }
  if (o.ok) o.detail = "200 projects, " + std::to_string(occ) + " occurrences";
  return o;
}

// Expected evaluation order, computed from the occurrence fields alone:
// part, then layer, then document order (graph id) for trunk and branch
// nodes; leaves follow their branch's document order, then attachment order.
std::vector<std::size_t> expected_order(const Unrt& t) {
  std::vector<std::size_t> idx(t.nodes().size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto key = [&](std::size_t i) {
    const auto& u = t.nodes()[i];
    const NodeId doc = u.part == Part::Leaf ? t.nodes()[u.parent].graph_id : u.graph_id;
    const std::size_t tie = u.part == Part::Leaf ? i : 0;
    return std::make_tuple(static_cast<int>(u.part), u.layer, doc, tie);
  };
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key(a) < key(b); });
  return idx;
}

Outcome layered_ordering() {
  Outcome o;
  std::mt19937 rng(31337);
  int cases = 0, misses = 0;
  while (cases < 100) {
    const auto p = synth::generate(rng, 12, 30);
    const auto g = build_cpg(snapshot_from_sources(p.sources));
    const auto t = build_unrt(g);
    if (t.nodes().empty()) continue;
    ++cases;
    const auto order = expected_order(t);
    const bool absent = rng() % 10 == 0;
    const NodeId target = absent ? kNoNode : t.nodes()[rng() % t.nodes().size()].graph_id;
    const std::size_t n = 1 + rng() % 10;

    std::vector<std::size_t> log;
    const auto hit = layered_search(
        t,
        [&](const std::vector<const UnifiedNode*>& batch) -> std::optional<std::size_t> {
          std::optional<std::size_t> first;
          for (std::size_t i = 0; i < batch.size(); ++i) {
            log.push_back(batch[i]->index);
            if (!first && batch[i]->graph_id == target) first = i;
          }
          return first;
        },
        n);

    // where the search must stop: end of the batch holding the first match
    std::size_t pos = order.size();
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (t.nodes()[order[i]].graph_id == target) {
        pos = i;
        break;
      }
    }
    std::size_t stop = order.size();
    if (pos < order.size()) {
      const auto& m = t.nodes()[order[pos]];
      std::size_t g0 = pos;
      while (g0 > 0 && t.nodes()[order[g0 - 1]].part == m.part && t.nodes()[order[g0 - 1]].layer == m.layer) --g0;
      std::size_t g1 = pos + 1;
      while (g1 < order.size() && t.nodes()[order[g1]].part == m.part && t.nodes()[order[g1]].layer == m.layer) ++g1;
      stop = std::min(g1, g0 + ((pos - g0) / n + 1) * n);
    } else {
      ++misses;
    }
    const std::vector<std::size_t> want(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(stop));
    if (log != want) o.fail("case " + std::to_string(cases) + ": evaluation log out of order");
    if (pos < order.size() && (!hit || hit->index != order[pos])) o.fail("case " + std::to_string(cases) + ": wrong hit");
    if (pos == order.size() && hit) o.fail("case " + std::to_string(cases) + ": hit without a match");
  }
  if (o.ok) o.detail = "100 cases (" + std::to_string(misses) + " without a match)";
  return o;
}

Outcome round_trips() {
  Outcome o;
  std::mt19937 rng(4242);
  const auto dir = scratch("graphs");
  for (int i = 0; i < 100; ++i) {
    const auto g = build_cpg(snapshot_from_sources(synth::generate(rng).sources));
    export_graph(g, dir);
    if (!(import_graph(dir) == g)) o.fail("graph " + std::to_string(i) + " differs after import");
  }
  for (int i = 0; i < 100; ++i) {
    const auto r = rnd::report(rng);
    const auto bytes = render_json(r);
    const auto back = parse_report(bytes);
    if (!(back == r) || render_json(back) != bytes) o.fail("report " + std::to_string(i) + " differs after parse");
  }
  if (o.ok) o.detail = "100 graphs, 100 reports";
  return o;
}

// Tool files under tools/, agent files at the top; each file imports a
// random subset of packages.
Outcome epdd_equivalence() {
  Outcome o;
  std::mt19937 rng(909);
  const std::vector<std::string> pkgs = {"numpy", "pydantic", "requests", "langchain", "openai", "yaml", "torch", "httpx"};
  std::size_t expected_total = 0;
  for (int round = 0; round < 100; ++round) {
    const int tools = 1 + static_cast<int>(rng() % 4);
    const int agents = 1 + static_cast<int>(rng() % 3);
    std::vector<std::pair<std::string, std::string>> sources;
    std::map<std::string, std::set<std::string>> imports;  // file -> packages
    auto random_imports = [&](const std::string& file) {
      std::string src;
      for (const auto& p : pkgs) {
        if (rng() % 3 == 0) {
          src += rng() % 2 ? "import " + p + "\n" : "from " + p + " import thing\n";
          imports[file].insert(p);
        }
      }
      if (rng() % 2) src += "import os\n";  // stdlib never counts
      return src;
    };
    sources.emplace_back("tools/base.py", "class Tool:\n    def run(self, x):\n        return x\n");
    for (int t = 0; t < tools; ++t) {
      const std::string file = "tools/t" + std::to_string(t) + ".py";
      std::string src = random_imports(file);
      src += "from tools.base import Tool\n\n\nclass T" + std::to_string(t) + "(Tool):\n    name = \"t" +
             std::to_string(t) + "\"\n    description = \"tool number " + std::to_string(t) +
             "\"\n\n    def run(self, x):\n        return x\n";
      sources.emplace_back(file, src);
    }
    for (int a = 0; a < agents; ++a) {
      const std::string file = "agent" + std::to_string(a) + ".py";
      sources.emplace_back(file, random_imports(file) + "\n\ndef step" + std::to_string(a) + "(x):\n    return x\n");
    }

    // brute force: tool file's packages intersected with every other file's
    std::set<std::string> want;
    for (int t = 0; t < tools; ++t) {
      const std::string file = "tools/t" + std::to_string(t) + ".py";
      for (const auto& pkg : imports[file]) {
        for (const auto& [other, set] : imports) {
          if (other != file && set.contains(pkg)) {
            want.insert("T" + std::to_string(t) + ":" + pkg);
            break;
          }
        }
      }
    }
    expected_total += want.size();

    auto ctx = fixtures::context_from_sources(sources);
    std::set<std::string> got;
    for (const auto& f : detect_epdd(*ctx)) {
      if (f.severity != Severity::Warning) o.fail("round " + std::to_string(round) + ": EPDD finding not a Warning");
      got.insert(f.subject);
    }
    if (got != want) {
      std::string diff;
      for (const auto& s : want) {
        if (!got.contains(s)) diff += " -" + s;
      }
      for (const auto& s : got) {
        if (!want.contains(s)) diff += " +" + s;
      }
      o.fail("round " + std::to_string(round) + ":" + diff);
    }
  }
  if (o.ok) o.detail = "100 import matrices, " + std::to_string(expected_total) + " overlaps";
  return o;
}

std::string without_timestamp(const std::string& json) {
  auto j = nlohmann::json::parse(json);
  j.erase("generated_at");
  return j.dump(2, ' ', true);
}

Outcome determinism() {
  Outcome o;
  for (const auto& fx : kFixtures) {
    const auto a = scratch("det-a") / fx;
    const auto b = scratch("det-b") / fx;
    run_cli("analyze " + fixtures::path(fx).string() + " --backend heuristic --out " + a.string());
    run_cli("analyze " + fixtures::path(fx).string() + " --backend heuristic --out " + b.string());
    const auto ja = slurp(a / "report.json");
    const auto jb = slurp(b / "report.json");
    if (ja.empty() || without_timestamp(ja) != without_timestamp(jb)) o.fail(fx + ": report.json differs");
    // only the generated_at line may differ byte-wise
    std::istringstream sa(ja), sb(jb);
    std::string la, lb;
    while (std::getline(sa, la) && std::getline(sb, lb)) {
      if (la != lb && la.find("\"generated_at\"") == std::string::npos) o.fail(fx + ": differs at " + la);
    }
  }
  if (o.ok) o.detail = std::to_string(kFixtures.size()) + " fixtures, two runs each";
  return o;
}

Outcome cache_transparency() {
  Outcome o;
  std::size_t compared = 0;
  for (const auto& fx : kFixtures) {
    auto shared = fixtures::context(fx);
    const auto all = run_all(*shared).findings;
    for (auto id : kAllDefects) {
      auto fresh = fixtures::context(fx);
      auto alone = oracle_for(id)(*fresh);
      std::stable_sort(alone.begin(), alone.end(), finding_less);
      std::vector<DefectFinding> slice;
      for (const auto& f : all) {
        if (f.defect == id) slice.push_back(f);
      }
      ++compared;
      if (alone != slice) o.fail(fx + "/" + std::string(to_string(id)) + ": standalone differs from run_all slice");
    }
  }
  if (o.ok) o.detail = std::to_string(compared) + " (fixture, oracle) pairs";
  return o;
}

}  // namespace

int main() {
  report_line("seeded-corpus recall", seeded_recall);
  report_line("UNRT construction equivalence", unrt_equivalence);
  report_line("layered-search ordering", layered_ordering);
  report_line("graph and report round-trip", round_trips);
  report_line("EPDD oracle equivalence", epdd_equivalence);
  report_line("determinism", determinism);
  report_line("cache transparency", cache_transparency);
  fs::remove_all(fs::temp_directory_path() / ("agentlint-acceptance-" + std::to_string(::getpid())));
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
