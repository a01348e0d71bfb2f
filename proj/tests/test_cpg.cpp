#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "agentlint/cpg.hpp"
#include "support/synthetic.hpp"

using namespace agentlint;

namespace {

CodePropertyGraph graph_of(std::vector<std::pair<std::string, std::string>> files) {
  return build_cpg(snapshot_from_sources(std::move(files)));
}

std::set<std::tuple<std::string, std::string, EdgeKind>> named_edges(const CodePropertyGraph& g) {
  std::set<std::tuple<std::string, std::string, EdgeKind>> out;
  for (const auto& e : g.edges()) out.emplace(g.node(e.src).name, g.node(e.dst).name, e.kind);
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("agentlint_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cpg, InheritContainsCalls) {
  auto g = graph_of({{"p.py",
                      "class B:\n"
                      "    pass\n"
                      "class A(B):\n"
                      "    def m(self):\n"
                      "        f()\n"
                      "def f():\n"
                      "    return 1\n"}});
  EXPECT_TRUE(validate_cpg(g).empty());
  const auto edges = named_edges(g);
  EXPECT_TRUE(edges.contains({"p.A", "p.B", EdgeKind::Inherits}));
  EXPECT_TRUE(edges.contains({"p.A", "p.A.m", EdgeKind::Contains}));
  EXPECT_TRUE(edges.contains({"p.A.m", "p.f", EdgeKind::Calls}));
  std::size_t structural = 0;
  for (const auto& e : g.edges()) structural += e.kind != EdgeKind::DefUse;
  EXPECT_EQ(structural, 3u);
  // the extractor over raw lines agrees
  const auto ex = synth::extract({{"p.py",
                                   "class B:\n    pass\nclass A(B):\n    def m(self):\n        f()\ndef f():\n"
                                   "    return 1\n"}});
  EXPECT_EQ(ex.inherits, (std::set<std::pair<std::string, std::string>>{{"A", "B"}}));
  EXPECT_EQ(ex.contains, (std::set<std::pair<std::string, std::string>>{{"A", "m"}}));
}

TEST(Cpg, ClassNodeCarriesBases) {
  auto g = graph_of({{"t.py", "class GitHubAction(BaseTool):\n    name: str = \"\"\n"}});
  ASSERT_GE(g.nodes().size(), 1u);
  EXPECT_EQ(g.node(0).kind, NodeKind::Class);
  EXPECT_EQ(g.node(0).name, "t.GitHubAction");
  EXPECT_EQ(g.meta(0).short_name, "GitHubAction");
  EXPECT_EQ(g.meta(0).bases, std::vector<std::string>{"BaseTool"});
}

TEST(Cpg, AssignmentWithLiteral) {
  auto g = graph_of({{"x.py", "x = 1\n"}});
  ASSERT_EQ(g.nodes().size(), 2u);
  EXPECT_EQ(g.node(0).kind, NodeKind::Assignment);
  EXPECT_EQ(g.node(1).kind, NodeKind::Literal);
  EXPECT_EQ(g.node(1).name, "1");
}

TEST(Cpg, EmptyFileGivesEmptyGraph) {
  auto g = graph_of({{"empty.py", ""}});
  EXPECT_TRUE(g.nodes().empty());
  EXPECT_TRUE(g.edges().empty());
}

TEST(Cpg, ParseFailuresAreRecordedNotFatal) {
  auto g = graph_of({{"bad.py", "(\n"}, {"good.py", "def ok():\n    return 1\n"}});
  ASSERT_EQ(g.parse_failures().size(), 1u);
  EXPECT_EQ(g.parse_failures()[0].file, "bad.py");
  EXPECT_EQ(g.parse_failures()[0].line, 1u);
  EXPECT_EQ(g.nodes().size(), 2u);
}

TEST(Cpg, ImportsPackageFromBothFiles) {
  auto g = graph_of({{"Path/Agent.py", "from pydantic import BaseModel\nimport os\nfrom .Tools import Python_repl\n"},
                     {"Path/Tools/Python_repl.py", "from pydantic import BaseModel, Field\n"}});
  std::set<std::string> from_files;
  for (const auto& e : g.edges()) {
    if (e.kind != EdgeKind::ImportsPackage) continue;
    if (g.node(e.dst).name == "pydantic") from_files.insert(g.node(e.src).file);
  }
  // os is outside the project as well (stdlib filtering happens in enrich)
  EXPECT_TRUE(from_files.contains("Path/Agent.py"));
  EXPECT_TRUE(from_files.contains("Path/Tools/Python_repl.py"));
  std::set<std::string> packages;
  for (NodeId i = 0; i < g.nodes().size(); ++i) {
    if (g.meta(i).package) packages.insert(g.node(i).name);
  }
  EXPECT_EQ(packages, (std::set<std::string>{"os", "pydantic"}));
}

TEST(Cpg, CallResolutionPrecedence) {
  auto g = graph_of({{"a.py",
                      "from b import helper\n"
                      "def local():\n"
                      "    pass\n"
                      "class Base:\n"
                      "    def shared(self):\n"
                      "        pass\n"
                      "class C(Base):\n"
                      "    def run(self):\n"
                      "        def inner():\n"
                      "            pass\n"
                      "        inner()\n"
                      "        self.shared()\n"
                      "        local()\n"
                      "        helper()\n"
                      "        unique_elsewhere()\n"
                      "        print('x')\n"
                      "        C()\n"},
                     {"b.py", "def helper():\n    pass\ndef unique_elsewhere():\n    pass\n"}});
  std::vector<std::string> callees;
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::Calls) callees.push_back(g.node(e.dst).name + (g.meta(e.dst).stub ? "?" : ""));
  }
  EXPECT_EQ(callees, (std::vector<std::string>{"a.C.run.inner", "a.Base.shared", "a.local", "b.helper",
                                               "b.unique_elsewhere", "print?", "C?"}));
}

TEST(Cpg, DefUseKillsAndBranches) {
  auto g = graph_of({{"d.py",
                      "def f(c):\n"
                      "    x = 1\n"
                      "    x = 2\n"
                      "    g(x)\n"
                      "    y = 1\n"
                      "    if c:\n"
                      "        y = 2\n"
                      "    h(y)\n"
                      "class K:\n"
                      "    STOP = 'Observation:'\n"
                      "    def run(self):\n"
                      "        call(stop=self.STOP)\n"}});
  EXPECT_TRUE(validate_cpg(g).empty());
  std::vector<std::pair<std::uint32_t, std::string>> du;  // def line, use name
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::DefUse) du.emplace_back(g.node(e.src).span.start, g.node(e.dst).name);
  }
  std::sort(du.begin(), du.end());
  EXPECT_EQ(du, (std::vector<std::pair<std::uint32_t, std::string>>{
                    {3, "g"}, {5, "h"}, {7, "h"}, {10, "call"}}));
}

TEST(Cpg, NodeIdsDenseAndInDocumentOrder) {
  auto g = graph_of({{"b.py", "def z():\n    a()\n"}, {"a.py", "class Q:\n    x = 'v'\n"}});
  for (std::size_t i = 0; i < g.nodes().size(); ++i) EXPECT_EQ(g.node(static_cast<NodeId>(i)).id, i);
  EXPECT_EQ(g.node(0).file, "a.py");
  std::pair<std::string, std::uint32_t> prev{"", 0};
  for (const auto& n : g.nodes()) {
    if (n.file.empty()) continue;
    std::pair<std::string, std::uint32_t> cur{n.file, n.span.start};
    EXPECT_LE(prev, cur);
    prev = cur;
  }
}

TEST(Cpg, SyntheticProjectsMatchGroundTruth) {
  std::mt19937 rng(1234);
  for (int round = 0; round < 60; ++round) {
    auto p = synth::generate(rng);
    auto g = graph_of(p.sources);
    ASSERT_TRUE(validate_cpg(g).empty());
    ASSERT_TRUE(g.parse_failures().empty());
    std::set<std::pair<std::string, std::string>> inherits, contains;
    std::multiset<std::pair<std::string, std::string>> calls;
    for (const auto& e : g.edges()) {
      const auto a = synth::short_name(g.node(e.src));
      const auto b = synth::short_name(g.node(e.dst));
      if (e.kind == EdgeKind::Inherits) inherits.insert({a, b});
      if (e.kind == EdgeKind::Contains) contains.insert({a, b});
      if (e.kind == EdgeKind::Calls) calls.insert({a, b});
    }
    EXPECT_EQ(inherits, p.inherits);
    EXPECT_EQ(contains, p.contains);
    const std::multiset<std::pair<std::string, std::string>> truth(p.calls.begin(), p.calls.end());
    EXPECT_EQ(calls, truth);
    const auto ex = synth::extract(p.sources);
    EXPECT_EQ(ex.inherits, p.inherits);
    EXPECT_EQ(ex.contains, p.contains);
    const std::multiset<std::pair<std::string, std::string>> ex_calls(ex.calls.begin(), ex.calls.end());
    EXPECT_EQ(ex_calls, calls);
    // id stability
    EXPECT_EQ(graph_of(p.sources), g);
  }
}

TEST(Cpg, ExportImportRoundTrip) {
  auto dir = temp_dir("graph");
  CodePropertyGraph empty;
  auto files = export_graph(empty, dir / "empty");
  EXPECT_EQ(std::filesystem::file_size(files.nodes), 0u);
  EXPECT_EQ(std::filesystem::file_size(files.edges), 0u);
  EXPECT_EQ(import_graph(dir / "empty"), empty);

  CodePropertyGraph one({GraphNode{0, NodeKind::Class, "A", "a.py", {1, 2}}}, {});
  files = export_graph(one, dir / "one");
  std::ifstream in(files.nodes);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++count;
    auto j = nlohmann::json::parse(line);
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    EXPECT_EQ(keys, (std::set<std::string>{"id", "kind", "name", "file", "span"}));
  }
  EXPECT_EQ(count, 1u);

  std::mt19937 rng(99);
  for (int i = 0; i < 20; ++i) {
    auto g = graph_of(synth::generate(rng).sources);
    export_graph(g, dir / "rt");
    EXPECT_EQ(import_graph(dir / "rt"), g);
  }
  std::filesystem::remove_all(dir);
}

TEST(Cpg, ImportRejectsMalformedFiles) {
  auto dir = temp_dir("bad");
  std::ofstream(dir / "nodes.jsonl") << "{not json\n";
  std::ofstream(dir / "edges.jsonl") << "";
  EXPECT_THROW(import_graph(dir), Error);
  EXPECT_THROW(import_graph(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Cpg, ValidatorFlagsBadEdges) {
  CodePropertyGraph g({GraphNode{0, NodeKind::Call, "x", "a.py", {1, 1}}, GraphNode{1, NodeKind::Class, "A", "a.py", {1, 1}}},
                      {GraphEdge{0, 1, EdgeKind::Inherits}, GraphEdge{0, 7, EdgeKind::Calls}});
  EXPECT_EQ(validate_cpg(g).size(), 2u);
}
