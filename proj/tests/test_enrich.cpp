#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "agentlint/enrich.hpp"
#include "agentlint/ingest.hpp"

using namespace agentlint;

namespace {

CodePropertyGraph graph_of(std::vector<std::pair<std::string, std::string>> files) {
  return build_cpg(snapshot_from_sources(std::move(files)));
}

NodeId by_name(const CodePropertyGraph& g, const std::string& name) {
  for (const auto& n : g.nodes()) {
    if (n.name == name && !g.meta(n.id).stub) return n.id;
  }
  ADD_FAILURE() << "no node " << name;
  return 0;
}

// First call expression in a function whose callee path ends with `suffix`.
const py::Expr* find_call(const CodePropertyGraph& g, NodeId fn, const std::string& suffix) {
  const py::Expr* hit = nullptr;
  py::walk_stmts(g.ast(fn).stmt->body, [&](const py::Stmt& s) {
    for (const auto* e : py::own_exprs(s)) {
      py::walk_expr(*e, [&](const py::Expr& x) {
        if (!hit && x.kind == py::ExprKind::Call && py::callee_path(x.children.front()).ends_with(suffix)) hit = &x;
      });
    }
  });
  return hit;
}

std::string shape(const py::Expr& e) {
  std::string s = std::to_string(static_cast<int>(e.kind)) + ":" + e.text + ":" + e.value + "(";
  for (const auto& p : e.parts) s += p + "|";
  for (const auto& c : e.children) s += shape(c) + ",";
  return s + ")";
}

std::string shape(const std::vector<py::Stmt>& body) {
  std::string s;
  for (const auto& st : body) {
    s += std::to_string(static_cast<int>(st.kind)) + ":" + st.name + "[";
    for (const auto* e : py::own_exprs(st)) s += shape(*e) + ";";
    for (const auto& p : st.params) s += "p:" + p.name + ";";
    s += shape(st.body) + "|" + shape(st.orelse) + "|" + shape(st.finalbody);
    for (const auto& h : st.handlers) s += "h:" + shape(h.body);
    s += "]";
  }
  return s;
}

const char* kStarCoderChat =
    "from pydantic import BaseModel\n"
    "from typing import List\n"
    "class ChatLLM(BaseModel):\n"
    "    def generate(self, prompt: str, stop: List[str] = None):\n"
    "        response = client.chat.completions.create(\n"
    "            model=\"file_path/StarCoder\",\n"
    "            messages=[{\"role\": \"user\", \"content\": prompt}],\n"
    "            temperature=0.6)\n"
    "        return response.choices[0].message.content\n";

const char* kGitHubTool =
    "class GitHubAction(BaseTool):\n"
    "    \"\"\"Tool for interacting with the GitHub API.\"\"\"\n"
    "    api_wrapper: GitHubAPIWrapper = Field(default_factory=GitHubAPIWrapper)\n"
    "    mode: str\n"
    "    name: str = \"\"\n"
    "    description: str = \"\"\n"
    "    args_schema: Optional[Type[BaseModel]] = None\n"
    "    retries = Field(default=3)\n"
    "    def _run(self, instructions):\n"
    "        return self.api_wrapper.run(self.mode, instructions)\n";

const char* kFinalToolAgent =
    "OBSERVATION_TOKEN = \"Observation:\"\n"
    "THOUGHT_TOKEN = \"Thought:\"\n"
    "class Agent:\n"
    "    def run(self, question: str):\n"
    "        num_loops = 0\n"
    "        previous_responses = []\n"
    "        while num_loops < self.max_loops:\n"
    "            num_loops += 1\n"
    "            generated, tool, tool_input = self.decide_next_action(question)\n"
    "            if tool == 'Final':\n"
    "                return tool_input\n"
    "            assert isinstance(tool_input, str)\n"
    "            tool_result = self.tool_by_names[tool].use(tool_input)\n"
    "            generated += f\"\\n{OBSERVATION_TOKEN} {tool_result}\\n{THOUGHT_TOKEN}\"\n"
    "            previous_responses.append(generated)\n";

}  // namespace

TEST(Snippet, ClassDefinitionText) {
  auto g = graph_of({{"chat.py", kStarCoderChat}});
  const auto s = snippet(g, by_name(g, "chat.ChatLLM"));
  EXPECT_TRUE(s.text.starts_with("class ChatLLM(BaseModel):"));
  EXPECT_EQ(s.enclosing_qualname, "chat.ChatLLM");
  EXPECT_EQ(s.file, "chat.py");
  const auto& f = g.project().snapshot->files[0];
  EXPECT_EQ(s.text, f.text.substr(s.bytes.begin, s.bytes.end - s.bytes.begin));

  const auto call = snippet(g, by_name(g, "client.chat.completions.create"));
  EXPECT_EQ(call.enclosing_qualname, "chat.ChatLLM.generate");
  EXPECT_TRUE(call.text.starts_with("client.chat.completions.create("));
}

TEST(Snippet, ZeroLengthSpanAndStubs) {
  auto g = graph_of({{"a.py", "def f():\n    print('x')\n"}});
  auto s = snippet_of_span(g, 0, py::Span{3, 3, 1, 1});
  EXPECT_TRUE(s.text.empty());
  EXPECT_EQ(s.file, "a.py");
  for (const auto& n : g.nodes()) {
    if (g.meta(n.id).stub) EXPECT_TRUE(snippet(g, n.id).text.empty());
  }
}

TEST(Snippet, StaleWhenFileDeletedOrChanged) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / ("agentlint_stale_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "a.py") << "class A:\n    x = 1\n";
  std::ofstream(dir / "b.py") << "class B:\n    y = 2\n";
  AnalyzerConfig cfg;
  auto g = build_cpg(discover_project(dir, cfg));
  EXPECT_NO_THROW(snippet(g, by_name(g, "a.A")));
  fs::remove(dir / "a.py");
  try {
    snippet(g, by_name(g, "a.A"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleSpan);
  }
  std::ofstream(dir / "b.py", std::ios::app) << "z = 3\n";
  EXPECT_THROW(snippet(g, by_name(g, "b.B")), Error);
  fs::remove_all(dir);
}

TEST(Snippet, ReparseRoundTrip) {
  auto g = graph_of({{"chat.py", kStarCoderChat}, {"gh.py", kGitHubTool}, {"ag.py", kFinalToolAgent}});
  for (const auto& n : g.nodes()) {
    if (n.kind != NodeKind::Class || g.meta(n.id).owner != kNoNode) continue;
    const auto s = snippet(g, n.id);
    SourceFile copy("copy.py", s.text);
    const auto unit = parse_source(copy);
    ASSERT_EQ(unit.body.size(), 1u);
    std::vector<py::Stmt> orig{*g.ast(n.id).stmt};
    EXPECT_EQ(shape(unit.body), shape(orig)) << n.name;
  }
}

TEST(AttributeFacts, EmptyRegistrationStrings) {
  auto g = graph_of({{"gh.py", kGitHubTool}});
  const auto facts = attribute_facts(g, by_name(g, "gh.GitHubAction"));
  std::map<std::string, AttributeFact> by;
  for (const auto& f : facts) by[f.name] = f;
  ASSERT_EQ(facts.size(), 6u);
  EXPECT_EQ(by["name"].kind, InitKind::String);
  EXPECT_EQ(by["name"].value, "");
  EXPECT_EQ(by["name"].value_type, "str");
  EXPECT_EQ(by["description"].value, "");
  EXPECT_EQ(by["mode"].kind, InitKind::Missing);
  EXPECT_EQ(by["api_wrapper"].kind, InitKind::NonLiteral);
  EXPECT_EQ(by["args_schema"].kind, InitKind::None);
  EXPECT_EQ(by["retries"].kind, InitKind::Number);
  EXPECT_EQ(by["retries"].value_type, "int");
}

TEST(AttributeFacts, ApiKeyAndEmptyClass) {
  auto g = graph_of({{"c.py",
                      "class ChatLLM(BaseModel):\n"
                      "    api_key:str = \"\"\n"
                      "class Empty:\n"
                      "    def f(self):\n"
                      "        return 1\n"}});
  const auto facts = attribute_facts(g, by_name(g, "c.ChatLLM"));
  ASSERT_EQ(facts.size(), 1u);
  EXPECT_EQ(facts[0].name, "api_key");
  EXPECT_EQ(facts[0].value, "");
  EXPECT_EQ(facts[0].kind, InitKind::String);
  EXPECT_TRUE(attribute_facts(g, by_name(g, "c.Empty")).empty());
  EXPECT_THROW(attribute_facts(g, by_name(g, "c.Empty.f")), Error);
}

TEST(ResolveLiterals, Examples) {
  auto g = graph_of({{"r.py",
                      "STOP_TOKEN = \"Observation:\"\n"
                      "def a(llm):\n"
                      "    llm.generate(stop=[STOP_TOKEN])\n"
                      "def b(llm):\n"
                      "    llm.generate(stop=[\"\\nObservation\"])\n"
                      "def c(llm):\n"
                      "    llm.generate(stop=compute())\n"}});
  auto resolve = [&](const std::string& fn) {
    const auto id = by_name(g, fn);
    const auto* call = find_call(g, id, "generate");
    return resolve_literals(g, *py::keyword_arg(*call, "stop"), ResolveScope{id, 0});
  };
  auto ra = resolve("r.a");
  EXPECT_EQ(ra.values, std::set<std::string>{"Observation:"});
  EXPECT_FALSE(ra.incomplete);
  auto rb = resolve("r.b");
  EXPECT_EQ(rb.values, std::set<std::string>{"\nObservation"});
  auto rc = resolve("r.c");
  EXPECT_TRUE(rc.values.empty());
  EXPECT_TRUE(rc.incomplete);
}

TEST(ResolveLiterals, FlowsThroughSelfParamsAndImports) {
  auto g = graph_of({{"pkg/consts.py", "STOP = ['###DONE###']\n"},
                     {"pkg/agent.py",
                      "from pkg.consts import STOP\n"
                      "class Agent:\n"
                      "    STOPS = STOP + ['Final Answer:']\n"
                      "    def __init__(self):\n"
                      "        self.extra = 'Obs' if self.flag else f'Act{self.n}'\n"
                      "    def ask(self, words):\n"
                      "        w = words\n"
                      "        w = w\n"
                      "        return self.llm.generate(stop=w)\n"
                      "    def run(self):\n"
                      "        self.ask(self.STOPS)\n"
                      "        self.ask([self.extra])\n"}});
  const auto ask = by_name(g, "pkg.agent.Agent.ask");
  const auto* call = find_call(g, ask, "generate");
  const auto unit = g.ast(ask).unit;
  const auto r = resolve_literals(g, *py::keyword_arg(*call, "stop"), ResolveScope{ask, unit});
  EXPECT_EQ(r.values, (std::set<std::string>{"###DONE###", "Final Answer:", "Obs", "Act"}));
  EXPECT_TRUE(r.incomplete);  // the f-string placeholder
  // a cap that is too small truncates
  const auto shallow = resolve_literals(g, *py::keyword_arg(*call, "stop"), ResolveScope{ask, unit}, 2);
  EXPECT_TRUE(shallow.truncated);
}

// Random assignment chains: the resolver must agree with direct
// substitution, and raising the depth cap never loses literals.
TEST(ResolveLiterals, ChainsMatchSubstitutionAndAreMonotone) {
  std::mt19937 rng(11);
  for (int round = 0; round < 150; ++round) {
    const int vars = 1 + static_cast<int>(rng() % 7);
    std::vector<std::set<std::string>> truth(vars);
    std::string body = "def f(llm):\n";
    for (int i = 0; i < vars; ++i) {
      std::vector<std::string> items;
      const int parts = 1 + static_cast<int>(rng() % 3);
      for (int p = 0; p < parts; ++p) {
        if (i > 0 && rng() % 2) {
          const int ref = static_cast<int>(rng() % i);
          items.push_back("v" + std::to_string(ref));
          truth[i].insert(truth[ref].begin(), truth[ref].end());
        } else {
          const auto lit = "w" + std::to_string(round) + "_" + std::to_string(i) + "_" + std::to_string(p);
          items.push_back("'" + lit + "'");
          truth[i].insert(lit);
        }
      }
      const bool as_list = rng() % 2;
      body += "    v" + std::to_string(i) + " = " + (as_list ? "[" : "(") + text::join(items, ", ") +
              (as_list ? "]" : ",)") + "\n";
    }
    body += "    llm.generate(stop=v" + std::to_string(vars - 1) + ")\n";
    auto g = graph_of({{"m.py", body}});
    const auto fn = by_name(g, "m.f");
    const auto* call = find_call(g, fn, "generate");
    const auto* arg = py::keyword_arg(*call, "stop");
    const auto full = resolve_literals(g, *arg, ResolveScope{fn, 0}, 64);
    EXPECT_EQ(full.values, truth[vars - 1]) << body;
    EXPECT_FALSE(full.incomplete);
    std::set<std::string> prev;
    for (std::uint32_t cap = 0; cap <= 10; ++cap) {
      const auto r = resolve_literals(g, *arg, ResolveScope{fn, 0}, cap);
      EXPECT_TRUE(std::includes(r.values.begin(), r.values.end(), prev.begin(), prev.end())) << body;
      prev = r.values;
    }
  }
}

TEST(CallContext, ToolCallWindow) {
  auto g = graph_of({{"ag.py", kFinalToolAgent}});
  const auto run = by_name(g, "ag.Agent.run");
  const auto windows = call_context(g, run, {"use"});
  ASSERT_EQ(windows.size(), 1u);
  const auto& w = windows[0];
  EXPECT_EQ(w.call_site.text, "self.tool_by_names[tool].use(tool_input)");
  EXPECT_FALSE(w.input_guards.in_try_block);
  EXPECT_EQ(w.input_guards.type_checks, std::vector<std::string>{"assert isinstance(tool_input, str)"});
  EXPECT_TRUE(w.output_guards.empty());
  EXPECT_FALSE(w.result_unused);
  EXPECT_EQ(w.output_vars, (std::vector<std::string>{"generated", "tool_result"}));
  EXPECT_EQ(w.output_scope.size(), 2u);
  EXPECT_EQ(w.guards().type_checks.size(), 1u);
  EXPECT_TRUE(call_context(g, run, {"nothing_here"}).empty());
  EXPECT_THROW(call_context(g, run, {}), Error);
}

TEST(CallContext, TryAndTypeChecks) {
  auto g = graph_of({{"t.py",
                      "class A:\n"
                      "    def go(self, prompt):\n"
                      "        try:\n"
                      "            out = self.llm.generate(prompt)\n"
                      "            if not isinstance(out, str):\n"
                      "                raise ValueError(out)\n"
                      "        except Exception:\n"
                      "            out = ''\n"
                      "        return out\n"
                      "    def bare(self, prompt):\n"
                      "        self.llm.generate(prompt)\n"
                      "    def nested(self, prompt):\n"
                      "        return parse(self.llm.generate(prompt))\n"}});
  auto w = call_context(g, by_name(g, "t.A.go"), {"generate"});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_TRUE(w[0].input_guards.in_try_block);
  EXPECT_TRUE(w[0].output_guards.in_try_block);
  EXPECT_EQ(w[0].output_guards.type_checks, std::vector<std::string>{"if not isinstance(out, str):"});
  w = call_context(g, by_name(g, "t.A.bare"), {"generate"});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_TRUE(w[0].result_unused);
  EXPECT_TRUE(w[0].input_guards.empty());
  w = call_context(g, by_name(g, "t.A.nested"), {"generate"});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_FALSE(w[0].result_unused);
  EXPECT_TRUE(w[0].output_guards.empty());
}

TEST(MissingReturn, Examples) {
  auto g = graph_of({{"s.py",
                      "class SegmentExtractTool(ToolMessage):\n"
                      "    request: str = 'extract_segments'\n"
                      "    @classmethod\n"
                      "    def instructions(cls) -> str:\n"
                      "        return \n"
                      "        \"\"\"\n"
                      "        Use this tool/function to indicate certain segments.\n"
                      "        \"\"\"\n"
                      "    def f(self):\n"
                      "        return 1\n"
                      "    def g(self):\n"
                      "        pass\n"
                      "    def __init__(self):\n"
                      "        self.x = 1\n"
                      "    def h(self) -> None:\n"
                      "        print(1)\n"
                      "    def gen(self):\n"
                      "        yield 1\n"
                      "    def todo(self):\n"
                      "        raise NotImplementedError\n"
                      "    def loop(self):\n"
                      "        while True:\n"
                      "            if self.ready():\n"
                      "                return 2\n"}});
  const auto r = functions_missing_return(g, by_name(g, "s.SegmentExtractTool"));
  std::vector<std::pair<std::string, MissingReturnReason>> got;
  for (const auto& m : r) got.emplace_back(g.meta(m.function).short_name, m.reason);
  EXPECT_EQ(got, (std::vector<std::pair<std::string, MissingReturnReason>>{
                     {"instructions", MissingReturnReason::BareReturnSplit}, {"g", MissingReturnReason::NoReturn}}));
  EXPECT_EQ(r[0].line, 5u);
}

namespace {

// Random function bodies over a small statement language, rendered to
// source and evaluated by explicit path enumeration.
struct GenStmt {
  enum Kind { Assign, Call, Pass, RetVal, RetBare, Raise, If, For, Break } kind;
  std::vector<GenStmt> body, orelse;
};

std::vector<GenStmt> gen_block(std::mt19937& rng, int& branches, int depth, bool in_loop) {
  std::vector<GenStmt> out;
  const int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    const auto r = rng() % 10;
    if (r < 2 && branches < 4 && depth < 3) {
      ++branches;
      GenStmt s{GenStmt::If, {}, {}};
      s.body = gen_block(rng, branches, depth + 1, in_loop);
      if (rng() % 2) s.orelse = gen_block(rng, branches, depth + 1, in_loop);
      out.push_back(std::move(s));
    } else if (r == 2 && branches < 4 && depth < 3) {
      ++branches;
      GenStmt s{GenStmt::For, {}, {}};
      s.body = gen_block(rng, branches, depth + 1, true);
      out.push_back(std::move(s));
    } else {
      static const GenStmt::Kind simple[] = {GenStmt::Assign, GenStmt::Call, GenStmt::Pass, GenStmt::RetVal,
                                             GenStmt::RetBare, GenStmt::Raise, GenStmt::Break};
      auto k = simple[rng() % 7];
      if (k == GenStmt::Break && !in_loop) k = GenStmt::Assign;
      out.push_back(GenStmt{k, {}, {}});
    }
  }
  return out;
}

void render(const std::vector<GenStmt>& b, int indent, std::string& out) {
  const std::string pad(indent * 4, ' ');
  for (const auto& s : b) {
    switch (s.kind) {
      case GenStmt::Assign: out += pad + "x = 1\n"; break;
      case GenStmt::Call: out += pad + "work()\n"; break;
      case GenStmt::Pass: out += pad + "pass\n"; break;
      case GenStmt::RetVal: out += pad + "return 1\n"; break;
      case GenStmt::RetBare: out += pad + "return\n"; break;
      case GenStmt::Raise: out += pad + "raise ValueError()\n"; break;
      case GenStmt::Break: out += pad + "break\n"; break;
      case GenStmt::If:
        out += pad + "if cond():\n";
        render(s.body, indent + 1, out);
        if (!s.orelse.empty()) {
          out += pad + "else:\n";
          render(s.orelse, indent + 1, out);
        }
        break;
      case GenStmt::For:
        out += pad + "for i in items():\n";
        render(s.body, indent + 1, out);
        break;
    }
  }
}

enum class End { Fall, RetVal, RetOther, Break };

// All ways a block can end, by explicit enumeration of branch choices; a
// loop body runs zero times or once.
std::set<End> paths(const std::vector<GenStmt>& b, std::size_t from = 0) {
  if (from == b.size()) return {End::Fall};
  const auto& s = b[from];
  auto then = [&](const std::set<End>& ends) {
    std::set<End> out;
    for (auto e : ends) {
      if (e == End::Fall) {
        auto rest = paths(b, from + 1);
        out.insert(rest.begin(), rest.end());
      } else {
        out.insert(e);
      }
    }
    return out;
  };
  switch (s.kind) {
    case GenStmt::RetVal: return {End::RetVal};
    case GenStmt::RetBare:
    case GenStmt::Raise: return {End::RetOther};
    case GenStmt::Break: return {End::Break};
    case GenStmt::If: {
      auto a = paths(s.body);
      auto c = s.orelse.empty() ? std::set<End>{End::Fall} : paths(s.orelse);
      a.insert(c.begin(), c.end());
      return then(a);
    }
    case GenStmt::For: {
      std::set<End> ends{End::Fall};
      for (auto e : paths(s.body)) ends.insert(e == End::Break ? End::Fall : e);
      return then(ends);
    }
    default: return then({End::Fall});
  }
}

bool has_split(const std::vector<GenStmt>& b) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].kind == GenStmt::RetBare && i + 1 < b.size() && b[i + 1].kind == GenStmt::Call) return true;
    if (has_split(b[i].body) || has_split(b[i].orelse)) return true;
  }
  return false;
}

}  // namespace

TEST(MissingReturn, AgreesWithPathEnumeration) {
  std::mt19937 rng(2024);
  int flagged = 0;
  for (int round = 0; round < 400; ++round) {
    int branches = 0;
    auto body = gen_block(rng, branches, 0, false);
    std::string src = "def f():\n";
    render(body, 1, src);
    auto g = graph_of({{"p.py", src}});
    const auto r = function_missing_return(g, by_name(g, "p.f"));
    const bool stub = std::all_of(body.begin(), body.end(), [](const GenStmt& s) { return s.kind == GenStmt::Raise; });
    std::optional<MissingReturnReason> expect;
    if (has_split(body)) expect = MissingReturnReason::BareReturnSplit;
    else if (!stub && !paths(body).contains(End::RetVal)) expect = MissingReturnReason::NoReturn;
    if (!expect) {
      EXPECT_TRUE(r.empty()) << src;
    } else {
      ASSERT_FALSE(r.empty()) << src;
      EXPECT_EQ(r[0].reason, *expect) << src;
      ++flagged;
    }
  }
  EXPECT_GT(flagged, 20);
}

TEST(ImportSets, Examples) {
  auto g = graph_of({{"Path/Agent.py", "from pydantic import BaseModel\nimport os\nfrom .Tools import Python_repl\n"
                                       "class Agent(BaseModel):\n    pass\n"},
                     {"Path/Tools/Python_repl.py",
                      "from pydantic import BaseModel, Field\nimport sys\nclass PythonREPL(BaseModel):\n    pass\n"}});
  auto s = import_sets(g, {"Path/Tools/Python_repl.py"});
  EXPECT_EQ(s.inside, std::set<std::string>{"pydantic"});
  EXPECT_EQ(s.outside, std::set<std::string>{"pydantic"});
  s = import_sets(g, {"Path/Agent.py", "Path/Tools/Python_repl.py"});
  EXPECT_TRUE(s.outside.empty());
  EXPECT_THROW(import_sets(g, {"missing.py"}), Error);

  auto std_only = graph_of({{"a.py", "import os\nimport json\nfrom collections import OrderedDict\n"},
                            {"b.py", "import re\nfrom . import a\n"}});
  s = import_sets(std_only, {"a.py"});
  EXPECT_TRUE(s.inside.empty());
  EXPECT_TRUE(s.outside.empty());
}

TEST(ImportSets, UnionEqualsBruteForce) {
  std::mt19937 rng(8);
  const std::vector<std::string> pkgs{"numpy", "pydantic", "requests", "os", "json", "langchain", "openai", "local"};
  for (int round = 0; round < 50; ++round) {
    std::vector<std::pair<std::string, std::string>> files;
    std::set<std::string> all;
    const int nf = 1 + static_cast<int>(rng() % 4);
    for (int f = 0; f < nf; ++f) {
      std::string src;
      for (const auto& p : pkgs) {
        if (rng() % 3 == 0) {
          src += (rng() % 2 ? "import " + p + "\n" : "from " + p + " import thing\n");
          if (p != "os" && p != "json" && p != "local") all.insert(p);
        }
      }
      files.emplace_back("f" + std::to_string(f) + ".py", src + "x = 1\n");
    }
    files.emplace_back("local.py", "y = 2\n");
    auto g = graph_of(files);
    std::set<std::string> part;
    for (const auto& [p, _] : files) {
      if (rng() % 2) part.insert(p);
    }
    const auto s = import_sets(g, part);
    std::set<std::string> u = s.inside;
    u.insert(s.outside.begin(), s.outside.end());
    EXPECT_EQ(u, all);
  }
}
