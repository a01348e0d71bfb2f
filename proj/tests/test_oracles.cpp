#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "agentlint/oracles.hpp"
#include "support/fixtures.hpp"

using namespace agentlint;

namespace {

const std::vector<std::string> kFixtures = {"adal_code_model", "ieti_blank_registration",  "lope_parsing_disabled",  "tre_bare_return", "als_mnft_final_tool",
                                            "lard_empty_key", "epdd_shared_package", "clean"};

std::vector<DefectFinding> only(const std::vector<DefectFinding>& fs, DefectId id) {
  std::vector<DefectFinding> out;
  for (const auto& f : fs) {
    if (f.defect == id) out.push_back(f);
  }
  return out;
}

std::vector<std::string> models(OracleContext& ctx) {
  locate_llm_init(ctx);
  std::vector<std::string> out;
  for (const auto& m : ctx.caches.model_names.get()) out.push_back(m.model);
  return out;
}

// a small well-behaved agent; tests splice in one deviation each
const char* kLlm = R"(import os
from openai import OpenAI


class ChatLLM:
    def __init__(self):
        self.client = OpenAI(api_key=os.environ["OPENAI_API_KEY"])

    def generate(self, prompt, stop):
        response = self.client.chat.completions.create(model="gpt-4o", messages=[prompt], stop=stop)
        return response.choices[0].message.content
)";

std::string echo_tool(const std::string& ret) {
  return R"(from langchain.tools import BaseTool


class EchoTool(BaseTool):
    name: str = "echo"
    description: str = "Echo the text back"

    def run(self, text: str) -> str:
        return )" + ret + "\n";
}

const char* kAgent = R"(from llm import ChatLLM
from tools.echo import EchoTool


class Agent:
    def __init__(self):
        self.llm = ChatLLM()
        self.tools = {"echo": EchoTool()}

    def step(self, prompt: str) -> str:
        try:
            reply = self.llm.generate(prompt, stop=["STOPWORD"])
        except Exception:
            return "model unavailable"
        if not isinstance(reply, str):
            return "bad model output"
        return reply
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  if (at != std::string::npos) s.replace(at, from.size(), to);
  return s;
}

}  // namespace

// --- seeded fixtures ----------------------------------------------------------

TEST(Fixtures, EachSeededDefectIsFound) {
  struct Case {
    std::string fixture;
    std::vector<std::pair<DefectId, std::string>> expected;  // defect, subject
  };
  const std::vector<Case> cases = {
      {"adal_code_model", {{DefectId::ADAL, "file_path/StarCoder"}}},
      {"ieti_blank_registration", {{DefectId::IETI, "GitHubAction"}}},
      {"lope_parsing_disabled", {{DefectId::LOPE, "initialize_agent"}}},
      {"tre_bare_return", {{DefectId::TRE, "instructions"}}},
      {"als_mnft_final_tool", {{DefectId::ALS, "FinalTool:Final"}, {DefectId::MNFT, "self.tool_by_names[].use"}}},
      {"lard_empty_key", {{DefectId::LARD, "client.chat.completions.create"}}},
      {"epdd_shared_package", {{DefectId::EPDD, "PythonREPL:pydantic"}}},
      {"clean", {}},
  };
  for (const auto& c : cases) {
    auto ctx = fixtures::context(c.fixture);
    const auto r = run_all(*ctx);
    EXPECT_TRUE(r.errors.empty()) << c.fixture;
    std::vector<std::pair<DefectId, std::string>> got;
    for (const auto& f : r.findings) got.emplace_back(f.defect, f.subject);
    EXPECT_EQ(got, c.expected) << c.fixture << "\n" << fixtures::describe(r.findings);
  }
}

TEST(Fixtures, SeededLocations) {
  auto at = [](const std::string& fx, DefectId id) {
    auto ctx = fixtures::context(fx);
    const auto fs = only(run_all(*ctx).findings, id);
    EXPECT_EQ(fs.size(), 1u) << fx;
    return fs.empty() ? std::string() : fs[0].file + ":" + std::to_string(fs[0].span.start);
  };
  EXPECT_EQ(at("adal_code_model", DefectId::ADAL), "chat_llm.py:9");
  EXPECT_EQ(at("ieti_blank_registration", DefectId::IETI), "github_tool.py:8");
  EXPECT_EQ(at("lope_parsing_disabled", DefectId::LOPE), "agent.py:7");
  EXPECT_EQ(at("tre_bare_return", DefectId::TRE), "segment_tool.py:13");
  EXPECT_EQ(at("als_mnft_final_tool", DefectId::ALS), "agent.py:41");
  EXPECT_EQ(at("als_mnft_final_tool", DefectId::MNFT), "agent.py:71");
  EXPECT_EQ(at("lard_empty_key", DefectId::LARD), "chat_llm.py:14");
}

// --- locators -------------------------------------------------------------------

TEST(Locators, LlmInitAndModelNames) {
  auto starcoder = fixtures::context("adal_code_model");
  const auto n2 = locate_llm_init(*starcoder);
  ASSERT_TRUE(n2);
  EXPECT_EQ(n2->name, "chat_llm.ChatLLM");
  EXPECT_EQ(models(*starcoder), std::vector<std::string>{"file_path/StarCoder"});

  auto gpt = fixtures::context("lard_empty_key");
  const auto n8 = locate_llm_init(*gpt);
  ASSERT_TRUE(n8);
  EXPECT_EQ(n8->name, "chat_llm.ChatLLM");
  EXPECT_EQ(models(*gpt), std::vector<std::string>{"gpt-4o"});
}

TEST(Locators, EmptyProjectFindsNothing) {
  auto ctx = fixtures::context_from_sources({{"consts.py", "X = 1\nY = 'two'\n"}});
  EXPECT_FALSE(locate_llm_init(*ctx));
  EXPECT_FALSE(locate_agent_init(*ctx));
  EXPECT_FALSE(locate_tool_init(*ctx));
  const auto r = run_all(*ctx);
  EXPECT_TRUE(r.findings.empty()) << fixtures::describe(r.findings);
  EXPECT_TRUE(r.errors.empty());
  const auto summary = locator_summary(*ctx);
  EXPECT_TRUE(summary["llm_init"].is_null());
  EXPECT_TRUE(summary["agent_init"].is_null());
}

TEST(Locators, TriggerWordsOfFinalToolAgent) {
  auto ctx = fixtures::context("als_mnft_final_tool");
  const auto& tw = locate_trigger_words(*ctx);
  EXPECT_EQ(tw.words, (std::set<std::string>{"Final", "Observation:"}));
}

TEST(Locators, SummaryMarksUnrunSlots) {
  auto ctx = fixtures::context("epdd_shared_package");
  EXPECT_EQ(locator_summary(*ctx)["llm_init"], "not run");
  run_all(*ctx, {DefectId::EPDD});
  EXPECT_EQ(locator_summary(*ctx)["llm_init"], "not run");
  EXPECT_NE(locator_summary(*ctx)["tool_instances"], "not run");
}

// --- per-oracle examples ------------------------------------------------------

TEST(Adal, GeneralChatModelIsFine) {
  auto ctx = fixtures::context("lard_empty_key");
  EXPECT_TRUE(detect_adal(*ctx).empty());
}

TEST(Adal, UnknownModelOnlyWarnsInStrictMode) {
  const std::string llm = replace(kLlm, "\"gpt-4o\"", "\"acme-internal-7\"");
  auto lax = fixtures::context_from_sources({{"llm.py", llm}, {"agent.py", kAgent}});
  EXPECT_TRUE(detect_adal(*lax).empty());
  AnalyzerConfig cfg;
  cfg.strict = true;
  auto strict = fixtures::context_from_sources({{"llm.py", llm}, {"agent.py", kAgent}}, cfg);
  const auto fs = detect_adal(*strict);
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].severity, Severity::Warning);
  EXPECT_EQ(fs[0].subject, "acme-internal-7");
}

TEST(Ieti, ConsistentCalculatorIsFine) {
  auto ctx = fixtures::context("clean");
  EXPECT_TRUE(detect_ieti(*ctx).empty());
  const auto& tools = locate_tool_instances(*ctx);
  ASSERT_EQ(tools.size(), 1u);
  EXPECT_EQ(tools[0].name, "CalculatorTool");
}

TEST(Ieti, NoToolsNoFindings) {
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}});
  EXPECT_TRUE(locate_tool_instances(*ctx).empty());
  EXPECT_TRUE(detect_ieti(*ctx).empty());
  EXPECT_TRUE(detect_tre(*ctx).empty());
  EXPECT_TRUE(detect_epdd(*ctx).empty());
}

TEST(Ieti, DecoratedFunctionTools) {
  const char* src = R"(from langchain.tools import tool


@tool("weather")
def weather(city: str) -> str:
    """Look up the current weather for a city"""
    return "sunny in " + city


@tool
def mystery(x):
    return x
)";
  auto ctx = fixtures::context_from_sources({{"tools.py", src}});
  const auto& tools = locate_tool_instances(*ctx);
  std::set<std::string> names;
  for (const auto& t : tools) names.insert(t.name);
  EXPECT_TRUE(names.contains("weather"));
  EXPECT_TRUE(names.contains("mystery"));
  const auto fs = detect_ieti(*ctx);
  ASSERT_EQ(fs.size(), 1u) << fixtures::describe(fs);
  EXPECT_EQ(fs[0].subject, "mystery");
}

TEST(Lope, GuardedCallIsFine) {
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}, {"agent.py", kAgent}, {"tools/echo.py", echo_tool("text")}});
  const auto fs = detect_lope(*ctx);
  EXPECT_TRUE(fs.empty()) << fixtures::describe(fs);
}

TEST(Lope, UnguardedOutputIsFlagged) {
  const std::string agent = replace(kAgent, "        if not isinstance(reply, str):\n            return \"bad model output\"\n", "");
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}, {"agent.py", agent}, {"tools/echo.py", echo_tool("text")}});
  const auto fs = detect_lope(*ctx);
  ASSERT_EQ(fs.size(), 1u) << fixtures::describe(fs);
  EXPECT_EQ(fs[0].file, "agent.py");
  EXPECT_EQ(fs[0].span.start, 12u);
}

TEST(Lope, NoLlmCallsNoFindings) {
  auto ctx = fixtures::context_from_sources({{"tools/echo.py", echo_tool("text")}});
  EXPECT_TRUE(detect_lope(*ctx).empty());
}

TEST(Tre, ReturningToolIsFine) {
  auto ctx = fixtures::context("clean");
  EXPECT_TRUE(detect_tre(*ctx).empty());
}

TEST(Tre, MissingReturnIsFlagged) {
  const std::string tool = replace(echo_tool("text"), "        return text\n", "        print(text)\n");
  auto ctx = fixtures::context_from_sources({{"tools/echo.py", tool}});
  const auto fs = detect_tre(*ctx);
  ASSERT_EQ(fs.size(), 1u) << fixtures::describe(fs);
  EXPECT_EQ(fs[0].subject, "run");
}

TEST(Als, DisjointTriggerWordsAreFine) {
  const std::string agent = replace(kAgent, "STOPWORD", "###DONE###");
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}, {"agent.py", agent}, {"tools/echo.py", echo_tool("text")}});
  EXPECT_EQ(locate_trigger_words(*ctx).words, std::set<std::string>{"###DONE###"});
  EXPECT_TRUE(detect_als(*ctx).empty());
}

TEST(Als, ReturnLiteralCollidesWithStopWord) {
  const std::string agent = replace(kAgent, "STOPWORD", "Observation:");
  auto ctx = fixtures::context_from_sources(
      {{"llm.py", kLlm}, {"agent.py", agent}, {"tools/echo.py", echo_tool("\"Observation:\"")}});
  const auto fs = detect_als(*ctx);
  ASSERT_EQ(fs.size(), 1u) << fixtures::describe(fs);
  EXPECT_EQ(fs[0].evidence.facts.at("word"), "Observation:");
  // the reported word is in both resolved sets
  const auto& words = locate_trigger_words(*ctx).words;
  EXPECT_TRUE(words.contains("Observation:"));
}

TEST(Mnft, GuardedToolCallIsFine) {
  auto ctx = fixtures::context("clean");
  EXPECT_TRUE(detect_mnft(*ctx).empty());
}

TEST(Mnft, AgentWithoutToolCallsIsFine) {
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}, {"agent.py", kAgent}, {"tools/echo.py", echo_tool("text")}});
  EXPECT_TRUE(detect_mnft(*ctx).empty());
}

TEST(Mnft, FinalToolCallIsOutputSide) {
  auto ctx = fixtures::context("als_mnft_final_tool");
  const auto fs = detect_mnft(*ctx);
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_NE(fs[0].rationale.find("output"), std::string::npos);
  EXPECT_EQ(fs[0].rationale.find("input"), std::string::npos);
}

TEST(Lard, EnvironmentKeyWithStopIsFine) {
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}, {"agent.py", kAgent}});
  EXPECT_TRUE(detect_lard(*ctx).empty());
}

TEST(Lard, MissingStopWhileTriggerWordsExist) {
  const std::string llm = replace(kLlm, ", stop=stop)", ")");
  auto ctx = fixtures::context_from_sources({{"llm.py", llm}, {"agent.py", kAgent}});
  const auto fs = detect_lard(*ctx);
  ASSERT_EQ(fs.size(), 1u) << fixtures::describe(fs);
  EXPECT_EQ(fs[0].file, "llm.py");
}

TEST(Lard, NoLlmNoFindings) {
  auto ctx = fixtures::context_from_sources({{"tools/echo.py", echo_tool("text")}});
  EXPECT_TRUE(detect_lard(*ctx).empty());
}

TEST(Epdd, SharedPydanticWarning) {
  auto ctx = fixtures::context("epdd_shared_package");
  const auto fs = detect_epdd(*ctx);
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].severity, Severity::Warning);
  EXPECT_EQ(fs[0].subject, "PythonREPL:pydantic");
}

TEST(Epdd, PrivatePackageIsFine) {
  const std::string tool = "import numpy\n" + echo_tool("text");
  auto ctx = fixtures::context_from_sources({{"llm.py", kLlm}, {"agent.py", kAgent}, {"tools/echo.py", tool}});
  // langchain/openai only appear on one side each
  EXPECT_TRUE(detect_epdd(*ctx).empty()) << fixtures::describe(detect_epdd(*ctx));
}

// --- run_all ------------------------------------------------------------------

TEST(RunAll, OnlyEpdd) {
  AnalyzerConfig cfg;
  cfg.enabled = {DefectId::EPDD};
  auto ctx = fixtures::context("epdd_shared_package", cfg);
  const auto r = run_all(*ctx);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].defect, DefectId::EPDD);
  EXPECT_EQ(r.findings[0].severity, Severity::Warning);
}

TEST(RunAll, SortedAndSeverityAndLocality) {
  for (const auto& fx : kFixtures) {
    auto ctx = fixtures::context(fx);
    const auto r = run_all(*ctx);
    EXPECT_TRUE(std::is_sorted(r.findings.begin(), r.findings.end(), finding_less)) << fx;
    for (const auto& f : r.findings) {
      EXPECT_EQ(f.severity, f.defect == DefectId::EPDD ? Severity::Warning : Severity::Defect) << fx;
      const auto* file = ctx->snapshot().find(f.file);
      ASSERT_NE(file, nullptr) << fx << " " << f.file;
      EXPECT_GE(f.span.start, 1u);
      EXPECT_LE(f.span.start, f.span.end);
      EXPECT_LE(f.span.end, file->line_index.line_count()) << fx;
    }
  }
}

TEST(RunAll, OracleFailureIsIsolated) {
  struct Broken : HeuristicBackend {
    std::vector<ReasonerVerdict> ask_all(const std::vector<ReasonerQuestion>&) const override {
      throw Error(ErrorCode::BackendUnreachable, "down");
    }
  };
  auto snap = fixtures::snapshot("epdd_shared_package");
  OracleContext ctx(snap, {}, std::make_shared<Broken>());
  const auto r = run_all(ctx);
  EXPECT_FALSE(r.errors.empty());
  for (const auto& e : r.errors) EXPECT_EQ(e.code, ErrorCode::BackendUnreachable);
}

TEST(RunAll, DeterministicUnderHeuristic) {
  for (const auto& fx : kFixtures) {
    auto a = fixtures::context(fx);
    auto b = fixtures::context(fx);
    EXPECT_EQ(run_all(*a).findings, run_all(*b).findings) << fx;
  }
}

TEST(RunAll, CacheTransparency) {
  for (const auto& fx : kFixtures) {
    auto shared = fixtures::context(fx);
    const auto all = run_all(*shared).findings;
    for (auto id : kAllDefects) {
      auto fresh = fixtures::context(fx);
      auto alone = oracle_for(id)(*fresh);
      std::stable_sort(alone.begin(), alone.end(), finding_less);
      EXPECT_EQ(alone, only(all, id)) << fx << " " << to_string(id);
    }
  }
}

TEST(Caches, WriteOnce) {
  WriteOnce<int> slot;
  EXPECT_FALSE(slot.has());
  slot.set(3);
  EXPECT_TRUE(slot.has());
  EXPECT_EQ(slot.get(), 3);
  try {
    slot.set(4);
    FAIL() << "second write accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
  EXPECT_EQ(slot.get(), 3);
}

TEST(Caches, LocatorsRunOnce) {
  auto ctx = fixtures::context("als_mnft_final_tool");
  const auto* first = &locate_tool_instances(*ctx);
  const auto* second = &locate_tool_instances(*ctx);
  EXPECT_EQ(first, second);
  EXPECT_EQ(locate_agent_init(*ctx)->graph_id, locate_agent_init(*ctx)->graph_id);
}
