#pragma once

#include <array>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "agentlint/config.hpp"
#include "agentlint/error.hpp"
#include "agentlint/markers.hpp"
#include "agentlint/text.hpp"

namespace agentlint {

enum class Template {
  IS_LLM_INIT,
  IS_AGENT_INIT,
  IS_TOOL_INIT,
  TOOL_INFO_CONSISTENT,
  HAS_FAULT_TOLERANCE_IN,
  HAS_FAULT_TOLERANCE_OUT,
  TOOL_CODE_DEFECT,
  LLM_EXEC_FUNCTION_NAME,
  TOOL_EXEC_FUNCTION_NAME,
  LLM_CALL_CORRECT,
};

inline constexpr std::array<Template, 10> kAllTemplates{
    Template::IS_LLM_INIT,          Template::IS_AGENT_INIT,          Template::IS_TOOL_INIT,
    Template::TOOL_INFO_CONSISTENT, Template::HAS_FAULT_TOLERANCE_IN, Template::HAS_FAULT_TOLERANCE_OUT,
    Template::TOOL_CODE_DEFECT,     Template::LLM_EXEC_FUNCTION_NAME, Template::TOOL_EXEC_FUNCTION_NAME,
    Template::LLM_CALL_CORRECT};

inline std::string_view to_string(Template t) {
  switch (t) {
    case Template::IS_LLM_INIT: return "IS_LLM_INIT";
    case Template::IS_AGENT_INIT: return "IS_AGENT_INIT";
    case Template::IS_TOOL_INIT: return "IS_TOOL_INIT";
    case Template::TOOL_INFO_CONSISTENT: return "TOOL_INFO_CONSISTENT";
    case Template::HAS_FAULT_TOLERANCE_IN: return "HAS_FAULT_TOLERANCE_IN";
    case Template::HAS_FAULT_TOLERANCE_OUT: return "HAS_FAULT_TOLERANCE_OUT";
    case Template::TOOL_CODE_DEFECT: return "TOOL_CODE_DEFECT";
    case Template::LLM_EXEC_FUNCTION_NAME: return "LLM_EXEC_FUNCTION_NAME";
    case Template::TOOL_EXEC_FUNCTION_NAME: return "TOOL_EXEC_FUNCTION_NAME";
    case Template::LLM_CALL_CORRECT: return "LLM_CALL_CORRECT";
  }
  return "?";
}

inline bool is_identifier_template(Template t) {
  return t == Template::LLM_EXEC_FUNCTION_NAME || t == Template::TOOL_EXEC_FUNCTION_NAME;
}

// Question wording per template; the answer grammar is appended by the prompt builder.
inline std::string_view template_question(Template t) {
  switch (t) {
    case Template::IS_LLM_INIT:
      return "Does this code initialize or wrap the large language model client that the agent uses (for example by "
             "constructing a client or issuing a completion request)?";
    case Template::IS_AGENT_INIT:
      return "Is this the agent's initialization code, i.e. the component that drives the language model and "
             "dispatches tools?";
    case Template::IS_TOOL_INIT:
      return "Does this code define or register an external tool that the agent can invoke?";
    case Template::TOOL_INFO_CONSISTENT:
      return "Is the tool's registration information (name and description) present and consistent with the "
             "aspect named in the facts?";
    case Template::HAS_FAULT_TOLERANCE_IN:
      return "Are the inputs of this invocation protected by fault tolerance (exception handling, assertions or "
             "type checks)?";
    case Template::HAS_FAULT_TOLERANCE_OUT:
      return "Is the output of this invocation protected by fault tolerance (exception handling, assertions or "
             "type checks) before it is used?";
    case Template::TOOL_CODE_DEFECT:
      return "Does this tool implementation contain a defect that would make its return value wrong or missing?";
    case Template::LLM_EXEC_FUNCTION_NAME:
      return "Which function of this language model wrapper executes the model (for example generate or create)?";
    case Template::TOOL_EXEC_FUNCTION_NAME:
      return "Which function of this tool executes it (for example run or invoke)?";
    case Template::LLM_CALL_CORRECT:
      return "Is this model API call correctly set up: credentials initialized and stop words passed when the "
             "agent relies on trigger words?";
  }
  return "";
}

struct QuestionItem {
  std::string snippet;
  nlohmann::json facts = nlohmann::json::object();
};

struct ReasonerQuestion {
  Template template_id = Template::IS_LLM_INIT;
  std::vector<QuestionItem> items;
};

// YES/NO for boolean templates; identifier (empty for NONE) otherwise.
struct Answer {
  bool yes = false;
  std::string identifier;

  friend bool operator==(const Answer&, const Answer&) = default;
};

struct ReasonerVerdict {
  Template template_id = Template::IS_LLM_INIT;
  std::vector<Answer> answers;
  std::string rationale;
  std::vector<std::string> notes;  // per-item explanation when the backend gives one
  std::string raw;
  std::string backend_tag;

  std::string note(std::size_t i) const { return i < notes.size() ? notes[i] : rationale; }
};

// --- fixed answer format ---------------------------------------------------

inline std::string render_answers(Template t, const std::vector<Answer>& answers) {
  std::string out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    out += std::to_string(i + 1) + ": ";
    if (is_identifier_template(t)) out += answers[i].identifier.empty() ? "NONE" : answers[i].identifier;
    else out += answers[i].yes ? "YES" : "NO";
    out += "\n";
  }
  return out;
}

struct ParsedResponse {
  std::vector<Answer> answers;
  std::string rationale;
};

// Answer block = lines after the last "ANSWERS:" line, or the whole text
// when there is no such line. Exactly `batch` lines "<i>: <token>", i = 1..batch.
inline ParsedResponse validate_response_full(std::string_view raw, Template t, std::size_t batch) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : raw) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    lines.push_back(cur);
  }
  std::size_t start = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]) == "ANSWERS:") start = i + 1;
  }
  ParsedResponse out;
  for (std::size_t i = 0; i + 1 < start; ++i) out.rationale += lines[i] + "\n";
  std::vector<std::string> block;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (!text::trim(lines[i]).empty()) block.emplace_back(text::trim(lines[i]));
  }
  static const std::regex line_re(R"(^(\d+)\s*:\s*(\S+)$)");
  std::size_t expect = 1;
  for (const auto& l : block) {
    std::smatch m;
    if (!std::regex_match(l, m, line_re)) throw FormatInvalid(l, "expected '<index>: <answer>'");
    const auto index = std::stoull(m[1].str());
    if (index < 1 || index > batch) throw FormatInvalid(l, "index out of range 1.." + std::to_string(batch));
    if (index != expect) throw FormatInvalid(l, "expected index " + std::to_string(expect));
    const auto token = m[2].str();
    Answer a;
    if (is_identifier_template(t)) {
      if (token != "NONE") {
        if (!text::is_identifier(token)) throw FormatInvalid(l, "not an identifier");
        a.identifier = token;
      }
    } else if (token == "YES") {
      a.yes = true;
    } else if (token != "NO") {
      throw FormatInvalid(l, "expected YES or NO");
    }
    out.answers.push_back(std::move(a));
    ++expect;
  }
  if (out.answers.size() != batch) {
    throw FormatInvalid(block.empty() ? std::string{} : block.back(),
                        "expected " + std::to_string(batch) + " answer lines, got " + std::to_string(out.answers.size()));
  }
  return out;
}

inline std::vector<Answer> validate_response(std::string_view raw, Template t, std::size_t batch) {
  return validate_response_full(raw, t, batch).answers;
}

// --- backends -----------------------------------------------------------

class ReasonerBackend {
 public:
  virtual ~ReasonerBackend() = default;
  virtual std::string tag() const = 0;
  virtual ReasonerVerdict ask(const ReasonerQuestion& q) const = 0;

  // Results are returned in request order.
  virtual std::vector<ReasonerVerdict> ask_all(const std::vector<ReasonerQuestion>& qs) const {
    std::vector<ReasonerVerdict> out;
    out.reserve(qs.size());
    for (const auto& q : qs) out.push_back(ask(q));
    return out;
  }

  std::size_t batch_limit() const { return batch_limit_; }
  void set_batch_limit(std::size_t n) { batch_limit_ = n; }

 protected:
  void check(const ReasonerQuestion& q) const {
    if (q.items.empty()) throw Error(ErrorCode::PreconditionViolation, "reasoner question with an empty batch");
    if (q.items.size() > batch_limit_) {
      throw Error(ErrorCode::PreconditionViolation, "batch of " + std::to_string(q.items.size()) + " exceeds n = " +
                                                        std::to_string(batch_limit_));
    }
    for (const auto& it : q.items) {
      if (it.snippet.empty()) throw Error(ErrorCode::PreconditionViolation, "reasoner question item without a snippet");
    }
  }

 private:
  std::size_t batch_limit_ = 10;
};

namespace detail {

inline std::vector<std::string> json_strings(const nlohmann::json& facts, const char* key) {
  std::vector<std::string> out;
  if (facts.contains(key) && facts[key].is_array()) {
    for (const auto& v : facts[key]) {
      if (v.is_string()) out.push_back(v.get<std::string>());
    }
  }
  return out;
}

inline bool json_bool(const nlohmann::json& facts, const char* key) {
  return facts.contains(key) && facts[key].is_boolean() && facts[key].get<bool>();
}

inline std::string json_string(const nlohmann::json& facts, const char* key) {
  return facts.contains(key) && facts[key].is_string() ? facts[key].get<std::string>() : std::string{};
}

}  // namespace detail

// Deterministic offline rules. Each rule reads only the item facts the
// oracles attach, so identical questions give identical verdicts.
class HeuristicBackend : public ReasonerBackend {
 public:
  explicit HeuristicBackend(Markers markers = Markers::defaults()) : m_(std::move(markers)) {}

  std::string tag() const override { return "heuristic"; }

  ReasonerVerdict ask(const ReasonerQuestion& q) const override {
    check(q);
    std::vector<Answer> answers;
    std::vector<std::string> notes;
    for (const auto& item : q.items) {
      auto [a, why] = rule(q.template_id, item.facts);
      answers.push_back(std::move(a));
      notes.push_back(std::move(why));
    }
    std::string raw;
    for (std::size_t i = 0; i < notes.size(); ++i) raw += "[" + std::to_string(i + 1) + "] " + notes[i] + "\n";
    raw += "ANSWERS:\n" + render_answers(q.template_id, answers);
    // same validation path as the remote backend
    auto parsed = validate_response_full(raw, q.template_id, q.items.size());
    ReasonerVerdict v;
    v.template_id = q.template_id;
    v.answers = std::move(parsed.answers);
    v.rationale = std::move(parsed.rationale);
    v.notes = std::move(notes);
    v.raw = std::move(raw);
    v.backend_tag = tag();
    return v;
  }

  const Markers& markers() const { return m_; }

 private:
  std::pair<Answer, std::string> rule(Template t, const nlohmann::json& f) const {
    using detail::json_bool;
    using detail::json_string;
    using detail::json_strings;
    Answer a;
    std::string why;
    switch (t) {
      case Template::IS_LLM_INIT: {
        const auto name = json_string(f, "name");
        for (const auto& c : json_strings(f, "callee_paths")) {
          if (m_.is_completion_call(c) || m_.is_client_constructor(c)) {
            a.yes = true;
            why = name + " calls " + c;
            break;
          }
        }
        if (!a.yes && Markers::matches_any(m_.llm_name_patterns, name)) {
          a.yes = true;
          why = name + " matches an LLM name pattern";
        }
        if (!a.yes) why = name + ": no model client construction or completion call";
        break;
      }
      case Template::IS_AGENT_INIT: {
        const auto name = json_string(f, "name");
        if (Markers::matches_any(m_.agent_name_patterns, name)) {
          a.yes = true;
          why = name + " matches an agent name pattern";
        } else if (json_bool(f, "calls_llm") && json_bool(f, "holds_tool_collection")) {
          a.yes = true;
          why = name + " calls the model and holds a tool collection";
        } else {
          why = name + " is not an agent entry point";
        }
        break;
      }
      case Template::IS_TOOL_INIT: {
        const auto name = json_string(f, "name");
        for (const auto& b : json_strings(f, "bases")) {
          if (m_.is_tool_base(b)) {
            a.yes = true;
            why = name + " inherits " + b;
            break;
          }
        }
        if (!a.yes) {
          for (const auto& d : json_strings(f, "decorators")) {
            if (m_.is_tool_decorator(d)) {
              a.yes = true;
              why = name + " is decorated with @" + d;
              break;
            }
          }
        }
        if (!a.yes && json_string(f, "kind") == "Class" && Markers::in(m_.tool_markers, name)) {
          a.yes = true;
          why = name + " is a tool base class";
        }
        if (!a.yes && json_string(f, "kind") == "Class" && m_.in_tool_directory(json_string(f, "file"))) {
          a.yes = true;
          why = name + " is defined in a tools directory";
        }
        if (!a.yes) why = name + " carries no tool marker";
        break;
      }
      case Template::TOOL_INFO_CONSISTENT: {
        const auto name = json_string(f, "name");
        const auto desc = json_string(f, "description");
        const auto aspect = json_string(f, "aspect");
        if (name.empty() || desc.empty()) {
          why = std::string(name.empty() ? "name" : "description") + " is empty";
          break;
        }
        if (aspect == "implementation") {
          std::set<std::string> impl;
          for (const auto& id : json_strings(f, "implementation_identifiers")) {
            auto toks = m_.content_tokens(id);
            impl.insert(toks.begin(), toks.end());
          }
          std::vector<std::string> shared;
          for (const auto& tok : m_.content_tokens(desc)) {
            if (impl.contains(tok)) shared.push_back(tok);
          }
          a.yes = !shared.empty();
          why = a.yes ? "description shares '" + shared.front() + "' with the implementation"
                      : "description shares no term with the implementation";
        } else {
          a.yes = true;
          why = "name and description are both set";
        }
        break;
      }
      case Template::HAS_FAULT_TOLERANCE_IN:
      case Template::HAS_FAULT_TOLERANCE_OUT: {
        const bool out = t == Template::HAS_FAULT_TOLERANCE_OUT;
        if (out && json_bool(f, "result_unused")) {
          a.yes = true;
          why = "result is not used";
        } else if (json_bool(f, "in_try_block")) {
          a.yes = true;
          why = "guarded by try/except";
        } else if (!json_strings(f, "type_checks").empty()) {
          a.yes = true;
          why = "type check: " + json_strings(f, "type_checks").front();
        } else if (!json_strings(f, "asserts").empty()) {
          a.yes = true;
          why = "assertion: " + json_strings(f, "asserts").front();
        } else {
          why = std::string("no exception handling, assertion or type check on the ") + (out ? "output" : "input");
        }
        break;
      }
      case Template::TOOL_CODE_DEFECT:
        why = "implementation defects are not judged offline";
        break;
      case Template::LLM_EXEC_FUNCTION_NAME: {
        // public method holding a completion call preferred over private ones
        std::string fallback;
        if (f.contains("functions") && f["functions"].is_array()) {
          for (const auto& fn : f["functions"]) {
            const auto name = json_string(fn, "name");
            bool completion = false;
            for (const auto& c : json_strings(fn, "callee_paths")) completion |= m_.is_completion_call(c);
            if (!completion) continue;
            if (!name.starts_with("_")) {
              a.identifier = name;
              break;
            }
            if (fallback.empty()) fallback = name;
          }
        }
        if (a.identifier.empty()) a.identifier = fallback;
        why = a.identifier.empty() ? "no function issues a completion call" : a.identifier + " issues the completion call";
        break;
      }
      case Template::TOOL_EXEC_FUNCTION_NAME: {
        for (const auto& name : json_strings(f, "methods")) {
          if (Markers::in(m_.tool_exec_names, name)) {
            a.identifier = name;
            break;
          }
        }
        why = a.identifier.empty() ? "no method named like a tool entry point" : a.identifier + " runs the tool";
        break;
      }
      case Template::LLM_CALL_CORRECT: {
        std::string empty_cred;
        if (f.contains("credentials") && f["credentials"].is_array()) {
          for (const auto& c : f["credentials"]) {
            if (json_bool(c, "empty")) {
              empty_cred = json_string(c, "name");
              break;
            }
          }
        }
        const bool stop_needed = json_bool(f, "trigger_words_defined") && !json_bool(f, "stop_present");
        a.yes = empty_cred.empty() && !stop_needed;
        if (!empty_cred.empty()) why = "credential '" + empty_cred + "' is initialized to an empty string";
        if (stop_needed) why += std::string(why.empty() ? "" : "; ") + "no stop argument although trigger words are used";
        if (a.yes) why = "credentials set and stop handling consistent";
        break;
      }
    }
    return {std::move(a), std::move(why)};
  }

  Markers m_;
};

// --- remote backend -------------------------------------------------------

struct TransportResponse {
  int status = 0;
  std::string body;
};

// Sends one JSON request body; throws Error(BackendUnreachable) when the
// endpoint cannot be reached.
using Transport = std::function<TransportResponse(const std::string& body, const std::string& bearer)>;

inline Transport http_transport(const BackendConfig& cfg) {
  return [cfg](const std::string& body, const std::string& bearer) {
    httplib::Client cli(cfg.endpoint);
    cli.set_connection_timeout(cfg.timeout_seconds, 0);
    cli.set_read_timeout(cfg.timeout_seconds, 0);
    cli.set_write_timeout(cfg.timeout_seconds, 0);
    httplib::Headers headers{{"Authorization", "Bearer " + bearer}};
    auto res = cli.Post(cfg.path, headers, body, "application/json");
    if (!res) {
      throw Error(ErrorCode::BackendUnreachable, cfg.endpoint + cfg.path + ": " + httplib::to_string(res.error()));
    }
    return TransportResponse{res->status, res->body};
  };
}

inline std::string build_prompt(const ReasonerQuestion& q) {
  std::ostringstream p;
  p << "You are reviewing source code of an LLM-based agent project.\n"
    << "Question: " << template_question(q.template_id) << "\n\n"
    << "Think step by step about each item below, then finish with a line containing exactly 'ANSWERS:' followed "
    << "by one line per item in the form '<index>: <answer>', where <answer> is ";
  if (is_identifier_template(q.template_id)) p << "a single function name, or NONE if there is none";
  else p << "YES or NO";
  p << ". Output nothing after the answer lines.\n";
  for (std::size_t i = 0; i < q.items.size(); ++i) {
    p << "\n### Item " << (i + 1) << "\n```python\n" << q.items[i].snippet << "\n```\n";
    if (!q.items[i].facts.empty()) p << "Facts: " << q.items[i].facts.dump() << "\n";
  }
  return p.str();
}

class RemoteBackend : public ReasonerBackend {
 public:
  // Reads the key from the environment variable named in the config.
  explicit RemoteBackend(BackendConfig cfg, Transport transport = {}) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key) {
      throw Error(ErrorCode::AuthMissing, "environment variable " + cfg_.api_key_env + " is not set");
    }
    key_ = key;
    transport_ = transport ? std::move(transport) : http_transport(cfg_);
  }

  std::string tag() const override { return "remote:" + cfg_.model; }

  ReasonerVerdict ask(const ReasonerQuestion& q) const override {
    check(q);
    const nlohmann::json request = {
        {"model", cfg_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", build_prompt(q)}}})},
        {"temperature", 0}};
    const auto body = request.dump();
    std::exception_ptr last;
    for (std::uint32_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      try {
        ++calls_;
        const auto res = transport_(body, key_);
        if (res.status < 200 || res.status >= 300) {
          throw Error(ErrorCode::BackendUnreachable, "HTTP " + std::to_string(res.status));
        }
        std::string content;
        try {
          const auto j = nlohmann::json::parse(res.body);
          content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
          throw FormatInvalid(res.body.substr(0, 200), std::string("malformed completion payload: ") + e.what());
        }
        auto parsed = validate_response_full(content, q.template_id, q.items.size());
        ReasonerVerdict v;
        v.template_id = q.template_id;
        v.answers = std::move(parsed.answers);
        v.rationale = std::move(parsed.rationale);
        v.raw = std::move(content);
        v.backend_tag = tag();
        return v;
      } catch (const Error&) {
        last = std::current_exception();
      }
    }
    std::rethrow_exception(last);
  }

  // Bounded parallel fan-out; verdicts keep request order and the first
  // failure (in request order) is rethrown.
  std::vector<ReasonerVerdict> ask_all(const std::vector<ReasonerQuestion>& qs) const override {
    std::vector<std::optional<ReasonerVerdict>> slots(qs.size());
    std::vector<std::exception_ptr> errors(qs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < qs.size(); i = next++) {
        try {
          slots[i] = ask(qs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const auto n = std::min<std::size_t>(cfg_.parallelism, qs.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::vector<ReasonerVerdict> out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      out.push_back(std::move(*slots[i]));
    }
    return out;
  }

  std::size_t calls() const { return calls_; }

 private:
  BackendConfig cfg_;
  std::string key_;
  Transport transport_;
  mutable std::atomic<std::size_t> calls_{0};
};

inline std::unique_ptr<ReasonerBackend> make_backend(const AnalyzerConfig& cfg, const Markers& markers,
                                                     Transport transport = {}) {
  std::unique_ptr<ReasonerBackend> b;
  if (cfg.backend.kind == BackendKind::Remote) b = std::make_unique<RemoteBackend>(cfg.backend, std::move(transport));
  else b = std::make_unique<HeuristicBackend>(markers);
  b->set_batch_limit(cfg.batch_size);
  return b;
}

}  // namespace agentlint
