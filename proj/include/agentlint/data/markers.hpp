#pragma once

// generated by tools/embed_data.py from data/markers.json; do not edit

#include <string_view>

namespace agentlint::data {

inline constexpr std::string_view kMarkersJson = R"agentlint_json({
  "version": 1,
  "llm_client_constructors": [
    "OpenAI", "AsyncOpenAI", "AzureOpenAI", "AsyncAzureOpenAI", "Anthropic", "AsyncAnthropic",
    "ChatOpenAI", "AzureChatOpenAI", "ChatAnthropic", "ChatOllama", "Ollama", "LlamaCpp",
    "HuggingFaceHub", "HuggingFacePipeline", "HuggingFaceEndpoint", "InferenceClient",
    "AutoModelForCausalLM.from_pretrained", "AutoModelForSeq2SeqLM.from_pretrained",
    "pipeline", "GenerativeModel", "MistralClient", "Groq", "Together", "Cohere", "ChatCohere"
  ],
  "completion_calls": [
    "chat.completions.create", "completions.create", "ChatCompletion.create", "Completion.create",
    "messages.create", "generate_content", "text_generation", "chat_completion"
  ],
  "llm_name_patterns": ["*llm*", "*chatmodel*", "*languagemodel*"],
  "agent_name_patterns": ["*agent*"],
  "tool_markers": ["Tool", "BaseTool", "ToolMessage"],
  "tool_decorators": ["tool", "function_tool", "register_tool"],
  "tool_directories": ["tool", "tools"],
  "tool_exec_names": ["run", "invoke", "use", "call", "_run"],
  "name_attributes": ["name", "request"],
  "description_attributes": ["description", "purpose"],
  "credential_patterns": ["api_key", "token", "secret"],
  "stop_keywords": ["stop", "stop_sequences", "stop_words"],
  "model_keywords": ["model", "model_name", "model_id", "repo_id", "engine", "model_path"],
  "parse_error_keywords": ["handle_parsing_error", "handle_parsing_errors"],
  "tool_collection_hints": ["tool"],
  "dispatch_hints": ["tool", "action"],
  "type_check_calls": ["isinstance", "issubclass", "type", "callable"],
  "stopwords": [
    "a", "an", "the", "and", "or", "of", "to", "for", "in", "on", "with", "by", "from", "at", "as",
    "is", "are", "be", "it", "its", "this", "that", "these", "those", "use", "used", "using", "can",
    "will", "any", "some", "all", "given", "into", "about", "self", "cls", "str", "int", "none",
    "true", "false", "return", "returns", "get", "set", "run", "tool", "tools", "input", "output"
  ]
}
)agentlint_json";

}  // namespace agentlint::data
