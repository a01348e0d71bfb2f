#pragma once

// generated by tools/embed_data.py from data/registry.json; do not edit

#include <string_view>

namespace agentlint::data {

inline constexpr std::string_view kRegistryJson = R"agentlint_json({
  "version": 1,
  "patterns": [
    {"glob": "*starcoder*", "capability": "TaskSpecific"},
    {"glob": "*codellama*", "capability": "TaskSpecific"},
    {"glob": "*code-llama*", "capability": "TaskSpecific"},
    {"glob": "*codegen*", "capability": "TaskSpecific"},
    {"glob": "*santacoder*", "capability": "TaskSpecific"},
    {"glob": "*codet5*", "capability": "TaskSpecific"},
    {"glob": "*wizardcoder*", "capability": "TaskSpecific"},
    {"glob": "*deepseek-coder*", "capability": "TaskSpecific"},
    {"glob": "*stable-code*", "capability": "TaskSpecific"},
    {"glob": "*codex*", "capability": "TaskSpecific"},
    {"glob": "code-*", "capability": "TaskSpecific"},
    {"glob": "*bert*", "capability": "TaskSpecific"},
    {"glob": "*t5-*", "capability": "TaskSpecific"},
    {"glob": "*whisper*", "capability": "TaskSpecific"},
    {"glob": "*embedding*", "capability": "TaskSpecific"},
    {"glob": "*-instruct-code*", "capability": "TaskSpecific"},
    {"glob": "gpt2*", "capability": "OutdatedNonChat"},
    {"glob": "gpt-2*", "capability": "OutdatedNonChat"},
    {"glob": "*/gpt2*", "capability": "OutdatedNonChat"},
    {"glob": "distilgpt2*", "capability": "OutdatedNonChat"},
    {"glob": "gpt-neo*", "capability": "OutdatedNonChat"},
    {"glob": "*gpt-j*", "capability": "OutdatedNonChat"},
    {"glob": "*opt-*", "capability": "OutdatedNonChat"},
    {"glob": "*bloom*", "capability": "OutdatedNonChat"},
    {"glob": "*davinci*", "capability": "OutdatedNonChat"},
    {"glob": "*curie*", "capability": "OutdatedNonChat"},
    {"glob": "*babbage*", "capability": "OutdatedNonChat"},
    {"glob": "ada", "capability": "OutdatedNonChat"},
    {"glob": "*text-ada*", "capability": "OutdatedNonChat"},
    {"glob": "gpt-4*", "capability": "GeneralChat"},
    {"glob": "gpt-3.5-turbo*", "capability": "GeneralChat"},
    {"glob": "gpt-5*", "capability": "GeneralChat"},
    {"glob": "o1*", "capability": "GeneralChat"},
    {"glob": "o3*", "capability": "GeneralChat"},
    {"glob": "o4*", "capability": "GeneralChat"},
    {"glob": "chatgpt*", "capability": "GeneralChat"},
    {"glob": "claude*", "capability": "GeneralChat"},
    {"glob": "gemini*", "capability": "GeneralChat"},
    {"glob": "*llama-2-*-chat*", "capability": "GeneralChat"},
    {"glob": "*llama-3*", "capability": "GeneralChat"},
    {"glob": "*llama3*", "capability": "GeneralChat"},
    {"glob": "*mistral*instruct*", "capability": "GeneralChat"},
    {"glob": "*mixtral*", "capability": "GeneralChat"},
    {"glob": "*qwen*", "capability": "GeneralChat"},
    {"glob": "*-chat*", "capability": "GeneralChat"},
    {"glob": "*-instruct*", "capability": "GeneralChat"},
    {"glob": "command-r*", "capability": "GeneralChat"}
  ]
}
)agentlint_json";

}  // namespace agentlint::data
