#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace agentlint {

// Declaration order is also the oracle execution order.
enum class DefectId { ADAL, IETI, LOPE, TRE, ALS, MNFT, LARD, EPDD };

inline constexpr std::array<DefectId, 8> kAllDefects{DefectId::ADAL, DefectId::IETI, DefectId::LOPE,
                                                     DefectId::TRE,  DefectId::ALS,  DefectId::MNFT,
                                                     DefectId::LARD, DefectId::EPDD};

enum class Severity { Defect, Warning };

inline std::string_view to_string(DefectId id) {
  switch (id) {
    case DefectId::ADAL: return "ADAL";
    case DefectId::IETI: return "IETI";
    case DefectId::LOPE: return "LOPE";
    case DefectId::TRE: return "TRE";
    case DefectId::ALS: return "ALS";
    case DefectId::MNFT: return "MNFT";
    case DefectId::LARD: return "LARD";
    case DefectId::EPDD: return "EPDD";
  }
  return "?";
}

inline std::optional<DefectId> parse_defect_id(std::string_view s) {
  for (auto id : kAllDefects) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

inline std::string_view to_string(Severity s) { return s == Severity::Defect ? "Defect" : "Warning"; }

inline std::string_view defect_title(DefectId id) {
  switch (id) {
    case DefectId::ADAL: return "Adaptation Defect between Agent and LLM";
    case DefectId::IETI: return "Insufficient External Tool Information";
    case DefectId::LOPE: return "LLM Output Parsing Error";
    case DefectId::TRE: return "Tool Return Error";
    case DefectId::ALS: return "Action Listener Setting";
    case DefectId::MNFT: return "Missing Necessary Fault Tolerance";
    case DefectId::LARD: return "LLM API-related Defect";
    case DefectId::EPDD: return "External Package Dependency Defect";
  }
  return "";
}

inline std::string_view defect_definition(DefectId id) {
  switch (id) {
    case DefectId::ADAL: return "The LLM used by the Agent fails to meet adaptability requirements.";
    case DefectId::IETI: return "Errors in tool registration information.";
    case DefectId::LOPE: return "LLM outputs do not meet requirements.";
    case DefectId::TRE: return "Tool return values are missing or contain implementation errors.";
    case DefectId::ALS: return "Triggers set in the plan are unexpectedly activated.";
    case DefectId::MNFT:
      return "Essential fault tolerance is lacking in interactions with components like tools.";
    case DefectId::LARD: return "Defects that arise during LLM API calls.";
    case DefectId::EPDD:
      return "Conflicts exist between external packages used by tools and the Agent.";
  }
  return "";
}

// Remediation catalog, one entry per defect kind.
inline std::string_view remediation(DefectId id) {
  switch (id) {
    case DefectId::ADAL:
      return "Design and conduct comprehensive generation capability tests before using an LLM.";
    case DefectId::IETI:
      return "Reduce the development of tools with similar functionalities or increase their "
             "differentiation.";
    case DefectId::LOPE:
      return "Set necessary fault tolerance when invoking an LLM, such as setting "
             "handle_parsing_error to True in Langchain.";
    case DefectId::TRE: return "Conduct thorough testing before registering a Tool into the Agent.";
    case DefectId::ALS:
      return "Avoid designing overly simple trigger words and avoid using common function return "
             "values like None.";
    case DefectId::MNFT:
      return "Set necessary fault tolerance for inputs and outputs when the Agent invokes a Tool.";
    case DefectId::LARD:
      return "Ensure that the method for invoking the LLM is correct and that no essential "
             "parameters are missing.";
    case DefectId::EPDD:
      return "Regularly upgrade the Agent framework or test package versions in advance.";
  }
  return "";
}

}  // namespace agentlint
