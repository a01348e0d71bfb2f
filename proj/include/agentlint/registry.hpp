#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "agentlint/data/registry.hpp"
#include "agentlint/error.hpp"
#include "agentlint/text.hpp"

namespace agentlint {

enum class Capability { GeneralChat, TaskSpecific, OutdatedNonChat, Unknown };

inline std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::GeneralChat: return "GeneralChat";
    case Capability::TaskSpecific: return "TaskSpecific";
    case Capability::OutdatedNonChat: return "OutdatedNonChat";
    case Capability::Unknown: return "Unknown";
  }
  return "Unknown";
}

inline Capability parse_capability(std::string_view s) {
  if (s == "GeneralChat") return Capability::GeneralChat;
  if (s == "TaskSpecific") return Capability::TaskSpecific;
  if (s == "OutdatedNonChat") return Capability::OutdatedNonChat;
  if (s == "Unknown") return Capability::Unknown;
  throw Error(ErrorCode::ConfigError, "unknown capability '" + std::string(s) + "'");
}

struct CapabilityPattern {
  std::string glob;
  Capability capability;
};

struct CapabilityLookup {
  Capability capability = Capability::Unknown;
  std::string matched;  // glob, or "remote:<pipeline tag>"
  std::string source;   // "local", "remote", "none"
};

// Fetches a model card document for a model id; returns the body or nullopt
// on 404. Throws on transport failure.
using CardFetcher = std::function<std::optional<std::string>(const std::string& model_id)>;

inline CardFetcher http_card_fetcher(const std::string& base_url, std::uint32_t timeout_seconds = 10) {
  return [base_url, timeout_seconds](const std::string& model_id) -> std::optional<std::string> {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(timeout_seconds, 0);
    cli.set_read_timeout(timeout_seconds, 0);
    auto res = cli.Get("/api/models/" + model_id);
    if (!res) throw Error(ErrorCode::RegistryUnavailable, "model card lookup failed: " + httplib::to_string(res.error()));
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) {
      throw Error(ErrorCode::RegistryUnavailable, "model card lookup returned HTTP " + std::to_string(res->status));
    }
    return res->body;
  };
}

// Maps a hub-style model card (pipeline_tag + tags) onto a capability.
inline Capability capability_from_card(const nlohmann::json& card) {
  const auto pipeline = card.value("pipeline_tag", std::string{});
  std::vector<std::string> tags;
  if (card.contains("tags") && card["tags"].is_array()) {
    for (const auto& t : card["tags"]) {
      if (t.is_string()) tags.push_back(text::to_lower(t.get<std::string>()));
    }
  }
  auto has = [&](std::string_view t) { return std::find(tags.begin(), tags.end(), t) != tags.end(); };
  if (has("code") || pipeline == "text2text-generation" || pipeline == "fill-mask" || pipeline == "translation" ||
      pipeline == "summarization" || pipeline == "token-classification" || pipeline == "text-classification")
    return Capability::TaskSpecific;
  if (has("conversational") || has("chat")) return Capability::GeneralChat;
  if (pipeline == "text-generation") return Capability::OutdatedNonChat;
  return Capability::Unknown;
}

class ModelCapabilityRegistry {
 public:
  ModelCapabilityRegistry() = default;
  explicit ModelCapabilityRegistry(std::vector<CapabilityPattern> patterns) : patterns_(std::move(patterns)) {}

  static ModelCapabilityRegistry from_json(const nlohmann::json& j) {
    std::vector<CapabilityPattern> out;
    try {
      for (const auto& p : j.at("patterns")) {
        out.push_back({p.at("glob").get<std::string>(), parse_capability(p.at("capability").get<std::string>())});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("registry: ") + e.what());
    }
    return ModelCapabilityRegistry(std::move(out));
  }

  static const ModelCapabilityRegistry& defaults() {
    static const ModelCapabilityRegistry r = from_json(nlohmann::json::parse(data::kRegistryJson));
    return r;
  }

  static ModelCapabilityRegistry load(const std::filesystem::path& file) {
    if (file.empty()) return defaults();
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read registry file " + file.string());
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, "registry file " + file.string() + ": " + e.what());
    }
  }

  void set_remote(CardFetcher fetch) { remote_ = std::move(fetch); }
  bool has_remote() const { return static_cast<bool>(remote_); }
  const std::vector<CapabilityPattern>& patterns() const { return patterns_; }

  // First matching glob wins, tried on the whole name and on the part after
  // the last '/' (paths like "file_path/StarCoder").
  CapabilityLookup lookup_local(const std::string& model) const {
    const auto lower = text::to_lower(model);
    const auto slash = lower.rfind('/');
    const auto base = slash == std::string::npos ? lower : lower.substr(slash + 1);
    for (const auto& p : patterns_) {
      if (text::glob_match(p.glob, lower, true) || text::glob_match(p.glob, base, true)) {
        return {p.capability, p.glob, "local"};
      }
    }
    return {Capability::Unknown, "", "none"};
  }

  // Local first; the remote card is consulted only for names the local
  // table cannot place. RegistryUnavailable propagates so the caller can
  // record it, and the local answer stands.
  CapabilityLookup lookup(const std::string& model) const {
    auto local = lookup_local(model);
    if (local.capability != Capability::Unknown || !remote_) return local;
    auto body = remote_(model);
    if (!body) return local;
    nlohmann::json card;
    try {
      card = nlohmann::json::parse(*body);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::RegistryUnavailable, "model card for " + model + " is not JSON");
    }
    const auto cap = capability_from_card(card);
    return {cap, "remote:" + card.value("pipeline_tag", std::string{}), cap == Capability::Unknown ? "none" : "remote"};
  }

 private:
  std::vector<CapabilityPattern> patterns_;
  CardFetcher remote_;
};

}  // namespace agentlint
