#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "agentlint/config.hpp"
#include "agentlint/error.hpp"
#include "agentlint/text.hpp"

namespace agentlint {

inline constexpr std::string_view kSubjectLanguage = "python";
inline constexpr std::string_view kSourceExtension = ".py";
inline constexpr std::string_view kIgnoreFileName = ".agentlintignore";

// On-disk identity captured at ingest; used to detect stale spans later.
struct DiskStamp {
  std::filesystem::path absolute;
  std::uintmax_t size = 0;
  std::filesystem::file_time_type mtime{};
};

struct SourceFile {
  std::string path;  // project-relative, '/' separated
  std::string text;
  text::LineIndex line_index;
  std::optional<DiskStamp> disk;  // empty for in-memory sources

  SourceFile() = default;
  SourceFile(std::string p, std::string t) : path(std::move(p)), text(std::move(t)), line_index(text) {}
};

struct SkippedEntry {
  std::string path;
  std::string reason;

  friend bool operator==(const SkippedEntry&, const SkippedEntry&) = default;
};

struct ProjectSnapshot {
  std::filesystem::path root;
  std::vector<SourceFile> files;
  std::vector<SkippedEntry> skipped;
  std::string subject_language_tag{kSubjectLanguage};

  const SourceFile* find(std::string_view rel) const {
    auto it = std::lower_bound(files.begin(), files.end(), rel,
                               [](const SourceFile& f, std::string_view p) { return f.path < p; });
    return it != files.end() && it->path == rel ? &*it : nullptr;
  }
};

// Builds an in-memory snapshot; used by tests and by callers that already
// hold file contents.
inline ProjectSnapshot snapshot_from_sources(std::vector<std::pair<std::string, std::string>> sources) {
  ProjectSnapshot snap;
  snap.root = ".";
  std::sort(sources.begin(), sources.end());
  for (auto& [path, body] : sources) snap.files.emplace_back(path, std::move(body));
  return snap;
}

namespace detail {

inline bool matches_ignore(const std::vector<std::string>& globs, const std::string& rel) {
  const auto base = std::filesystem::path(rel).filename().string();
  for (const auto& g : globs) {
    if (g.empty()) continue;
    std::string pat = g;
    if (pat.back() == '/') pat.pop_back();
    if (pat.find('/') == std::string::npos) {
      if (text::glob_match(pat, base)) return true;
    } else {
      if (pat.front() == '/') pat.erase(0, 1);
      if (text::glob_match(pat, rel)) return true;
    }
  }
  return false;
}

inline std::vector<std::string> read_ignore_file(const std::filesystem::path& root) {
  std::vector<std::string> globs;
  std::ifstream in(root / std::string(kIgnoreFileName));
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    globs.emplace_back(t);
  }
  return globs;
}

}  // namespace detail

inline ProjectSnapshot discover_project(const std::filesystem::path& root, const AnalyzerConfig& config) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::RootNotFound, root.string() + " is not a directory");
  }

  ProjectSnapshot snap;
  snap.root = fs::absolute(root, ec);
  auto globs = config.ignore_globs;
  for (auto& g : detail::read_ignore_file(root)) globs.push_back(std::move(g));

  auto skip = [&](const std::string& rel, std::string reason) {
    snap.skipped.push_back({rel, std::move(reason)});
  };

  // Explicit stack instead of recursive_directory_iterator so excluded
  // directories are never descended into; entries sorted per directory.
  std::vector<fs::path> pending{fs::path{}};
  while (!pending.empty()) {
    const auto rel_dir = pending.back();
    pending.pop_back();
    std::vector<fs::directory_entry> entries;
    for (const auto& e : fs::directory_iterator(root / rel_dir, ec)) entries.push_back(e);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });
    std::vector<fs::path> subdirs;
    for (const auto& entry : entries) {
      const auto name = entry.path().filename().string();
      const auto rel = (rel_dir / name).generic_string();
      if (name == kIgnoreFileName) continue;
      if (entry.is_symlink(ec)) {
        skip(rel, "symlink");
        continue;
      }
      if (entry.is_directory(ec)) {
        if (name.front() == '.') skip(rel + "/", "hidden-directory");
        else if (std::find(config.excluded_dirs.begin(), config.excluded_dirs.end(), name) !=
                     config.excluded_dirs.end() ||
                 name.ends_with(".egg-info"))
          skip(rel + "/", "excluded-directory");
        else if (detail::matches_ignore(globs, rel)) skip(rel + "/", "ignored");
        else subdirs.push_back(rel_dir / name);
        continue;
      }
      if (!entry.is_regular_file(ec)) {
        skip(rel, "not-a-regular-file");
        continue;
      }
      if (detail::matches_ignore(globs, rel)) {
        skip(rel, "ignored");
        continue;
      }
      if (entry.path().extension() != kSourceExtension) {
        skip(rel, "non-source");
        continue;
      }
      const auto size = entry.file_size(ec);
      if (size == 0) {
        skip(rel, "empty");
        continue;
      }
      if (size > config.max_file_bytes) {
        skip(rel, "too-large");
        continue;
      }
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      auto body = buf.str();
      if (!in && !in.eof()) {
        skip(rel, "unreadable");
        continue;
      }
      if (!text::is_valid_utf8(body)) {
        skip(rel, "invalid-utf8");
        continue;
      }
      SourceFile file(rel, std::move(body));
      file.disk = DiskStamp{fs::absolute(entry.path(), ec), size, entry.last_write_time(ec)};
      snap.files.push_back(std::move(file));
    }
    // reverse so the stack pops in sorted order
    for (auto it = subdirs.rbegin(); it != subdirs.rend(); ++it) pending.push_back(*it);
  }

  std::sort(snap.files.begin(), snap.files.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  std::sort(snap.skipped.begin(), snap.skipped.end(),
            [](const SkippedEntry& a, const SkippedEntry& b) { return a.path < b.path; });
  if (snap.files.empty()) {
    throw Error(ErrorCode::NoSourceFiles, "no " + std::string(kSubjectLanguage) + " sources under " + root.string());
  }
  return snap;
}

}  // namespace agentlint
