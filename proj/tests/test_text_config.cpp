#include <gtest/gtest.h>

#include "agentlint/config.hpp"
#include "agentlint/defects.hpp"
#include "agentlint/text.hpp"

using namespace agentlint;

TEST(Text, LineIndexMapsOffsets) {
  const std::string s = "ab\ncd\n\nx";
  text::LineIndex li(s);
  EXPECT_EQ(li.line_count(), 4u);
  EXPECT_EQ(li.line_of(0), 1u);
  EXPECT_EQ(li.line_of(2), 1u);  // the newline belongs to its line
  EXPECT_EQ(li.line_of(3), 2u);
  EXPECT_EQ(li.line_of(6), 3u);
  EXPECT_EQ(li.line_of(7), 4u);
  EXPECT_EQ(li.column_of(4), 2u);
  // brute force agreement
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::uint32_t line = 1;
    for (std::size_t j = 0; j < i; ++j) line += s[j] == '\n';
    EXPECT_EQ(li.line_of(i), line) << i;
  }
}

TEST(Text, Utf8Validation) {
  EXPECT_TRUE(text::is_valid_utf8("plain"));
  EXPECT_TRUE(text::is_valid_utf8("caf\xc3\xa9"));
  EXPECT_FALSE(text::is_valid_utf8("\xff\xfe"));
  EXPECT_FALSE(text::is_valid_utf8("\xc3"));
  EXPECT_FALSE(text::is_valid_utf8("\xed\xa0\x80"));  // surrogate
  EXPECT_EQ(text::utf8_prefix("caf\xc3\xa9", 4), 3u);
}

TEST(Text, WordTokensAndGlob) {
  EXPECT_EQ(text::word_tokens("GitHubAction_run"), (std::vector<std::string>{"git", "hub", "action", "run"}));
  EXPECT_TRUE(text::glob_match("*starcoder*", "file_path/starcoder"));
  EXPECT_TRUE(text::glob_match("*StarCoder*", "file_path/starcoder", true));
  EXPECT_FALSE(text::glob_match("gpt-4*", "gpt-3.5"));
  EXPECT_TRUE(text::is_identifier("_run2"));
  EXPECT_FALSE(text::is_identifier("2run"));
}

TEST(Config, DefaultsAndFlatFile) {
  AnalyzerConfig cfg;
  EXPECT_EQ(cfg.batch_size, 10u);
  EXPECT_EQ(cfg.enabled.size(), 8u);
  EXPECT_EQ(cfg.backend.kind, BackendKind::Heuristic);
  load_config_text(cfg,
                   "# comment\n"
                   "backend = remote\n"
                   "endpoint = \"https://llm.example\"\n"
                   "model = small-model\n"
                   "n = 4\n"
                   "only = EPDD, ALS\n"
                   "strict = yes\n");
  EXPECT_EQ(cfg.backend.kind, BackendKind::Remote);
  EXPECT_EQ(cfg.backend.endpoint, "https://llm.example");
  EXPECT_EQ(cfg.batch_size, 4u);
  EXPECT_EQ(cfg.enabled, (std::set<DefectId>{DefectId::ALS, DefectId::EPDD}));
  EXPECT_TRUE(cfg.strict);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, Rejections) {
  AnalyzerConfig cfg;
  cfg = {};
  load_config_text(cfg, "n = 0\n");
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  EXPECT_THROW(load_config_text(cfg, "only = XYZ\n"), Error);
  EXPECT_THROW(load_config_text(cfg, "no_such_key = 1\n"), Error);
  EXPECT_THROW(load_config_text(cfg, "just words\n"), Error);
  AnalyzerConfig remote;
  remote.backend.kind = BackendKind::Remote;
  EXPECT_THROW(remote.validate(), Error);
}

TEST(Defects, CatalogIsComplete) {
  for (auto id : kAllDefects) {
    EXPECT_FALSE(remediation(id).empty());
    EXPECT_FALSE(defect_definition(id).empty());
    EXPECT_EQ(parse_defect_id(to_string(id)), id);
  }
  EXPECT_EQ(remediation(DefectId::IETI),
            "Reduce the development of tools with similar functionalities or increase their differentiation.");
}
