#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hlc/error.hpp"
#include "hlc/patterns.hpp"
#include "hlc/prompt.hpp"

using namespace hlc;
using hlc::testing::make_example;

namespace {

Finding finding_255() {
  const Requirement r{"255", hlc::testing::kText255};
  return extract_findings(r, WeakWordCatalog::from_entries({"certain"})).at(0);
}

ValidatedExample example_255() {
  auto e = make_example("ex-255", "255", hlc::testing::kText255, "certain", Label::defect);
  e.reasoning = hlc::testing::kReasoning255;
  return e;
}

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

ErrorCode parse_error(std::string_view raw, bool cot) {
  try {
    parse_output(raw, cot);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << raw;
  return ErrorCode::ConfigError;
}

std::vector<RetrievedShot> shots(std::size_t n) {
  eval::Rng rng(5);
  std::vector<RetrievedShot> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto e = make_example("s" + std::to_string(i), "q" + std::to_string(i), hlc::testing::random_requirement(rng, "certain"),
                          "certain", i % 2 ? Label::defect : Label::not_defect);
    out.push_back({std::make_shared<const ValidatedExample>(e), 0.1 + 0.05 * static_cast<double>(i)});
  }
  return out;
}

}  // namespace

TEST(RenderShot, CotBlock) {
  const auto block = render_shot(example_255(), true);
  EXPECT_EQ(block.rfind("### Example\n", 0), 0u);
  EXPECT_NE(block.find("on «certain» crash levels."), std::string::npos);
  EXPECT_NE(block.find("Weak word: certain\n"), std::string::npos);
  EXPECT_NE(block.find(std::string("Reasoning: ") + hlc::testing::kReasoning255 + "\n"), std::string::npos);
  EXPECT_NE(block.find("Label: defect\n"), std::string::npos);
  EXPECT_EQ(block, render_shot(example_255(), true));
}

TEST(RenderShot, LabelOnlyBlock) {
  const auto block = render_shot(example_255(), false);
  EXPECT_EQ(block.find("Reasoning:"), std::string::npos);
  EXPECT_NE(block.find("Label: defect\n"), std::string::npos);
}

TEST(BuildPrompt, ZeroShot) {
  for (bool cot : {true, false}) {
    const auto b = build_prompt(finding_255(), {}, cot);
    EXPECT_TRUE(b.shot_blocks.empty());
    EXPECT_EQ(b.k_used, 0u);
    EXPECT_EQ(count(b.system_text, kShotDelimiter), 0u);
    EXPECT_EQ(count(b.user_text, kShotDelimiter), 0u);
    EXPECT_EQ(count(b.system_text, "reasoning sentence") > 0, cot);
    EXPECT_NE(b.user_text.find("«certain»"), std::string::npos);
  }
}

TEST(BuildPrompt, TwelveShotsMostSimilarLast) {
  const auto s = shots(12);
  const auto b = build_prompt(finding_255(), s, true);
  ASSERT_EQ(b.shot_blocks.size(), 12u);
  EXPECT_EQ(count(b.system_text, kShotDelimiter), 12u);
  EXPECT_EQ(b.shot_blocks.back(), render_shot(*s.back().example, true));
  const auto last = b.system_text.rfind(kShotDelimiter);
  EXPECT_EQ(b.system_text.substr(last), b.shot_blocks.back());
}

TEST(BuildPrompt, LabelOnlyShotsHaveNoReasoning) {
  const auto b = build_prompt(finding_255(), shots(12), false);
  for (const auto& block : b.shot_blocks) {
    EXPECT_EQ(block.find("Reasoning:"), std::string::npos);
    EXPECT_NE(block.find("Label: "), std::string::npos);
  }
}

TEST(BuildPrompt, ShotCountProperty) {
  const auto all = shots(12);
  for (std::size_t k = 0; k <= 12; ++k) {
    const auto b = build_prompt(finding_255(), std::span(all).first(k), k % 2 == 0);
    EXPECT_EQ(b.shot_blocks.size(), k);
    EXPECT_EQ(count(b.system_text, kShotDelimiter), k);
  }
}

TEST(FindingKeyLine, ExtractedFromUserText) {
  const auto b = build_prompt(finding_255(), {}, true);
  const auto key = extract_finding_key(b.user_text);
  ASSERT_TRUE(key.has_value());
  EXPECT_EQ(*key, (FindingKey{"255", "certain"}));
  EXPECT_EQ(key->str(), "255\tcertain");
  EXPECT_FALSE(extract_gold_label(b.user_text).has_value());
  EXPECT_FALSE(extract_finding_key("no key here").has_value());
}

TEST(ReasoningPrompt, CarriesGoldLabel) {
  const auto b = build_reasoning_prompt(finding_255(), Label::not_defect);
  EXPECT_EQ(extract_gold_label(b.user_text), Label::not_defect);
  EXPECT_TRUE(extract_finding_key(b.user_text).has_value());
}

TEST(ParseOutput, Examples) {
  auto p = parse_output("Reasoning: The word 'certain' is undefined. Label: defect", true);
  EXPECT_EQ(p.label, Label::defect);
  EXPECT_EQ(p.reasoning, "The word 'certain' is undefined.");

  p = parse_output("Label: not defect", false);
  EXPECT_EQ(p.label, Label::not_defect);
  EXPECT_EQ(p.reasoning, "");
  EXPECT_EQ(p.raw_output, "Label: not defect");

  EXPECT_EQ(parse_error("I think it is fine.", true), ErrorCode::MissingLabel);
  EXPECT_EQ(parse_error("Label: perhaps", false), ErrorCode::UnknownLabel);
  EXPECT_EQ(parse_error("Label: defect", true), ErrorCode::MissingReasoning);
}

TEST(ParseOutput, ToleratesMarkup) {
  const auto p = parse_output("```\n**Reasoning:** It is vague.\n**Label:** Not Defect.\n```\n", true);
  EXPECT_EQ(p.label, Label::not_defect);
  EXPECT_EQ(p.reasoning, "It is vague.");
  EXPECT_EQ(parse_output("  label : `defect`  ", false).label, Label::defect);
  EXPECT_EQ(parse_output("Label: not_defect", false).label, Label::not_defect);
}

TEST(ParseOutput, LastLabelWins) {
  const auto p = parse_output("Reasoning: Could be either.\nLabel: defect\nWait.\nLabel: not defect", true);
  EXPECT_EQ(p.label, Label::not_defect);
  EXPECT_EQ(parse_output("Mislabel: x\nLabel: defect", false).label, Label::defect);
}

TEST(ParseOutput, RoundTripProperty) {
  eval::Rng rng(11);
  const auto& words = hlc::testing::vocabulary();
  for (int i = 0; i < 500; ++i) {
    std::string reasoning = "The";
    const std::size_t n = 1 + rng.uniform_index(20);
    for (std::size_t w = 0; w < n; ++w) {
      reasoning += rng.uniform_index(6) == 0 ? ", " : " ";
      reasoning += words[rng.uniform_index(words.size())];
    }
    reasoning += rng.uniform_index(2) ? "." : " 'quoted' (x).";
    const auto label = rng.uniform_index(2) ? Label::defect : Label::not_defect;
    const bool cot = rng.uniform_index(2) == 0;
    const auto p = parse_output(render_answer(reasoning, label, cot), cot);
    EXPECT_EQ(p.label, label);
    EXPECT_EQ(p.reasoning, cot ? reasoning : "");
  }
}

TEST(MarkSpan, CodePointSafe) {
  EXPECT_EQ(mark_span("é certain", {2, 9}), "é «certain»");
  EXPECT_THROW(mark_span("abc", {2, 9}), Error);
}

TEST(FormatReminder, MentionsGrammar) {
  EXPECT_NE(format_reminder(true).find("Reasoning:"), std::string_view::npos);
  EXPECT_EQ(format_reminder(false).find("Reasoning:"), std::string_view::npos);
}
