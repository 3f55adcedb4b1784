#include <gtest/gtest.h>

#include "hlc/error.hpp"
#include "hlc/model.hpp"
#include "hlc/text.hpp"

using namespace hlc;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected hlc::Error";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(ParseLabel, CanonicalForms) {
  EXPECT_EQ(parse_label("defect"), Label::defect);
  EXPECT_EQ(parse_label("Not Defect"), Label::not_defect);
  EXPECT_EQ(parse_label("not_defect"), Label::not_defect);
  EXPECT_EQ(parse_label("  no defect \n"), Label::not_defect);
  EXPECT_EQ(parse_label("DEFECT"), Label::defect);
}

TEST(ParseLabel, RejectsUnknownTokens) {
  EXPECT_EQ(code_of([] { parse_label("maybe"); }), ErrorCode::UnknownLabel);
  EXPECT_EQ(code_of([] { parse_label(""); }), ErrorCode::UnknownLabel);
  EXPECT_EQ(code_of([] { parse_label("defective"); }), ErrorCode::UnknownLabel);
}

TEST(Label, WireAndDisplayForms) {
  EXPECT_EQ(to_string(Label::not_defect), "not_defect");
  EXPECT_EQ(display_name(Label::not_defect), "not defect");
  EXPECT_EQ(flipped(Label::defect), Label::not_defect);
  EXPECT_EQ(flipped(flipped(Label::defect)), Label::defect);
  for (auto l : {Label::defect, Label::not_defect}) {
    EXPECT_EQ(parse_label(to_string(l)), l);
    EXPECT_EQ(parse_label(display_name(l)), l);
  }
}

TEST(NormalizeText, CollapsesCaseAndWhitespace) {
  EXPECT_EQ(normalize_text("  Certain  crash "), "certain crash");
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text("appropriate"), "appropriate");
  EXPECT_EQ(normalize_text("\tA\n\nB C"), "a b c");
}

TEST(NormalizeText, ComposesToNfc) {
  // e + combining acute vs precomposed é
  EXPECT_EQ(normalize_text("Cafe\u0301"), normalize_text("caf\u00e9"));
  EXPECT_EQ(normalize_text("ÉTÉ"), "été");
}

TEST(NormalizeText, Idempotent) {
  for (const char* s : {"  Mixed CASE  text ", "École", "a-b  c", "", "   "}) {
    const auto once = normalize_text(s);
    EXPECT_EQ(normalize_text(once), once) << s;
  }
}

TEST(CodePoints, RoundTripAndSubstr) {
  const std::string s = "aé中\U0001F600z";
  EXPECT_EQ(code_point_length(s), 5u);
  EXPECT_EQ(to_utf8(to_code_points(s)), s);
  EXPECT_EQ(code_point_substr(s, 1, 3), "é中");
  EXPECT_EQ(code_point_substr(s, 3, 5), "\U0001F600z");
  EXPECT_EQ(code_point_substr(s, 2, 2), "");
  EXPECT_EQ(code_of([&] { code_point_substr(s, 4, 6); }), ErrorCode::InvalidRequirement);
  EXPECT_EQ(code_of([&] { code_point_substr(s, 3, 2); }), ErrorCode::InvalidRequirement);
}

TEST(CodePoints, IllFormedBecomesReplacement) {
  const auto cps = to_code_points(std::string("a\xff" "b"));
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], U'\uFFFD');
}

TEST(TokenChars, Classes) {
  EXPECT_TRUE(is_token_char(U'a'));
  EXPECT_TRUE(is_token_char(U'7'));
  EXPECT_TRUE(is_token_char(U'-'));
  EXPECT_TRUE(is_token_char(U'\u2010'));
  EXPECT_TRUE(is_token_char(U'é'));
  EXPECT_FALSE(is_token_char(U' '));
  EXPECT_FALSE(is_token_char(U'.'));
  EXPECT_FALSE(is_token_char(U'('));
  EXPECT_FALSE(is_token_char(U'+'));
  EXPECT_FALSE(is_token_char(U'\u00A0'));
}

TEST(Trim, UnicodeWhitespace) {
  EXPECT_EQ(trim("  x y \t"), "x y");
  EXPECT_EQ(trim("   "), "");
}

TEST(Requirement, Validate) {
  EXPECT_NO_THROW((Requirement{"1", "text"}.validate()));
  EXPECT_EQ(code_of([] { Requirement{"", "text"}.validate(); }), ErrorCode::InvalidRequirement);
  EXPECT_EQ(code_of([] { Requirement{"1", "  \n"}.validate(); }), ErrorCode::InvalidRequirement);
}

TEST(Finding, ValidateChecksSpanAndSurface) {
  const Requirement r{"1", "Use certain values."};
  EXPECT_NO_THROW((Finding{r, {"certain", "certain", {4, 11}}}.validate()));
  EXPECT_EQ(code_of([&] { Finding{r, {"certain", "certain", {5, 12}}}.validate(); }), ErrorCode::InvalidRequirement);
  EXPECT_EQ(code_of([&] { Finding{r, {"certain", "certain", {4, 40}}}.validate(); }), ErrorCode::InvalidRequirement);
  EXPECT_EQ(code_of([&] { Finding{r, {"certain", "values", {4, 11}}}.validate(); }), ErrorCode::InvalidRequirement);
}

TEST(Span, Overlap) {
  EXPECT_TRUE((Span{0, 5}.overlaps(Span{4, 6})));
  EXPECT_FALSE((Span{0, 5}.overlaps(Span{5, 6})));
  EXPECT_EQ((Span{2, 9}.length()), 7u);
}

TEST(ErrorCodes, NamesAndParseClass) {
  EXPECT_EQ(to_string(ErrorCode::DimensionMismatch), "DimensionMismatch");
  EXPECT_EQ(to_string(ErrorCode::AlreadyValidated), "AlreadyValidated");
  EXPECT_TRUE(is_parse_error(ErrorCode::MissingLabel));
  EXPECT_TRUE(is_parse_error(ErrorCode::UnknownLabel));
  EXPECT_TRUE(is_parse_error(ErrorCode::MissingReasoning));
  EXPECT_FALSE(is_parse_error(ErrorCode::ScriptMiss));
  const CorruptRecordError e(7, "bad json");
  EXPECT_EQ(e.line(), 7u);
  EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
  EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
}
