// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "tirforge/schema.hpp"

namespace tirforge {
namespace {

using testing::sample_record;

TEST(PatternLabel, ComplementIsAnInvolution) {
  for (auto p : {PatternLabel::kA, PatternLabel::kB}) {
    EXPECT_EQ(complement(complement(p)), p);
    EXPECT_NE(complement(p), p);
  }
}

TEST(PatternLabel, NamesAreFixed) {
  EXPECT_EQ(pattern_name(PatternLabel::kA), "algorithmic");
  EXPECT_EQ(pattern_name(PatternLabel::kB), "calculator");
  EXPECT_EQ(to_char(PatternLabel::kA), 'A');
  EXPECT_EQ(to_char(PatternLabel::kB), 'B');
}

TEST(PatternLabel, ParsesOnlyTheTwoLetters) {
  EXPECT_EQ(parse_pattern_label(" A "), PatternLabel::kA);
  EXPECT_EQ(parse_pattern_label("B"), PatternLabel::kB);
  EXPECT_FALSE(parse_pattern_label("C"));
  EXPECT_FALSE(parse_pattern_label("AB"));
  EXPECT_FALSE(parse_pattern_label(""));
}

TEST(ValidateRecord, WellFormedRecordHasNoViolations) {
  EXPECT_TRUE(validate_record(sample_record("p1")).empty());
}

TEST(ValidateRecord, EmptyCodeIsReported) {
  auto r = sample_record("p1");
  r.chosen.code = "";
  EXPECT_EQ(validate_record(r), std::vector<std::string>{"empty code block"});
}

TEST(ValidateRecord, DuplicatedReasoningIsReported) {
  auto r = sample_record("p1");
  r.counter.reasoning = r.chosen.reasoning;
  EXPECT_EQ(validate_record(r), std::vector<std::string>{"duplicated reasoning"});
}

TEST(ValidateRecord, DuplicationIgnoresWhitespaceLayout) {
  auto r = sample_record("p1");
  r.counter.code = "count = sum(1 for k in range(10)   if k % 2 == 0)\n\n  print(count)  ";
  EXPECT_EQ(validate_record(r), std::vector<std::string>{"duplicated code"});
}

TEST(ValidateRecord, EmptyFinalAnswerAndFenceInCode) {
  auto r = sample_record("p1");
  r.counter.final_answer = "  ";
  r.chosen.code = "print(1)\n```\nprint(2)";
  auto v = validate_record(r);
  EXPECT_NE(std::find(v.begin(), v.end(), "empty final answer"), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), "code block contains a fence delimiter"), v.end());
}

TEST(ReasoningWarnings, FlagsListMarkers) {
  Solution s;
  s.reasoning = "First line.\n- a bullet\n2. numbered\n(3) paren";
  EXPECT_EQ(reasoning_warnings(s).size(), 3u);
  s.reasoning = "A single paragraph with 2.5 and a - dash inside.";
  EXPECT_TRUE(reasoning_warnings(s).empty());
}

TEST(NormalizeWhitespace, CollapsesAndTrims) {
  EXPECT_EQ(normalize_whitespace("  a \n\t b  "), "a b");
  EXPECT_EQ(normalize_whitespace(""), "");
}

template <class T>
void expect_round_trip(const T& v) {
  std::string line = to_json_line(v);
  T back = from_json_line<T>(line);
  EXPECT_EQ(back, v);
  EXPECT_EQ(to_json_line(back), line);
}

TEST(JsonLines, FieldNamesAndOrderAreFixed) {
  Problem p{"p1", "2+2?", "4", "corpus", {}};
  EXPECT_EQ(to_json_line(p), R"({"id":"p1","statement":"2+2?","gold_answer":"4","source":"corpus"})");
  SFTExample e{"p1#A", "prompt", "target", PatternLabel::kA, {}};
  EXPECT_EQ(to_json_line(e), R"({"id":"p1#A","prompt":"prompt","target":"target","pattern":"A"})");
  PreferencePair pp{"p1", "q", "w", "l", PatternLabel::kB, {}};
  EXPECT_EQ(to_json_line(pp),
            R"({"id":"p1","prompt":"q","winner":"w","loser":"l","winner_pattern":"B"})");
  auto r = sample_record("p1");
  std::string line = to_json_line(r);
  EXPECT_EQ(line.find(R"({"problem_id":"p1","chosen_pattern":"A","chosen":{"reasoning":)"), 0u);
  EXPECT_NE(line.find(R"("claimed_outputs":["5"],"final_answer":"5"})"), std::string::npos);
}

TEST(JsonLines, RoundTripsEveryType) {
  expect_round_trip(Problem{"p1", "What is \"x\"?\nÜnïcödé", std::nullopt, "", {}});
  expect_round_trip(Problem{"p2", "s", "\\frac{1}{2}", "math", {}});
  auto r = sample_record("p3", PatternLabel::kB);
  r.raw = "{\"raw\": true}\n";
  expect_round_trip(r);
  expect_round_trip(r.chosen);
  expect_round_trip(SFTExample{"p3#B", "prompt\n", "target\t", PatternLabel::kB, {}});
  expect_round_trip(PreferencePair{"p3", "q", "w", "l", PatternLabel::kA, {}});
}

TEST(JsonLines, RandomRoundTrip) {
  std::mt19937_64 rng(99);
  auto text = [&](std::size_t max_len) {
    // Whole code points only, so every generated string is valid UTF-8.
    static const std::vector<std::string> alphabet = {"a", "b", "c", "X", "Y", "Z", " ", "0",
                                                      "1", "9", "\"", "\\", "\n", "\t", "{",
                                                      "}", "[", "]", ":", ",", "#", "é", "∑"};
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::string s;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int i = 0; i < 200; ++i) {
    TeacherRecord r;
    r.problem_id = "id" + std::to_string(i);
    r.chosen_pattern = rng() % 2 ? PatternLabel::kA : PatternLabel::kB;
    r.chosen = {text(40), text(60), {text(10), text(10)}, text(8)};
    r.counter = {text(40), text(60), {}, text(8)};
    r.raw = text(100);
    expect_round_trip(r);
  }
}

TEST(JsonLines, UnknownFieldsKeptOnReadDroppedOnWrite) {
  auto p = from_json_line<Problem>(
      R"({"id":"p1","statement":"s","gold_answer":null,"source":"x","difficulty":3,"tags":["a"]})");
  ASSERT_EQ(p.extra.size(), 2u);
  EXPECT_EQ(p.extra.at("difficulty"), "3");
  EXPECT_EQ(p.extra.at("tags"), R"(["a"])");
  EXPECT_EQ(to_json_line(p), R"({"id":"p1","statement":"s","gold_answer":null,"source":"x"})");
}

TEST(JsonLines, RejectsBadRows) {
  EXPECT_THROW(from_json_line<Problem>("{not json"), FormatError);
  EXPECT_THROW(from_json_line<Problem>(R"({"statement":"s"})"), FormatError);
  EXPECT_THROW(from_json_line<Problem>(R"({"id":"","statement":"s"})"), FormatError);
  EXPECT_THROW(from_json_line<SFTExample>(R"({"id":"a","prompt":"p","target":"t","pattern":"C"})"),
               FormatError);
  EXPECT_THROW(from_json_line<Problem>("[1,2]"), FormatError);
}

TEST(JsonLines, ReadJsonlReportsLineNumbers) {
  testing::TempDir dir;
  testing::write_text(dir / "rows.jsonl",
                      "{\"id\":\"a\",\"statement\":\"s\"}\n\n{\"id\":\"b\"}\n");
  try {
    read_jsonl<Problem>(dir / "rows.jsonl");
    FAIL() << "expected MalformedRow";
  } catch (const MalformedRow& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(JsonLines, WriteThenReadPreservesRows) {
  testing::TempDir dir;
  std::vector<Problem> rows{{"a", "s1", "1", "x", {}}, {"b", "s2", std::nullopt, "y", {}}};
  write_jsonl(dir / "p.jsonl", rows);
  EXPECT_EQ(read_jsonl<Problem>(dir / "p.jsonl"), rows);
}

TEST(DPOConfigTest, BetaMustBePositive) {
  EXPECT_NO_THROW(DPOConfig{}.validate());
  EXPECT_DOUBLE_EQ(DPOConfig{}.beta, 0.1);
  EXPECT_THROW(DPOConfig{0.0}.validate(), PreconditionError);
  EXPECT_THROW(DPOConfig{-1.0}.validate(), PreconditionError);
}

TEST(ExecStatusNames, MatchWireSpelling) {
  EXPECT_EQ(to_string(ExecStatus::kOk), "ok");
  EXPECT_EQ(to_string(ExecStatus::kRuntimeError), "runtime_error");
  EXPECT_EQ(to_string(ExecStatus::kTimeout), "timeout");
  EXPECT_EQ(to_string(ExecStatus::kResourceLimit), "resource_limit");
  EXPECT_EQ(to_string(ExecStatus::kSpawnError), "spawn_error");
}

}  // namespace
}  // namespace tirforge
