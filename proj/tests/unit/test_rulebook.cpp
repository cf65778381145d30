#include "doctest.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "topicfuse/rulebook.hpp"

using namespace topicfuse;

namespace {

const TopicRuleSet& shipped_rules() {
  static const TopicRuleSet set = load_rulebook(std::string(TOPICFUSE_DATA_DIR) + "/rulebook.tsv");
  return set;
}

std::string shipped_rulebook_text() {
  std::ifstream in(std::string(TOPICFUSE_DATA_DIR) + "/rulebook.tsv");
  REQUIRE(static_cast<bool>(in));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string to_upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST_CASE("shipped rulebook loads with the full rule id range") {
  const TopicRuleSet& set = shipped_rules();
  REQUIRE(set.rules.size() == 27);
  CHECK(set.no_topic_id() == 27);
  for (int i = 0; i < kTopicCount; ++i) {
    CHECK(set.rules[static_cast<size_t>(i)].id == i);
    CHECK(set.rules[static_cast<size_t>(i)].name == topic_names()[static_cast<size_t>(i)]);
  }
  CHECK(set.id_of("Portal Password") == 25);
  CHECK(set.id_of("No Such Topic") == -1);
}

TEST_CASE("a rulebook with a missing record is rejected with the found count") {
  std::string text = shipped_rulebook_text();
  size_t cut = text.rfind("\n26\t");
  REQUIRE(cut != std::string::npos);
  std::istringstream in(text.substr(0, cut + 1));
  try {
    parse_rulebook(in);
    FAIL("expected WrongRuleCount");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrongRuleCount);
    CHECK(std::string(e.what()).find("26") != std::string::npos);
  }
}

TEST_CASE("an uncompilable pattern is rejected") {
  std::istringstream in("0\tBroken\t(\n");
  try {
    parse_rulebook(in);
    FAIL("expected BadPattern");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadPattern);
  }
}

TEST_CASE("backreferences and lookaround are rejected as unportable") {
  const char* bad_patterns[] = {"(agent)\\1", "agent(?= rude)", "agent(?!ok)", "(?<=an )agent",
                                "(?<!the )agent"};
  for (const char* pattern : bad_patterns) {
    CAPTURE(pattern);
    std::istringstream in("0\tX\t" + std::string(pattern) + "\n");
    CHECK_THROWS_AS(parse_rulebook(in), Error);
    std::istringstream again("0\tX\t" + std::string(pattern) + "\n");
    try {
      parse_rulebook(again);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BadPattern);
    }
  }
  // An escaped backslash before a digit is a literal, not a backreference.
  std::istringstream ok("0\tX\tagent \\\\1\n");
  try {
    parse_rulebook(ok);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrongRuleCount);  // pattern itself was accepted
  }
}

TEST_CASE("malformed records are rejected with their line number") {
  struct Case {
    const char* line;
    ErrorKind kind;
  };
  const Case cases[] = {
      {"abc\tX\tfoo", ErrorKind::ParseError},
      {"0\tX", ErrorKind::ParseError},
      {"99\tX\tfoo", ErrorKind::ParseError},
      {"-1\tX\tfoo", ErrorKind::ParseError},
      {"0\t\tfoo", ErrorKind::ParseError},
      {"0\tX\t", ErrorKind::ParseError},
  };
  for (const Case& c : cases) {
    CAPTURE(c.line);
    std::istringstream in(std::string(c.line) + "\n");
    try {
      parse_rulebook(in, "book.tsv");
      FAIL("expected a parse failure");
    } catch (const Error& e) {
      CHECK(e.kind() == c.kind);
      CHECK(std::string(e.what()).find("book.tsv:1") != std::string::npos);
    }
  }
}

TEST_CASE("a duplicated rule id is rejected") {
  std::istringstream in("0\tA\tfoo\n0\tB\tbar\n");
  try {
    parse_rulebook(in);
    FAIL("expected DuplicateTopicId");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateTopicId);
  }
}

TEST_CASE("comments and blank lines are ignored") {
  std::string text = shipped_rulebook_text();
  std::istringstream in("# leading comment\n\n" + text + "\n# trailing\n");
  TopicRuleSet set = parse_rulebook(in);
  CHECK(set.rules.size() == 27);
}

TEST_CASE("a missing rulebook file reports its path") {
  try {
    load_rulebook("/no/such/dir/rulebook.tsv");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingFile);
    CHECK(std::string(e.what()).find("/no/such/dir/rulebook.tsv") != std::string::npos);
  }
}

TEST_CASE("unmatched text yields the sentinel feature alone") {
  RegexFeatureVector fv = tag("qwertyuiop", shipped_rules());
  CHECK(fv.feature_ids == std::vector<int>{27});
  CHECK_FALSE(fv.truncated);

  PredictionSet ps = classify_rules_only("qwertyuiop", shipped_rules(), "d1");
  CHECK(ps.doc_id == "d1");
  CHECK(ps.topics.empty());
  CHECK(ps.is_emerging);
}

namespace {

// One sentence per rule, each designed to trip exactly its own rule.
const std::vector<std::pair<int, std::string>>& single_topic_samples() {
  static const std::vector<std::pair<int, std::string>> samples = {
      {0, "I could not understand the agent at all"},
      {2, "I spoke with an offshore agent yesterday"},
      {5, "I cannot log in to the mobile app"},
      {9, "I had to call multiple times about this"},
      {11, "nobody called me back or followed up"},
      {14, "I could not submit my claim online"},
      {19, "I want to check my coverage amount"},
      {25, "I cannot reset my password"},
      {26, "the website keeps crashing"},
  };
  return samples;
}

}  // namespace

TEST_CASE("single-topic samples map to exactly their own rule") {
  for (const auto& [id, text] : single_topic_samples()) {
    CAPTURE(text);
    RegexFeatureVector fv = tag(text, shipped_rules());
    CHECK(fv.feature_ids == std::vector<int>{id});
  }
}

TEST_CASE("the feature cap keeps the lowest rule ids and flags truncation") {
  std::string text;
  for (const auto& [id, sentence] : single_topic_samples()) {
    (void)id;
    text += sentence;
    text += ". ";
  }

  RegexFeatureVector capped = tag(text, shipped_rules());
  CHECK(capped.feature_ids == std::vector<int>{0, 2, 5, 9, 11, 14, 19});
  CHECK(capped.truncated);

  RegexFeatureVector wide = tag(text, shipped_rules(), 9);
  CHECK(wide.feature_ids == std::vector<int>{0, 2, 5, 9, 11, 14, 19, 25, 26});
  CHECK_FALSE(wide.truncated);

  RegexFeatureVector narrow = tag(text, shipped_rules(), 1);
  CHECK(narrow.feature_ids == std::vector<int>{0});
  CHECK(narrow.truncated);
}

TEST_CASE("tagging is case-insensitive") {
  for (const auto& [id, text] : single_topic_samples()) {
    (void)id;
    RegexFeatureVector lower = tag(text, shipped_rules());
    RegexFeatureVector upper = tag(to_upper(text), shipped_rules());
    CHECK(lower.feature_ids == upper.feature_ids);
    CHECK(lower.truncated == upper.truncated);
  }
}

TEST_CASE("tagging the same text twice gives identical results") {
  std::string text = "The agent was rude and the service was terrible.";
  RegexFeatureVector a = tag(text, shipped_rules(), kDefaultFeatureCap, "d9");
  RegexFeatureVector b = tag(text, shipped_rules(), kDefaultFeatureCap, "d9");
  CHECK(a.feature_ids == b.feature_ids);
  CHECK(a.truncated == b.truncated);
  CHECK(a.doc_id == b.doc_id);
}

TEST_CASE("a cap below one is rejected") {
  CHECK_THROWS_AS(tag("anything", shipped_rules(), 0), std::invalid_argument);
  CHECK_THROWS_AS(tag("anything", shipped_rules(), -3), std::invalid_argument);
}

TEST_CASE("multi-topic text reports every matching rule") {
  std::string text = "The agent was rude and the service was terrible.";
  RegexFeatureVector fv = tag(text, shipped_rules());
  CHECK(fv.feature_ids == std::vector<int>{3, 4});

  PredictionSet ps = classify_rules_only(text, shipped_rules());
  REQUIRE(ps.topics.size() == 2);
  CHECK(ps.topics[0].first == "Agent Service Attitude");
  CHECK(ps.topics[1].first == "Agent Service Quality");
  CHECK(ps.topics[0].second == 1.0);
  CHECK(ps.topics[1].second == 1.0);
  CHECK_FALSE(ps.is_emerging);
}

TEST_CASE("a coverage email complaint outside the rulebook maps to emerging") {
  std::string text =
      "I would like to have my coverage details emailed to me which still was not done. "
      "There was no proof for the explanation provided by your agent.";
  RegexFeatureVector fv = tag(text, shipped_rules());
  CHECK(fv.feature_ids == std::vector<int>{27});

  PredictionSet ps = classify_rules_only(text, shipped_rules());
  CHECK(ps.is_emerging);
  CHECK(ps.topics.empty());
}
