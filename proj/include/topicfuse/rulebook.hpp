#pragma once

#include <array>
#include <istream>
#include <regex>
#include <string>
#include <vector>

#include "topicfuse/errors.hpp"
#include "topicfuse/prediction.hpp"

namespace topicfuse {

inline constexpr int kTopicCount = 27;
inline constexpr int kNoTopicFeature = 27;  // sentinel when no rule fires
inline constexpr int kFeatureCount = 28;    // 27 topics plus the sentinel
inline constexpr int kDefaultFeatureCap = 7;

// Canonical topic names, in rule id order. The shipped rulebook and the
// synthetic corpus generator both use these.
const std::array<std::string, kTopicCount>& topic_names();

struct TopicRule {
  int id = -1;
  std::string name;
  std::string pattern;
  std::regex compiled;
};

// Immutable after load; tag/classify are pure and safe to share across threads.
struct TopicRuleSet {
  std::vector<TopicRule> rules;  // exactly kTopicCount, ordered by id

  int no_topic_id() const { return static_cast<int>(rules.size()); }
  const TopicRule& by_id(int id) const { return rules.at(static_cast<size_t>(id)); }
  // Returns -1 when no rule carries the name.
  int id_of(const std::string& name) const;
};

struct RegexFeatureVector {
  std::string doc_id;
  std::vector<int> feature_ids;  // sorted ascending, unique, each in [0, 27]
  bool truncated = false;
};

// Rulebook file: UTF-8, one record per line, `<id>\t<name>\t<pattern>`,
// `#` lines are comments. Exactly 27 records.
TopicRuleSet load_rulebook(const std::string& path);
TopicRuleSet parse_rulebook(std::istream& in, const std::string& source_name = "<stream>");

// All rule ids whose pattern matches anywhere in `text` (case-insensitive),
// sorted ascending and cut to the lowest `cap` ids. No match yields the
// sentinel alone.
RegexFeatureVector tag(const std::string& text, const TopicRuleSet& rules,
                       int cap = kDefaultFeatureCap, const std::string& doc_id = "");

// The rules-only baseline: every matched topic at probability 1.0, or the
// emerging marker when nothing matches. Not capped.
PredictionSet classify_rules_only(const std::string& text, const TopicRuleSet& rules,
                                  const std::string& doc_id = "");

}  // namespace topicfuse
