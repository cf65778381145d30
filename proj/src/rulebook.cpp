#include "topicfuse/rulebook.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace topicfuse {
namespace {

// The regex dialect we accept is the portable core: alternation, classes,
// quantifiers, groups. Backreferences and lookaround behave differently
// across engines, so a rulebook using them is rejected at load time.
std::string find_unportable_construct(const std::string& pattern) {
  for (size_t i = 0; i + 1 < pattern.size(); ++i) {
    if (pattern[i] == '\\' && pattern[i + 1] >= '1' && pattern[i + 1] <= '9') {
      return "backreference \\" + std::string(1, pattern[i + 1]);
    }
    if (pattern[i] == '\\') {
      ++i;  // escaped char, skip so "\\(" is not read as a group opener
      continue;
    }
    if (pattern[i] == '(' && pattern[i + 1] == '?') {
      if (i + 2 < pattern.size() && (pattern[i + 2] == '=' || pattern[i + 2] == '!')) {
        return "lookahead (?" + std::string(1, pattern[i + 2]);
      }
      if (i + 3 < pattern.size() && pattern[i + 2] == '<' &&
          (pattern[i + 3] == '=' || pattern[i + 3] == '!')) {
        return "lookbehind (?<" + std::string(1, pattern[i + 3]);
      }
    }
  }
  return "";
}

[[noreturn]] void parse_fail(const std::string& source, int line_no, const std::string& what) {
  throw Error(ErrorKind::ParseError,
              source + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

const std::array<std::string, kTopicCount>& topic_names() {
  static const std::array<std::string, kTopicCount> names = {
      "Agent Communication",
      "Agent Knowledge and Resolution Speed",
      "Offshore Agents",
      "Agent Service Attitude",
      "Agent Service Quality",
      "Application Authentication",
      "Application Interface/Navigation",
      "Audio Quality/Connection",
      "Call Transfer",
      "Called Multiple Times",
      "IVR",
      "Call Lack of follow-up",
      "Language Barrier",
      "Unable to resolve issue",
      "Claims Online Submission",
      "Claims Process",
      "Claims Result",
      "Claims Status/Decision",
      "Claims Payment/Reimbursement",
      "Product Coverage/Policy",
      "Portal Authentication",
      "Portal Computer Literacy",
      "Portal Ease of use",
      "Portal Information",
      "Portal Interface/Navigation",
      "Portal Password",
      "Portal Stability/Loading Time",
  };
  return names;
}

int TopicRuleSet::id_of(const std::string& name) const {
  for (const TopicRule& rule : rules) {
    if (rule.name == name) return rule.id;
  }
  return -1;
}

TopicRuleSet parse_rulebook(std::istream& in, const std::string& source_name) {
  TopicRuleSet set;
  std::array<bool, kTopicCount> seen{};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    size_t first_tab = line.find('\t');
    size_t second_tab = first_tab == std::string::npos ? std::string::npos
                                                       : line.find('\t', first_tab + 1);
    if (second_tab == std::string::npos) {
      parse_fail(source_name, line_no, "expected <id>\\t<name>\\t<pattern>");
    }
    std::string id_field = line.substr(0, first_tab);
    std::string name = line.substr(first_tab + 1, second_tab - first_tab - 1);
    std::string pattern = line.substr(second_tab + 1);

    int id = -1;
    auto [ptr, ec] = std::from_chars(id_field.data(), id_field.data() + id_field.size(), id);
    if (ec != std::errc() || ptr != id_field.data() + id_field.size()) {
      parse_fail(source_name, line_no, "rule id is not an integer: '" + id_field + "'");
    }
    if (id < 0 || id >= kTopicCount) {
      parse_fail(source_name, line_no,
                 "rule id " + std::to_string(id) + " outside [0, " +
                     std::to_string(kTopicCount - 1) + "]");
    }
    if (seen[static_cast<size_t>(id)]) {
      throw Error(ErrorKind::DuplicateTopicId,
                  source_name + ":" + std::to_string(line_no) + ": rule id " +
                      std::to_string(id) + " appears twice");
    }
    seen[static_cast<size_t>(id)] = true;
    if (name.empty()) parse_fail(source_name, line_no, "empty rule name");
    if (pattern.empty()) parse_fail(source_name, line_no, "empty rule pattern");

    std::string bad = find_unportable_construct(pattern);
    if (!bad.empty()) {
      throw Error(ErrorKind::BadPattern,
                  "rule " + std::to_string(id) + ": unportable construct " + bad);
    }
    TopicRule rule;
    rule.id = id;
    rule.name = std::move(name);
    rule.pattern = std::move(pattern);
    try {
      rule.compiled = std::regex(rule.pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error(ErrorKind::BadPattern,
                  "rule " + std::to_string(id) + ": " + e.what());
    }
    set.rules.push_back(std::move(rule));
  }

  if (set.rules.size() != static_cast<size_t>(kTopicCount)) {
    throw Error(ErrorKind::WrongRuleCount,
                source_name + ": found " + std::to_string(set.rules.size()) +
                    " rules, expected " + std::to_string(kTopicCount));
  }
  std::sort(set.rules.begin(), set.rules.end(),
            [](const TopicRule& a, const TopicRule& b) { return a.id < b.id; });
  return set;
}

TopicRuleSet load_rulebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open rulebook: " + path);
  }
  return parse_rulebook(in, path);
}

RegexFeatureVector tag(const std::string& text, const TopicRuleSet& rules, int cap,
                       const std::string& doc_id) {
  if (cap < 1) {
    throw std::invalid_argument("tag: cap must be at least 1, got " + std::to_string(cap));
  }
  RegexFeatureVector out;
  out.doc_id = doc_id;
  for (const TopicRule& rule : rules.rules) {
    if (std::regex_search(text, rule.compiled)) out.feature_ids.push_back(rule.id);
  }
  if (out.feature_ids.empty()) {
    out.feature_ids.push_back(rules.no_topic_id());
  } else if (out.feature_ids.size() > static_cast<size_t>(cap)) {
    out.feature_ids.resize(static_cast<size_t>(cap));
    out.truncated = true;
  }
  return out;
}

PredictionSet classify_rules_only(const std::string& text, const TopicRuleSet& rules,
                                  const std::string& doc_id) {
  PredictionSet out;
  out.doc_id = doc_id;
  for (const TopicRule& rule : rules.rules) {
    if (std::regex_search(text, rule.compiled)) out.topics.emplace_back(rule.name, 1.0);
  }
  out.is_emerging = out.topics.empty();
  return out;
}

}  // namespace topicfuse
