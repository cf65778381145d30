#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "topicfuse/rulebook.hpp"
#include "topicfuse/training.hpp"

namespace topicfuse {

struct CorpusConfig {
  int n = 400;
  std::uint64_t seed = 0;
  double paraphrase_frac = 0.25;   // labeled samples worded to defeat the rules
  double background_frac = 0.0;    // unlabeled neutral samples
  double multi_topic_frac = 0.25;  // labeled samples carrying two topics
};

// Raw sentence pools. Every trigger sentence matches exactly its own topic's
// rule; paraphrase, background, and filler sentences match no rule at all.
// Paraphrases share recurring cue words within a topic so a text encoder has
// something to learn from them.
const std::array<std::vector<std::string>, kTopicCount>& trigger_sentences();
const std::array<std::vector<std::string>, kTopicCount>& paraphrase_sentences();
const std::vector<std::string>& background_sentences();
const std::vector<std::string>& filler_sentences();

// Per-topic sampling weights: imbalanced on purpose, with a couple of
// dominant classes and one rare one, like the label distribution a deployed
// feedback classifier faces.
const std::array<int, kTopicCount>& topic_weights();

// Seeded synthetic corpus. Labeled samples draw their topic(s) from
// topic_weights() and render each topic as either a trigger or (with
// probability paraphrase_frac) a paraphrase, so the regex-classifiable
// fraction of the corpus is controlled. Sentences are joined with ". ",
// which no rule pattern can cross.
std::vector<LabeledSample> generate_corpus(const CorpusConfig& cfg);

}  // namespace topicfuse
