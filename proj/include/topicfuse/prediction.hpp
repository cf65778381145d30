#pragma once

#include <string>
#include <utility>
#include <vector>

namespace topicfuse {

// Final per-document output: either a set of retained topics with their
// probabilities, or an empty set flagged as emerging.
struct PredictionSet {
  std::string doc_id;
  std::vector<std::pair<std::string, double>> topics;  // (name, probability), unique names
  bool is_emerging = false;
  double threshold = 0.5;
};

inline const char* kEmergingTopicName = "Emerging Topic";

}  // namespace topicfuse
