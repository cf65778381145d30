#pragma once

#include <cstdint>
#include <vector>

#include "topicfuse/tensor.hpp"

namespace topicfuse {

struct AdamWConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay: the decay term lr * wd * theta is
// subtracted directly and never flows through the moment estimates.
class AdamW {
 public:
  AdamW(std::vector<Param*> params, AdamWConfig config);

  // Applies one update from the accumulated gradients, then zeroes them.
  void step();

  std::int64_t steps_taken() const { return t_; }
  const AdamWConfig& config() const { return config_; }

 private:
  std::vector<Param*> params_;
  std::vector<Tensor2> m_;
  std::vector<Tensor2> v_;
  AdamWConfig config_;
  std::int64_t t_ = 0;
};

}  // namespace topicfuse
