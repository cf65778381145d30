#pragma once

#include <functional>
#include <string>
#include <vector>

#include "topicfuse/tensor.hpp"

namespace topicfuse {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;

  bool ok(double threshold = 1e-5) const { return max_rel_err < threshold; }
};

// Central-difference verification of analytic gradients. The caller runs one
// forward/backward pass first so every param's grad holds the analytic value;
// loss must rerun the forward pass from current param values without touching
// grads. Relative error per component is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult check_gradients(const std::vector<Param*>& params,
                                const std::function<double()>& loss, double eps = 1e-5);

}  // namespace topicfuse
