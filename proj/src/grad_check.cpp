#include "topicfuse/grad_check.hpp"

#include <cmath>

namespace topicfuse {

GradCheckResult check_gradients(const std::vector<Param*>& params,
                                const std::function<double()>& loss, double eps) {
  GradCheckResult res;
  for (Param* p : params) {
    for (size_t i = 0; i < p->value.data.size(); ++i) {
      double analytic = p->grad.data[i];
      double saved = p->value.data[i];
      p->value.data[i] = saved + eps;
      double up = loss();
      p->value.data[i] = saved - eps;
      double down = loss();
      p->value.data[i] = saved;
      double numeric = (up - down) / (2.0 * eps);
      double rel = std::fabs(analytic - numeric) /
                   std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = p->name;
        res.worst_index = static_cast<int>(i);
        res.analytic = analytic;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace topicfuse
