#include "topicfuse/adamw.hpp"

#include <cmath>

namespace topicfuse {

AdamW::AdamW(std::vector<Param*> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void AdamW::step() {
  ++t_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Param& p = *params_[pi];
    Tensor2& m = m_[pi];
    Tensor2& v = v_[pi];
    for (size_t i = 0; i < p.value.data.size(); ++i) {
      double g = p.grad.data[i];
      m.data[i] = config_.beta1 * m.data[i] + (1.0 - config_.beta1) * g;
      v.data[i] = config_.beta2 * v.data[i] + (1.0 - config_.beta2) * g * g;
      double m_hat = m.data[i] / bc1;
      double v_hat = v.data[i] / bc2;
      double theta = p.value.data[i];
      p.value.data[i] = theta - config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps) -
                        config_.lr * config_.weight_decay * theta;
    }
    p.grad.zero();
  }
}

}  // namespace topicfuse
