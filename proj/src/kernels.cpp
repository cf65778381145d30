#include "topicfuse/kernels.hpp"

#include <cmath>

namespace topicfuse {

Linear::Linear(const std::string& name, int in_dim, int out_dim, bool with_bias)
    : weight(name + ".weight", in_dim, out_dim),
      bias(name + ".bias", 1, out_dim),
      has_bias_(with_bias) {
  if (in_dim < 1 || out_dim < 1) {
    throw Error(ErrorKind::DimensionMismatch, name + ": dimensions must be positive");
  }
}

void Linear::init(Rng& rng) {
  double limit = std::sqrt(6.0 / (in_dim() + out_dim()));
  for (double& w : weight.value.data) w = rng.uniform(-limit, limit);
  bias.value.zero();
}

Tensor2 Linear::forward(const Tensor2& x) {
  if (x.cols != in_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                weight.name + ": input has " + std::to_string(x.cols) + " columns, expected " +
                    std::to_string(in_dim()));
  }
  input_ = x;
  Tensor2 y(x.rows, out_dim());
  for (int r = 0; r < x.rows; ++r) {
    for (int o = 0; o < out_dim(); ++o) {
      double acc = bias.value(0, o);  // stays zero for a bias-free layer
      for (int i = 0; i < in_dim(); ++i) acc += x(r, i) * weight.value(i, o);
      y(r, o) = acc;
    }
  }
  return y;
}

Tensor2 Linear::backward(const Tensor2& grad_out) {
  require_shape(grad_out, input_.rows, out_dim(), "Linear::backward");
  Tensor2 dx(input_.rows, in_dim());
  for (int r = 0; r < input_.rows; ++r) {
    for (int o = 0; o < out_dim(); ++o) {
      double g = grad_out(r, o);
      if (has_bias_) bias.grad(0, o) += g;
      for (int i = 0; i < in_dim(); ++i) {
        weight.grad(i, o) += g * input_(r, i);
        dx(r, i) += g * weight.value(i, o);
      }
    }
  }
  return dx;
}

void Linear::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

Embedding::Embedding(const std::string& name, int vocab, int dim)
    : table(name + ".table", vocab, dim) {
  if (vocab < 1 || dim < 1) {
    throw Error(ErrorKind::DimensionMismatch, name + ": dimensions must be positive");
  }
}

void Embedding::init(Rng& rng) {
  for (double& w : table.value.data) w = rng.uniform(-0.05, 0.05);
}

Tensor2 Embedding::forward(const std::vector<int>& ids) {
  ids_ = ids;
  Tensor2 y(static_cast<int>(ids.size()), dim());
  for (size_t r = 0; r < ids.size(); ++r) {
    int id = ids[r];
    if (id < 0 || id >= vocab()) {
      throw Error(ErrorKind::IdOutOfRange,
                  table.name + ": id " + std::to_string(id) + " outside [0, " +
                      std::to_string(vocab() - 1) + "]");
    }
    for (int c = 0; c < dim(); ++c) y(static_cast<int>(r), c) = table.value(id, c);
  }
  return y;
}

void Embedding::backward(const Tensor2& grad_out) {
  require_shape(grad_out, static_cast<int>(ids_.size()), dim(), "Embedding::backward");
  for (size_t r = 0; r < ids_.size(); ++r) {
    for (int c = 0; c < dim(); ++c) {
      table.grad(ids_[r], c) += grad_out(static_cast<int>(r), c);
    }
  }
}

void Embedding::collect_params(std::vector<Param*>& out) { out.push_back(&table); }

Tensor2 Tanh::forward(const Tensor2& x) {
  out_ = x;
  for (double& v : out_.data) v = std::tanh(v);
  return out_;
}

Tensor2 Tanh::backward(const Tensor2& grad_out) {
  require_shape(grad_out, out_.rows, out_.cols, "Tanh::backward");
  Tensor2 dx = grad_out;
  for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= 1.0 - out_.data[i] * out_.data[i];
  return dx;
}

Tensor2 Relu::forward(const Tensor2& x) {
  input_ = x;
  Tensor2 y = x;
  for (double& v : y.data)
    if (v < 0.0) v = 0.0;
  return y;
}

Tensor2 Relu::backward(const Tensor2& grad_out) {
  require_shape(grad_out, input_.rows, input_.cols, "Relu::backward");
  Tensor2 dx = grad_out;
  for (size_t i = 0; i < dx.data.size(); ++i)
    if (input_.data[i] <= 0.0) dx.data[i] = 0.0;
  return dx;
}

MultiHeadSelfAttention::MultiHeadSelfAttention(const std::string& name, int d_model, int heads)
    : wq(name + ".wq", d_model, d_model, false),
      wk(name + ".wk", d_model, d_model, false),
      wv(name + ".wv", d_model, d_model, false),
      wo(name + ".wo", d_model, d_model),
      d_model_(d_model),
      heads_(heads),
      d_head_(heads > 0 ? d_model / heads : 0) {
  if (heads < 1 || d_model % heads != 0) {
    throw Error(ErrorKind::DimensionMismatch,
                name + ": width " + std::to_string(d_model) + " not divisible into " +
                    std::to_string(heads) + " heads");
  }
}

void MultiHeadSelfAttention::init(Rng& rng) {
  wq.init(rng);
  wk.init(rng);
  wv.init(rng);
  wo.init(rng);
}

Tensor2 MultiHeadSelfAttention::forward(const Tensor2& x, const std::vector<char>& key_pad) {
  if (x.cols != d_model_) {
    throw Error(ErrorKind::DimensionMismatch, "attention input width " + std::to_string(x.cols) +
                                                  ", expected " + std::to_string(d_model_));
  }
  if (static_cast<int>(key_pad.size()) != x.rows) {
    throw Error(ErrorKind::LengthMismatch,
                "key mask has " + std::to_string(key_pad.size()) + " entries for " +
                    std::to_string(x.rows) + " rows");
  }
  bool any_open = false;
  for (char m : key_pad)
    if (!m) any_open = true;
  if (!any_open) {
    throw Error(ErrorKind::AllPositionsMasked, "every key position is padding");
  }

  x_ = x;
  pad_ = key_pad;
  q_ = wq.forward(x);
  k_ = wk.forward(x);
  v_ = wv.forward(x);

  int n = x.rows;
  double scale = 1.0 / std::sqrt(static_cast<double>(d_head_));
  attn_ = Tensor2(heads_ * n, n);
  Tensor2 ctx(n, d_model_);
  std::vector<double> scores(static_cast<size_t>(n));

  for (int h = 0; h < heads_; ++h) {
    int off = h * d_head_;
    for (int i = 0; i < n; ++i) {
      double max_score = -1e300;
      for (int j = 0; j < n; ++j) {
        if (pad_[static_cast<size_t>(j)]) continue;
        double s = 0.0;
        for (int c = 0; c < d_head_; ++c) s += q_(i, off + c) * k_(j, off + c);
        s *= scale;
        scores[static_cast<size_t>(j)] = s;
        if (s > max_score) max_score = s;
      }
      double denom = 0.0;
      for (int j = 0; j < n; ++j) {
        if (pad_[static_cast<size_t>(j)]) continue;
        denom += std::exp(scores[static_cast<size_t>(j)] - max_score);
      }
      for (int j = 0; j < n; ++j) {
        if (pad_[static_cast<size_t>(j)]) continue;  // weight row stays exactly 0.0
        double a = std::exp(scores[static_cast<size_t>(j)] - max_score) / denom;
        attn_(h * n + i, j) = a;
        for (int c = 0; c < d_head_; ++c) ctx(i, off + c) += a * v_(j, off + c);
      }
    }
  }
  Tensor2 attended = wo.forward(ctx);
  for (size_t i = 0; i < attended.data.size(); ++i) attended.data[i] += x.data[i];
  return attended;
}

Tensor2 MultiHeadSelfAttention::backward(const Tensor2& grad_out) {
  int n = x_.rows;
  require_shape(grad_out, n, d_model_, "attention backward");
  Tensor2 dctx = wo.backward(grad_out);

  Tensor2 dq(n, d_model_), dk(n, d_model_), dv(n, d_model_);
  double scale = 1.0 / std::sqrt(static_cast<double>(d_head_));
  std::vector<double> da(static_cast<size_t>(n));

  for (int h = 0; h < heads_; ++h) {
    int off = h * d_head_;
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;  // sum_k a_ik * da_ik, for the softmax jacobian
      for (int j = 0; j < n; ++j) {
        if (pad_[static_cast<size_t>(j)]) continue;
        double g = 0.0;
        for (int c = 0; c < d_head_; ++c) g += dctx(i, off + c) * v_(j, off + c);
        da[static_cast<size_t>(j)] = g;
        dot += attn_(h * n + i, j) * g;
      }
      for (int j = 0; j < n; ++j) {
        if (pad_[static_cast<size_t>(j)]) continue;
        double a = attn_(h * n + i, j);
        double ds = a * (da[static_cast<size_t>(j)] - dot);
        for (int c = 0; c < d_head_; ++c) {
          dq(i, off + c) += scale * ds * k_(j, off + c);
          dk(j, off + c) += scale * ds * q_(i, off + c);
          dv(j, off + c) += a * dctx(i, off + c);
        }
      }
    }
  }

  Tensor2 dx = wq.backward(dq);
  Tensor2 dxk = wk.backward(dk);
  Tensor2 dxv = wv.backward(dv);
  for (size_t i = 0; i < dx.data.size(); ++i) {
    dx.data[i] += dxk.data[i] + dxv.data[i] + grad_out.data[i];  // residual path
  }
  return dx;
}

void MultiHeadSelfAttention::collect_params(std::vector<Param*>& out) {
  wq.collect_params(out);
  wk.collect_params(out);
  wv.collect_params(out);
  wo.collect_params(out);
}

LayerNorm::LayerNorm(const std::string& name, int dim)
    : gamma(name + ".gamma", 1, dim), beta(name + ".beta", 1, dim) {
  for (double& g : gamma.value.data) g = 1.0;
}

Tensor2 LayerNorm::forward(const Tensor2& x) {
  int d = gamma.value.cols;
  if (x.cols != d) {
    throw Error(ErrorKind::DimensionMismatch, gamma.name + ": input width " +
                                                  std::to_string(x.cols) + ", expected " +
                                                  std::to_string(d));
  }
  xhat_ = Tensor2(x.rows, d);
  inv_std_.assign(static_cast<size_t>(x.rows), 0.0);
  Tensor2 y(x.rows, d);
  for (int r = 0; r < x.rows; ++r) {
    double mean = 0.0;
    for (int c = 0; c < d; ++c) mean += x(r, c);
    mean /= d;
    double var = 0.0;
    for (int c = 0; c < d; ++c) {
      double dv = x(r, c) - mean;
      var += dv * dv;
    }
    var /= d;
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std_[static_cast<size_t>(r)] = inv;
    for (int c = 0; c < d; ++c) {
      double xh = (x(r, c) - mean) * inv;
      xhat_(r, c) = xh;
      y(r, c) = gamma.value(0, c) * xh + beta.value(0, c);
    }
  }
  return y;
}

Tensor2 LayerNorm::backward(const Tensor2& grad_out) {
  int d = gamma.value.cols;
  require_shape(grad_out, xhat_.rows, d, "LayerNorm::backward");
  Tensor2 dx(xhat_.rows, d);
  for (int r = 0; r < xhat_.rows; ++r) {
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (int c = 0; c < d; ++c) {
      double g = grad_out(r, c);
      gamma.grad(0, c) += g * xhat_(r, c);
      beta.grad(0, c) += g;
      double dxh = g * gamma.value(0, c);
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * xhat_(r, c);
    }
    double inv = inv_std_[static_cast<size_t>(r)];
    for (int c = 0; c < d; ++c) {
      double dxh = grad_out(r, c) * gamma.value(0, c);
      dx(r, c) = inv * (dxh - sum_dxhat / d - xhat_(r, c) * sum_dxhat_xhat / d);
    }
  }
  return dx;
}

void LayerNorm::collect_params(std::vector<Param*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

TransformerBlock::TransformerBlock(const std::string& name, int d_model, int heads, bool extras)
    : attn(name + ".attn", d_model, heads),
      extras_(extras),
      ln1_(name + ".ln1", d_model),
      ln2_(name + ".ln2", d_model),
      fc1_(name + ".fc1", d_model, 4 * d_model),
      fc2_(name + ".fc2", 4 * d_model, d_model) {}

void TransformerBlock::init(Rng& rng) {
  attn.init(rng);
  if (extras_) {
    fc1_.init(rng);
    fc2_.init(rng);
  }
}

Tensor2 TransformerBlock::forward(const Tensor2& x, const std::vector<char>& key_pad) {
  Tensor2 attended = attn.forward(x, key_pad);
  if (!extras_) return attended;
  Tensor2 a = ln1_.forward(attended);
  Tensor2 ffn = fc2_.forward(relu_.forward(fc1_.forward(a)));
  for (size_t i = 0; i < ffn.data.size(); ++i) ffn.data[i] += a.data[i];
  return ln2_.forward(ffn);
}

Tensor2 TransformerBlock::backward(const Tensor2& grad_out) {
  if (!extras_) return attn.backward(grad_out);
  Tensor2 dsum = ln2_.backward(grad_out);
  Tensor2 da = fc1_.backward(relu_.backward(fc2_.backward(dsum)));
  for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += dsum.data[i];
  return attn.backward(ln1_.backward(da));
}

void TransformerBlock::collect_params(std::vector<Param*>& out) {
  attn.collect_params(out);
  if (extras_) {
    ln1_.collect_params(out);
    fc1_.collect_params(out);
    fc2_.collect_params(out);
    ln2_.collect_params(out);
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logits(const Tensor2& logits, const Tensor2& targets, double denom,
                       Tensor2& grad) {
  if (!logits.same_shape(targets)) {
    throw Error(ErrorKind::ShapeMismatch, "loss: logits " + logits.shape_str() + " vs targets " +
                                              targets.shape_str());
  }
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::DivisionByZero, "loss normalizer must be positive");
  }
  grad = Tensor2(logits.rows, logits.cols);
  double total = 0.0;
  for (size_t i = 0; i < logits.data.size(); ++i) {
    double z = logits.data[i];
    double t = targets.data[i];
    total += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)));
    grad.data[i] = (sigmoid(z) - t) / denom;
  }
  return total / denom;
}

}  // namespace topicfuse
