#pragma once

#include <string>
#include <vector>

#include "topicfuse/rng.hpp"
#include "topicfuse/tensor.hpp"

namespace topicfuse {

// Layers cache whatever the backward pass needs during forward. The contract
// everywhere: call forward, then backward exactly once with the gradient of
// the loss with respect to the forward output; backward returns the gradient
// with respect to the forward input and accumulates parameter gradients.

// y = x W + b with x of shape n x in, weight in x out, bias 1 x out. A
// layer built with with_bias=false keeps its bias at zero and out of the
// trainable set.
struct Linear {
  Param weight;
  Param bias;

  Linear(const std::string& name, int in_dim, int out_dim, bool with_bias = true);

  void init(Rng& rng);  // Xavier uniform weights, zero bias
  Tensor2 forward(const Tensor2& x);
  Tensor2 backward(const Tensor2& grad_out);
  void collect_params(std::vector<Param*>& out);

  int in_dim() const { return weight.value.rows; }
  int out_dim() const { return weight.value.cols; }

 private:
  bool has_bias_;
  Tensor2 input_;
};

// Row lookup table. forward gathers rows, backward scatter-adds into the
// gradient of the table, so repeated ids accumulate.
struct Embedding {
  Param table;  // vocab x dim

  Embedding(const std::string& name, int vocab, int dim);

  void init(Rng& rng);
  Tensor2 forward(const std::vector<int>& ids);
  void backward(const Tensor2& grad_out);
  void collect_params(std::vector<Param*>& out);

  int vocab() const { return table.value.rows; }
  int dim() const { return table.value.cols; }

 private:
  std::vector<int> ids_;
};

struct Tanh {
  Tensor2 forward(const Tensor2& x);
  Tensor2 backward(const Tensor2& grad_out);

 private:
  Tensor2 out_;
};

struct Relu {
  Tensor2 forward(const Tensor2& x);
  Tensor2 backward(const Tensor2& grad_out);

 private:
  Tensor2 input_;
};

// Multi-head scaled dot-product self-attention over a sequence of n rows,
// with a residual connection: out = x + Wo(concat over heads of softmax(Q
// K^T / sqrt(d_head)) V). key_pad marks rows to exclude as keys; their
// attention weight is exactly 0.0 so padded rows cannot influence any
// output row. Every row still acts as a query. The Q/K/V projections carry
// no bias: a key-side bias shifts all of a query's scores equally and
// cancels in the softmax, so it could never train.
struct MultiHeadSelfAttention {
  Linear wq, wk, wv, wo;

  MultiHeadSelfAttention(const std::string& name, int d_model, int heads);

  void init(Rng& rng);
  Tensor2 forward(const Tensor2& x, const std::vector<char>& key_pad);
  Tensor2 backward(const Tensor2& grad_out);
  void collect_params(std::vector<Param*>& out);

  int d_model() const { return d_model_; }
  int heads() const { return heads_; }
  // Post-softmax weights from the last forward, heads*n rows of n columns;
  // row h*n+i holds head h's distribution for query i.
  const Tensor2& last_attention() const { return attn_; }

 private:
  int d_model_;
  int heads_;
  int d_head_;
  Tensor2 x_, q_, k_, v_, attn_;
  std::vector<char> pad_;
};

struct LayerNorm {
  Param gamma;  // 1 x d
  Param beta;   // 1 x d
  double eps = 1e-5;

  LayerNorm(const std::string& name, int dim);

  Tensor2 forward(const Tensor2& x);
  Tensor2 backward(const Tensor2& grad_out);
  void collect_params(std::vector<Param*>& out);

 private:
  Tensor2 xhat_;
  std::vector<double> inv_std_;
};

// One encoder block. In the default shape it is self-attention with its
// residual. With extras enabled it becomes the full classic block:
// a = ln1(attention(x)), out = ln2(a + fc2(relu(fc1(a)))).
struct TransformerBlock {
  MultiHeadSelfAttention attn;

  TransformerBlock(const std::string& name, int d_model, int heads, bool extras);

  void init(Rng& rng);
  Tensor2 forward(const Tensor2& x, const std::vector<char>& key_pad);
  Tensor2 backward(const Tensor2& grad_out);
  void collect_params(std::vector<Param*>& out);

 private:
  bool extras_;
  LayerNorm ln1_, ln2_;
  Linear fc1_, fc2_;
  Relu relu_;
};

double sigmoid(double z);

// Binary cross-entropy on raw logits in the overflow-safe form
// max(z, 0) - z t + log1p(exp(-|z|)), summed over all cells and divided by
// denom. grad receives d(loss)/d(logits) = (sigmoid(z) - t) / denom.
double bce_with_logits(const Tensor2& logits, const Tensor2& targets, double denom,
                       Tensor2& grad);

}  // namespace topicfuse
