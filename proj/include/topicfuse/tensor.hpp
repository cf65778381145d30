#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "topicfuse/errors.hpp"

namespace topicfuse {

// Dense row-major matrix of 64-bit floats. A 1xN tensor doubles as a vector.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c, double init = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, init) {
    if (r < 0 || c < 0) throw Error(ErrorKind::ShapeMismatch, "negative tensor dimension");
  }

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

  void zero() { std::fill(data.begin(), data.end(), 0.0); }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
};

inline void require_shape(const Tensor2& t, int rows, int cols, const char* what) {
  if (t.rows != rows || t.cols != cols)
    throw Error(ErrorKind::ShapeMismatch,
                std::string(what) + ": expected " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " + t.shape_str());
}

// A named trainable tensor. Backward passes accumulate into grad; the
// optimizer step consumes and zeroes it.
struct Param {
  std::string name;
  Tensor2 value;
  Tensor2 grad;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}
};

}  // namespace topicfuse
