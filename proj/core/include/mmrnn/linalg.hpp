#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mmrnn {

/// Dense vector of doubles.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vec(std::initializer_list<double> values) : data_(values) {}
  explicit Vec(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> data_;
};

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Mat& m);

// Throws std::invalid_argument naming both shapes when m.cols() != v.size().
Vec matvec(const Mat& m, const Vec& v);
Mat outer(const Vec& a, const Vec& b);
Vec relu(const Vec& v);
// Indicator pre > 0; exactly zero maps to 0.
Vec relu_grad(const Vec& pre);
Vec softmax(const Vec& v);

// Span kernels used by the recurrent passes. Sizes are the caller's contract.
void matvec_accumulate(const Mat& m, std::span<const double> v, std::span<double> out);
void matvec_transposed_accumulate(const Mat& m, std::span<const double> v, std::span<double> out);
void add_outer(Mat& m, std::span<const double> a, std::span<const double> b);
void softmax_into(std::span<const double> logits, std::span<double> out);

// ---------------------------------------------------------------------------
// Parameter sets: any model or gradient structure that exposes its storage as
// an ordered list of named blocks. Gradients mirror the model type exactly.

struct ParamBlock {
  std::string name;
  std::span<double> values;
};

struct ConstParamBlock {
  std::string name;
  std::span<const double> values;
};

template <class P>
concept ParameterSet = std::copy_constructible<P> && requires(P& p, const P& cp) {
  { p.blocks() } -> std::same_as<std::vector<ParamBlock>>;
  { cp.blocks() } -> std::same_as<std::vector<ConstParamBlock>>;
};

template <ParameterSet P>
double global_norm(const P& params) {
  double sum = 0.0;
  for (const auto& block : params.blocks()) {
    for (double x : block.values) sum += x * x;
  }
  return std::sqrt(sum);
}

template <ParameterSet P>
void scale_in_place(P& params, double factor) {
  for (auto& block : params.blocks()) {
    for (double& x : block.values) x *= factor;
  }
}

template <ParameterSet P>
P zeros_like(const P& params) {
  P out = params;
  for (auto& block : out.blocks()) {
    for (double& x : block.values) x = 0.0;
  }
  return out;
}

/// Rescales every entry by threshold / ||grads|| when the global L2 norm
/// exceeds threshold. The scale is nudged down until the rescaled norm is
/// <= threshold in floating point, so clipping an already clipped set is a
/// no-op.
template <ParameterSet P>
P global_norm_clip(P grads, double threshold) {
  const double norm = global_norm(grads);
  if (norm <= threshold) return grads;
  double factor = threshold / norm;
  for (;;) {
    P scaled = grads;
    scale_in_place(scaled, factor);
    if (global_norm(scaled) <= threshold) return scaled;
    factor = std::nextafter(factor, 0.0);
  }
}

}  // namespace mmrnn
