#include "mmrnn/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmrnn {

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Mat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string shape_string(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Vec matvec(const Mat& m, const Vec& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("matvec: matrix " + shape_string(m) + " cannot multiply vector of length " +
                                std::to_string(v.size()));
  }
  Vec out(m.rows());
  matvec_accumulate(m, v.values(), out.values());
  return out;
}

Mat outer(const Vec& a, const Vec& b) {
  Mat m(a.size(), b.size());
  add_outer(m, a.values(), b.values());
  return m;
}

Vec relu(const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

Vec relu_grad(const Vec& pre) {
  Vec out(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? 1.0 : 0.0;
  return out;
}

Vec softmax(const Vec& v) {
  Vec out(v.size());
  softmax_into(v.values(), out.values());
  return out;
}

void matvec_accumulate(const Mat& m, std::span<const double> v, std::span<double> out) {
  const std::size_t cols = m.cols();
  const double* a = m.values().data();
  for (std::size_t i = 0; i < m.rows(); ++i, a += cols) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += a[j] * v[j];
    out[i] += acc;
  }
}

void matvec_transposed_accumulate(const Mat& m, std::span<const double> v, std::span<double> out) {
  const std::size_t cols = m.cols();
  const double* a = m.values().data();
  for (std::size_t i = 0; i < m.rows(); ++i, a += cols) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) out[j] += a[j] * vi;
  }
}

void add_outer(Mat& m, std::span<const double> a, std::span<const double> b) {
  const std::size_t cols = m.cols();
  double* row = m.values().data();
  for (std::size_t i = 0; i < m.rows(); ++i, row += cols) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) row[j] += ai * b[j];
  }
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
}

}  // namespace mmrnn
