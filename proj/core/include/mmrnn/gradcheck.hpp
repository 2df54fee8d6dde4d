#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrnn/coupled.hpp"
#include "mmrnn/linalg.hpp"

namespace mmrnn {

/// Central-difference gradient of loss at model, one scalar at a time:
/// (L(theta + eps) - L(theta - eps)) / (2 eps). O(P) loss evaluations.
/// Throws std::runtime_error naming the parameter if a loss is not finite.
template <ParameterSet P, class LossFn>
P finite_diff_grad(LossFn&& loss, const P& model, double epsilon = 1e-5) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite_diff_grad: epsilon must be positive");
  P work = model;
  P grads = zeros_like(model);
  auto wblocks = work.blocks();
  auto gblocks = grads.blocks();
  for (std::size_t b = 0; b < wblocks.size(); ++b) {
    auto values = wblocks[b].values;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + epsilon;
      const double plus = loss(static_cast<const P&>(work));
      values[k] = saved - epsilon;
      const double minus = loss(static_cast<const P&>(work));
      values[k] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw std::runtime_error("finite_diff_grad: non-finite loss perturbing " + wblocks[b].name + "[" +
                                 std::to_string(k) + "]");
      }
      gblocks[b].values[k] = (plus - minus) / (2.0 * epsilon);
    }
  }
  return grads;
}

struct BlockError {
  std::string name;
  double error = 0.0;
};

struct ErrorReport {
  std::vector<BlockError> blocks;
  BlockError worst;

  // Largest error over blocks whose name ends with suffix (e.g. ".W").
  double worst_matching(const std::string& suffix) const {
    double out = 0.0;
    for (const auto& b : blocks) {
      if (b.name.size() >= suffix.size() && b.name.compare(b.name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        out = std::max(out, b.error);
      }
    }
    return out;
  }
};

/// Per block: max_i |a_i - b_i| / max(1e-12, |a_i| + |b_i|).
template <ParameterSet P>
ErrorReport relative_error(const P& a, const P& b) {
  const auto ab = a.blocks();
  const auto bb = b.blocks();
  if (ab.size() != bb.size()) throw std::invalid_argument("relative_error: block counts differ");
  ErrorReport report;
  for (std::size_t k = 0; k < ab.size(); ++k) {
    if (ab[k].values.size() != bb[k].values.size()) {
      throw std::invalid_argument("relative_error: block " + ab[k].name + " sizes differ");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < ab[k].values.size(); ++i) {
      const double x = ab[k].values[i];
      const double y = bb[k].values[i];
      worst = std::max(worst, std::abs(x - y) / std::max(1e-12, std::abs(x) + std::abs(y)));
    }
    report.blocks.push_back({ab[k].name, worst});
    if (report.blocks.size() == 1 || worst > report.worst.error) report.worst = report.blocks.back();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Harness around the coupled model.

struct GradcheckCase {
  int height = 2;
  int width = 3;
  int color_dim = 3;
  int depth_dim = 2;
  int hidden_dim = 4;
  int num_classes = 3;
  double weight_scale = 0.5;      // parameters ~ Uniform(-scale, scale)
  double unlabeled_frac = 0.0;    // fraction of cells marked unlabeled
  std::uint64_t seed = 1;
};

struct CoupledInstance {
  MultimodalModel model;
  GridPair pair;
};

// Random model (nonzero S) and random grid pair with N(0,1) features.
CoupledInstance random_instance(const GradcheckCase& spec);

struct GradcheckResult {
  ErrorReport report;
  double loss = 0.0;
};

// Compares backward_coupled(mode) against finite differences of the coupled loss.
GradcheckResult check_coupled(const CoupledInstance& instance, BackwardMode mode, double epsilon = 1e-5);

}  // namespace mmrnn
