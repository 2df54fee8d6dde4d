#include "mmrnn/gradcheck.hpp"

#include "mmrnn/random.hpp"

namespace mmrnn {

CoupledInstance random_instance(const GradcheckCase& spec) {
  Rng rng(mix_seed(spec.seed, 0x6772616463686bULL));
  MultimodalModel model({spec.color_dim, spec.depth_dim, spec.hidden_dim, spec.num_classes});
  for (auto& block : model.blocks()) {
    for (double& x : block.values) x = rng.uniform(-spec.weight_scale, spec.weight_scale);
  }

  const std::size_t cells = static_cast<std::size_t>(spec.height) * spec.width;
  std::vector<int> labels(cells);
  for (int& l : labels) {
    l = rng.uniform() < spec.unlabeled_frac ? kUnlabeled : static_cast<int>(rng.below(spec.num_classes));
  }
  auto features = [&](int dim) {
    std::vector<double> f(cells * static_cast<std::size_t>(dim));
    for (double& x : f) x = rng.normal();
    return f;
  };
  GridPair pair{PatchGrid(spec.height, spec.width, spec.color_dim, spec.num_classes, features(spec.color_dim), labels),
                PatchGrid(spec.height, spec.width, spec.depth_dim, spec.num_classes, features(spec.depth_dim), labels)};
  return {std::move(model), std::move(pair)};
}

GradcheckResult check_coupled(const CoupledInstance& instance, BackwardMode mode, double epsilon) {
  const auto& [color, depth] = instance.pair;
  const ForwardCache cache = forward_coupled(instance.model, color, depth);
  const CoupledBackward analytic = backward_coupled(instance.model, color, depth, cache, mode);
  const Gradients numeric = finite_diff_grad(
      [&](const MultimodalModel& m) { return loss_coupled(forward_coupled(m, color, depth), color, depth); },
      instance.model, epsilon);
  return {relative_error(analytic.grads, numeric), analytic.loss};
}

}  // namespace mmrnn
