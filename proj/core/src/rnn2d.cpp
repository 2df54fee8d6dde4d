#include "mmrnn/rnn2d.hpp"

#include <stdexcept>
#include <string>

#include "plane_kernel.hpp"
#include "mmrnn/upsample.hpp"

namespace mmrnn {

SingleModel::SingleModel(const SingleDims& dims) : dims_(dims), output_bias_(dims.num_classes) {
  if (dims.input_dim < 1 || dims.hidden_dim < 1 || dims.num_classes < 2) {
    throw std::invalid_argument("SingleModel: invalid dimensions");
  }
  const auto d = static_cast<std::size_t>(dims.input_dim);
  const auto h = static_cast<std::size_t>(dims.hidden_dim);
  const auto b = static_cast<std::size_t>(dims.num_classes);
  for (auto& p : planes_) {
    p.input = Mat(h, d);
    p.recurrent = Mat(h, h);
    p.output = Mat(b, h);
    p.bias = Vec(h);
  }
}

template <class Self, class F>
void SingleModel::visit(Self& self, F&& f) {
  for (Direction d : kDirections) {
    auto& p = self.planes_[index_of(d)];
    const std::string prefix = std::string(to_string(d)) + ".";
    f(prefix + "U", p.input);
    f(prefix + "W", p.recurrent);
    f(prefix + "V", p.output);
    f(prefix + "b", p.bias);
  }
  f(std::string("c"), self.output_bias_);
}

std::vector<ParamBlock> SingleModel::blocks() {
  std::vector<ParamBlock> out;
  visit(*this, [&](std::string name, auto& x) { out.push_back({std::move(name), x.values()}); });
  return out;
}

std::vector<ConstParamBlock> SingleModel::blocks() const {
  std::vector<ConstParamBlock> out;
  visit(*this, [&](std::string name, const auto& x) { out.push_back({std::move(name), x.values()}); });
  return out;
}

SingleCache forward_single(const SingleModel& model, const PatchGrid& grid) {
  const SingleDims& dims = model.dims();
  if (grid.feat_dim() != dims.input_dim) {
    throw std::invalid_argument("forward_single: grid feature dim " + std::to_string(grid.feat_dim()) +
                                " != model input dim " + std::to_string(dims.input_dim));
  }
  if (grid.num_classes() != dims.num_classes) {
    throw std::invalid_argument("forward_single: grid class count " + std::to_string(grid.num_classes()) +
                                " != model class count " + std::to_string(dims.num_classes));
  }
  SingleCache cache;
  cache.height = grid.height();
  cache.width = grid.width();
  cache.num_classes = dims.num_classes;

  const PatchGrid* grids[1] = {&grid};
  for (Direction d : kDirections) {
    const PlaneParams& p = model.plane(d);
    const detail::RecurrentWeights w[1] = {{&p.input, &p.recurrent, nullptr, &p.bias}};
    detail::forward_plane(d, w, grids, dims.hidden_dim, std::span<PlaneTrace>(&cache.planes[index_of(d)], 1));
  }

  const auto classes = static_cast<std::size_t>(dims.num_classes);
  cache.logits.assign(grid.cell_count() * classes, 0.0);
  cache.probs.assign(grid.cell_count() * classes, 0.0);
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    auto z = std::span<double>(cache.logits).subspan(cell * classes, classes);
    std::copy(model.output_bias().values().begin(), model.output_bias().values().end(), z.begin());
    for (Direction d : kDirections) {
      matvec_accumulate(model.plane(d).output, cache.plane(d).hidden_at(cell), z);
    }
    softmax_into(z, std::span<double>(cache.probs).subspan(cell * classes, classes));
  }
  return cache;
}

double loss_single(std::span<const double> probs, const PatchGrid& grid) {
  if (probs.size() != grid.cell_count() * static_cast<std::size_t>(grid.num_classes())) {
    throw std::invalid_argument("loss_single: probability buffer does not match grid");
  }
  return detail::masked_nll(probs, grid);
}

SingleBackward backward_single(const SingleModel& model, const PatchGrid& grid, const SingleCache& cache) {
  const SingleDims& dims = model.dims();
  SingleBackward out{SingleModel(dims), loss_single(cache.probs, grid)};
  const auto classes = static_cast<std::size_t>(dims.num_classes);
  const auto hd = static_cast<std::size_t>(dims.hidden_dim);
  const std::vector<double> err = detail::output_error(cache.probs, grid);

  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    for (std::size_t b = 0; b < classes; ++b) out.grads.output_bias()[b] += err[cell * classes + b];
  }

  const PatchGrid* grids[1] = {&grid};
  for (Direction d : kDirections) {
    const PlaneParams& p = model.plane(d);
    PlaneParams& g = out.grads.plane(d);
    const PlaneTrace& trace = cache.plane(d);
    std::vector<double> dh(grid.cell_count() * hd, 0.0);
    for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
      const auto e = std::span<const double>(err).subspan(cell * classes, classes);
      add_outer(g.output, e, trace.hidden_at(cell));
      matvec_transposed_accumulate(p.output, e, std::span<double>(dh).subspan(cell * hd, hd));
    }
    const detail::RecurrentWeights w[1] = {{&p.input, &p.recurrent, nullptr, &p.bias}};
    const detail::RecurrentGrads gr[1] = {{&g.input, &g.recurrent, nullptr, &g.bias}};
    detail::backward_plane(d, w, grids, std::span<const PlaneTrace>(&trace, 1), std::span<std::vector<double>>(&dh, 1),
                           gr, true);
  }
  return out;
}

LabelMap predict_single(const SingleCache& cache) {
  return argmax_map(to_prob_map(cache));
}

ProbMap to_prob_map(const SingleCache& cache) {
  ProbMap map(cache.height, cache.width, cache.num_classes);
  map.values = cache.probs;
  return map;
}

}  // namespace mmrnn
