#include "mmrnn/coupled.hpp"

#include <stdexcept>
#include <string>

#include "mmrnn/upsample.hpp"
#include "plane_kernel.hpp"

namespace mmrnn {

std::string_view to_string(Modality m) noexcept { return m == Modality::Color ? "color" : "depth"; }

MultimodalModel::MultimodalModel(const MultimodalDims& dims) : dims_(dims) {
  if (dims.color_dim < 1 || dims.depth_dim < 1 || dims.hidden_dim < 1 || dims.num_classes < 2) {
    throw std::invalid_argument("MultimodalModel: invalid dimensions");
  }
  const auto h = static_cast<std::size_t>(dims.hidden_dim);
  const auto b = static_cast<std::size_t>(dims.num_classes);
  for (Modality m : kModalities) {
    auto& mp = modality(m);
    for (auto& p : mp.planes) {
      p.input = Mat(h, static_cast<std::size_t>(dims.input_dim(m)));
      p.recurrent = Mat(h, h);
      p.transfer = Mat(h, h);
      p.output = Mat(b, h);
      p.bias = Vec(h);
    }
    mp.output_bias = Vec(b);
  }
}

void MultimodalModel::clear_transfer() {
  for (auto& mp : modalities_) {
    for (auto& p : mp.planes) {
      for (double& x : p.transfer.values()) x = 0.0;
    }
  }
}

template <class Self, class F>
void MultimodalModel::visit(Self& self, F&& f) {
  for (Modality m : kModalities) {
    auto& mp = self.modalities_[index_of(m)];
    const std::string mod = m == Modality::Color ? "c" : "d";
    for (Direction d : kDirections) {
      auto& p = mp.planes[index_of(d)];
      const std::string prefix = mod + "." + std::string(to_string(d)) + ".";
      f(prefix + "U", p.input);
      f(prefix + "W", p.recurrent);
      f(prefix + "S", p.transfer);
      f(prefix + "V", p.output);
      f(prefix + "b", p.bias);
    }
    f(mod + ".c", mp.output_bias);
  }
}

std::vector<ParamBlock> MultimodalModel::blocks() {
  std::vector<ParamBlock> out;
  visit(*this, [&](std::string name, auto& x) { out.push_back({std::move(name), x.values()}); });
  return out;
}

std::vector<ConstParamBlock> MultimodalModel::blocks() const {
  std::vector<ConstParamBlock> out;
  visit(*this, [&](std::string name, const auto& x) { out.push_back({std::move(name), x.values()}); });
  return out;
}

namespace {

void check_inputs(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth) {
  require_aligned(color, depth);
  const MultimodalDims& dims = model.dims();
  if (color.feat_dim() != dims.color_dim || depth.feat_dim() != dims.depth_dim) {
    throw std::invalid_argument("forward_coupled: feature dims " + std::to_string(color.feat_dim()) + "/" +
                                std::to_string(depth.feat_dim()) + " do not match model " +
                                std::to_string(dims.color_dim) + "/" + std::to_string(dims.depth_dim));
  }
  if (color.num_classes() != dims.num_classes) {
    throw std::invalid_argument("forward_coupled: class count mismatch");
  }
}

std::array<detail::RecurrentWeights, 2> weights_for(const MultimodalModel& model, Direction d) {
  std::array<detail::RecurrentWeights, 2> w;
  for (Modality m : kModalities) {
    const CoupledPlaneParams& p = model.modality(m).plane(d);
    w[index_of(m)] = {&p.input, &p.recurrent, &p.transfer, &p.bias};
  }
  return w;
}

}  // namespace

ForwardCache forward_coupled(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth) {
  check_inputs(model, color, depth);
  const MultimodalDims& dims = model.dims();
  ForwardCache cache;
  cache.height = color.height();
  cache.width = color.width();
  cache.dims = dims;

  const PatchGrid* grids[2] = {&color, &depth};
  for (Direction d : kDirections) {
    const auto w = weights_for(model, d);
    detail::forward_plane(d, w, grids, dims.hidden_dim, cache.planes[index_of(d)]);
  }

  const auto classes = static_cast<std::size_t>(dims.num_classes);
  const std::size_t cells = color.cell_count();
  for (Modality m : kModalities) {
    const ModalityParams& mp = model.modality(m);
    auto& logits = cache.logits[index_of(m)];
    auto& probs = cache.probs[index_of(m)];
    logits.assign(cells * classes, 0.0);
    probs.assign(cells * classes, 0.0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      auto z = std::span<double>(logits).subspan(cell * classes, classes);
      std::copy(mp.output_bias.values().begin(), mp.output_bias.values().end(), z.begin());
      for (Direction d : kDirections) {
        matvec_accumulate(mp.plane(d).output, cache.plane(m, d).hidden_at(cell), z);
      }
      softmax_into(z, std::span<double>(probs).subspan(cell * classes, classes));
    }
  }
  return cache;
}

double loss_coupled(const ForwardCache& cache, const PatchGrid& color, const PatchGrid& depth) {
  require_aligned(color, depth);
  // Both terms share the same N, so the sum equals the per-cell summed form.
  return detail::masked_nll(cache.probs[0], color) + detail::masked_nll(cache.probs[1], depth);
}

CoupledBackward backward_coupled(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth,
                                 const ForwardCache& cache, BackwardMode mode) {
  check_inputs(model, color, depth);
  const MultimodalDims& dims = model.dims();
  CoupledBackward out{Gradients(dims), loss_coupled(cache, color, depth)};
  const auto classes = static_cast<std::size_t>(dims.num_classes);
  const auto hd = static_cast<std::size_t>(dims.hidden_dim);
  const std::size_t cells = color.cell_count();
  const PatchGrid* grids[2] = {&color, &depth};

  std::array<std::vector<double>, 2> err{detail::output_error(cache.probs[0], color),
                                         detail::output_error(cache.probs[1], depth)};
  for (Modality m : kModalities) {
    Vec& dc = out.grads.modality(m).output_bias;
    const auto& e = err[index_of(m)];
    for (std::size_t cell = 0; cell < cells; ++cell) {
      for (std::size_t b = 0; b < classes; ++b) dc[b] += e[cell * classes + b];
    }
  }

  for (Direction d : kDirections) {
    std::vector<double> dh[2];
    for (Modality m : kModalities) {
      const std::size_t mi = index_of(m);
      const CoupledPlaneParams& p = model.modality(m).plane(d);
      CoupledPlaneParams& g = out.grads.modality(m).plane(d);
      const PlaneTrace& trace = cache.plane(m, d);
      dh[mi].assign(cells * hd, 0.0);
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const auto e = std::span<const double>(err[mi]).subspan(cell * classes, classes);
        add_outer(g.output, e, trace.hidden_at(cell));
        matvec_transposed_accumulate(p.output, e, std::span<double>(dh[mi]).subspan(cell * hd, hd));
      }
    }
    const auto w = weights_for(model, d);
    std::array<detail::RecurrentGrads, 2> gr;
    for (Modality m : kModalities) {
      CoupledPlaneParams& g = out.grads.modality(m).plane(d);
      gr[index_of(m)] = {&g.input, &g.recurrent, &g.transfer, &g.bias};
    }
    detail::backward_plane(d, w, grids, cache.planes[index_of(d)], dh, gr, mode == BackwardMode::Full);
  }
  return out;
}

ProbMap fused_probabilities(const ForwardCache& cache) {
  ProbMap map(cache.height, cache.width, cache.dims.num_classes);
  for (std::size_t k = 0; k < map.values.size(); ++k) {
    map.values[k] = 0.5 * (cache.probs[0][k] + cache.probs[1][k]);
  }
  return map;
}

LabelMap predict_labels(const ForwardCache& cache) { return argmax_map(fused_probabilities(cache)); }

}  // namespace mmrnn
