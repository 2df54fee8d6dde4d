#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>

namespace mmrnn::oracle {
namespace {

// Vertical and horizontal predecessor offsets, written out per direction.
struct Offsets {
  int di;
  int dj;
};
Offsets offsets(Direction d) {
  switch (d) {
    case Direction::TL: return {-1, -1};
    case Direction::TR: return {-1, +1};
    case Direction::BL: return {+1, -1};
    case Direction::BR: return {+1, +1};
  }
  throw std::logic_error("bad direction");
}

using Hidden = std::vector<double>;

void add_mat_vec(const Mat& m, const std::vector<double>& v, std::vector<double>& out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  }
}

std::vector<double> feature_vec(const PatchGrid& g, int i, int j) {
  auto f = g.feature(i, j);
  return {f.begin(), f.end()};
}

}  // namespace

PatchGrid random_grid(int height, int width, int feat_dim, int num_classes, std::uint64_t seed,
                      double unlabeled_frac) {
  Rng rng(mix_seed(seed, 0x67726964ULL));
  const std::size_t cells = static_cast<std::size_t>(height) * width;
  std::vector<double> features(cells * feat_dim);
  for (double& x : features) x = rng.normal();
  std::vector<int> labels(cells);
  for (int& l : labels) {
    l = rng.uniform() < unlabeled_frac ? kUnlabeled : static_cast<int>(rng.below(num_classes));
  }
  return PatchGrid(height, width, feat_dim, num_classes, std::move(features), std::move(labels));
}

GridPair random_pair(int height, int width, int color_dim, int depth_dim, int num_classes, std::uint64_t seed,
                     double unlabeled_frac) {
  PatchGrid c = random_grid(height, width, color_dim, num_classes, seed, unlabeled_frac);
  PatchGrid d = random_grid(height, width, depth_dim, num_classes, seed ^ 0x5555ULL, 0.0);
  return {c, d.with_labels(c.labels())};
}

std::array<std::vector<double>, 2> unrolled_coupled_logits(const MultimodalModel& model, const PatchGrid& color,
                                                           const PatchGrid& depth) {
  const int H = color.height();
  const int W = color.width();
  const int Dh = model.dims().hidden_dim;
  const int B = model.dims().num_classes;
  const std::array<const PatchGrid*, 2> grids{&color, &depth};
  std::map<std::tuple<int, int, int, int>, Hidden> memo;

  std::function<Hidden(int, Direction, int, int)> hidden = [&](int m, Direction d, int i, int j) -> Hidden {
    if (i < 0 || i >= H || j < 0 || j >= W) return Hidden(Dh, 0.0);
    const auto key = std::make_tuple(m, static_cast<int>(d), i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto& p = model.modality(m == 0 ? Modality::Color : Modality::Depth).plane(d);
    const Offsets o = offsets(d);
    const int other = 1 - m;
    Hidden own(Dh, 0.0), cross(Dh, 0.0);
    const Hidden a = hidden(m, d, i + o.di, j), b = hidden(m, d, i, j + o.dj);
    const Hidden ca = hidden(other, d, i + o.di, j), cb = hidden(other, d, i, j + o.dj);
    for (int k = 0; k < Dh; ++k) {
      own[k] = a[k] + b[k];
      cross[k] = ca[k] + cb[k];
    }
    Hidden pre(Dh, 0.0);
    add_mat_vec(p.input, feature_vec(*grids[m], i, j), pre);
    add_mat_vec(p.recurrent, own, pre);
    add_mat_vec(p.transfer, cross, pre);
    for (int k = 0; k < Dh; ++k) pre[k] = std::max(0.0, pre[k] + p.bias[k]);
    memo[key] = pre;
    return pre;
  };

  std::array<std::vector<double>, 2> logits;
  for (int m = 0; m < 2; ++m) {
    const auto& params = model.modality(m == 0 ? Modality::Color : Modality::Depth);
    logits[m].assign(static_cast<std::size_t>(H) * W * B, 0.0);
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        std::vector<double> z(B, 0.0);
        for (Direction d : {Direction::TL, Direction::TR, Direction::BL, Direction::BR}) {
          add_mat_vec(params.plane(d).output, hidden(m, d, i, j), z);
        }
        for (int k = 0; k < B; ++k) logits[m][(static_cast<std::size_t>(i) * W + j) * B + k] = z[k] + params.output_bias[k];
      }
    }
  }
  return logits;
}

std::vector<double> unrolled_single_logits(const SingleModel& model, const PatchGrid& grid) {
  const int H = grid.height();
  const int W = grid.width();
  const int Dh = model.dims().hidden_dim;
  const int B = model.dims().num_classes;
  std::map<std::tuple<int, int, int>, Hidden> memo;
  std::function<Hidden(Direction, int, int)> hidden = [&](Direction d, int i, int j) -> Hidden {
    if (i < 0 || i >= H || j < 0 || j >= W) return Hidden(Dh, 0.0);
    const auto key = std::make_tuple(static_cast<int>(d), i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto& p = model.plane(d);
    const Offsets o = offsets(d);
    const Hidden a = hidden(d, i + o.di, j), b = hidden(d, i, j + o.dj);
    Hidden own(Dh);
    for (int k = 0; k < Dh; ++k) own[k] = a[k] + b[k];
    Hidden pre(Dh, 0.0);
    add_mat_vec(p.input, feature_vec(grid, i, j), pre);
    add_mat_vec(p.recurrent, own, pre);
    for (int k = 0; k < Dh; ++k) pre[k] = std::max(0.0, pre[k] + p.bias[k]);
    memo[key] = pre;
    return pre;
  };
  std::vector<double> logits(static_cast<std::size_t>(H) * W * B, 0.0);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      std::vector<double> z(B, 0.0);
      for (Direction d : {Direction::TL, Direction::TR, Direction::BL, Direction::BR}) {
        add_mat_vec(model.plane(d).output, hidden(d, i, j), z);
      }
      for (int k = 0; k < B; ++k) logits[(static_cast<std::size_t>(i) * W + j) * B + k] = z[k] + model.output_bias()[k];
    }
  }
  return logits;
}

std::vector<double> softmax_rows(const std::vector<double>& logits, int classes) {
  std::vector<double> out(logits.size());
  for (std::size_t base = 0; base < logits.size(); base += classes) {
    double top = logits[base];
    for (int k = 1; k < classes; ++k) top = std::max(top, logits[base + k]);
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) sum += std::exp(logits[base + k] - top);
    for (int k = 0; k < classes; ++k) out[base + k] = std::exp(logits[base + k] - top) / sum;
  }
  return out;
}

double direct_nll(const std::vector<double>& probs, const PatchGrid& grid) {
  const int B = grid.num_classes();
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      if (grid.label(i, j) < 0) continue;
      sum += std::log(probs[(static_cast<std::size_t>(i) * grid.width() + j) * B + grid.label(i, j)]);
      ++n;
    }
  }
  return n == 0 ? 0.0 : -sum / n;
}

RowResult row_rnn(const SingleModel& model, const PatchGrid& row) {
  if (row.height() != 1) throw std::invalid_argument("row_rnn: expects one row");
  const int T = row.width();
  const int Dh = model.dims().hidden_dim;
  const int B = model.dims().num_classes;
  const int D = row.feat_dim();

  // h[d][t]; left-to-right for TL/BL, right-to-left for TR/BR.
  std::array<std::vector<Hidden>, 4> h, pre;
  for (int d = 0; d < 4; ++d) {
    const auto dir = static_cast<Direction>(d);
    const auto& p = model.plane(dir);
    const bool forward = dir == Direction::TL || dir == Direction::BL;
    h[d].assign(T, Hidden(Dh, 0.0));
    pre[d].assign(T, Hidden(Dh, 0.0));
    for (int s = 0; s < T; ++s) {
      const int t = forward ? s : T - 1 - s;
      const int prev = forward ? t - 1 : t + 1;
      for (int r = 0; r < Dh; ++r) {
        double acc = p.bias[r];
        for (int c = 0; c < D; ++c) acc += p.input(r, c) * row.feature(0, t)[c];
        if (s > 0) {
          for (int c = 0; c < Dh; ++c) acc += p.recurrent(r, c) * h[d][prev][c];
        }
        pre[d][t][r] = acc;
        h[d][t][r] = acc > 0.0 ? acc : 0.0;
      }
    }
  }

  RowResult out;
  out.logits.assign(static_cast<std::size_t>(T) * B, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < B; ++k) {
      double z = model.output_bias()[k];
      for (int d = 0; d < 4; ++d) {
        for (int c = 0; c < Dh; ++c) z += model.plane(static_cast<Direction>(d)).output(k, c) * h[d][t][c];
      }
      out.logits[static_cast<std::size_t>(t) * B + k] = z;
    }
  }
  const std::vector<double> probs = softmax_rows(out.logits, B);
  out.loss = direct_nll(probs, row);

  int n = 0;
  for (int t = 0; t < T; ++t) n += row.label(0, t) >= 0 ? 1 : 0;
  out.grads = SingleModel(model.dims());
  for (auto& block : out.grads.blocks()) std::fill(block.values.begin(), block.values.end(), 0.0);
  if (n == 0) return out;

  // dz[t] = (p - onehot) / N at labeled positions.
  std::vector<std::vector<double>> dz(T, std::vector<double>(B, 0.0));
  for (int t = 0; t < T; ++t) {
    if (row.label(0, t) < 0) continue;
    for (int k = 0; k < B; ++k) {
      dz[t][k] = (probs[static_cast<std::size_t>(t) * B + k] - (k == row.label(0, t) ? 1.0 : 0.0)) / n;
      out.grads.output_bias()[k] += dz[t][k];
    }
  }
  for (int d = 0; d < 4; ++d) {
    const auto dir = static_cast<Direction>(d);
    const auto& p = model.plane(dir);
    auto& g = out.grads.plane(dir);
    const bool forward = dir == Direction::TL || dir == Direction::BL;
    Hidden carry(Dh, 0.0);  // gradient arriving from the next step in scan order
    for (int s = T - 1; s >= 0; --s) {
      const int t = forward ? s : T - 1 - s;
      const int prev = forward ? t - 1 : t + 1;
      Hidden dh = carry;
      for (int k = 0; k < B; ++k) {
        for (int c = 0; c < Dh; ++c) {
          g.output(k, c) += dz[t][k] * h[d][t][c];
          dh[c] += p.output(k, c) * dz[t][k];
        }
      }
      Hidden delta(Dh);
      for (int r = 0; r < Dh; ++r) delta[r] = pre[d][t][r] > 0.0 ? dh[r] : 0.0;
      for (int r = 0; r < Dh; ++r) {
        g.bias[r] += delta[r];
        for (int c = 0; c < D; ++c) g.input(r, c) += delta[r] * row.feature(0, t)[c];
        if (s > 0) {
          for (int c = 0; c < Dh; ++c) g.recurrent(r, c) += delta[r] * h[d][prev][c];
        }
      }
      std::fill(carry.begin(), carry.end(), 0.0);
      for (int r = 0; r < Dh; ++r) {
        for (int c = 0; c < Dh; ++c) carry[c] += p.recurrent(r, c) * delta[r];
      }
    }
  }
  return out;
}

MetricSummary brute_force_metrics(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
  MetricSummary s;
  std::size_t correct = 0;
  for (std::size_t n = 0; n < truth.size(); ++n) correct += truth[n] == predicted[n] ? 1 : 0;
  s.pixel_acc = static_cast<double>(correct) / static_cast<double>(truth.size());
  s.per_class_iou.resize(classes);
  double recall_sum = 0.0, iou_sum = 0.0;
  int recall_n = 0, iou_n = 0;
  for (int k = 0; k < classes; ++k) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t n = 0; n < truth.size(); ++n) {
      if (truth[n] == k && predicted[n] == k) ++tp;
      if (truth[n] != k && predicted[n] == k) ++fp;
      if (truth[n] == k && predicted[n] != k) ++fn;
    }
    if (tp + fn > 0) {
      recall_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
      ++recall_n;
    }
    if (tp + fp + fn > 0) {
      const double iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      s.per_class_iou[k] = iou;
      iou_sum += iou;
      ++iou_n;
    }
  }
  s.class_acc = recall_n > 0 ? recall_sum / recall_n : 0.0;
  s.mean_iou = iou_n > 0 ? iou_sum / iou_n : 0.0;
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

double min_abs_pre(const SingleCache& cache) {
  double out = INFINITY;
  for (const PlaneTrace& t : cache.planes) {
    for (double v : t.pre) out = std::min(out, std::abs(v));
  }
  return out;
}

long double extended_coupled_loss(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth,
                                  const double* target, long double delta) {
  using X = long double;
  using XHidden = std::vector<X>;
  const int H = color.height();
  const int W = color.width();
  const int Dh = model.dims().hidden_dim;
  const int B = model.dims().num_classes;
  const std::array<const PatchGrid*, 2> grids{&color, &depth};
  auto val = [&](const double& x) { return static_cast<X>(x) + (&x == target ? delta : 0.0L); };
  auto add_mv = [&](const Mat& m, const XHidden& v, XHidden& out) {
    const auto a = m.values();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) out[r] += val(a[r * m.cols() + c]) * v[c];
    }
  };
  auto params_of = [&](int m) -> const ModalityParams& {
    return model.modality(m == 0 ? Modality::Color : Modality::Depth);
  };

  std::map<std::tuple<int, int, int, int>, XHidden> memo;
  std::function<XHidden(int, Direction, int, int)> hidden = [&](int m, Direction d, int i, int j) -> XHidden {
    if (i < 0 || i >= H || j < 0 || j >= W) return XHidden(Dh, 0.0L);
    const auto key = std::make_tuple(m, static_cast<int>(d), i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto& p = params_of(m).plane(d);
    const Offsets o = offsets(d);
    XHidden own(Dh, 0.0L), cross(Dh, 0.0L), x;
    const XHidden a = hidden(m, d, i + o.di, j), b = hidden(m, d, i, j + o.dj);
    const XHidden ca = hidden(1 - m, d, i + o.di, j), cb = hidden(1 - m, d, i, j + o.dj);
    for (int k = 0; k < Dh; ++k) {
      own[k] = a[k] + b[k];
      cross[k] = ca[k] + cb[k];
    }
    for (double f : grids[m]->feature(i, j)) x.push_back(f);
    XHidden pre(Dh, 0.0L);
    add_mv(p.input, x, pre);
    add_mv(p.recurrent, own, pre);
    add_mv(p.transfer, cross, pre);
    const auto bias = p.bias.values();
    for (int k = 0; k < Dh; ++k) pre[k] = std::max(0.0L, pre[k] + val(bias[k]));
    memo[key] = pre;
    return pre;
  };

  X total = 0.0L;
  std::size_t valid = 0;
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      if (!color.valid(i, j)) continue;
      ++valid;
      for (int m = 0; m < 2; ++m) {
        XHidden z(B, 0.0L);
        for (Direction d : {Direction::TL, Direction::TR, Direction::BL, Direction::BR}) {
          add_mv(params_of(m).plane(d).output, hidden(m, d, i, j), z);
        }
        const auto c = params_of(m).output_bias.values();
        for (int k = 0; k < B; ++k) z[k] += val(c[k]);
        const X top = *std::max_element(z.begin(), z.end());
        X sum = 0.0L;
        for (X v : z) sum += std::exp(v - top);
        total += -(z[grids[m]->label(i, j)] - top - std::log(sum));
      }
    }
  }
  return valid == 0 ? 0.0L : total / static_cast<X>(valid);
}

MultimodalModel extended_fd_grad(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth,
                                 long double epsilon) {
  MultimodalModel out = model;
  auto src = model.blocks();
  auto dst = out.blocks();
  for (std::size_t k = 0; k < src.size(); ++k) {
    for (std::size_t t = 0; t < src[k].values.size(); ++t) {
      const double* p = &src[k].values[t];
      const long double up = extended_coupled_loss(model, color, depth, p, epsilon);
      const long double down = extended_coupled_loss(model, color, depth, p, -epsilon);
      dst[k].values[t] = static_cast<double>((up - down) / (2.0L * epsilon));
    }
  }
  return out;
}

}  // namespace mmrnn::oracle
