#include "mmrnn/upsample.hpp"

#include <stdexcept>
#include <string>

namespace mmrnn {
namespace {

// Source coordinate and interpolation weight for target index t.
struct Tap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

Tap tap(int t, int source, int target) {
  if (source == 1 || target == 1) return {0, 0, 0.0};
  const double pos = static_cast<double>(t) * (source - 1) / (target - 1);
  int lo = static_cast<int>(pos);
  if (lo >= source - 1) lo = source - 1;
  const int hi = lo + 1 < source ? lo + 1 : lo;
  return {lo, hi, pos - lo};
}

}  // namespace

ProbMap bilinear_upsample(const ProbMap& map, int target_height, int target_width) {
  if (target_height < map.height || target_width < map.width) {
    throw std::invalid_argument("bilinear_upsample: target " + std::to_string(target_height) + "x" +
                                std::to_string(target_width) + " is smaller than source " +
                                std::to_string(map.height) + "x" + std::to_string(map.width));
  }
  ProbMap out(target_height, target_width, map.channels);
  for (int y = 0; y < target_height; ++y) {
    const Tap ty = tap(y, map.height, target_height);
    for (int x = 0; x < target_width; ++x) {
      const Tap tx = tap(x, map.width, target_width);
      const auto a = map.at(ty.lo, tx.lo);
      const auto b = map.at(ty.lo, tx.hi);
      const auto c = map.at(ty.hi, tx.lo);
      const auto d = map.at(ty.hi, tx.hi);
      auto dst = out.at(y, x);
      for (int k = 0; k < map.channels; ++k) {
        const double top = a[k] + (b[k] - a[k]) * tx.frac;
        const double bottom = c[k] + (d[k] - c[k]) * tx.frac;
        dst[k] = top + (bottom - top) * ty.frac;
      }
    }
  }
  return out;
}

LabelMap argmax_map(const ProbMap& map) {
  LabelMap out{map.height, map.width, std::vector<int>(static_cast<std::size_t>(map.height) * map.width)};
  for (int i = 0; i < map.height; ++i) {
    for (int j = 0; j < map.width; ++j) {
      const auto p = map.at(i, j);
      int best = 0;
      for (int k = 1; k < map.channels; ++k) {
        if (p[k] > p[best]) best = k;
      }
      out.labels[static_cast<std::size_t>(i) * map.width + j] = best;
    }
  }
  return out;
}

}  // namespace mmrnn
