#include "mmrnn/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "mmrnn/random.hpp"

namespace mmrnn {

void SceneSpec::validate() const {
  if (height < 1 || width < 1) throw std::invalid_argument("SceneSpec: grid must be at least 1x1");
  if (num_classes < 2 || num_classes > 255) throw std::invalid_argument("SceneSpec: classes must be in [2,255]");
  if (!(ambiguity >= 0.0 && ambiguity <= 1.0)) throw std::invalid_argument("SceneSpec: ambiguity must be in [0,1]");
  if (ambiguity > 0.0 && num_classes < 4) {
    throw std::invalid_argument("SceneSpec: ambiguity > 0 needs at least 4 classes");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SceneSpec: noise sigma must be >= 0");
  if (!(feature_scale > 0.0)) throw std::invalid_argument("SceneSpec: feature scale must be > 0");
  if (!(unlabeled_frac >= 0.0 && unlabeled_frac < 1.0)) {
    throw std::invalid_argument("SceneSpec: unlabeled fraction must be in [0,1)");
  }
  if (color_dim < 1 || depth_dim < 1) throw std::invalid_argument("SceneSpec: feature dims must be positive");
}

namespace {

// Representative class for each class under a pairing partner(k) = k ^ bit:
// the first `pairs` eligible pairs (in increasing k) share the lower class's
// prototype.
std::vector<int> collision_map(int classes, int bit, double ambiguity) {
  std::vector<int> rep(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) rep[k] = k;
  std::vector<int> lows;
  for (int k = 0; k < classes; ++k) {
    if ((k & bit) == 0 && (k ^ bit) < classes) lows.push_back(k);
  }
  const auto take = static_cast<std::size_t>(std::lround(ambiguity * static_cast<double>(lows.size())));
  for (std::size_t p = 0; p < take && p < lows.size(); ++p) rep[lows[p] ^ bit] = lows[p];
  return rep;
}

std::vector<std::vector<double>> prototype_table(int classes, int dim, double scale, const std::vector<int>& rep,
                                                 Rng& rng) {
  std::vector<std::vector<double>> table(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double& x : v) x = scale * rng.normal();
    table[k] = std::move(v);
  }
  for (int k = 0; k < classes; ++k) table[k] = table[rep[k]];
  return table;
}

struct Rect {
  int top, left, height, width;
};

}  // namespace

Prototypes make_prototypes(const SceneSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, 0x70726f746fULL));
  Prototypes p;
  p.color = prototype_table(spec.num_classes, spec.color_dim, spec.feature_scale,
                            collision_map(spec.num_classes, 1, spec.ambiguity), rng);
  p.depth = prototype_table(spec.num_classes, spec.depth_dim, spec.feature_scale,
                            collision_map(spec.num_classes, 2, spec.ambiguity), rng);
  return p;
}

std::vector<int> generate_layout(const SceneSpec& spec, std::size_t scene_index) {
  spec.validate();
  Rng rng(mix_seed(mix_seed(spec.seed, 0x6c61796f7574ULL), scene_index));
  const int cells = spec.height * spec.width;
  const int target = std::max(spec.num_classes, cells / 32);

  // Guillotine partition: repeatedly split the largest splittable rectangle
  // across its longer side.
  std::vector<Rect> rects{{0, 0, spec.height, spec.width}};
  while (static_cast<int>(rects.size()) < target) {
    auto it = std::max_element(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) {
      return a.height * a.width < b.height * b.width;
    });
    if (it->height * it->width < 2) break;
    Rect r = *it;
    const bool split_rows = r.height > r.width || (r.height == r.width && rng.below(2) == 0);
    const int extent = split_rows ? r.height : r.width;
    const int cut = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(extent - 1)));
    Rect a = r, b = r;
    if (split_rows) {
      a.height = cut;
      b.top += cut;
      b.height -= cut;
    } else {
      a.width = cut;
      b.left += cut;
      b.width -= cut;
    }
    *it = a;
    rects.push_back(b);
  }

  // A random permutation of all classes first, then uniform draws, assigned
  // to regions in random order.
  std::vector<int> classes;
  for (int k = 0; k < spec.num_classes; ++k) classes.push_back(k);
  for (std::size_t k = classes.size(); k > 1; --k) std::swap(classes[k - 1], classes[rng.below(k)]);
  while (classes.size() < rects.size()) classes.push_back(static_cast<int>(rng.below(spec.num_classes)));
  std::vector<std::size_t> slots(rects.size());
  for (std::size_t k = 0; k < slots.size(); ++k) slots[k] = k;
  for (std::size_t k = slots.size(); k > 1; --k) std::swap(slots[k - 1], slots[rng.below(k)]);

  std::vector<int> labels(static_cast<std::size_t>(cells), 0);
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const Rect& r = rects[slots[k]];
    for (int i = r.top; i < r.top + r.height; ++i) {
      for (int j = r.left; j < r.left + r.width; ++j) labels[static_cast<std::size_t>(i) * spec.width + j] = classes[k];
    }
  }
  return labels;
}

GridPair generate_scene(const SceneSpec& spec, std::size_t scene_index) {
  const Prototypes protos = make_prototypes(spec);
  std::vector<int> labels = generate_layout(spec, scene_index);
  const std::size_t cells = labels.size();

  Rng rng(mix_seed(mix_seed(spec.seed, 0x6e6f697365ULL), scene_index));
  auto featurize = [&](const std::vector<std::vector<double>>& table, int dim) {
    std::vector<double> f;
    f.reserve(cells * static_cast<std::size_t>(dim));
    for (std::size_t c = 0; c < cells; ++c) {
      for (double base : table[labels[c]]) {
        f.push_back(static_cast<double>(static_cast<float>(base + spec.noise_sigma * rng.normal())));
      }
    }
    return f;
  };
  std::vector<double> color = featurize(protos.color, spec.color_dim);
  std::vector<double> depth = featurize(protos.depth, spec.depth_dim);

  const auto unlabeled = static_cast<std::size_t>(std::ceil(spec.unlabeled_frac * static_cast<double>(cells)));
  std::vector<std::size_t> pick(cells);
  for (std::size_t k = 0; k < cells; ++k) pick[k] = k;
  for (std::size_t k = 0; k < unlabeled; ++k) {
    std::swap(pick[k], pick[k + rng.below(cells - k)]);
    labels[pick[k]] = kUnlabeled;
  }

  return {PatchGrid(spec.height, spec.width, spec.color_dim, spec.num_classes, std::move(color), labels),
          PatchGrid(spec.height, spec.width, spec.depth_dim, spec.num_classes, std::move(depth), labels)};
}

std::vector<GridPair> generate_dataset(const SceneSpec& spec, std::size_t count, std::size_t first_index) {
  std::vector<GridPair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(generate_scene(spec, first_index + k));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[at + k]) << (8 * k);
  return v;
}

}  // namespace

std::size_t grid_file_size(int height, int width, int color_dim, int depth_dim) {
  const auto cells = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  return kGridHeaderBytes + 4 * cells * static_cast<std::size_t>(color_dim + depth_dim) + cells;
}

std::vector<std::uint8_t> encode_grid_pair(const GridPair& pair) {
  const PatchGrid& c = pair.color;
  const PatchGrid& d = pair.depth;
  require_aligned(c, d);
  if (c.labels() != d.labels()) throw std::invalid_argument("encode_grid_pair: label maps differ");
  if (c.num_classes() > 255) throw std::invalid_argument("encode_grid_pair: more than 255 classes");
  std::vector<std::uint8_t> out;
  out.reserve(grid_file_size(c.height(), c.width(), c.feat_dim(), d.feat_dim()));
  for (char ch : std::string_view("MMG1")) out.push_back(static_cast<std::uint8_t>(ch));
  for (int v : {c.height(), c.width(), c.feat_dim(), d.feat_dim(), c.num_classes()}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  for (double x : c.features()) put_f32(out, x);
  for (double x : d.features()) put_f32(out, x);
  for (int l : c.labels()) out.push_back(l == kUnlabeled ? kUnlabeledByte : static_cast<std::uint8_t>(l));
  if (out.size() != grid_file_size(c.height(), c.width(), c.feat_dim(), d.feat_dim())) {
    throw std::logic_error("encode_grid_pair: length formula violated");
  }
  return out;
}

GridPair decode_grid_pair(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGridHeaderBytes) {
    throw FormatError("truncated header: " + std::to_string(bytes.size()) + " of 24 bytes", bytes.size());
  }
  if (std::memcmp(bytes.data(), "MMG1", 4) != 0) throw FormatError("bad magic, expected MMG1", 0);
  std::uint32_t dims[5];
  for (int k = 0; k < 5; ++k) dims[k] = get_u32(bytes, 4 + 4 * static_cast<std::size_t>(k));
  const auto [h, w, dc, dd, b] = std::to_array(dims);
  for (int k = 0; k < 5; ++k) {
    if (dims[k] == 0 || dims[k] > (1u << 20)) {
      throw FormatError("header field out of range: " + std::to_string(dims[k]), 4 + 4 * static_cast<std::size_t>(k));
    }
  }
  if (b < 2 || b > 255) throw FormatError("class count out of range: " + std::to_string(b), 20);
  const std::size_t expected = grid_file_size(static_cast<int>(h), static_cast<int>(w), static_cast<int>(dc),
                                              static_cast<int>(dd));
  if (bytes.size() != expected) {
    throw FormatError("length mismatch: expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()),
                      std::min(bytes.size(), expected));
  }
  const std::size_t cells = static_cast<std::size_t>(h) * w;
  std::size_t at = kGridHeaderBytes;
  auto read_features = [&](std::uint32_t dim) {
    std::vector<double> f(cells * dim);
    for (double& x : f) {
      x = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
      if (!std::isfinite(x)) throw FormatError("non-finite feature value", at);
      at += 4;
    }
    return f;
  };
  std::vector<double> color = read_features(dc);
  std::vector<double> depth = read_features(dd);
  std::vector<int> labels(cells);
  for (std::size_t k = 0; k < cells; ++k, ++at) {
    const std::uint8_t v = bytes[at];
    if (v == kUnlabeledByte) {
      labels[k] = kUnlabeled;
    } else if (v >= b) {
      throw FormatError("label " + std::to_string(v) + " outside [0," + std::to_string(b) + ")", at);
    } else {
      labels[k] = v;
    }
  }
  const int H = static_cast<int>(h), W = static_cast<int>(w), B = static_cast<int>(b);
  return {PatchGrid(H, W, static_cast<int>(dc), B, std::move(color), labels),
          PatchGrid(H, W, static_cast<int>(dd), B, std::move(depth), labels)};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void write_grid_pair(const std::filesystem::path& path, const GridPair& pair) {
  write_file_bytes(path, encode_grid_pair(pair));
}

GridPair read_grid_pair(const std::filesystem::path& path) {
  try {
    return decode_grid_pair(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

void write_dataset(const std::filesystem::path& dir, const std::vector<GridPair>& scenes) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    std::ostringstream name;
    name << "scene_" << std::setw(5) << std::setfill('0') << k << ".mmg";
    write_grid_pair(dir / name.str(), scenes[k]);
    manifest << name.str() << '\n';
  }
  const std::string text = manifest.str();
  write_file_bytes(dir / "manifest.txt",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<GridPair> read_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw std::runtime_error("no manifest.txt in " + dir.string());
  std::vector<GridPair> out;
  std::string line;
  while (std::getline(manifest, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    out.push_back(read_grid_pair(dir / line));
  }
  if (out.empty()) throw std::runtime_error("empty dataset manifest in " + dir.string());
  return out;
}

}  // namespace mmrnn
