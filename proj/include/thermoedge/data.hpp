#pragma once

// Patch datasets built from (image, edge map) pairs, image-level train/val
// splitting, dataset manifests, and the 8x8 synthetic square patterns.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thermoedge/errors.hpp"
#include "thermoedge/image.hpp"
#include "thermoedge/rng.hpp"

namespace thermoedge {

inline constexpr std::size_t kPatchSide = 3;
inline constexpr std::size_t kPatchSize = kPatchSide * kPatchSide;

// Row-major flattening of a 3x3 window.
using Patch = std::array<double, kPatchSize>;

struct Provenance {
  std::string image_id;
  std::size_t row = 0;  // window center in source image coordinates
  std::size_t col = 0;

  bool operator==(const Provenance&) const = default;
};

struct PatchDataset {
  std::vector<Patch> patches;
  std::vector<std::uint8_t> labels;
  std::vector<Provenance> provenance;

  std::size_t size() const noexcept { return patches.size(); }
  bool empty() const noexcept { return patches.empty(); }

  void push_back(const Patch& patch, std::uint8_t label, Provenance where) {
    patches.push_back(patch);
    labels.push_back(label);
    provenance.push_back(std::move(where));
  }

  void append(const PatchDataset& other) {
    patches.insert(patches.end(), other.patches.begin(), other.patches.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    provenance.insert(provenance.end(), other.provenance.begin(), other.provenance.end());
  }

  std::set<std::string> image_ids() const {
    std::set<std::string> ids;
    for (const auto& p : provenance) ids.insert(p.image_id);
    return ids;
  }

  // True when every patch pixel is exactly 0 or 1.
  bool is_binary() const noexcept {
    for (const auto& patch : patches)
      for (double v : patch)
        if (v != 0.0 && v != 1.0) return false;
    return true;
  }
};

namespace detail {

inline void check_pair(const Image& image, const Image& ground_truth) {
  if (image.width() != ground_truth.width() || image.height() != ground_truth.height()) {
    throw ContractError("extract_patches: image is " + std::to_string(image.width()) + "x" +
                        std::to_string(image.height()) + " but ground truth is " +
                        std::to_string(ground_truth.width()) + "x" + std::to_string(ground_truth.height()));
  }
  if (image.width() < kPatchSide || image.height() < kPatchSide) {
    throw ContractError("extract_patches: image must be at least 3x3");
  }
}

}  // namespace detail

/// One sample per interior pixel (rows 1..h-2, cols 1..w-2). The label is the
/// ground-truth value at the window center, binarized at 0.5.
inline PatchDataset extract_patches(const Image& image, const Image& ground_truth,
                                    const std::string& image_id = "image") {
  detail::check_pair(image, ground_truth);
  PatchDataset out;
  const std::size_t n = (image.height() - 2) * (image.width() - 2);
  out.patches.reserve(n);
  out.labels.reserve(n);
  out.provenance.reserve(n);
  for (std::size_t r = 1; r + 1 < image.height(); ++r) {
    for (std::size_t c = 1; c + 1 < image.width(); ++c) {
      Patch patch{};
      for (std::size_t dr = 0; dr < kPatchSide; ++dr)
        for (std::size_t dc = 0; dc < kPatchSide; ++dc) patch[dr * kPatchSide + dc] = image.at(r + dr - 1, c + dc - 1);
      out.push_back(patch, ground_truth.at(r, c) >= 0.5 ? 1 : 0, {image_id, r, c});
    }
  }
  return out;
}

/// One sample per pixel, including the border; window cells outside the image
/// read `pad_value`. Used for the synthetic images, where every pixel of the
/// 8x8 frame is part of the detection task.
inline PatchDataset extract_patches_padded(const Image& image, const Image& ground_truth, double pad_value,
                                           const std::string& image_id = "image") {
  detail::check_pair(image, ground_truth);
  if (!(pad_value >= 0.0 && pad_value <= 1.0)) throw ContractError("extract_patches_padded: pad value outside [0, 1]");
  PatchDataset out;
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      Patch patch{};
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
          const auto rr = r + dr;
          const auto cc = c + dc;
          const bool inside = rr >= 0 && rr < h && cc >= 0 && cc < w;
          patch[static_cast<std::size_t>((dr + 1) * 3 + (dc + 1))] =
              inside ? image.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) : pad_value;
        }
      }
      const auto ur = static_cast<std::size_t>(r);
      const auto uc = static_cast<std::size_t>(c);
      out.push_back(patch, ground_truth.at(ur, uc) >= 0.5 ? 1 : 0, {image_id, ur, uc});
    }
  }
  return out;
}

struct DatasetSplit {
  PatchDataset train;
  PatchDataset val;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

/// Splits at image granularity. With exactly train_count + val_count images
/// the split is train_count/val_count; otherwise the validation share is kept
/// proportional (at least one image). Image order is a seeded shuffle of the
/// ids sorted lexicographically, so input order does not matter.
inline DatasetSplit split_by_image(const std::vector<std::pair<std::string, PatchDataset>>& datasets,
                                   std::size_t train_count = 16, std::size_t val_count = 4,
                                   std::uint64_t seed = 0) {
  const std::size_t n = datasets.size();
  if (val_count == 0 || train_count == 0) throw ContractError("split_by_image: counts must be positive");
  if (n < val_count) {
    throw DataError("split_by_image: " + std::to_string(n) + " images is fewer than the " +
                    std::to_string(val_count) + " validation images required");
  }
  std::set<std::string> unique;
  for (const auto& [id, _] : datasets) unique.insert(id);
  if (unique.size() != n) throw DataError("split_by_image: duplicate image ids");

  std::size_t n_val = val_count;
  if (n != train_count + val_count) {
    const double share = static_cast<double>(val_count) / static_cast<double>(train_count + val_count);
    n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(share * static_cast<double>(n))));
  }
  if (n_val >= n) throw DataError("split_by_image: no images left for training");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return datasets[a].first < datasets[b].first; });
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);

  DatasetSplit split;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& [id, data] = datasets[order[k]];
    if (k < n - n_val) {
      split.train.append(data);
      split.train_ids.push_back(id);
    } else {
      split.val.append(data);
      split.val_ids.push_back(id);
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Manifest: CSV with header `image_id,path,gt_path,role`; role is train, val
// or auto. Relative paths resolve against the manifest's directory.

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path path;
  std::filesystem::path gt_path;
  std::string role;
};

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest '" + manifest.string() + "'");
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "image_id" || fields[1] != "path" || fields[2] != "gt_path" ||
          fields[3] != "role") {
        throw DataError(manifest.string() + ":" + std::to_string(line_no) +
                        ": expected header 'image_id,path,gt_path,role'");
      }
      continue;
    }
    if (fields.size() != 4) {
      throw DataError(manifest.string() + ":" + std::to_string(line_no) + ": expected 4 fields, got " +
                      std::to_string(fields.size()));
    }
    if (fields[3] != "train" && fields[3] != "val" && fields[3] != "auto") {
      throw DataError(manifest.string() + ":" + std::to_string(line_no) + ": unknown role '" + fields[3] + "'");
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base / path;
    };
    entries.push_back({fields[0], resolve(fields[1]), resolve(fields[2]), fields[3]});
  }
  if (entries.empty()) throw DataError("manifest '" + manifest.string() + "' lists no images");
  return entries;
}

// ---------------------------------------------------------------------------
// Synthetic patterns. Black (ink) is 0.0, white background is 1.0.

enum class SyntheticPreset { Merged, Separated, Random1, Random2, Random3, Explicit };

inline std::string to_string(SyntheticPreset preset) {
  switch (preset) {
    case SyntheticPreset::Merged: return "merged";
    case SyntheticPreset::Separated: return "separated";
    case SyntheticPreset::Random1: return "random1";
    case SyntheticPreset::Random2: return "random2";
    case SyntheticPreset::Random3: return "random3";
    case SyntheticPreset::Explicit: return "explicit";
  }
  return "unknown";
}

inline SyntheticPreset parse_preset(const std::string& name) {
  for (auto p : {SyntheticPreset::Merged, SyntheticPreset::Separated, SyntheticPreset::Random1,
                 SyntheticPreset::Random2, SyntheticPreset::Random3}) {
    if (to_string(p) == name) return p;
  }
  throw ContractError("unknown synthetic preset '" + name + "'");
}

// Axis-aligned square with its top-left corner at (row, col).
struct Square {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t size = 2;

  bool overlaps(const Square& o) const noexcept {
    return row < o.row + o.size && o.row < row + size && col < o.col + o.size && o.col < col + size;
  }
  bool operator==(const Square&) const = default;
};

struct SyntheticPattern {
  SyntheticPreset preset = SyntheticPreset::Merged;
  std::vector<Square> squares;  // only for Explicit
  std::size_t square_size = 2;
  std::size_t image_size = 8;
  std::uint64_t seed = 0;

  static SyntheticPattern from_preset(SyntheticPreset preset) {
    SyntheticPattern p;
    p.preset = preset;
    if (preset == SyntheticPreset::Random1) p.seed = 1;
    if (preset == SyntheticPreset::Random2) p.seed = 2;
    if (preset == SyntheticPreset::Random3) p.seed = 3;
    return p;
  }

  static SyntheticPattern explicit_squares(std::vector<Square> squares, std::size_t image_size = 8) {
    SyntheticPattern p;
    p.preset = SyntheticPreset::Explicit;
    p.squares = std::move(squares);
    p.image_size = image_size;
    return p;
  }

  std::string name() const { return to_string(preset); }
};

inline constexpr std::size_t kMaxPlacementAttempts = 10000;

/// Resolves a pattern into concrete squares. merged is one 4x4 block at
/// rows/cols 2..5; separated places four 2x2 squares one pixel in from each
/// corner; randomN draws four non-overlapping squares by rejection sampling.
inline std::vector<Square> placements(const SyntheticPattern& pattern) {
  const std::size_t n = pattern.image_size;
  const std::size_t s = pattern.square_size;
  std::vector<Square> squares;
  switch (pattern.preset) {
    case SyntheticPreset::Merged: {
      const std::size_t block = 2 * s;
      if (block > n) throw ContractError("merged block does not fit the image");
      const std::size_t at = (n - block) / 2;
      squares.push_back({at, at, block});
      break;
    }
    case SyntheticPreset::Separated: {
      if (2 * (s + 1) > n) throw ContractError("separated squares do not fit the image");
      const std::size_t far = n - 1 - s;
      for (std::size_t r : {std::size_t{1}, far})
        for (std::size_t c : {std::size_t{1}, far}) squares.push_back({r, c, s});
      break;
    }
    case SyntheticPreset::Random1:
    case SyntheticPreset::Random2:
    case SyntheticPreset::Random3: {
      if (s > n) throw ContractError("square larger than the image");
      Rng rng(pattern.seed);
      std::size_t attempts = 0;
      while (squares.size() < 4) {
        if (++attempts > kMaxPlacementAttempts) {
          throw ContractError("could not place four non-overlapping squares after " +
                              std::to_string(kMaxPlacementAttempts) + " attempts");
        }
        const Square candidate{static_cast<std::size_t>(rng.below(n - s + 1)),
                               static_cast<std::size_t>(rng.below(n - s + 1)), s};
        if (std::none_of(squares.begin(), squares.end(), [&](const Square& q) { return q.overlaps(candidate); })) {
          squares.push_back(candidate);
        }
      }
      break;
    }
    case SyntheticPreset::Explicit: {
      for (std::size_t i = 0; i < pattern.squares.size(); ++i) {
        const auto& q = pattern.squares[i];
        if (q.size == 0 || q.row + q.size > n || q.col + q.size > n) {
          throw ContractError("explicit square " + std::to_string(i) + " is out of bounds");
        }
        for (std::size_t j = 0; j < i; ++j) {
          if (q.overlaps(pattern.squares[j])) throw ContractError("explicit squares overlap");
        }
      }
      squares = pattern.squares;
      break;
    }
  }
  return squares;
}

// Mean Euclidean distance between square centers over all pairs.
inline double mean_pairwise_separation(const std::vector<Square>& squares) {
  if (squares.size() < 2) return 0.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < squares.size(); ++i) {
    for (std::size_t j = i + 1; j < squares.size(); ++j) {
      const double dr = (squares[i].row + squares[i].size / 2.0) - (squares[j].row + squares[j].size / 2.0);
      const double dc = (squares[i].col + squares[i].size / 2.0) - (squares[j].col + squares[j].size / 2.0);
      total += std::hypot(dr, dc);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

/// Edge map of a binary image: a pixel is an edge iff it is black and either
/// touches the border or has a white 4-neighbor.
inline Image synthetic_ground_truth(const Image& binary) {
  if (!binary.is_binary()) throw ContractError("synthetic_ground_truth: image is not binary");
  const std::size_t h = binary.height();
  const std::size_t w = binary.width();
  Image edges(w, h, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (binary.at(r, c) != 0.0) continue;
      const bool border = r == 0 || c == 0 || r + 1 == h || c + 1 == w;
      const bool white_neighbor = (!border) && (binary.at(r - 1, c) == 1.0 || binary.at(r + 1, c) == 1.0 ||
                                                binary.at(r, c - 1) == 1.0 || binary.at(r, c + 1) == 1.0);
      if (border || white_neighbor) edges.set(r, c, 1.0);
    }
  }
  return edges;
}

struct SyntheticImage {
  Image image;
  Image ground_truth;
  std::vector<Square> squares;
};

inline SyntheticImage generate_synthetic(const SyntheticPattern& pattern) {
  SyntheticImage out;
  out.squares = placements(pattern);
  out.image = Image(pattern.image_size, pattern.image_size, 1.0);
  for (const auto& q : out.squares)
    for (std::size_t r = q.row; r < q.row + q.size; ++r)
      for (std::size_t c = q.col; c < q.col + q.size; ++c) out.image.set(r, c, 0.0);
  out.ground_truth = synthetic_ground_truth(out.image);
  return out;
}

}  // namespace thermoedge
