#pragma once

// Discretization of layer states into symbols, sparse empirical (joint)
// distributions, plug-in Shannon / conditional entropies in bits, and the
// Landauer energy of erasing a number of bits.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thermoedge/errors.hpp"

namespace thermoedge {

enum class QuantizationKind {
  Identity,         // values already in {0, 1}
  BinaryThreshold,  // x >= threshold -> 1, else 0
  UniformBins,      // equal-width bins over a range
};

enum class RangePolicy { Fixed, Observed };

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Range&) const = default;
};

struct QuantizationScheme {
  QuantizationKind kind = QuantizationKind::UniformBins;
  std::uint32_t bins = 16;
  RangePolicy range_policy = RangePolicy::Observed;
  Range fixed_range{0.0, 1.0};
  double threshold = 0.5;
  // Per-dimension ranges for the Observed policy; filled by resolve_ranges().
  std::vector<Range> observed;

  static QuantizationScheme identity() {
    QuantizationScheme s;
    s.kind = QuantizationKind::Identity;
    s.bins = 2;
    return s;
  }
  static QuantizationScheme binary_threshold(double threshold = 0.5) {
    QuantizationScheme s;
    s.kind = QuantizationKind::BinaryThreshold;
    s.bins = 2;
    s.threshold = threshold;
    return s;
  }
  static QuantizationScheme uniform_fixed(std::uint32_t bins, double lo, double hi) {
    QuantizationScheme s;
    s.kind = QuantizationKind::UniformBins;
    s.bins = bins;
    s.range_policy = RangePolicy::Fixed;
    s.fixed_range = {lo, hi};
    s.validate();
    return s;
  }
  static QuantizationScheme uniform_observed(std::uint32_t bins) {
    QuantizationScheme s;
    s.kind = QuantizationKind::UniformBins;
    s.bins = bins;
    s.range_policy = RangePolicy::Observed;
    s.validate();
    return s;
  }

  void validate() const {
    if (kind != QuantizationKind::UniformBins) return;
    if (bins < 2) throw ContractError("QuantizationScheme: uniform bins need bins_per_dimension >= 2");
    if (range_policy == RangePolicy::Fixed && !(fixed_range.lo < fixed_range.hi)) {
      throw ContractError("QuantizationScheme: fixed range needs lo < hi");
    }
  }

  bool resolved() const {
    return kind != QuantizationKind::UniformBins || range_policy == RangePolicy::Fixed || !observed.empty();
  }

  // Stable text form embedded in every report; excludes the observed ranges,
  // which vary per analysis pass.
  std::string descriptor() const {
    std::ostringstream os;
    switch (kind) {
      case QuantizationKind::Identity: os << "identity"; break;
      case QuantizationKind::BinaryThreshold: os << "binary-threshold(t=" << threshold << ")"; break;
      case QuantizationKind::UniformBins:
        os << "uniform-bins(bins=" << bins << ",range=";
        if (range_policy == RangePolicy::Fixed) {
          os << "fixed[" << fixed_range.lo << "," << fixed_range.hi << "]";
        } else {
          os << "observed";
        }
        os << ")";
        break;
    }
    return os.str();
  }
};

// Canonical symbol for a quantized vector: its per-dimension bin indices.
struct StateSymbol {
  std::vector<std::uint32_t> bins;

  auto operator<=>(const StateSymbol&) const = default;
  bool operator==(const StateSymbol&) const = default;

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (i) out.push_back('-');
      out += std::to_string(bins[i]);
    }
    return out;
  }

  static StateSymbol parse(const std::string& text) {
    StateSymbol s;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '-')) {
      if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
        throw DataError("malformed state symbol '" + text + "'");
      }
      s.bins.push_back(static_cast<std::uint32_t>(std::stoul(part)));
    }
    return s;
  }
};

// Row-major block of equally sized state vectors.
struct StateMatrix {
  std::size_t dim = 0;
  std::vector<double> values;

  StateMatrix() = default;
  explicit StateMatrix(std::size_t d) : dim(d) {}

  std::size_t count() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void push_back(std::span<const double> v) {
    if (v.size() != dim) throw ContractError("StateMatrix: row has wrong dimension");
    values.insert(values.end(), v.begin(), v.end());
  }
};

/// Fills per-dimension [min, max] ranges for an Observed uniform scheme;
/// other schemes are returned unchanged.
inline QuantizationScheme resolve_ranges(QuantizationScheme scheme, const StateMatrix& samples) {
  scheme.validate();
  if (scheme.kind != QuantizationKind::UniformBins || scheme.range_policy != RangePolicy::Observed) return scheme;
  if (samples.count() == 0) throw ContractError("resolve_ranges: no samples");
  scheme.observed.assign(samples.dim, Range{0.0, 0.0});
  for (std::size_t d = 0; d < samples.dim; ++d) {
    double lo = samples.row(0)[d];
    double hi = lo;
    for (std::size_t i = 1; i < samples.count(); ++i) {
      lo = std::min(lo, samples.row(i)[d]);
      hi = std::max(hi, samples.row(i)[d]);
    }
    scheme.observed[d] = {lo, hi};
  }
  return scheme;
}

/// Maps a vector to its symbol. Uniform bins use
/// floor((x - lo) / (hi - lo) * bins) clamped to [0, bins - 1]; a dimension
/// with lo == hi collapses to bin 0.
inline StateSymbol quantize(std::span<const double> vector, const QuantizationScheme& scheme) {
  StateSymbol s;
  s.bins.resize(vector.size());
  for (std::size_t d = 0; d < vector.size(); ++d) {
    const double x = vector[d];
    if (!std::isfinite(x)) throw ContractError("quantize: non-finite value in dimension " + std::to_string(d));
    switch (scheme.kind) {
      case QuantizationKind::Identity:
        if (x != 0.0 && x != 1.0) {
          throw ContractError("quantize: identity scheme needs binary values, got " + std::to_string(x));
        }
        s.bins[d] = x == 1.0 ? 1U : 0U;
        break;
      case QuantizationKind::BinaryThreshold:
        s.bins[d] = x >= scheme.threshold ? 1U : 0U;
        break;
      case QuantizationKind::UniformBins: {
        Range r = scheme.fixed_range;
        if (scheme.range_policy == RangePolicy::Observed) {
          if (scheme.observed.size() != vector.size()) {
            throw ContractError("quantize: observed ranges are unresolved or have the wrong dimension");
          }
          r = scheme.observed[d];
        }
        if (!(r.hi > r.lo)) {
          s.bins[d] = 0;
          break;
        }
        const double pos = std::floor((x - r.lo) / (r.hi - r.lo) * static_cast<double>(scheme.bins));
        const double clamped = std::clamp(pos, 0.0, static_cast<double>(scheme.bins - 1));
        s.bins[d] = static_cast<std::uint32_t>(clamped);
        break;
      }
    }
  }
  return s;
}

class Distribution {
 public:
  void add(const StateSymbol& s, std::uint64_t count = 1) {
    if (count == 0) return;
    counts_[s] += count;
    total_ += count;
  }

  void merge(const Distribution& other) {
    for (const auto& [s, c] : other.counts_) add(s, c);
  }

  std::uint64_t total() const noexcept { return total_; }
  std::size_t support() const noexcept { return counts_.size(); }
  const std::map<StateSymbol, std::uint64_t>& counts() const noexcept { return counts_; }

  std::uint64_t count(const StateSymbol& s) const {
    const auto it = counts_.find(s);
    return it == counts_.end() ? 0 : it->second;
  }

  bool operator==(const Distribution&) const = default;

 private:
  std::map<StateSymbol, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

class JointDistribution {
 public:
  using Key = std::pair<StateSymbol, StateSymbol>;

  void add(const StateSymbol& x, const StateSymbol& y, std::uint64_t count = 1) {
    if (count == 0) return;
    counts_[Key{x, y}] += count;
    total_ += count;
  }

  void merge(const JointDistribution& other) {
    for (const auto& [k, c] : other.counts_) add(k.first, k.second, c);
  }

  std::uint64_t total() const noexcept { return total_; }
  const std::map<Key, std::uint64_t>& counts() const noexcept { return counts_; }

  Distribution marginal_x() const {
    Distribution d;
    for (const auto& [k, c] : counts_) d.add(k.first, c);
    return d;
  }

  Distribution marginal_y() const {
    Distribution d;
    for (const auto& [k, c] : counts_) d.add(k.second, c);
    return d;
  }

  // True when every observed x co-occurs with exactly one y.
  bool is_functional() const {
    const StateSymbol* previous = nullptr;
    for (const auto& [k, c] : counts_) {
      if (previous != nullptr && *previous == k.first) return false;
      previous = &k.first;
    }
    return true;
  }

 private:
  std::map<Key, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

namespace detail {

// sum_c (c/N) log2(N/c); every term is non-negative.
template <typename CountMap>
double plugin_entropy(const CountMap& counts, std::uint64_t total) {
  if (total == 0) throw ContractError("entropy: empty distribution");
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (const auto& entry : counts) {
    const double c = static_cast<double>(entry.second);
    h += (c / n) * std::log2(n / c);
  }
  return h;
}

}  // namespace detail

inline double entropy(const Distribution& dist) { return detail::plugin_entropy(dist.counts(), dist.total()); }

inline double joint_entropy(const JointDistribution& joint) {
  return detail::plugin_entropy(joint.counts(), joint.total());
}

// H(X|Y) = H(X,Y) - H(Y), in bits.
inline double conditional_entropy(const JointDistribution& joint) {
  const double h = joint_entropy(joint) - entropy(joint.marginal_y());
  return h < 0.0 ? 0.0 : h;
}

struct PhysicalConstants {
  double boltzmann = 1.380649e-23;  // J/K, exact SI value
  double temperature = 300.0;       // K

  void validate() const {
    if (!(temperature > 0.0)) throw ContractError("PhysicalConstants: temperature must be > 0");
  }
};

// Minimum heat, in joules, for irreversibly erasing `bits` bits: bits * kB T ln 2.
inline double landauer_energy(double bits, const PhysicalConstants& constants = {}) {
  constants.validate();
  if (!(bits >= 0.0)) throw ContractError("landauer_energy: bits must be >= 0");
  return bits * constants.boltzmann * constants.temperature * std::numbers::ln2;
}

// Audit dump: `symbol,count` rows after optional `# ` header lines.
inline void write_distribution_csv(std::ostream& out, const Distribution& dist,
                                   const std::vector<std::string>& header_lines = {}) {
  for (const auto& line : header_lines) out << "# " << line << '\n';
  out << "symbol,count\n";
  for (const auto& [s, c] : dist.counts()) out << s.to_string() << ',' << c << '\n';
}

}  // namespace thermoedge
