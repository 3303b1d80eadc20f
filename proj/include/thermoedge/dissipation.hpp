#pragma once

// Landauer bounds for the two information-flow steps of the network
// (input -> hidden, hidden -> output), per-epoch training ledgers, and the
// comparison against published processor-architecture bounds.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermoedge/data.hpp"
#include "thermoedge/entropy.hpp"
#include "thermoedge/errors.hpp"
#include "thermoedge/nn.hpp"

namespace thermoedge {

enum class Transition { InputToHidden, HiddenToOutput };

inline constexpr std::array<Transition, 2> kTransitions{Transition::InputToHidden, Transition::HiddenToOutput};

inline std::string to_string(Transition t) {
  return t == Transition::InputToHidden ? "input_to_hidden" : "hidden_to_output";
}

// Tolerance of the h(X|Y) = h(X) - h(Y) self-check on deterministic maps.
inline constexpr double kIdentityTolerance = 1e-9;

/// Quantization applied to each layer. Defaults: identity on binary inputs
/// (8 fixed bins on [0,1] for gray-scale), 16 observed-range bins per hidden
/// neuron, and a 0.5 threshold on the output.
struct LayerSchemes {
  QuantizationScheme input = QuantizationScheme::identity();
  QuantizationScheme hidden = QuantizationScheme::uniform_observed(16);
  QuantizationScheme output = QuantizationScheme::binary_threshold(0.5);

  static LayerSchemes defaults_for(const PatchDataset& data, std::uint32_t hidden_bins = 16,
                                   std::uint32_t gray_input_bins = 8) {
    LayerSchemes s;
    s.hidden = QuantizationScheme::uniform_observed(hidden_bins);
    if (!data.is_binary()) s.input = QuantizationScheme::uniform_fixed(gray_input_bins, 0.0, 1.0);
    return s;
  }

  std::string descriptor() const {
    return "input=" + input.descriptor() + ";hidden=" + hidden.descriptor() + ";output=" + output.descriptor();
  }
};

struct TransitionRecord {
  Transition transition = Transition::InputToHidden;
  double h_x = 0.0;          // bits
  double h_y = 0.0;          // bits
  double h_x_given_y = 0.0;  // bits erased by this step
  std::size_t sample_count = 0;
  std::string scheme;
  // Whether the quantized map X -> Y is a function on this dataset. When it
  // is, h_x_given_y equals h_x - h_y.
  bool deterministic = true;

  double identity_residual() const { return std::abs(h_x_given_y - (h_x - h_y)); }
};

namespace detail {

inline TransitionRecord make_record(Transition t, const JointDistribution& joint, const std::string& scheme) {
  TransitionRecord rec;
  rec.transition = t;
  rec.h_x = entropy(joint.marginal_x());
  rec.h_y = entropy(joint.marginal_y());
  rec.h_x_given_y = conditional_entropy(joint);
  rec.sample_count = joint.total();
  rec.scheme = scheme;
  rec.deterministic = joint.is_functional();
  if (rec.deterministic && rec.identity_residual() > kIdentityTolerance) {
    throw std::logic_error("TransitionRecord self-check failed for " + to_string(t) + ": residual " +
                           std::to_string(rec.identity_residual()));
  }
  return rec;
}

}  // namespace detail

struct InferenceAnalysis {
  std::array<TransitionRecord, 2> records;

  double total_bits() const { return records[0].h_x_given_y + records[1].h_x_given_y; }
  const TransitionRecord& record(Transition t) const { return records[t == Transition::InputToHidden ? 0 : 1]; }
};

/// Runs the network over every patch, quantizes input, hidden and output
/// states (observed hidden ranges are fitted on this dataset and this
/// network), and returns the entropy record of both transitions.
inline InferenceAnalysis analyze_inference(const Mlp& net, const PatchDataset& data, const LayerSchemes& schemes) {
  if (data.empty()) throw ContractError("analyze_inference: dataset is empty");
  const auto& t = net.topology;
  if (t.input_size != kPatchSize) {
    throw ContractError("analyze_inference: network input size " + std::to_string(t.input_size) +
                        " does not match the 9-pixel patch");
  }
  StateMatrix inputs(t.input_size), hidden(t.hidden_size), outputs(t.output_size);
  for (const auto& patch : data.patches) {
    const auto tr = forward(net, patch);
    inputs.push_back(tr.input);
    hidden.push_back(tr.hidden_post);
    outputs.push_back(tr.output);
  }
  const auto in_scheme = resolve_ranges(schemes.input, inputs);
  const auto hid_scheme = resolve_ranges(schemes.hidden, hidden);
  const auto out_scheme = resolve_ranges(schemes.output, outputs);

  JointDistribution in_hid, hid_out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = quantize(inputs.row(i), in_scheme);
    const auto h = quantize(hidden.row(i), hid_scheme);
    const auto y = quantize(outputs.row(i), out_scheme);
    in_hid.add(x, h);
    hid_out.add(h, y);
  }
  const auto desc = schemes.descriptor();
  return {{detail::make_record(Transition::InputToHidden, in_hid, desc),
           detail::make_record(Transition::HiddenToOutput, hid_out, desc)}};
}

inline TransitionRecord transition_dissipation(const Mlp& net, const PatchDataset& data, Transition transition,
                                               const LayerSchemes& schemes) {
  return analyze_inference(net, data, schemes).record(transition);
}

// Bits erased by one inference pass over `data`, summed over both transitions.
inline double inference_dissipation(const Mlp& net, const PatchDataset& data, const LayerSchemes& schemes) {
  return analyze_inference(net, data, schemes).total_bits();
}

struct LedgerEntry {
  std::size_t epoch = 0;
  std::array<TransitionRecord, 2> records;
  double epoch_bits = 0.0;
  double cumulative_bits = 0.0;
};

struct DissipationLedger {
  std::string scheme;
  std::vector<LedgerEntry> entries;

  double cumulative_bits() const { return entries.empty() ? 0.0 : entries.back().cumulative_bits; }
  double final_epoch_bits() const { return entries.empty() ? 0.0 : entries.back().epoch_bits; }
};

/// Per-epoch forward-pass erasure: epoch k costs inference_dissipation of the
/// end-of-epoch snapshot on `training_set`; the ledger accumulates these over
/// the first `first_n_epochs` epochs (fewer if training stopped earlier).
/// Backward-pass erasure is not included.
inline DissipationLedger epoch_ledger(const TrainingHistory& history, const PatchDataset& training_set,
                                      const LayerSchemes& schemes, std::size_t first_n_epochs = 10) {
  if (history.records.empty()) throw ContractError("epoch_ledger: history has no snapshots");
  DissipationLedger ledger;
  ledger.scheme = schemes.descriptor();
  const std::size_t n = std::min(first_n_epochs, history.records.size());
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& rec = history.records[k];
    const auto analysis = analyze_inference(rec.snapshot, training_set, schemes);
    const double bits = analysis.total_bits();
    cumulative += bits;
    ledger.entries.push_back({rec.epoch, analysis.records, bits, cumulative});
  }
  return ledger;
}

/// Published architecture-level bounds for the same edge-detection task,
/// in units of kB T ln 2. These are consumed as constants, not recomputed.
struct ReferenceBounds {
  static constexpr double vnp_bits = 1856.0;
  static constexpr double cap_bits = 71.0;
  static constexpr const char* vnp_source =
      "von Neumann processor, architecture-level bound for edge detection on a 64-pixel binary image";
  static constexpr const char* cap_source =
      "cellular array processor, architecture-level bound for edge detection on a 64-pixel binary image";
};

// Previously reported bound for a trained 9-12-1 edge-detection network.
inline constexpr double kReportedAnnBits = 2.0574;

struct ComparisonReport {
  double ann_bits = 0.0;
  double ratio_vnp = 0.0;  // vNp bound / ANN bound
  double ratio_cap = 0.0;  // CAP bound / ANN bound
};

inline ComparisonReport compare_references(double ann_bits) {
  if (!(ann_bits > 0.0) || !std::isfinite(ann_bits)) {
    throw ContractError("compare_references: ANN bits must be a positive finite value");
  }
  return {ann_bits, ReferenceBounds::vnp_bits / ann_bits, ReferenceBounds::cap_bits / ann_bits};
}

}  // namespace thermoedge
