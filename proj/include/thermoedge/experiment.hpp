#pragma once

// Synthetic-pattern scenario: generate an 8x8 image, train the network on its
// patches from a fixed seed, and account the dissipation of the first epochs
// and of the final early-stopped network.

#include <algorithm>
#include <string>
#include <vector>

#include "thermoedge/config.hpp"
#include "thermoedge/data.hpp"
#include "thermoedge/dissipation.hpp"
#include "thermoedge/nn.hpp"

namespace thermoedge {

inline PatchDataset synthetic_dataset(const SyntheticImage& synth, const std::string& border, const std::string& id) {
  if (border == "interior") return extract_patches(synth.image, synth.ground_truth, id);
  return extract_patches_padded(synth.image, synth.ground_truth, 1.0, id);
}

struct ScenarioResult {
  std::string name;
  std::vector<Square> squares;
  double separation = 0.0;  // mean pairwise distance between square centers
  LayerSchemes schemes;
  TrainingHistory history;
  DissipationLedger ledger;
  InferenceAnalysis task;  // early-stopped network on the image's patches

  double task_bits() const { return task.total_bits(); }
  double cumulative_bits() const { return ledger.cumulative_bits(); }
  double training_to_task_ratio() const { return cumulative_bits() / task_bits(); }
};

/// The image's own patches are both the training and validation set; the
/// initial network is he_init(topology, config.seed) for every pattern.
inline ScenarioResult run_synthetic(const SyntheticPattern& pattern, const RunConfig& config) {
  config.validate();
  const auto synth = generate_synthetic(pattern);
  const auto data = synthetic_dataset(synth, config.synthetic_border, pattern.name());

  ScenarioResult res;
  res.name = pattern.name();
  res.squares = synth.squares;
  res.separation = mean_pairwise_separation(synth.squares);
  res.schemes = config.schemes_for(data);
  res.history = fit(he_init(config.topology, config.seed), data, data, config.fit_options());
  res.ledger = epoch_ledger(res.history, data, res.schemes, config.ledger_epochs);
  res.task = analyze_inference(res.history.best_network(), data, res.schemes);
  return res;
}

}  // namespace thermoedge
