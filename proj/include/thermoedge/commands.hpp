#pragma once

// Implementations of the command-line subcommands. Each command reads its
// inputs from files, writes its outputs into an output directory and returns
// a small result struct; no state is kept between invocations.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoedge/canny.hpp"
#include "thermoedge/checkpoint.hpp"
#include "thermoedge/config.hpp"
#include "thermoedge/data.hpp"
#include "thermoedge/dissipation.hpp"
#include "thermoedge/experiment.hpp"
#include "thermoedge/image.hpp"
#include "thermoedge/nn.hpp"
#include "thermoedge/report.hpp"

namespace thermoedge::commands {

namespace fs = std::filesystem;

// Where the training data comes from: a manifest CSV or a synthetic preset.
struct DataSource {
  std::optional<fs::path> manifest;
  std::optional<std::string> preset;

  void validate() const {
    if (manifest.has_value() == preset.has_value()) {
      throw ConfigError("exactly one of --manifest or --preset must be given");
    }
  }
  std::string describe() const {
    return manifest ? "manifest:" + manifest->filename().string() : "preset:" + *preset;
  }
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

inline std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep))
    if (!part.empty()) out.push_back(part);
  return out;
}

inline std::vector<std::pair<std::string, PatchDataset>> load_manifest_datasets(
    const std::vector<ManifestEntry>& entries) {
  std::vector<std::pair<std::string, PatchDataset>> out;
  for (const auto& e : entries) {
    const auto image = load_image(e.path);
    const auto gt = load_image(e.gt_path);
    try {
      out.emplace_back(e.image_id, extract_patches(image, gt, e.image_id));
    } catch (const ContractError& err) {
      throw DataError(e.image_id + ": " + err.what());
    }
  }
  return out;
}

inline std::string to_text(const auto& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

}  // namespace detail

struct LoadedData {
  PatchDataset train;
  PatchDataset val;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

/// Resolves a data source into train/validation patch sets. Manifests with
/// explicit train/val roles are used as given; all-`auto` manifests are split
/// by image. A synthetic preset trains and validates on its own patches.
inline LoadedData load_training_data(const DataSource& source, const RunConfig& config) {
  source.validate();
  LoadedData out;
  if (source.preset) {
    SyntheticPreset preset;
    try {
      preset = parse_preset(*source.preset);
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
    const auto synth = generate_synthetic(SyntheticPattern::from_preset(preset));
    out.train = synthetic_dataset(synth, config.synthetic_border, *source.preset);
    out.val = out.train;
    out.train_ids = out.val_ids = {*source.preset};
    return out;
  }
  const auto entries = read_manifest(*source.manifest);
  if (entries.size() < 2) throw DataError("manifest must list at least 2 images");
  const auto datasets = detail::load_manifest_datasets(entries);
  const bool all_auto = std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.role == "auto"; });
  if (all_auto) {
    auto split = split_by_image(datasets, config.train_images, config.val_images, config.seed);
    return {std::move(split.train), std::move(split.val), std::move(split.train_ids), std::move(split.val_ids)};
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].role == "train") {
      out.train.append(datasets[i].second);
      out.train_ids.push_back(entries[i].image_id);
    } else if (entries[i].role == "val") {
      out.val.append(datasets[i].second);
      out.val_ids.push_back(entries[i].image_id);
    } else {
      throw DataError("manifest mixes 'auto' with explicit roles");
    }
  }
  if (out.train.empty() || out.val.empty()) throw DataError("manifest needs at least one train and one val image");
  return out;
}

// ---------------------------------------------------------------------------

struct TrainResult {
  fs::path checkpoint_path;
  fs::path history_path;
  TrainingHistory history;
  bool early_stopped = false;
};

inline TrainResult cmd_train(const RunConfig& config, const DataSource& source, const fs::path& out_dir) {
  config.validate();
  const auto data = load_training_data(source, config);
  fs::create_directories(out_dir);

  TrainResult res;
  res.history = fit(he_init(config.topology, config.seed), data.train, data.val, config.fit_options());
  res.early_stopped = res.history.stopped_epoch < config.max_epochs;

  Checkpoint ck;
  ck.seed = config.seed;
  ck.history = res.history;
  ck.metadata["config_hash"] = config_hash(config);
  ck.metadata["source"] = source.describe();
  ck.metadata["synthetic_border"] = config.synthetic_border;
  ck.metadata["train_ids"] = detail::join(data.train_ids);
  ck.metadata["val_ids"] = detail::join(data.val_ids);

  res.checkpoint_path = out_dir / "checkpoint.txt";
  res.history_path = out_dir / "history.csv";
  write_file_atomic(res.checkpoint_path, encode_checkpoint(ck));
  const auto ctx = make_context("history", config);
  write_file_atomic(res.history_path,
                    detail::to_text([&](std::ostream& os) { write_history_csv(os, res.history, ctx); }));
  return res;
}

// ---------------------------------------------------------------------------

struct AnalyzeResult {
  fs::path ledger_csv;
  fs::path ledger_json;
  DissipationLedger ledger;
  LedgerSummary summary;
};

/// Ledger over the first `config.ledger_epochs` snapshots, evaluated on the
/// training images recorded in the checkpoint, plus the task-level bound of
/// the early-stopped network on the same patches.
inline AnalyzeResult cmd_analyze(RunConfig config, const fs::path& checkpoint_path, const DataSource& source,
                                 const fs::path& out_dir) {
  const auto ck = load_checkpoint(checkpoint_path);
  config.seed = ck.seed;
  if (auto it = ck.metadata.find("synthetic_border"); it != ck.metadata.end()) config.synthetic_border = it->second;
  if (!(ck.history.initial.topology == config.topology)) {
    throw ConfigError("checkpoint topology does not match the configured topology");
  }
  config.validate();
  if (ck.history.records.empty()) throw DataError("checkpoint has no epoch snapshots");

  PatchDataset analysis;
  if (source.preset) {
    analysis = load_training_data(source, config).train;
  } else {
    source.validate();
    const auto entries = read_manifest(*source.manifest);
    const auto it = ck.metadata.find("train_ids");
    const auto ids = it == ck.metadata.end() ? std::vector<std::string>{} : detail::split(it->second);
    std::vector<ManifestEntry> selected;
    for (const auto& e : entries)
      if (std::find(ids.begin(), ids.end(), e.image_id) != ids.end()) selected.push_back(e);
    if (selected.empty()) throw DataError("none of the checkpoint's training images appear in the manifest");
    for (auto& [id, d] : detail::load_manifest_datasets(selected)) analysis.append(d);
  }

  const auto schemes = config.schemes_for(analysis);
  AnalyzeResult res;
  res.ledger = epoch_ledger(ck.history, analysis, schemes, config.ledger_epochs);
  const auto task = analyze_inference(ck.history.best_network(), analysis, schemes);
  res.summary.task_bits = task.total_bits();
  res.summary.task_epoch = ck.history.best_epoch;
  res.summary.task_records = task.records;
  res.summary.training_cumulative_bits = res.ledger.cumulative_bits();
  res.summary.constants = config.constants();

  fs::create_directories(out_dir);
  const auto ctx = make_context("ledger", config, schemes.descriptor());
  res.ledger_csv = out_dir / "ledger.csv";
  res.ledger_json = out_dir / "ledger.json";
  write_file_atomic(res.ledger_csv, detail::to_text([&](std::ostream& os) { write_ledger_csv(os, res.ledger, ctx); }));
  write_file_atomic(res.ledger_json, ledger_json(res.ledger, res.summary, config, ctx).dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------

struct CompareInput {
  std::optional<double> bits;
  std::optional<fs::path> ledger_json;
};

struct CompareResult {
  ComparisonReport report;
  fs::path output;
};

inline CompareResult cmd_compare(const CompareInput& input, const fs::path& out_dir) {
  if (input.bits.has_value() == input.ledger_json.has_value()) {
    throw ConfigError("exactly one of --bits or --ledger must be given");
  }
  double bits = 0.0;
  std::string source;
  if (input.bits) {
    bits = *input.bits;
    source = "user-supplied value";
  } else {
    std::ifstream in(*input.ledger_json);
    if (!in) throw DataError("cannot open ledger '" + input.ledger_json->string() + "'");
    nlohmann::json j;
    try {
      in >> j;
      bits = j.at("summary").at("task_bits").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("ledger '" + input.ledger_json->string() + "' has no summary.task_bits: " + e.what());
    }
    source = "measured task-level bound (" + input.ledger_json->filename().string() + ")";
  }
  if (!(bits > 0.0)) throw ConfigError("ANN bits must be positive");
  CompareResult res;
  res.report = compare_references(bits);
  fs::create_directories(out_dir);
  res.output = out_dir / "comparison.json";
  write_file_atomic(res.output, comparison_json(res.report, source).dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------

struct SynthResult {
  std::vector<ScenarioResult> scenarios;  // in request order
  std::vector<std::size_t> ranking;       // indices sorted by cumulative bits
  fs::path summary_csv;
  fs::path summary_json;
  std::vector<fs::path> ledger_files;
};

inline SynthResult cmd_synth(const RunConfig& config, const std::vector<std::string>& presets,
                             const fs::path& out_dir) {
  config.validate();
  if (presets.size() < 2) throw ConfigError("synth needs at least two presets");
  SynthResult res;
  for (const auto& name : presets) {
    SyntheticPreset p;
    try {
      p = parse_preset(name);
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
    res.scenarios.push_back(run_synthetic(SyntheticPattern::from_preset(p), config));
  }
  res.ranking.resize(res.scenarios.size());
  for (std::size_t i = 0; i < res.ranking.size(); ++i) res.ranking[i] = i;
  std::stable_sort(res.ranking.begin(), res.ranking.end(), [&](std::size_t a, std::size_t b) {
    return res.scenarios[a].cumulative_bits() < res.scenarios[b].cumulative_bits();
  });

  fs::create_directories(out_dir);
  for (const auto& s : res.scenarios) {
    const auto ctx = make_context("synth-ledger:" + s.name, config, s.schemes.descriptor());
    const auto path = out_dir / ("synth_" + s.name + "_ledger.csv");
    write_file_atomic(path, detail::to_text([&](std::ostream& os) { write_ledger_csv(os, s.ledger, ctx); }));
    res.ledger_files.push_back(path);
  }

  const auto ctx = make_context("synth-summary", config, res.scenarios.front().schemes.descriptor());
  std::ostringstream csv;
  write_header(csv, ctx);
  csv << "rank,preset,mean_separation,cumulative_bits,task_bits,training_to_task_ratio,cumulative_joules\n";
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < res.ranking.size(); ++k) {
    const auto& s = res.scenarios[res.ranking[k]];
    const double joules = landauer_energy(s.cumulative_bits(), config.constants());
    csv << (k + 1) << ',' << s.name << ',' << format_double(s.separation) << ',' << format_double(s.cumulative_bits())
        << ',' << format_double(s.task_bits()) << ',' << format_double(s.training_to_task_ratio()) << ','
        << format_double(joules) << '\n';
    rows.push_back({{"rank", k + 1},
                    {"preset", s.name},
                    {"mean_separation", s.separation},
                    {"cumulative_bits", s.cumulative_bits()},
                    {"task_bits", s.task_bits()},
                    {"training_to_task_ratio", s.training_to_task_ratio()},
                    {"cumulative_joules", joules}});
  }
  res.summary_csv = out_dir / "synth_summary.csv";
  res.summary_json = out_dir / "synth_summary.json";
  write_file_atomic(res.summary_csv, csv.str());
  const nlohmann::json summary = {{"version", kVersion},     {"report", "synth-summary"},
                                  {"config_hash", ctx.config_hash}, {"seed", ctx.seed},
                                  {"scheme", ctx.scheme},    {"config", to_json(config)},
                                  {"ranking", rows}};
  write_file_atomic(res.summary_json, summary.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------

// Binary edge map; written as PBM unless the output path ends in .pgm.
inline Image cmd_canny(const fs::path& input, const fs::path& output, const CannyOptions& options) {
  try {
    options.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  const auto image = load_image(input);
  Image edges;
  try {
    edges = canny(image, options);
  } catch (const ContractError& e) {
    throw DataError(input.string() + ": " + e.what());
  }
  if (output.extension() == ".pgm") {
    write_file_atomic(output, encode_pgm(edges));
  } else {
    write_file_atomic(output, encode_pbm(edges));
  }
  return edges;
}

}  // namespace thermoedge::commands
