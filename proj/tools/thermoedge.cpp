// thermoedge: train the patch edge detector, account its Landauer dissipation,
// compare against reference architectures, and run the synthetic experiment.
//
// Exit codes: 0 success, 2 usage/configuration error, 3 data error,
// 4 internal error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermoedge/commands.hpp"

namespace {

namespace fs = std::filesystem;
using namespace thermoedge;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::optional<std::uint32_t> scheme_bins;
  std::optional<double> temperature;
  std::optional<std::size_t> epochs;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Run seed (overrides config and THERMOEDGE_SEED)");
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--scheme-bins", f.scheme_bins, "Uniform bins per hidden neuron");
  cmd->add_option("--temperature", f.temperature, "Temperature in kelvin for joule conversion");
  cmd->add_option("--epochs", f.epochs, "Maximum training epochs");
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig c;
  auto config_path = f.config;
  if (!config_path) config_path = process_env(std::string(kEnvPrefix) + "CONFIG");
  if (config_path) c = load_config_file(c, *config_path);
  c = apply_env_overrides(c);
  if (f.seed) c.seed = *f.seed;
  if (f.scheme_bins) c.quantization.hidden_bins = *f.scheme_bins;
  if (f.temperature) c.temperature = *f.temperature;
  if (f.epochs) c.max_epochs = *f.epochs;
  c.validate();
  return c;
}

fs::path out_dir(const CommonFlags& f) {
  if (auto env = process_env(std::string(kEnvPrefix) + "OUT_DIR"); env && f.out_dir == "out") return *env;
  return f.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landauer dissipation analysis of a 9-12-1 edge-detection perceptron"};
  app.require_subcommand(1);

  CommonFlags train_flags, analyze_flags, compare_flags, synth_flags;
  commands::DataSource train_source, analyze_source;
  std::string manifest_arg, preset_arg, analyze_manifest_arg, analyze_preset_arg;

  auto* train = app.add_subcommand("train", "Train the network and write checkpoint + history");
  add_common(train, train_flags);
  train->add_option("--manifest", manifest_arg, "Dataset manifest CSV (image_id,path,gt_path,role)");
  train->add_option("--preset", preset_arg, "Train on a synthetic preset instead (merged, separated, random1..3)");

  auto* analyze = app.add_subcommand("analyze", "Compute the per-epoch dissipation ledger from a checkpoint");
  add_common(analyze, analyze_flags);
  std::string checkpoint_arg;
  std::optional<std::size_t> ledger_epochs;
  analyze->add_option("--checkpoint", checkpoint_arg, "Checkpoint written by 'train'")->required();
  analyze->add_option("--manifest", analyze_manifest_arg, "Manifest used for training");
  analyze->add_option("--preset", analyze_preset_arg, "Synthetic preset used for training");
  analyze->add_option("--ledger-epochs", ledger_epochs, "Number of leading epochs to account (default 10)");

  auto* compare = app.add_subcommand("compare", "Compare an ANN bound with the vNp and CAP references");
  add_common(compare, compare_flags);
  std::optional<double> bits_arg;
  std::string ledger_arg;
  compare->add_option("--bits", bits_arg, "ANN bound in bits");
  compare->add_option("--ledger", ledger_arg, "ledger.json from 'analyze' (uses summary.task_bits)");

  auto* synth = app.add_subcommand("synth", "Run the synthetic square-pattern experiment");
  add_common(synth, synth_flags);
  std::vector<std::string> presets{"merged", "separated", "random1", "random2", "random3"};
  synth->add_option("--presets", presets, "Presets to run")->delimiter(',')->capture_default_str();

  auto* canny_cmd = app.add_subcommand("canny", "Canny edge detection baseline on a PGM/PBM image");
  std::string canny_in, canny_out;
  CannyOptions canny_opts;
  canny_cmd->add_option("--input", canny_in, "Input PGM/PBM")->required();
  canny_cmd->add_option("--output", canny_out, "Output edge map (PBM)")->required();
  canny_cmd->add_option("--sigma", canny_opts.sigma, "Gaussian sigma")->capture_default_str();
  canny_cmd->add_option("--low", canny_opts.low, "Low threshold, fraction of max gradient")->capture_default_str();
  canny_cmd->add_option("--high", canny_opts.high, "High threshold, fraction of max gradient")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      if (!manifest_arg.empty()) train_source.manifest = manifest_arg;
      if (!preset_arg.empty()) train_source.preset = preset_arg;
      const auto config = resolve_config(train_flags);
      const auto res = commands::cmd_train(config, train_source, out_dir(train_flags));
      const auto& h = res.history;
      std::cout << "trained " << h.records.size() << " epoch(s); best validation MSE at epoch " << h.best_epoch
                << "\n";
      if (res.early_stopped) {
        std::cout << "early stopping: validation error did not improve for " << config.patience
                  << " epoch(s); stopped at epoch " << h.stopped_epoch << "\n";
      }
      std::cout << "checkpoint: " << res.checkpoint_path.string() << "\nhistory: " << res.history_path.string()
                << "\n";
    } else if (*analyze) {
      if (!analyze_manifest_arg.empty()) analyze_source.manifest = analyze_manifest_arg;
      if (!analyze_preset_arg.empty()) analyze_source.preset = analyze_preset_arg;
      auto config = resolve_config(analyze_flags);
      if (ledger_epochs) config.ledger_epochs = *ledger_epochs;
      const auto res = commands::cmd_analyze(config, checkpoint_arg, analyze_source, out_dir(analyze_flags));
      const auto& s = res.summary;
      std::cout << "epochs accounted: " << res.ledger.entries.size() << "\n"
                << "task bits (epoch " << s.task_epoch << "): " << format_double(s.task_bits) << "  ["
                << format_double(landauer_energy(s.task_bits, s.constants)) << " J]\n"
                << "training cumulative bits: " << format_double(s.training_cumulative_bits) << "  ["
                << format_double(landauer_energy(s.training_cumulative_bits, s.constants)) << " J]\n";
      if (s.task_bits > 0.0) {
        std::cout << "training/task ratio: " << format_double(s.training_cumulative_bits / s.task_bits) << "\n";
      }
      std::cout << "reference bound for comparison: " << format_double(kReportedAnnBits) << " bits\n"
                << "ledger: " << res.ledger_csv.string() << "\n";
    } else if (*compare) {
      commands::CompareInput input;
      input.bits = bits_arg;
      if (!ledger_arg.empty()) input.ledger_json = ledger_arg;
      const auto res = commands::cmd_compare(input, out_dir(compare_flags));
      std::cout << "ANN " << format_double(res.report.ann_bits) << " bits; vNp/ANN = "
                << format_double(res.report.ratio_vnp) << "; CAP/ANN = " << format_double(res.report.ratio_cap)
                << "\ncomparison: " << res.output.string() << "\n";
    } else if (*synth) {
      const auto config = resolve_config(synth_flags);
      const auto res = commands::cmd_synth(config, presets, out_dir(synth_flags));
      std::cout << "rank preset cumulative_bits task_bits mean_separation\n";
      for (std::size_t k = 0; k < res.ranking.size(); ++k) {
        const auto& s = res.scenarios[res.ranking[k]];
        std::cout << (k + 1) << ' ' << s.name << ' ' << format_double(s.cumulative_bits()) << ' '
                  << format_double(s.task_bits()) << ' ' << format_double(s.separation) << "\n";
      }
      std::cout << "summary: " << res.summary_csv.string() << "\n";
    } else if (*canny_cmd) {
      const auto edges = commands::cmd_canny(canny_in, canny_out, canny_opts);
      std::size_t count = 0;
      for (double v : edges.pixels()) count += v == 1.0;
      std::cout << "edge pixels: " << count << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ContractError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
