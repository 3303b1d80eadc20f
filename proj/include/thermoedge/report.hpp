#pragma once

// CSV/JSON emitters for ledgers, training curves, comparisons and the
// synthetic-pattern summary. Every file opens with `# key=value` metadata
// lines; the layouts are documented in docs/formats.md.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoedge/config.hpp"
#include "thermoedge/dissipation.hpp"
#include "thermoedge/entropy.hpp"
#include "thermoedge/format.hpp"
#include "thermoedge/nn.hpp"
#include "thermoedge/version.hpp"

namespace thermoedge {

inline constexpr const char* kAccountingNote =
    "forward-pass transition erasure at end-of-epoch weights; backward-pass erasure excluded";
inline constexpr const char* kEstimatorNote = "plug-in entropy (no bias correction)";

struct ReportContext {
  std::string kind;  // ledger, history, synth-summary, ...
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scheme;
};

inline ReportContext make_context(const std::string& kind, const RunConfig& config, const std::string& scheme = "") {
  return {kind, config_hash(config), config.seed, scheme};
}

inline void write_header(std::ostream& out, const ReportContext& ctx) {
  out << "# thermoedge " << kVersion << '\n';
  out << "# report=" << ctx.kind << '\n';
  out << "# config_hash=" << ctx.config_hash << '\n';
  out << "# seed=" << ctx.seed << '\n';
  if (!ctx.scheme.empty()) out << "# scheme=" << ctx.scheme << '\n';
  out << "# units=bits (multiples of kB*T*ln2)\n";
  out << "# estimator=" << kEstimatorNote << '\n';
  out << "# accounting=" << kAccountingNote << '\n';
}

// Two rows per epoch, one per transition.
inline void write_ledger_csv(std::ostream& out, const DissipationLedger& ledger, const ReportContext& ctx) {
  write_header(out, ctx);
  out << "epoch,transition,h_x_bits,h_y_bits,h_x_given_y_bits,epoch_bits,cumulative_bits\n";
  for (const auto& e : ledger.entries) {
    for (const auto& r : e.records) {
      out << e.epoch << ',' << to_string(r.transition) << ',' << format_double(r.h_x) << ',' << format_double(r.h_y)
          << ',' << format_double(r.h_x_given_y) << ',' << format_double(e.epoch_bits) << ','
          << format_double(e.cumulative_bits) << '\n';
    }
  }
}

inline nlohmann::json to_json(const TransitionRecord& r) {
  return {{"transition", to_string(r.transition)},
          {"h_x_bits", r.h_x},
          {"h_y_bits", r.h_y},
          {"h_x_given_y_bits", r.h_x_given_y},
          {"sample_count", r.sample_count},
          {"deterministic_map", r.deterministic}};
}

struct LedgerSummary {
  double task_bits = 0.0;              // early-stopped network, one inference pass
  double training_cumulative_bits = 0.0;
  std::size_t task_epoch = 0;
  std::array<TransitionRecord, 2> task_records;
  PhysicalConstants constants;
};

inline nlohmann::json ledger_json(const DissipationLedger& ledger, const LedgerSummary& summary,
                                  const RunConfig& config, const ReportContext& ctx) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : ledger.entries) {
    entries.push_back({{"epoch", e.epoch},
                       {"records", {to_json(e.records[0]), to_json(e.records[1])}},
                       {"epoch_bits", e.epoch_bits},
                       {"cumulative_bits", e.cumulative_bits}});
  }
  const double per_bit = landauer_energy(1.0, summary.constants);
  nlohmann::json task_records = {to_json(summary.task_records[0]), to_json(summary.task_records[1])};
  return {{"version", kVersion},
          {"report", ctx.kind},
          {"config_hash", ctx.config_hash},
          {"seed", ctx.seed},
          {"scheme", ledger.scheme},
          {"estimator", kEstimatorNote},
          {"accounting", kAccountingNote},
          {"config", to_json(config)},
          {"entries", entries},
          {"summary",
           {{"task_bits", summary.task_bits},
            {"task_epoch", summary.task_epoch},
            {"task_records", task_records},
            {"training_cumulative_bits", summary.training_cumulative_bits},
            {"training_to_task_ratio",
             summary.task_bits > 0.0 ? nlohmann::json(summary.training_cumulative_bits / summary.task_bits)
                                     : nlohmann::json(nullptr)},
            {"temperature_kelvin", summary.constants.temperature},
            {"joules_per_bit", per_bit},
            {"task_joules", landauer_energy(summary.task_bits, summary.constants)},
            {"training_cumulative_joules", landauer_energy(summary.training_cumulative_bits, summary.constants)},
            {"reported_reference_bits", kReportedAnnBits}}}};
}

inline void write_history_csv(std::ostream& out, const TrainingHistory& history, const ReportContext& ctx) {
  write_header(out, ctx);
  out << "# stopped_epoch=" << history.stopped_epoch << '\n';
  out << "# best_epoch=" << history.best_epoch << '\n';
  out << "epoch,train_mse,val_mse\n";
  for (const auto& r : history.records) {
    out << r.epoch << ',' << format_double(r.train_mse) << ',' << format_double(r.val_mse) << '\n';
  }
}

inline nlohmann::json comparison_json(const ComparisonReport& report, const std::string& source) {
  return {{"version", kVersion},
          {"report", "comparison"},
          {"source", source},
          {"units", "bits (multiples of kB*T*ln2)"},
          {"bars",
           {{{"architecture", "vNp"}, {"bits", ReferenceBounds::vnp_bits}, {"provenance", ReferenceBounds::vnp_source}},
            {{"architecture", "CAP"}, {"bits", ReferenceBounds::cap_bits}, {"provenance", ReferenceBounds::cap_source}},
            {{"architecture", "ANN"}, {"bits", report.ann_bits}, {"provenance", source}}}},
          {"ann_bits", report.ann_bits},
          {"ratio_vnp", report.ratio_vnp},
          {"ratio_cap", report.ratio_cap}};
}

// Writes to a sibling temporary file, then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace thermoedge
