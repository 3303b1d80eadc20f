// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "thermoedge/canny.hpp"
#include "thermoedge/commands.hpp"
#include "thermoedge/experiment.hpp"

using namespace thermoedge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every TransitionRecord produced by the other criteria, for criterion 2.
std::vector<TransitionRecord> g_records;

void collect(const InferenceAnalysis& a) {
  g_records.insert(g_records.end(), a.records.begin(), a.records.end());
}
void collect(const DissipationLedger& l) {
  for (const auto& e : l.entries) g_records.insert(g_records.end(), e.records.begin(), e.records.end());
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

PatchDataset all_binary_dataset() {
  PatchDataset d;
  std::size_t i = 0;
  for (const auto& p : oracle::all_binary_patches()) {
    Patch patch{};
    std::copy(p.begin(), p.end(), patch.begin());
    d.push_back(patch, 0, {"all512", i++, 0});
  }
  return d;
}

Mlp random_small_net(std::uint64_t seed) {
  Mlp net = he_init(NetworkTopology{}, seed);
  Rng rng(derive_seed(seed, 1000));
  for (double& b : net.b1) b = 0.5 * rng.gaussian();
  net.b2[0] = 0.5 * rng.gaussian();
  return net;
}

RunConfig scenario_config(std::uint64_t seed) {
  RunConfig c;
  c.seed = seed;
  return c;
}

// The fixed-seed synthetic scenario shared by criteria 5, 6 and 7.
const ScenarioResult& reference_scenario() {
  static const ScenarioResult res = [] {
    auto r = run_synthetic(SyntheticPattern::from_preset(SyntheticPreset::Merged), scenario_config(1));
    collect(r.ledger);
    collect(r.task);
    return r;
  }();
  return res;
}

Outcome c1_entropy_oracle() {
  const auto data = all_binary_dataset();
  const auto patches = oracle::all_binary_patches();
  const LayerSchemes schemes;
  double worst = 0.0;
  const int nets = 24;
  for (int k = 0; k < nets; ++k) {
    const auto net = random_small_net(static_cast<std::uint64_t>(k) + 1);
    const auto got = analyze_inference(net, data, schemes);
    collect(got);
    const auto want = oracle::transition_oracle(net, patches, 16);
    worst = std::max(worst, std::abs(got.record(Transition::InputToHidden).h_x_given_y - want.input_to_hidden));
    worst = std::max(worst, std::abs(got.record(Transition::HiddenToOutput).h_x_given_y - want.hidden_to_output));
  }
  return {worst <= 1e-12, std::to_string(nets) + " nets x 512 patches, max |diff| = " + fmt(worst, 3)};
}

Outcome c2_identity() {
  double worst = 0.0, worst_functional = 0.0;
  std::size_t deterministic = 0;
  std::string offenders;
  for (const auto& r : g_records) {
    worst = std::max(worst, r.identity_residual());
    if (r.deterministic) {
      ++deterministic;
      worst_functional = std::max(worst_functional, r.identity_residual());
    } else if (r.identity_residual() > 1e-9) {
      offenders += "\n      non-functional " + to_string(r.transition) + ": residual " + fmt(r.identity_residual(), 3);
    }
  }
  const bool ok = !g_records.empty() && worst <= 1e-9;
  return {ok, std::to_string(g_records.size()) + " records (" + std::to_string(deterministic) +
                  " deterministic maps), max |H(X|Y) - (H(X) - H(Y))| = " + fmt(worst, 3) +
                  ", over deterministic maps = " + fmt(worst_functional, 3) + offenders};
}

Outcome c3_gradients() {
  Rng rng(2024);
  double worst = 0.0;
  const int checks = 100;
  for (int k = 0; k < checks; ++k) {
    const auto net = random_small_net(5000 + static_cast<std::uint64_t>(k));
    std::vector<double> x(9);
    for (double& v : x) v = rng.uniform();
    const double target = static_cast<double>(rng.below(2));
    const auto g = backward(net, forward(net, x), target);
    const auto fd = oracle::finite_difference_gradient(net, x, target);
    std::size_t i = 0;
    for (auto arr : g.arrays()) {
      for (double a : arr) {
        const double n = fd[i++];
        const double err = std::abs(a) < 1e-8 ? std::abs(a - n) : std::abs(a - n) / std::max(std::abs(a), std::abs(n));
        worst = std::max(worst, err);
      }
    }
  }
  return {worst < 1e-4, std::to_string(checks) + " checks x 133 parameters, max relative error = " + fmt(worst, 3)};
}

Outcome c4_adam() {
  const NetworkTopology t{1, 1, 1};
  const AdamConfig c;
  double worst = 0.0;
  for (double g : {1.0, -0.25, 3.5}) {
    Mlp net(t);
    AdamState st(t, c);
    Gradients grad(t);
    for (auto a : grad.arrays()) std::fill(a.begin(), a.end(), g);
    adam_step(st, net, grad);
    const double one = -c.lr * g / (std::abs(g) + c.epsilon);
    for (auto a : net.parameters())
      for (double v : a) worst = std::max(worst, std::abs(v - one));
    adam_step(st, net, grad);
    // Constant gradient: both bias-corrected moments equal g and g^2 again.
    const double m2 = (c.beta1 * (1 - c.beta1) * g + (1 - c.beta1) * g) / (1 - c.beta1 * c.beta1);
    const double v2 = (c.beta2 * (1 - c.beta2) * g * g + (1 - c.beta2) * g * g) / (1 - c.beta2 * c.beta2);
    const double two = one - c.lr * m2 / (std::sqrt(v2) + c.epsilon);
    for (auto a : net.parameters())
      for (double v : a) worst = std::max(worst, std::abs(v - two));
  }
  return {worst <= 1e-12, "one- and two-step closed forms, max |diff| = " + fmt(worst, 3)};
}

Outcome c5_magnitude() {
  const auto& s = reference_scenario();
  const double bits = s.task_bits();
  return {bits >= 0.1 && bits <= 20.0,
          "measured " + fmt(bits) + " bits vs reported " + fmt(kReportedAnnBits) + " (preset merged, seed 1, " +
              s.schemes.descriptor() + ", best epoch " + std::to_string(s.history.best_epoch) + ")"};
}

Outcome c6_ordering() {
  const double ann = reference_scenario().task_bits();
  const auto measured = compare_references(ann);
  const auto reported = compare_references(kReportedAnnBits);
  const bool order = ann < ReferenceBounds::cap_bits && ReferenceBounds::cap_bits < ReferenceBounds::vnp_bits;
  const bool ratio = measured.ratio_vnp > 50.0;
  const bool vnp_ok = std::abs(reported.ratio_vnp - 902.0) / 902.0 <= 0.005;
  const bool cap_ok = std::abs(reported.ratio_cap - 34.5) / 34.5 <= 0.005;
  return {order && ratio && vnp_ok && cap_ok,
          "ANN " + fmt(ann) + " < CAP 71 < vNp 1856; measured vNp/ANN = " + fmt(measured.ratio_vnp) +
              "; reported-value ratios " + fmt(reported.ratio_vnp) + " / " + fmt(reported.ratio_cap)};
}

Outcome c7_training_ratio() {
  const auto& s = reference_scenario();
  const double ratio = s.training_to_task_ratio();
  return {s.ledger.entries.size() == 10 && ratio >= 5.0 && ratio <= 50.0,
          "cumulative " + std::to_string(s.ledger.entries.size()) + "-epoch bits " + fmt(s.cumulative_bits()) +
              " / task bits " + fmt(s.task_bits()) + " = " + fmt(ratio)};
}

Outcome c8_patterns() {
  const std::vector<SyntheticPreset> placements{SyntheticPreset::Separated, SyntheticPreset::Random1,
                                                SyntheticPreset::Random2, SyntheticPreset::Random3};
  int merged_wins = 0, monotone = 0;
  std::ostringstream detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto config = scenario_config(seed);
    const auto merged = run_synthetic(SyntheticPattern::from_preset(SyntheticPreset::Merged), config);
    collect(merged.ledger);
    std::vector<ScenarioResult> runs;
    for (auto p : placements) {
      runs.push_back(run_synthetic(SyntheticPattern::from_preset(p), config));
      collect(runs.back().ledger);
    }
    const double separated = runs[0].cumulative_bits();
    const bool a = merged.cumulative_bits() < separated;
    std::stable_sort(runs.begin(), runs.end(),
                     [](const auto& x, const auto& y) { return x.separation < y.separation; });
    bool b = true;
    for (std::size_t k = 1; k < runs.size(); ++k) b = b && runs[k].cumulative_bits() >= runs[k - 1].cumulative_bits();
    merged_wins += a;
    monotone += b;
    detail << "\n      seed " << seed << ": merged " << fmt(merged.cumulative_bits(), 5) << (a ? " < " : " >= ")
           << "separated " << fmt(separated, 5) << "; by separation";
    for (const auto& r : runs) detail << ' ' << r.name << '(' << fmt(r.separation, 4) << ")=" << fmt(r.cumulative_bits(), 5);
    detail << (b ? " non-decreasing" : " not monotone");
  }
  const bool pass = merged_wins >= 2 && monotone >= 2;
  return {pass, "(a) merged < separated on " + std::to_string(merged_wins) + "/3 seeds; (b) monotone on " +
                    std::to_string(monotone) + "/3 seeds" + detail.str()};
}

Outcome c9_canny() {
  Image step(64, 64, 0.0);
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 32; c < 64; ++c) step.set(r, c, 1.0);
  const auto res = canny_detailed(step);
  const bool binary = res.edges.is_binary();
  bool thin = true;
  for (std::size_t r = 1; r + 1 < 64; ++r) {
    std::size_t n = 0;
    for (std::size_t c = 0; c < 64; ++c) n += res.edges.at(r, c) == 1.0;
    thin = thin && n == 1;
  }
  // Weak pixels must reach a strong pixel through 8-connected edge pixels.
  const std::size_t w = 64, h = 64;
  std::vector<int> reach(w * h, 0);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < w * h; ++i)
    if (res.strong[i] && res.edges.pixels()[i] == 1.0) {
      reach[i] = 1;
      queue.push_back(i);
    }
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const long r = static_cast<long>(queue[q] / w), c = static_cast<long>(queue[q] % w);
    for (long dr = -1; dr <= 1; ++dr)
      for (long dc = -1; dc <= 1; ++dc) {
        const long rr = r + dr, cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= 64 || cc >= 64) continue;
        const auto j = static_cast<std::size_t>(rr * 64 + cc);
        if (!reach[j] && res.edges.pixels()[j] == 1.0) {
          reach[j] = 1;
          queue.push_back(j);
        }
      }
  }
  std::size_t weak = 0, orphan = 0;
  for (std::size_t i = 0; i < w * h; ++i) {
    if (res.edges.pixels()[i] != 1.0) continue;
    weak += res.weak[i];
    orphan += !reach[i];
  }
  return {binary && thin && orphan == 0,
          std::string("binary=") + (binary ? "yes" : "no") + ", one pixel per interior row=" + (thin ? "yes" : "no") +
              ", weak kept=" + std::to_string(weak) + ", unanchored=" + std::to_string(orphan)};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + THERMOEDGE_CLI + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// File content without `#` metadata lines.
std::string csv_body(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

Outcome c10_determinism() {
  const auto root = fs::temp_directory_path() / "thermoedge_acceptance_e2e";
  fs::remove_all(root);
  std::vector<fs::path> dirs{root / "run1", root / "run2"};
  for (const auto& d : dirs) {
    fs::create_directories(d);
    const auto log = d / "log.txt";
    const std::string out = " --out-dir \"" + d.string() + "\"";
    const std::vector<std::string> steps{
        "train --preset merged --seed 7" + out,
        "analyze --checkpoint \"" + (d / "checkpoint.txt").string() + "\" --preset merged" + out,
        "compare --ledger \"" + (d / "ledger.json").string() + "\"" + out,
        "synth --seed 7" + out};
    for (const auto& step : steps) {
      if (run_cli(step, log) != 0) return {false, "'" + step + "' failed, see " + log.string()};
    }
  }
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    const auto ext = name.extension();
    if (ext != ".csv" && ext != ".json" && name != "checkpoint.txt") continue;
    ++compared;
    if (!fs::exists(dirs[1] / name) || csv_body(dirs[0] / name) != csv_body(dirs[1] / name)) {
      differing.push_back(name.string());
    }
  }
  std::string detail = std::to_string(compared) + " output files compared across two runs";
  for (const auto& d : differing) detail += "; differs: " + d;
  return {compared >= 10 && differing.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;  // 0 = no runtime bound
  };
  // Criterion 2 runs last so it sees the records produced by the others.
  const std::vector<Criterion> criteria{
      {"C1 entropy oracle equivalence", c1_entropy_oracle, 10.0},
      {"C3 gradient correctness", c3_gradients, 5.0},
      {"C4 Adam closed forms", c4_adam, 0.0},
      {"C5 task-level magnitude", c5_magnitude, 0.0},
      {"C6 architecture ordering", c6_ordering, 0.0},
      {"C7 training-vs-task ratio", c7_training_ratio, 0.0},
      {"C8 synthetic pattern orderings", c8_patterns, 120.0},
      {"C9 Canny invariants", c9_canny, 0.0},
      {"C10 end-to-end determinism", c10_determinism, 0.0},
      {"C2 deterministic-map identity", c2_identity, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over runtime budget of " + fmt(c.budget_seconds) + " s";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " [" << fmt(secs, 3) << " s] " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
