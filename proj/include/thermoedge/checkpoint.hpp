#pragma once

// Plain-text model checkpoint holding the initial network, every end-of-epoch
// snapshot and the run seed. Layout is documented in docs/formats.md; doubles
// are written in shortest round-trip form, so a save/load cycle is exact.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thermoedge/errors.hpp"
#include "thermoedge/format.hpp"
#include "thermoedge/nn.hpp"

namespace thermoedge {

inline constexpr const char* kCheckpointMagic = "thermoedge-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t seed = 0;
  TrainingHistory history;
  // Free-form single-line values (train image ids, config hash, ...).
  std::map<std::string, std::string> metadata;

  bool operator==(const Checkpoint&) const = default;
};

namespace detail {

inline void write_array(std::ostream& out, const char* key, std::span<const double> values) {
  out << key;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

inline void write_network(std::ostream& out, const Mlp& net) {
  write_array(out, "w1", net.w1.data);
  write_array(out, "b1", net.b1);
  write_array(out, "w2", net.w2.data);
  write_array(out, "b2", net.b2);
}

class CheckpointReader {
 public:
  explicit CheckpointReader(std::istream& in) : in_(in) {}

  std::vector<std::string> line(const std::string& expected_key) {
    std::string text;
    ++line_no_;
    if (!std::getline(in_, text)) fail("unexpected end of file, expected '" + expected_key + "'");
    std::vector<std::string> tokens;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens[0] != expected_key) fail("expected '" + expected_key + "'");
    return tokens;
  }

  // Reads the next key, allowing `meta` lines to be consumed first.
  std::string peek_key() {
    const auto pos = in_.tellg();
    std::string text;
    if (!std::getline(in_, text)) return {};
    in_.seekg(pos);
    std::istringstream ss(text);
    std::string key;
    ss >> key;
    return key;
  }

  void read_array(const std::string& key, std::span<double> dst) {
    const auto tokens = line(key);
    if (tokens.size() != dst.size() + 1) {
      fail("'" + key + "' has " + std::to_string(tokens.size() - 1) + " values, expected " +
           std::to_string(dst.size()));
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = real(tokens[i + 1]);
  }

  Mlp read_network(const NetworkTopology& t) {
    Mlp net(t);
    read_array("w1", net.w1.data);
    read_array("b1", net.b1);
    read_array("w2", net.w2.data);
    read_array("b2", net.b2);
    return net;
  }

  // Token `i` of a line as an integer or a double; errors carry the line number.
  std::uint64_t u64(const std::vector<std::string>& tokens, std::size_t i) const {
    if (i >= tokens.size()) fail("'" + tokens[0] + "' is missing a value");
    try {
      return parse_u64(tokens[i]);
    } catch (const DataError& e) {
      fail(e.what());
    }
  }
  double real(const std::string& token) const {
    try {
      return parse_double(token);
    } catch (const DataError& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError("checkpoint line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const auto& t = ck.history.initial.topology;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "seed " << ck.seed << '\n';
  out << "topology " << t.input_size << ' ' << t.hidden_size << ' ' << t.output_size << '\n';
  out << "stopped_epoch " << ck.history.stopped_epoch << '\n';
  out << "best_epoch " << ck.history.best_epoch << '\n';
  for (const auto& [k, v] : ck.metadata) {
    const bool bad_value = v.find_first_of("\t\r\n") != std::string::npos || v.find("  ") != std::string::npos ||
                           (!v.empty() && (v.front() == ' ' || v.back() == ' '));
    if (k.empty() || k.find_first_of(" \t\r\n") != std::string::npos || bad_value) {
      throw ContractError("checkpoint metadata needs whitespace-free keys and single-spaced one-line values");
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  out << "initial\n";
  detail::write_network(out, ck.history.initial);
  out << "epochs " << ck.history.records.size() << '\n';
  for (const auto& rec : ck.history.records) {
    out << "epoch " << rec.epoch << ' ' << format_double(rec.train_mse) << ' ' << format_double(rec.val_mse) << '\n';
    detail::write_network(out, rec.snapshot);
  }
  out << "end\n";
}

inline Checkpoint read_checkpoint(std::istream& in) {
  detail::CheckpointReader rd(in);
  const auto magic = rd.line(kCheckpointMagic);
  if (magic.size() != 2 || magic[1] != std::to_string(kCheckpointVersion)) rd.fail("unsupported checkpoint version");
  Checkpoint ck;
  ck.seed = rd.u64(rd.line("seed"), 1);
  const auto topo = rd.line("topology");
  if (topo.size() != 4) rd.fail("topology needs three sizes");
  NetworkTopology t{rd.u64(topo, 1), rd.u64(topo, 2), rd.u64(topo, 3)};
  try {
    t.validate();
  } catch (const ContractError& e) {
    rd.fail(e.what());
  }
  ck.history.stopped_epoch = rd.u64(rd.line("stopped_epoch"), 1);
  ck.history.best_epoch = rd.u64(rd.line("best_epoch"), 1);
  while (rd.peek_key() == "meta") {
    const auto tokens = rd.line("meta");
    if (tokens.size() < 2) rd.fail("meta line needs a key");
    std::string value;
    for (std::size_t i = 2; i < tokens.size(); ++i) value += (i > 2 ? " " : "") + tokens[i];
    ck.metadata[tokens[1]] = value;
  }
  rd.line("initial");
  ck.history.initial = rd.read_network(t);
  const auto n = rd.u64(rd.line("epochs"), 1);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto head = rd.line("epoch");
    if (head.size() != 4) rd.fail("epoch line needs index, train_mse and val_mse");
    EpochRecord rec;
    rec.epoch = rd.u64(head, 1);
    rec.train_mse = rd.real(head[2]);
    rec.val_mse = rd.real(head[3]);
    rec.snapshot = rd.read_network(t);
    ck.history.records.push_back(std::move(rec));
  }
  rd.line("end");
  if (ck.history.best_epoch > ck.history.records.size() || ck.history.stopped_epoch > ck.history.records.size()) {
    rd.fail("best/stopped epoch exceeds the number of snapshots");
  }
  return ck;
}

inline std::string encode_checkpoint(const Checkpoint& ck) {
  std::ostringstream out;
  write_checkpoint(out, ck);
  return out.str();
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace thermoedge
