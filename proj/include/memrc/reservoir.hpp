#pragma once

// Time-multiplexed dynamic-memristor reservoir. Each channel is one DM device
// driven by the input scaled by its row of a random bipolar mask; the read
// currents at the virtual-node slots form the reservoir state.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "memrc/common.hpp"
#include "memrc/devicesim.hpp"

namespace memrc::reservoir {

struct MaskMatrix {
  std::size_t rows = 0;  // channels
  std::size_t cols = 0;  // mask length
  std::vector<std::int8_t> values;
  std::uint64_t seed = 0;

  int at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const std::int8_t> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  bool operator==(const MaskMatrix&) const = default;
};

/// i.i.d. fair +/-1 entries, one bit of a 64-bit Mersenne Twister word each.
inline MaskMatrix make_bipolar_mask(std::size_t n, std::size_t ml, std::uint64_t seed) {
  if (n == 0 || ml == 0) throw ConfigError("mask dimensions must be >= 1");
  MaskMatrix m{n, ml, std::vector<std::int8_t>(n * ml), seed};
  std::mt19937_64 rng(seed);
  std::uint64_t word = 0;
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    if (k % 64 == 0) word = rng();
    m.values[k] = (word >> (k % 64)) & 1u ? std::int8_t{1} : std::int8_t{-1};
  }
  return m;
}

struct ReservoirConfig {
  std::size_t n_channels = 40;
  std::size_t mask_length = 325;
  double v_min = 0.0;
  double v_max = 1.8;
  double pulse_width = 0.01;  // s, the mask interval
  std::size_t virtual_nodes_per_step = 1;
  double gamma_scale = 1.0;
  devicesim::DmParams dm{};
  std::uint64_t seed = 1;
  double v_read = 0.5;
  int substeps = 10;
  /// Encoding bounds; when unset the observed [min, max] of each vector is used.
  std::optional<std::pair<double, double>> feature_bounds;
  /// Worker threads for per-sample parallelism; 0 = hardware concurrency.
  unsigned threads = 0;

  void validate() const {
    require(v_min < v_max, "reservoir v_min must be < v_max");
    require(n_channels >= 1, "reservoir needs at least one channel");
    require(mask_length >= 1, "mask length must be >= 1");
    require(pulse_width > 0.0, "pulse width must be > 0");
    require(virtual_nodes_per_step >= 1 && virtual_nodes_per_step <= mask_length,
            "virtual nodes per step must be in [1, mask_length]");
    require(substeps >= 1, "substeps must be >= 1");
    require(std::isfinite(gamma_scale), "gamma_scale must be finite");
    if (feature_bounds) require(feature_bounds->first < feature_bounds->second, "feature bounds must be lo < hi");
    dm.validate();
  }

  std::size_t state_width() const { return n_channels * virtual_nodes_per_step; }
};

/// Affine map of features into [v_min, v_max]. A degenerate range maps every
/// value to v_min. With configured bounds, values outside are clamped.
inline std::vector<double> encode_voltages(std::span<const double> features, const ReservoirConfig& config) {
  for (double x : features) require_finite(x, "feature");
  std::vector<double> out(features.size(), config.v_min);
  if (features.empty()) return out;
  double lo, hi;
  if (config.feature_bounds) {
    std::tie(lo, hi) = *config.feature_bounds;
  } else {
    auto [mn, mx] = std::minmax_element(features.begin(), features.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi > lo)) return out;
  const double scale = (config.v_max - config.v_min) / (hi - lo);
  for (std::size_t k = 0; k < features.size(); ++k)
    out[k] = config.v_min + (std::clamp(features[k], lo, hi) - lo) * scale;
  return out;
}

/// Slot index (within a step) after which virtual node `node` is read.
inline std::size_t node_slot(std::size_t node, const ReservoirConfig& config) {
  return (node + 1) * config.mask_length / config.virtual_nodes_per_step - 1;
}

/// Drives one channel through `voltages` (steps x mask_length, flattened),
/// carrying `state` across steps. Returns steps x virtual_nodes currents.
inline std::vector<double> run_channel(std::span<const std::int8_t> mask_row, std::span<const double> voltages,
                                       const ReservoirConfig& config, devicesim::DmState& state) {
  const std::size_t ml = config.mask_length;
  if (mask_row.size() != ml) throw InputError("mask row length differs from mask_length");
  if (voltages.size() % ml != 0) throw InputError("voltage sequence is not a whole number of mask periods");
  const std::size_t steps = voltages.size() / ml;
  const std::size_t nodes = config.virtual_nodes_per_step;
  std::vector<double> out;
  out.reserve(steps * nodes);
  const double dt = config.pulse_width / config.substeps;
  for (std::size_t s = 0; s < steps; ++s) {
    std::size_t next_node = 0;
    for (std::size_t j = 0; j < ml; ++j) {
      const double drive = config.gamma_scale * mask_row[j] * voltages[s * ml + j];
      for (int k = 0; k < config.substeps; ++k) state = devicesim::dm_step(state, config.dm, drive, dt);
      if (next_node < nodes && j == node_slot(next_node, config)) {
        out.push_back(devicesim::dm_current(state, config.dm, config.v_read));
        ++next_node;
      }
    }
  }
  return out;
}

inline std::vector<double> run_channel(std::span<const std::int8_t> mask_row, std::span<const double> voltages,
                                       const ReservoirConfig& config) {
  devicesim::DmState fresh{};
  return run_channel(mask_row, voltages, config, fresh);
}

/// Calls body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled by exactly one worker, so indexed writes are order-independent.
/// The first exception thrown by any worker is rethrown after all join.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  unsigned hw = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  hw = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  if (hw <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::mutex guard;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < hw; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += hw) body(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!first) first = std::current_exception();
        }
      });
  }
  if (first) std::rethrow_exception(first);
}

/// Reservoir state of one independent sample: every channel starts from w = 0.
/// Layout: index = (step * n_channels + channel) * nodes + node.
inline std::vector<double> sample_state(std::span<const double> features, const ReservoirConfig& config,
                                        const MaskMatrix& mask) {
  if (features.empty() || features.size() % config.mask_length != 0)
    throw InputError("feature length must be a positive multiple of mask_length");
  const auto volts = encode_voltages(features, config);
  const std::size_t steps = features.size() / config.mask_length;
  const std::size_t nodes = config.virtual_nodes_per_step;
  std::vector<double> row(steps * config.n_channels * nodes);
  for (std::size_t c = 0; c < config.n_channels; ++c) {
    const auto cur = run_channel(mask.row(c), volts, config);
    for (std::size_t s = 0; s < steps; ++s)
      for (std::size_t v = 0; v < nodes; ++v) row[(s * config.n_channels + c) * nodes + v] = cur[s * nodes + v];
  }
  return row;
}

/// One state row per sample. Samples must share a feature length.
inline Matrix reservoir_states(const std::vector<std::vector<double>>& features, const ReservoirConfig& config) {
  config.validate();
  if (features.empty()) return {};
  const std::size_t len = features.front().size();
  for (const auto& f : features)
    if (f.size() != len) throw InputError("ragged feature rows");
  if (len == 0 || len % config.mask_length != 0)
    throw InputError("feature length must be a positive multiple of mask_length");
  const auto mask = make_bipolar_mask(config.n_channels, config.mask_length, config.seed);
  const std::size_t width = (len / config.mask_length) * config.state_width();
  Matrix out(features.size(), width);
  parallel_for(features.size(), config.threads, [&](std::size_t i) {
    const auto row = sample_state(features[i], config, mask);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  });
  return out;
}

inline Matrix reservoir_states(const Matrix& features, const ReservoirConfig& config) {
  std::vector<std::vector<double>> rows;
  rows.reserve(features.rows);
  for (std::size_t r = 0; r < features.rows; ++r) rows.emplace_back(features.row(r).begin(), features.row(r).end());
  return reservoir_states(rows, config);
}

/// Streaming reservoir for time series: one scalar voltage per step,
/// broadcast over the mask slots, device states carried across steps.
class StreamingReservoir {
 public:
  explicit StreamingReservoir(const ReservoirConfig& config)
      : config_(config),
        mask_(make_bipolar_mask(config.n_channels, config.mask_length, config.seed)),
        states_(config.n_channels) {
    config_.validate();
  }

  /// Advances every channel by one mask period; returns the state_width() row.
  std::vector<double> step(double voltage) {
    require_finite(voltage, "step voltage");
    const std::vector<double> slots(config_.mask_length, voltage);
    const std::size_t nodes = config_.virtual_nodes_per_step;
    std::vector<double> row(config_.state_width());
    for (std::size_t c = 0; c < config_.n_channels; ++c) {
      const auto cur = run_channel(mask_.row(c), slots, config_, states_[c]);
      std::copy(cur.begin(), cur.end(), row.begin() + static_cast<std::ptrdiff_t>(c * nodes));
    }
    return row;
  }

  const std::vector<devicesim::DmState>& states() const { return states_; }
  const MaskMatrix& mask() const { return mask_; }

 private:
  ReservoirConfig config_;
  MaskMatrix mask_;
  std::vector<devicesim::DmState> states_;
};

/// Streams `step_voltages` through a fresh StreamingReservoir. Returns
/// steps x state_width.
inline Matrix run_sequence(std::span<const double> step_voltages, const ReservoirConfig& config) {
  StreamingReservoir res(config);
  Matrix out(step_voltages.size(), config.state_width());
  for (std::size_t s = 0; s < step_voltages.size(); ++s) {
    const auto row = res.step(step_voltages[s]);
    std::copy(row.begin(), row.end(), out.row(s).begin());
  }
  return out;
}

/// `sample_id,channel,node,current_A`; node counts across steps within a row.
inline CsvWriter state_dump_csv(const Matrix& states, std::size_t n_channels, std::size_t nodes_per_step) {
  CsvWriter csv({"sample_id", "channel", "node", "current_A"});
  const std::size_t per_step = n_channels * nodes_per_step;
  for (std::size_t r = 0; r < states.rows; ++r)
    for (std::size_t k = 0; k < states.cols; ++k) {
      const std::size_t step = k / per_step, within = k % per_step;
      csv.cell(r).cell(within / nodes_per_step).cell(step * nodes_per_step + within % nodes_per_step).cell(states(r, k));
      csv.end_row();
    }
  return csv;
}

}  // namespace memrc::reservoir
