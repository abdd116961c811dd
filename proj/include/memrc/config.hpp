#pragma once

// Plain-text experiment configuration: `key = value` lines, `#` comments.
// Every field has a default; serialize() writes the fully resolved set in a
// fixed order so a saved copy re-runs to identical results.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memrc/common.hpp"
#include "memrc/devicesim.hpp"
#include "memrc/readout.hpp"
#include "memrc/reservoir.hpp"
#include "memrc/signalio.hpp"

namespace memrc::harness {

enum class NrmseNorm { Std, Range };

struct FsddSection {
  std::string dir = "data/fsdd/recordings";
  double train_fraction = 0.75;
  double keep_fraction = 1.0;  // leading fraction of each utterance kept
  std::size_t max_samples = 0;  // 0 = all
  signalio::MfccConfig mfcc{};
  reservoir::ReservoirConfig reservoir = default_reservoir();

  static reservoir::ReservoirConfig default_reservoir() {
    reservoir::ReservoirConfig r;
    r.n_channels = 40;
    r.mask_length = 325;
    r.v_min = 0.0;
    r.v_max = 1.8;
    r.pulse_width = 3e-5;
    r.virtual_nodes_per_step = 1;
    r.feature_bounds = std::pair{-3.0, 3.0};
    return r;
  }
};

struct MgSection {
  signalio::MgParams params{};
  std::size_t stride = 10;          // integration steps per sample
  double train_fraction = 0.7;
  std::size_t washout = 50;         // leading reservoir outputs discarded
  bool free_run = false;            // closed-loop generation on the test span
  NrmseNorm norm = NrmseNorm::Std;
  reservoir::ReservoirConfig reservoir = default_reservoir();

  static reservoir::ReservoirConfig default_reservoir() {
    reservoir::ReservoirConfig r;
    r.n_channels = 10;
    r.mask_length = 4;
    r.virtual_nodes_per_step = 4;
    r.v_min = 0.0;
    r.v_max = 0.3;
    r.pulse_width = 0.01;
    r.feature_bounds = std::pair{-3.0, 3.0};
    return r;
  }
};

struct DeviceSection {
  devicesim::NvmParams nvm{};
  devicesim::PulseSpec set{2.5, 0.1, 50, 0.0};
  devicesim::PulseSpec reset{-2.5, 0.1, 50, 0.0};
  double v_read = 0.1;
  double iv_amplitude = 2.5;
  double iv_frequency = 1.0;
  int iv_cycles = 2;
  double iv_dt = 1e-3;
  devicesim::PulseSpec stream = devicesim::default_dm_stream_pulse();
};

struct SweepSection {
  std::vector<double> sigmas{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
  std::size_t n_seeds = 5;
  std::vector<std::string> regions{"R1", "R2", "R3"};
};

struct ExperimentConfig {
  std::string task = "fsdd";  // fsdd | mackey-glass | device-demo
  std::uint64_t seed = 1;     // data split and mask
  std::uint64_t readout_seed = 1;
  int epochs = 200;
  std::string out_dir = "out";
  unsigned threads = 0;

  devicesim::DmParams dm{};
  FsddSection fsdd{};
  MgSection mg{};
  readout::ReadoutConfig readout{};
  readout::TrainConfig train{};
  double d2d_sigma = 0.0;
  std::string region = "none";  // none | R1 | R2 | R3 | lo:hi (Siemens)
  std::uint64_t nonideal_seed = 1;
  DeviceSection device{};
  SweepSection sweep{};

  void validate() const;
};

/// Resolves a region name: R1/R2/R3, "lo:hi" in Siemens, or none.
inline std::optional<readout::Region> parse_region(const std::string& s) {
  if (s == "none" || s.empty()) return std::nullopt;
  if (s == "R1") return readout::region_preset(readout::RegionPreset::R1);
  if (s == "R2") return readout::region_preset(readout::RegionPreset::R2);
  if (s == "R3") return readout::region_preset(readout::RegionPreset::R3);
  const auto parts = split_string(s, ':');
  if (parts.size() == 2) {
    try {
      readout::Region r{std::stod(parts[0]), std::stod(parts[1])};
      if (r.lo < r.hi) return r;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError(fmt::format("region '{}' is not none, R1, R2, R3 or lo:hi with lo < hi", s));
}

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string exact(double x) { return fmt::format("{}", x); }

struct Field {
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto x = std::stoull(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, v));
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not true/false", key, v));
}

class Schema {
 public:
  void num(std::string key, double& x) {
    fields_.push_back({key, [&x] { return exact(x); }, [&x, key](const std::string& v) { x = to_double(key, v); }});
  }
  template <class Int>
  void integer(std::string key, Int& x) {
    fields_.push_back({key, [&x] { return std::to_string(x); }, [&x, key](const std::string& v) {
                         const auto u = to_u64(key, v);
                         if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
                           throw ConfigError(fmt::format("{}: {} is out of range", key, v));
                         x = static_cast<Int>(u);
                       }});
  }
  void flag(std::string key, bool& x) {
    fields_.push_back({key, [&x] { return x ? "true" : "false"; }, [&x, key](const std::string& v) { x = to_bool(key, v); }});
  }
  void text(std::string key, std::string& x) {
    fields_.push_back({key, [&x] { return x; }, [&x](const std::string& v) { x = v; }});
  }
  void custom(std::string key, std::function<std::string()> get, std::function<void(const std::string&)> set) {
    fields_.push_back({std::move(key), std::move(get), std::move(set)});
  }
  const std::vector<Field>& fields() const { return fields_; }

 private:
  std::vector<Field> fields_;
};

inline void bind_pulse(Schema& s, const std::string& p, devicesim::PulseSpec& x) {
  s.num(p + ".amplitude", x.amplitude);
  s.num(p + ".width", x.width);
  s.integer(p + ".count", x.count);
  s.num(p + ".gap", x.inter_pulse_gap);
}

inline void bind_reservoir(Schema& s, const std::string& p, reservoir::ReservoirConfig& r) {
  s.integer(p + ".n_channels", r.n_channels);
  s.integer(p + ".mask_length", r.mask_length);
  s.integer(p + ".virtual_nodes", r.virtual_nodes_per_step);
  s.num(p + ".v_min", r.v_min);
  s.num(p + ".v_max", r.v_max);
  s.num(p + ".pulse_width", r.pulse_width);
  s.num(p + ".gamma_scale", r.gamma_scale);
  s.num(p + ".v_read", r.v_read);
  s.integer(p + ".substeps", r.substeps);
  s.custom(
      p + ".feature_bounds",
      [&r] { return r.feature_bounds ? exact(r.feature_bounds->first) + ":" + exact(r.feature_bounds->second) : std::string("auto"); },
      [&r, p](const std::string& v) {
        if (v == "auto") {
          r.feature_bounds.reset();
          return;
        }
        const auto parts = split_string(v, ':');
        if (parts.size() != 2) throw ConfigError(p + ".feature_bounds must be 'auto' or lo:hi");
        r.feature_bounds = std::pair{to_double(p + ".feature_bounds", parts[0]), to_double(p + ".feature_bounds", parts[1])};
      });
}

template <class T, class Fmt, class Parse>
void bind_list(Schema& s, const std::string& key, std::vector<T>& xs, Fmt fmt_one, Parse parse_one) {
  s.custom(
      key,
      [&xs, fmt_one] {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt_one(xs[i]);
        return out;
      },
      [&xs, parse_one](const std::string& v) {
        xs.clear();
        for (const auto& part : split_string(v, ',')) xs.push_back(parse_one(trim(part)));
      });
}

inline Schema schema(ExperimentConfig& c) {
  Schema s;
  s.text("task", c.task);
  s.integer("seed", c.seed);
  s.integer("readout_seed", c.readout_seed);
  s.custom("epochs", [&c] { return std::to_string(c.epochs); },
           [&c](const std::string& v) { c.epochs = static_cast<int>(to_u64("epochs", v)); });
  s.text("out_dir", c.out_dir);
  s.integer("threads", c.threads);

  s.num("dm.alpha", c.dm.alpha);
  s.num("dm.beta", c.dm.beta);
  s.num("dm.gamma", c.dm.gamma);
  s.num("dm.delta", c.dm.delta);
  s.num("dm.lambda", c.dm.lambda);
  s.num("dm.eta", c.dm.eta);
  s.num("dm.tau", c.dm.tau);

  s.text("fsdd.dir", c.fsdd.dir);
  s.num("fsdd.train_fraction", c.fsdd.train_fraction);
  s.num("fsdd.keep_fraction", c.fsdd.keep_fraction);
  s.integer("fsdd.max_samples", c.fsdd.max_samples);
  auto& m = c.fsdd.mfcc;
  s.num("fsdd.mfcc.sample_rate", m.sample_rate);
  s.num("fsdd.mfcc.frame_len", m.frame_len);
  s.num("fsdd.mfcc.hop", m.hop);
  s.integer("fsdd.mfcc.n_fft", m.n_fft);
  s.integer("fsdd.mfcc.n_mels", m.n_mels);
  s.integer("fsdd.mfcc.n_coeffs", m.n_coeffs);
  s.num("fsdd.mfcc.pre_emphasis", m.pre_emphasis);
  s.integer("fsdd.mfcc.max_frames", m.max_frames);
  bind_reservoir(s, "fsdd.reservoir", c.fsdd.reservoir);

  auto& g = c.mg.params;
  s.num("mg.beta", g.beta);
  s.num("mg.gamma", g.gamma);
  s.num("mg.n", g.n);
  s.num("mg.tau", g.tau);
  s.num("mg.x0", g.x0);
  s.num("mg.dt", g.dt);
  s.integer("mg.n_steps", g.n_steps);
  s.integer("mg.series_washout", g.washout);
  s.integer("mg.stride", c.mg.stride);
  s.num("mg.train_fraction", c.mg.train_fraction);
  s.integer("mg.washout", c.mg.washout);
  s.flag("mg.free_run", c.mg.free_run);
  s.custom("mg.nrmse", [&c] { return std::string(c.mg.norm == NrmseNorm::Std ? "std" : "range"); },
           [&c](const std::string& v) {
             if (v == "std") c.mg.norm = NrmseNorm::Std;
             else if (v == "range") c.mg.norm = NrmseNorm::Range;
             else throw ConfigError("mg.nrmse must be std or range");
           });
  bind_reservoir(s, "mg.reservoir", c.mg.reservoir);

  s.integer("readout.n_hidden", c.readout.n_hidden);
  s.num("readout.weight_scale", c.readout.weight_scale);
  s.num("readout.init_scale", c.readout.init_scale);
  s.flag("readout.ideal", c.readout.ideal);
  s.num("readout.x_min", c.readout.pulse.x_min);
  s.num("readout.x_max", c.readout.pulse.x_max);
  s.num("readout.p_max", c.readout.pulse.p_max);
  s.num("readout.a", c.readout.pulse.a);
  s.integer("train.batch", c.train.batch);
  s.num("train.lr", c.train.lr);
  s.num("train.beta1", c.train.beta1);
  s.num("train.beta2", c.train.beta2);
  s.num("train.eps", c.train.eps);

  s.num("nonideal.d2d_sigma", c.d2d_sigma);
  s.text("nonideal.region", c.region);
  s.integer("nonideal.seed", c.nonideal_seed);

  auto& n = c.device.nvm;
  s.num("nvm.mu_v", n.mu_v);
  s.num("nvm.r_on", n.r_on);
  s.num("nvm.r_off", n.r_off);
  s.num("nvm.d", n.d);
  s.num("nvm.i_on", n.i_on);
  s.num("nvm.i_off", n.i_off);
  s.num("nvm.i_0", n.i_0);
  s.integer("nvm.p", n.p);
  s.num("nvm.v_t_plus", n.v_t_plus);
  s.num("nvm.v_t_minus", n.v_t_minus);
  s.num("nvm.drift_scale", n.drift_scale);
  bind_pulse(s, "device.set", c.device.set);
  bind_pulse(s, "device.reset", c.device.reset);
  s.num("device.v_read", c.device.v_read);
  s.num("device.iv_amplitude", c.device.iv_amplitude);
  s.num("device.iv_frequency", c.device.iv_frequency);
  s.integer("device.iv_cycles", c.device.iv_cycles);
  s.num("device.iv_dt", c.device.iv_dt);
  bind_pulse(s, "device.stream", c.device.stream);

  bind_list(s, "sweep.sigmas", c.sweep.sigmas, [](double x) { return exact(x); },
            [](const std::string& v) { return to_double("sweep.sigmas", v); });
  s.integer("sweep.n_seeds", c.sweep.n_seeds);
  bind_list(s, "sweep.regions", c.sweep.regions, [](const std::string& x) { return x; },
            [](const std::string& v) { return v; });
  return s;
}

}  // namespace detail

inline void set_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto schema = detail::schema(c);
  for (const auto& f : schema.fields())
    if (f.key == key) {
      f.set(value);
      return;
    }
  throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

/// Parses `key = value` text over the defaults. Unknown keys are errors.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", lineno));
    try {
      set_value(base, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", lineno, e.what()));
    }
  }
  return base;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) {
  auto copy = c;
  std::string out;
  const auto schema = detail::schema(copy);
  for (const auto& f : schema.fields()) out += f.key + " = " + f.get() + "\n";
  return out;
}

/// 64-bit FNV-1a of the serialized config.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

inline void ExperimentConfig::validate() const {
  require(task == "fsdd" || task == "mackey-glass" || task == "device-demo",
          "task must be fsdd, mackey-glass or device-demo");
  require(epochs >= 0, "epochs must be >= 0");
  require(fsdd.keep_fraction > 0.0 && fsdd.keep_fraction <= 1.0, "keep_fraction must be in (0, 1]");
  require(fsdd.train_fraction > 0.0 && fsdd.train_fraction < 1.0, "fsdd.train_fraction must be in (0, 1)");
  fsdd.mfcc.validate();
  fsdd.reservoir.validate();
  require(fsdd.reservoir.mask_length == fsdd.mfcc.feature_length(),
          fmt::format("fsdd.reservoir.mask_length ({}) must equal MFCC feature length ({})",
                      fsdd.reservoir.mask_length, fsdd.mfcc.feature_length()));
  mg.params.validate();
  mg.reservoir.validate();
  require(mg.stride >= 1, "mg.stride must be >= 1");
  require(mg.train_fraction > 0.0 && mg.train_fraction < 1.0, "mg.train_fraction must be in (0, 1)");
  dm.validate();
  device.nvm.validate();
  readout.pulse.validate();
  require(readout.n_hidden >= 1, "readout.n_hidden must be >= 1");
  require(readout.weight_scale > 0.0, "readout.weight_scale must be > 0");
  require(train.batch >= 1 && train.lr >= 0.0, "train.batch >= 1 and train.lr >= 0 required");
  require(d2d_sigma >= 0.0 && d2d_sigma <= 0.5, "nonideal.d2d_sigma must be in [0, 0.5]");
  (void)parse_region(region);
  for (const auto& r : sweep.regions) (void)parse_region(r);
  for (double s : sweep.sigmas) require(s >= 0.0 && s <= 0.5, "sweep sigmas must be in [0, 0.5]");
  require(sweep.n_seeds >= 1, "sweep.n_seeds must be >= 1");
}

}  // namespace memrc::harness
