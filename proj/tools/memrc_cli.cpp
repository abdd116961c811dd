// Command-line front end for the memristive reservoir simulator.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memrc/memrc.hpp"

namespace fs = std::filesystem;
using namespace memrc;
using namespace memrc::harness;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> keep_fraction;
  bool ideal_weights = false;
  std::optional<int> epochs;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "data split and mask seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--keep-fraction", o.keep_fraction, "leading fraction of each utterance kept (0..1]");
  sub->add_flag("--ideal-weights", o.ideal_weights, "bypass the device model in the readout");
  sub->add_option("--epochs", o.epochs, "training epochs");
  sub->add_option("--set", o.overrides, "override a configuration key (key=value), repeatable");
}

ExperimentConfig resolve(const CommonOptions& o, const std::string& task) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  cfg.task = task;
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.keep_fraction) cfg.fsdd.keep_fraction = *o.keep_fraction;
  if (o.ideal_weights) cfg.readout.ideal = true;
  if (o.epochs) {
    if (*o.epochs < 0) throw ConfigError("--epochs must be >= 0");
    cfg.epochs = *o.epochs;
  }
  cfg.validate();
  return cfg;
}

void print_summary(const RunSummary& s, const fs::path& out) {
  if (std::isfinite(s.val_accuracy))
    fmt::print("train accuracy {:.4f}, validation accuracy {:.4f} ({} / {} samples)\n", s.train_accuracy,
               s.val_accuracy, s.n_train, s.n_test);
  if (std::isfinite(s.test_nrmse))
    fmt::print("train NRMSE {:.4f}, test NRMSE {:.4f}\n", s.train_nrmse, s.test_nrmse);
  if (std::isfinite(s.free_run_nrmse)) fmt::print("free-run NRMSE {:.4f}\n", s.free_run_nrmse);
  fmt::print("outputs in {} ({:.1f} s)\n", out.string(), s.wall_clock_s);
}

void print_sweep(const SweepResult& r, const char* cell) {
  fmt::print("{:>8}  {:>10}  {:>10}\n", cell, "train", "validation");
  for (const auto& a : r.aggregates)
    fmt::print("{:>8}  {:.4f}+-{:.3f}  {:.4f}+-{:.3f}\n", a.cell, a.mean_train, a.std_train, a.mean_val, a.std_val);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fully memristive reservoir computing simulator"};
  app.require_subcommand(1);

  CommonOptions demo_o, fsdd_o, mg_o, d2d_o, reg_o;
  auto* demo = app.add_subcommand("device-demo", "NVM pulse response, hysteresis and DM 16-state traces");
  add_common(demo, demo_o);
  auto* fsdd = app.add_subcommand("fsdd", "spoken digit classification benchmark");
  add_common(fsdd, fsdd_o);
  auto* mg = app.add_subcommand("mackey-glass", "Mackey-Glass one-step-ahead forecasting benchmark");
  add_common(mg, mg_o);
  auto* d2d = app.add_subcommand("sweep-d2d", "readout accuracy under device-to-device variation");
  add_common(d2d, d2d_o);
  auto* reg = app.add_subcommand("sweep-regions", "readout accuracy under conductance-region limits");
  add_common(reg, reg_o);

  std::string csv_path, x_col, y_cols, svg_out, title;
  bool scatter = false;
  auto* plot = app.add_subcommand("plot", "render a CSV table as an SVG chart");
  plot->add_option("--csv", csv_path, "input CSV with a header row")->required()->check(CLI::ExistingFile);
  plot->add_option("--x", x_col, "x column")->required();
  plot->add_option("--y", y_cols, "comma-separated y columns")->required();
  plot->add_option("--out", svg_out, "output SVG path")->required();
  plot->add_option("--title", title, "chart title");
  plot->add_flag("--scatter", scatter, "draw points instead of lines");

  std::string synth_dir;
  int per_speaker = 50;
  auto* synth = app.add_subcommand("synth-digits", "write a synthetic spoken-digit corpus in the FSDD file layout");
  synth->add_option("--out", synth_dir, "output directory")->required();
  synth->add_option("--per-speaker", per_speaker, "utterances per digit and speaker (6 speakers)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (demo->parsed()) {
      const auto cfg = resolve(demo_o, "device-demo");
      const fs::path out = cfg.out_dir;
      const auto r = device_demo(cfg, &out);
      fmt::print("16-state minimum relative gap {:.4f}, hysteresis area {:.4g}\n", r.min_relative_gap,
                 r.hysteresis_area);
      fmt::print("outputs in {}\n", out.string());
    } else if (fsdd->parsed()) {
      const auto cfg = resolve(fsdd_o, "fsdd");
      const fs::path out = cfg.out_dir;
      print_summary(run_fsdd(cfg, &out), out);
    } else if (mg->parsed()) {
      const auto cfg = resolve(mg_o, "mackey-glass");
      const fs::path out = cfg.out_dir;
      print_summary(run_mg(cfg, &out), out);
    } else if (d2d->parsed()) {
      const auto cfg = resolve(d2d_o, "fsdd");
      const fs::path out = cfg.out_dir;
      print_sweep(run_sweep_d2d(cfg, &out), "sigma");
    } else if (reg->parsed()) {
      const auto cfg = resolve(reg_o, "fsdd");
      const fs::path out = cfg.out_dir;
      print_sweep(run_sweep_regions(cfg, &out), "region");
    } else if (plot->parsed()) {
      const auto table = read_csv(csv_path);
      const auto style = scatter ? Series::Style::Scatter : Series::Style::Line;
      write_file_atomic(svg_out, render_table_svg(table, x_col, split_string(y_cols, ','),
                                                  {title, x_col, y_cols}, style));
    } else if (synth->parsed()) {
      const auto n = synth::write_corpus(synth_dir, per_speaker);
      fmt::print("wrote {} recordings to {}\n", n, synth_dir);
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return 1;
  } catch (const InputError& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return 1;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 3;
  }
  return 0;
}
