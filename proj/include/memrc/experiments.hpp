#pragma once

// Benchmark runs and sweeps. Every run is a pure function of the resolved
// configuration and the dataset bytes; outputs go through write_file_atomic.

#include <chrono>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "memrc/config.hpp"
#include "memrc/devicesim.hpp"
#include "memrc/metrics.hpp"
#include "memrc/readout.hpp"
#include "memrc/reservoir.hpp"
#include "memrc/signalio.hpp"
#include "memrc/svg.hpp"

namespace memrc::harness {

namespace fs = std::filesystem;

struct RunSummary {
  std::string task;
  std::string config_hash;
  std::vector<readout::EpochMetrics> log;
  double train_accuracy = std::nan("");
  double val_accuracy = std::nan("");
  std::vector<std::vector<std::size_t>> confusion;
  double train_nrmse = std::nan("");
  double test_nrmse = std::nan("");
  double free_run_nrmse = std::nan("");
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double wall_clock_s = 0.0;
};

inline nlohmann::ordered_json summary_json(const RunSummary& s) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["task"] = s.task;
  j["config_hash"] = s.config_hash;
  j["n_train"] = s.n_train;
  j["n_test"] = s.n_test;
  j["train_accuracy"] = num(s.train_accuracy);
  j["val_accuracy"] = num(s.val_accuracy);
  j["train_nrmse"] = num(s.train_nrmse);
  j["test_nrmse"] = num(s.test_nrmse);
  j["free_run_nrmse"] = num(s.free_run_nrmse);
  if (!s.confusion.empty()) j["confusion"] = s.confusion;
  auto& epochs = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : s.log)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", num(e.train_loss)},
                      {"train_acc", num(e.train_acc)},
                      {"val_loss", num(e.val_loss)},
                      {"val_acc", num(e.val_acc)},
                      {"saturations", e.saturations}});
  j["wall_clock_s"] = s.wall_clock_s;
  return j;
}

inline void write_run_header(const fs::path& out, const ExperimentConfig& cfg) {
  write_file_atomic(out / "config.txt", serialize_config(cfg));
}

inline void write_summary(const fs::path& out, const RunSummary& s) {
  write_file_atomic(out / "summary.json", summary_json(s).dump(2) + "\n");
}

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<double> epoch_axis(std::span<const readout::EpochMetrics> log) {
  std::vector<double> x;
  for (const auto& e : log) x.push_back(e.epoch);
  return x;
}

template <class F>
std::vector<double> column(std::span<const readout::EpochMetrics> log, F f) {
  std::vector<double> y;
  for (const auto& e : log) y.push_back(f(e));
  return y;
}

inline Matrix standardize_split(const Matrix& train, Matrix& test) {
  const auto stats = signalio::fit_standardizer(train, "train");
  test = signalio::standardize(test, stats);
  return signalio::standardize(train, stats);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Spoken digits
// ---------------------------------------------------------------------------

/// Reservoir states ready for the readout: standardized with train statistics.
struct ClassificationData {
  Matrix x_train, y_train, x_test, y_test;
  std::vector<int> train_labels, test_labels;
  int n_classes = 10;
};

/// Loads, truncates and resamples one recording, then returns its flattened
/// MFCC matrix (frame-major).
inline std::vector<double> utterance_features(const fs::path& path, const signalio::MfccConfig& mfcc,
                                              double keep_fraction) {
  auto clip = signalio::resample(signalio::read_wav(path), mfcc.sample_rate);
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(clip.samples.size()) * keep_fraction)));
  if (keep < clip.samples.size()) clip.samples.resize(keep);
  return signalio::mfcc(clip, mfcc).data;
}

/// Recordings used by a run: all of them, or a seeded subset of max_samples.
inline std::vector<signalio::FsddEntry> select_recordings(const ExperimentConfig& cfg) {
  auto entries = signalio::scan_fsdd(cfg.fsdd.dir);
  if (cfg.fsdd.max_samples > 0 && cfg.fsdd.max_samples < entries.size()) {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(cfg.fsdd.max_samples);
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.path.filename().string() < b.path.filename().string();
    });
  }
  return entries;
}

/// Ingest, MFCC, split, standardize and run the reservoir.
inline ClassificationData prepare_fsdd(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto entries = select_recordings(cfg);
  const std::size_t n = entries.size();
  Matrix features(n, cfg.fsdd.mfcc.feature_length());
  reservoir::parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto f = utterance_features(entries[i].path, cfg.fsdd.mfcc, cfg.fsdd.keep_fraction);
    std::copy(f.begin(), f.end(), features.row(i).begin());
  });
  Matrix targets(n, 10);
  for (std::size_t i = 0; i < n; ++i) targets(i, static_cast<std::size_t>(entries[i].label)) = 1.0;
  const auto data = signalio::make_dataset(std::move(features), std::move(targets),
                                           signalio::split(n, cfg.fsdd.train_fraction, cfg.seed));

  auto rc = cfg.fsdd.reservoir;
  rc.dm = cfg.dm;
  rc.seed = cfg.seed;
  rc.threads = cfg.threads;
  ClassificationData out;
  Matrix s_train = reservoir::reservoir_states(data.train_x(), rc);
  Matrix s_test = reservoir::reservoir_states(data.test_x(), rc);
  out.x_train = detail::standardize_split(s_train, s_test);
  out.x_test = std::move(s_test);
  out.y_train = data.train_y();
  out.y_test = data.test_y();
  for (auto i : data.indices.train) out.train_labels.push_back(entries[i].label);
  for (auto i : data.indices.test) out.test_labels.push_back(entries[i].label);
  return out;
}

inline readout::ReadoutModel build_readout(std::size_t n_in, std::size_t n_out, readout::Head head,
                                           const ExperimentConfig& cfg) {
  auto rcfg = cfg.readout;
  rcfg.seed = cfg.readout_seed;
  auto model = readout::make_readout(n_in, n_out, head, rcfg);
  if (cfg.d2d_sigma > 0.0) readout::apply_d2d(model, cfg.d2d_sigma, cfg.nonideal_seed);
  if (auto region = parse_region(cfg.region)) readout::clip_region(model, *region);
  return model;
}

inline std::vector<int> predicted_labels(const readout::ReadoutModel& m, const Matrix& x) {
  std::vector<int> out;
  for (std::size_t r = 0; r < x.rows; ++r) out.push_back(static_cast<int>(readout::argmax(readout::forward(m, x.row(r)))));
  return out;
}

/// Trains the classifier readout on prepared data. Writes artifacts when `out` is set.
inline RunSummary train_classifier(const ClassificationData& d, const ExperimentConfig& cfg,
                                   const fs::path* out = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  auto model = build_readout(d.x_train.cols, static_cast<std::size_t>(d.n_classes), readout::Head::Softmax, cfg);
  auto tc = cfg.train;
  tc.epochs = cfg.epochs;
  tc.loss = readout::Loss::CrossEntropy;
  tc.seed = cfg.readout_seed;
  RunSummary s;
  s.task = "fsdd";
  s.config_hash = config_hash(cfg);
  s.n_train = d.x_train.rows;
  s.n_test = d.x_test.rows;
  s.log = readout::train(model, d.x_train, d.y_train, tc, &d.x_test, &d.y_test);
  const auto train_pred = predicted_labels(model, d.x_train);
  const auto test_pred = predicted_labels(model, d.x_test);
  s.train_accuracy = accuracy(train_pred, d.train_labels);
  s.val_accuracy = accuracy(test_pred, d.test_labels);
  s.confusion = confusion(test_pred, d.test_labels, d.n_classes);
  s.wall_clock_s = detail::seconds_since(t0);
  if (out) {
    write_run_header(*out, cfg);
    readout::training_log_csv(s.log).save(*out / "training_log.csv");
    confusion_csv(s.confusion).save(*out / "confusion.csv");
    readout::weight_snapshot_csv(model.layer1).save(*out / "weights_layer1.csv");
    readout::weight_snapshot_csv(model.layer2).save(*out / "weights_layer2.csv");
    if (!s.log.empty()) {
      const auto x = detail::epoch_axis(s.log);
      const std::vector<Series> acc{
          {"train", x, detail::column(s.log, [](const auto& e) { return e.train_acc; })},
          {"validation", x, detail::column(s.log, [](const auto& e) { return e.val_acc; })}};
      emit_svg(*out / "accuracy.svg", acc, {"Accuracy per epoch", "epoch", "accuracy"});
      const std::vector<Series> loss{
          {"train", x, detail::column(s.log, [](const auto& e) { return e.train_loss; })},
          {"validation", x, detail::column(s.log, [](const auto& e) { return e.val_loss; })}};
      emit_svg(*out / "loss.svg", loss, {"Loss per epoch", "epoch", "cross-entropy"});
    }
    write_summary(*out, s);
  }
  return s;
}

inline RunSummary run_fsdd(const ExperimentConfig& cfg, const fs::path* out = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  auto s = train_classifier(prepare_fsdd(cfg), cfg, out);
  s.wall_clock_s = detail::seconds_since(t0);
  if (out) write_summary(*out, s);
  return s;
}

// ---------------------------------------------------------------------------
// Mackey-Glass
// ---------------------------------------------------------------------------

struct MgRun {
  RunSummary summary;
  std::vector<double> times;       // of each target sample
  std::vector<double> targets;     // x(n+1)
  std::vector<double> predictions; // teacher-forced
  std::size_t test_begin = 0;      // first test index into targets
  std::vector<double> free_run;    // closed-loop predictions over the test span (if enabled)
  std::size_t embed_lag = 0;
};

/// One-step-ahead forecasting: input x(n), target x(n+1), carried reservoir
/// state, readout trained on the leading span and scored on the continuation.
inline MgRun run_mg_detailed(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto series = signalio::mackey_glass(cfg.mg.params);
  std::vector<double> x;
  for (std::size_t k = 0; k < series.x.size(); k += cfg.mg.stride) x.push_back(series.x[k]);
  const double sample_dt = series.dt * static_cast<double>(cfg.mg.stride);
  require(x.size() >= 4, "Mackey-Glass series too short for a split");
  const std::size_t steps = x.size() - 1;
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(steps) * cfg.mg.train_fraction));
  require(n_train > cfg.mg.washout + 1 && n_train < steps, "Mackey-Glass split leaves no training or test samples");

  // Input scaling from the training span only.
  double mu = 0.0, sd = 0.0;
  for (std::size_t k = 0; k < n_train; ++k) mu += x[k];
  mu /= static_cast<double>(n_train);
  for (std::size_t k = 0; k < n_train; ++k) sd += (x[k] - mu) * (x[k] - mu);
  sd = std::sqrt(sd / static_cast<double>(n_train));
  require(sd > 0.0, "Mackey-Glass training span is constant");

  auto rc = cfg.mg.reservoir;
  rc.dm = cfg.dm;
  rc.seed = cfg.seed;
  // A single value has no observed range, so encoding needs fixed bounds.
  if (!rc.feature_bounds) rc.feature_bounds = std::pair{-3.0, 3.0};
  auto encode = [&](double v) {
    const double z = (v - mu) / sd;
    return reservoir::encode_voltages(std::span<const double>(&z, 1), rc).front();
  };

  reservoir::StreamingReservoir res(rc);
  Matrix states(steps, rc.state_width());
  std::vector<reservoir::StreamingReservoir> snapshot;  // state just before the test span
  for (std::size_t k = 0; k < steps; ++k) {
    if (k == n_train) snapshot.push_back(res);
    const auto row = res.step(encode(x[k]));
    std::copy(row.begin(), row.end(), states.row(k).begin());
  }

  std::vector<std::size_t> tr_rows(n_train - cfg.mg.washout), te_rows(steps - n_train);
  std::iota(tr_rows.begin(), tr_rows.end(), cfg.mg.washout);
  std::iota(te_rows.begin(), te_rows.end(), n_train);
  Matrix s_train = signalio::take_rows(states, tr_rows);
  Matrix s_test = signalio::take_rows(states, te_rows);
  const auto state_stats = signalio::fit_standardizer(s_train, "train");
  s_train = signalio::standardize(s_train, state_stats);
  s_test = signalio::standardize(s_test, state_stats);

  double ymu = 0.0, ysd = 0.0;
  for (auto r : tr_rows) ymu += x[r + 1];
  ymu /= static_cast<double>(tr_rows.size());
  for (auto r : tr_rows) ysd += (x[r + 1] - ymu) * (x[r + 1] - ymu);
  ysd = std::sqrt(ysd / static_cast<double>(tr_rows.size()));
  auto targets_of = [&](std::span<const std::size_t> rows) {
    Matrix y(rows.size(), 1);
    for (std::size_t k = 0; k < rows.size(); ++k) y(k, 0) = (x[rows[k] + 1] - ymu) / ysd;
    return y;
  };
  const Matrix y_train = targets_of(tr_rows), y_test = targets_of(te_rows);

  auto model = build_readout(rc.state_width(), 1, readout::Head::Linear, cfg);
  auto tc = cfg.train;
  tc.epochs = cfg.epochs;
  tc.loss = readout::Loss::Mse;
  tc.seed = cfg.readout_seed;

  MgRun run;
  auto& s = run.summary;
  s.task = "mackey-glass";
  s.config_hash = config_hash(cfg);
  s.n_train = tr_rows.size();
  s.n_test = te_rows.size();
  s.log = readout::train(model, s_train, y_train, tc, &s_test, &y_test);

  auto predict_rows = [&](const Matrix& xs) {
    std::vector<double> p;
    for (std::size_t r = 0; r < xs.rows; ++r) p.push_back(readout::forward(model, xs.row(r))[0] * ysd + ymu);
    return p;
  };
  const auto p_train = predict_rows(s_train), p_test = predict_rows(s_test);
  std::vector<double> t_train, t_test;
  for (auto r : tr_rows) t_train.push_back(x[r + 1]);
  for (auto r : te_rows) t_test.push_back(x[r + 1]);
  auto score = [&](std::span<const double> p, std::span<const double> t) {
    return cfg.mg.norm == NrmseNorm::Std ? nrmse(p, t) : nrmse_range(p, t);
  };
  s.train_nrmse = score(p_train, t_train);
  s.test_nrmse = score(p_test, t_test);

  for (std::size_t k = 0; k < steps; ++k) {
    run.times.push_back(series.t0 + static_cast<double>(k + 1) * sample_dt);
    run.targets.push_back(x[k + 1]);
  }
  run.predictions.assign(steps, std::nan(""));
  for (std::size_t k = 0; k < tr_rows.size(); ++k) run.predictions[tr_rows[k]] = p_train[k];
  for (std::size_t k = 0; k < te_rows.size(); ++k) run.predictions[te_rows[k]] = p_test[k];
  run.test_begin = n_train;
  run.embed_lag = static_cast<std::size_t>(std::llround(cfg.mg.params.tau / sample_dt));

  if (cfg.mg.free_run) {
    auto gen = snapshot.front();
    double input = x[n_train];
    for (std::size_t k = n_train; k < steps; ++k) {
      auto row = gen.step(encode(input));
      Matrix one(1, row.size());
      std::copy(row.begin(), row.end(), one.row(0).begin());
      one = signalio::standardize(one, state_stats);
      input = readout::forward(model, one.row(0))[0] * ysd + ymu;
      if (!std::isfinite(input)) throw NumericalError("free-running prediction diverged");
      run.free_run.push_back(input);
    }
    s.free_run_nrmse = score(run.free_run, t_test);
  }
  s.wall_clock_s = detail::seconds_since(t0);
  return run;
}

inline void write_mg_outputs(const fs::path& out, const ExperimentConfig& cfg, const MgRun& run) {
  const auto& s = run.summary;
  write_run_header(out, cfg);
  readout::training_log_csv(s.log).save(out / "training_log.csv");
  {
    CsvWriter csv({"t", "target", "prediction", "split"});
    for (std::size_t k = 0; k < run.targets.size(); ++k) {
      csv.cell(run.times[k]).cell(run.targets[k]).cell(run.predictions[k]).cell(k < run.test_begin ? "train" : "test");
      csv.end_row();
    }
    csv.save(out / "predictions.csv");
  }
  if (!run.free_run.empty()) {
    CsvWriter csv({"t", "target", "free_run"});
    for (std::size_t k = 0; k < run.free_run.size(); ++k) {
      const auto i = run.test_begin + k;
      csv.cell(run.times[i]).cell(run.targets[i]).cell(run.free_run[k]);
      csv.end_row();
    }
    csv.save(out / "free_run.csv");
  }
  // Delay embeddings over the test span.
  const std::span<const double> tgt(run.targets.data() + run.test_begin, run.targets.size() - run.test_begin);
  const std::span<const double> prd(run.predictions.data() + run.test_begin, tgt.size());
  std::vector<Series> scatter;
  for (auto [name, data] : {std::pair{"actual", tgt}, std::pair{"predicted", prd}}) {
    if (run.embed_lag >= data.size()) break;
    const auto pairs = signalio::delay_embed(data, run.embed_lag);
    CsvWriter csv({"x_lagged", "x"});
    Series sr{name, {}, {}, Series::Style::Scatter};
    for (auto [a, b] : pairs) {
      csv.cell(a).cell(b);
      csv.end_row();
      sr.x.push_back(a);
      sr.y.push_back(b);
    }
    csv.save(out / fmt::format("embedding_{}.csv", name));
    emit_svg(out / fmt::format("embedding_{}.svg", name), std::vector<Series>{sr},
             {fmt::format("Delay embedding ({})", name), "x(t - tau)", "x(t)"});
  }
  {
    std::vector<double> t(run.times.begin() + static_cast<std::ptrdiff_t>(run.test_begin), run.times.end());
    const std::vector<Series> fit{{"target", t, {tgt.begin(), tgt.end()}}, {"prediction", t, {prd.begin(), prd.end()}}};
    emit_svg(out / "prediction.svg", fit, {"One-step-ahead prediction (test span)", "t", "x"});
  }
  if (!s.log.empty()) {
    const auto x = detail::epoch_axis(s.log);
    const std::vector<Series> loss{{"train", x, detail::column(s.log, [](const auto& e) { return e.train_loss; })},
                                   {"validation", x, detail::column(s.log, [](const auto& e) { return e.val_loss; })}};
    emit_svg(out / "loss.svg", loss, {"Loss per epoch", "epoch", "MSE (standardized)"});
  }
  write_summary(out, s);
}

inline RunSummary run_mg(const ExperimentConfig& cfg, const fs::path* out = nullptr) {
  auto run = run_mg_detailed(cfg);
  if (out) write_mg_outputs(*out, cfg, run);
  return run.summary;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  std::string cell;  // sigma or region label
  double value = 0.0;
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::vector<readout::EpochMetrics> log;
};

struct SweepAggregate {
  std::string cell;
  double value = 0.0;
  double mean_train = 0.0, std_train = 0.0;
  double mean_val = 0.0, std_val = 0.0;
  std::size_t n = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
};

namespace detail {
inline std::pair<double, double> mean_std(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

/// Runs every (cell, seed) on shared reservoir features; seed k uses
/// readout_seed + k and nonideal_seed + k, so cells are paired across seeds.
template <class Configure>
SweepResult sweep(const ClassificationData& data, const ExperimentConfig& base, std::size_t n_cells,
                  Configure configure) {
  const std::size_t n_seeds = base.sweep.n_seeds;
  std::vector<SweepRow> rows(n_cells * n_seeds);
  reservoir::parallel_for(rows.size(), base.threads, [&](std::size_t k) {
    auto cfg = base;
    const std::size_t cell = k / n_seeds, seed = k % n_seeds;
    cfg.readout_seed = base.readout_seed + seed;
    cfg.nonideal_seed = base.nonideal_seed + seed;
    SweepRow row;
    configure(cfg, cell, row);
    row.seed = seed;
    const auto s = train_classifier(data, cfg);
    row.train_accuracy = s.train_accuracy;
    row.val_accuracy = s.val_accuracy;
    row.log = s.log;
    rows[k] = std::move(row);
  });
  SweepResult res;
  for (std::size_t c = 0; c < n_cells; ++c) {
    std::vector<double> tr, va;
    for (std::size_t k = 0; k < n_seeds; ++k) {
      tr.push_back(rows[c * n_seeds + k].train_accuracy);
      va.push_back(rows[c * n_seeds + k].val_accuracy);
    }
    SweepAggregate a;
    a.cell = rows[c * n_seeds].cell;
    a.value = rows[c * n_seeds].value;
    std::tie(a.mean_train, a.std_train) = mean_std(tr);
    std::tie(a.mean_val, a.std_val) = mean_std(va);
    a.n = n_seeds;
    res.aggregates.push_back(a);
  }
  res.rows = std::move(rows);
  return res;
}

inline void write_sweep(const fs::path& out, const std::string& stem, const std::string& cell_name,
                        const SweepResult& r, const std::string& title) {
  {
    CsvWriter csv({cell_name, "seed", "train_acc", "val_acc"});
    for (const auto& row : r.rows) {
      csv.cell(row.cell).cell(static_cast<std::size_t>(row.seed)).cell(row.train_accuracy).cell(row.val_accuracy);
      csv.end_row();
    }
    csv.save(out / (stem + "_runs.csv"));
  }
  {
    CsvWriter csv({cell_name, "mean_train_acc", "std_train_acc", "mean_val_acc", "std_val_acc", "n_seeds"});
    for (const auto& a : r.aggregates) {
      csv.cell(a.cell).cell(a.mean_train).cell(a.std_train).cell(a.mean_val).cell(a.std_val).cell(a.n);
      csv.end_row();
    }
    csv.save(out / (stem + "_summary.csv"));
  }
  // Mean accuracy curves per cell.
  const std::size_t n_seeds = r.rows.size() / std::max<std::size_t>(1, r.aggregates.size());
  CsvWriter csv({cell_name, "epoch", "mean_train_acc", "mean_val_acc"});
  std::vector<Series> train_curves, val_curves;
  for (std::size_t c = 0; c < r.aggregates.size(); ++c) {
    const auto& first = r.rows[c * n_seeds];
    Series tr{r.aggregates[c].cell, {}, {}}, va{r.aggregates[c].cell, {}, {}};
    for (std::size_t e = 0; e < first.log.size(); ++e) {
      double mt = 0.0, mv = 0.0;
      for (std::size_t k = 0; k < n_seeds; ++k) {
        mt += r.rows[c * n_seeds + k].log[e].train_acc;
        mv += r.rows[c * n_seeds + k].log[e].val_acc;
      }
      mt /= static_cast<double>(n_seeds);
      mv /= static_cast<double>(n_seeds);
      csv.cell(r.aggregates[c].cell).cell(first.log[e].epoch).cell(mt).cell(mv);
      csv.end_row();
      tr.x.push_back(first.log[e].epoch);
      tr.y.push_back(mt);
      va.x.push_back(first.log[e].epoch);
      va.y.push_back(mv);
    }
    train_curves.push_back(std::move(tr));
    val_curves.push_back(std::move(va));
  }
  csv.save(out / (stem + "_curves.csv"));
  if (!r.rows.empty() && !r.rows.front().log.empty()) {
    emit_svg(out / (stem + "_train.svg"), train_curves, {title + ": training accuracy", "epoch", "accuracy"});
    emit_svg(out / (stem + "_val.svg"), val_curves, {title + ": validation accuracy", "epoch", "accuracy"});
  }
}
}  // namespace detail

/// Sigma 0 (the baseline) followed by the configured sigmas.
inline SweepResult sweep_d2d(const ClassificationData& data, const ExperimentConfig& base) {
  std::vector<double> sigmas{0.0};
  for (double s : base.sweep.sigmas)
    if (s != 0.0) sigmas.push_back(s);
  return detail::sweep(data, base, sigmas.size(), [&](ExperimentConfig& cfg, std::size_t c, SweepRow& row) {
    cfg.d2d_sigma = sigmas[c];
    row.value = sigmas[c];
    row.cell = format_number(sigmas[c]);
  });
}

inline SweepResult sweep_regions(const ClassificationData& data, const ExperimentConfig& base) {
  for (const auto& r : base.sweep.regions) require(parse_region(r).has_value(), "sweep regions must not be 'none'");
  return detail::sweep(data, base, base.sweep.regions.size(), [&](ExperimentConfig& cfg, std::size_t c, SweepRow& row) {
    cfg.region = base.sweep.regions[c];
    row.cell = base.sweep.regions[c];
    row.value = static_cast<double>(c);
  });
}

inline SweepResult run_sweep_d2d(const ExperimentConfig& cfg, const fs::path* out = nullptr) {
  const auto data = prepare_fsdd(cfg);
  auto r = sweep_d2d(data, cfg);
  if (out) {
    write_run_header(*out, cfg);
    detail::write_sweep(*out, "d2d", "sigma", r, "Device-to-device variation");
    std::vector<double> xs, ys;
    for (const auto& a : r.aggregates) {
      xs.push_back(a.value);
      ys.push_back(a.mean_val);
    }
    emit_svg(*out / "d2d_final.svg", std::vector<Series>{{"mean validation accuracy", xs, ys}},
             {"Final accuracy vs device variation", "sigma", "accuracy"});
  }
  return r;
}

inline SweepResult run_sweep_regions(const ExperimentConfig& cfg, const fs::path* out = nullptr) {
  const auto data = prepare_fsdd(cfg);
  auto r = sweep_regions(data, cfg);
  if (out) {
    write_run_header(*out, cfg);
    detail::write_sweep(*out, "regions", "region", r, "Conductance regions");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Device characterization
// ---------------------------------------------------------------------------

struct DeviceDemo {
  std::vector<devicesim::PulseSample> pulse_response;
  std::vector<devicesim::IvSample> iv;
  std::array<devicesim::StreamReadout, 16> states;
  double min_relative_gap = 0.0;
  double hysteresis_area = 0.0;
};

inline DeviceDemo device_demo(const ExperimentConfig& cfg, const fs::path* out = nullptr) {
  cfg.validate();
  const auto& d = cfg.device;
  DeviceDemo r;
  r.pulse_response = devicesim::nvm_pulse_response(d.nvm, d.set, d.reset, d.v_read);
  r.iv = devicesim::nvm_iv_trace(d.nvm, d.iv_amplitude, d.iv_frequency, d.iv_cycles, d.iv_dt);
  r.states = devicesim::dm_sixteen_states(cfg.dm, d.stream);
  r.min_relative_gap = devicesim::min_relative_gap(r.states);
  r.hysteresis_area = devicesim::hysteresis_area(r.iv);
  if (out) {
    write_run_header(*out, cfg);
    devicesim::pulse_response_csv(r.pulse_response).save(*out / "nvm_pulse_response.csv");
    devicesim::transient_csv(r.iv).save(*out / "nvm_iv.csv");
    CsvWriter csv({"pattern", "current_A"});
    for (const auto& s : r.states) {
      csv.cell(s.pattern).cell(s.current);
      csv.end_row();
    }
    csv.save(*out / "dm_sixteen_states.csv");
    CsvWriter traces({"pattern", "t", "v", "i", "w"});
    for (const auto& s : r.states)
      for (const auto& p : devicesim::dm_stream_trace(cfg.dm, s.pattern, d.stream)) {
        traces.cell(s.pattern).cell(p.t).cell(p.v).cell(p.i).cell(p.w);
        traces.end_row();
      }
    traces.save(*out / "dm_stream_traces.csv");

    Series pr{"conductance", {}, {}};
    for (const auto& p : r.pulse_response) {
      pr.x.push_back(p.pulse_index);
      pr.y.push_back(p.conductance);
    }
    emit_svg(*out / "nvm_pulse_response.svg", std::vector<Series>{pr}, {"NVM pulse response", "pulse", "conductance (S)"});
    Series iv{"I-V", {}, {}};
    for (const auto& p : r.iv) {
      iv.x.push_back(p.v);
      iv.y.push_back(p.i);
    }
    emit_svg(*out / "nvm_hysteresis.svg", std::vector<Series>{iv}, {"NVM hysteresis", "voltage (V)", "current (A)"});
    Series st{"read current", {}, {}, Series::Style::Scatter};
    for (std::size_t k = 0; k < r.states.size(); ++k) {
      st.x.push_back(static_cast<double>(k));
      st.y.push_back(r.states[k].current);
    }
    emit_svg(*out / "dm_sixteen_states.svg", std::vector<Series>{st},
             {"DM read current per 4-bit stream", "pattern value", "current (A)"});
    nlohmann::ordered_json j;
    j["task"] = "device-demo";
    j["config_hash"] = config_hash(cfg);
    j["min_relative_gap"] = r.min_relative_gap;
    j["hysteresis_area"] = r.hysteresis_area;
    write_file_atomic(*out / "summary.json", j.dump(2) + "\n");
  }
  return r;
}

}  // namespace memrc::harness
