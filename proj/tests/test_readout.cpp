#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "memrc/readout.hpp"

using namespace memrc;
using namespace memrc::readout;

namespace {

// Brute-force references: plain nested loops over a dense weight copy.
Matrix dense(const Crossbar& xb) {
  Matrix w(xb.rows, xb.cols);
  for (std::size_t i = 0; i < xb.rows; ++i)
    for (std::size_t j = 0; j < xb.cols; ++j) w(i, j) = xb.weight_siemens(i, j) * xb.weight_scale;
  return w;
}

std::vector<double> naive_forward(const ReadoutModel& m, const std::vector<double>& x) {
  const Matrix w1 = dense(m.layer1), w2 = dense(m.layer2);
  std::vector<double> h(w1.cols, 0.0), z(w2.cols, 0.0);
  for (std::size_t j = 0; j < w1.cols; ++j) {
    for (std::size_t i = 0; i < w1.rows; ++i) h[j] += x[i] * w1(i, j);
    h[j] = h[j] > 0 ? h[j] : 0;
  }
  for (std::size_t j = 0; j < w2.cols; ++j)
    for (std::size_t i = 0; i < w2.rows; ++i) z[j] += h[i] * w2(i, j);
  if (m.head == Head::Softmax) {
    double mx = z[0], s = 0;
    for (double v : z) mx = std::max(mx, v);
    for (double& v : z) s += v = std::exp(v - mx);
    for (double& v : z) v /= s;
  }
  return z;
}

double near_rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

PulseUpdateModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PulseUpdateModel m;
  m.x_min = u(rng) * 1e-5;
  m.x_max = m.x_min + (0.1 + u(rng)) * 1e-5;
  m.p_max = std::round(1.0 + u(rng) * 300.0);
  m.a = (5.0 + u(rng) * 100.0) * (u(rng) < 0.5 ? -1.0 : 1.0);
  return m;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (auto& x : m.data) x = g(rng);
  return m;
}

Matrix one_hot_rows(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  Matrix y(n, k);
  for (std::size_t r = 0; r < n; ++r) y(r, rng() % k) = 1.0;
  return y;
}

}  // namespace

TEST(PulseModel, ScaleFactorHandValue) {
  EXPECT_NEAR(scale_factor_b({0.0, 1e-5, 100, 30}), 1.0369937065900356e-05, 1e-20);
}

TEST(PulseModel, EndpointsExactOverRandomDraws) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 100; ++k) {
    const auto m = random_model(rng);
    const double scale = std::max(std::abs(m.x_min), std::abs(m.x_max));
    EXPECT_LE(std::abs(conductance_ltp(0, m) - m.x_min), 1e-12 * scale) << k;
    EXPECT_LE(std::abs(conductance_ltp(m.p_max, m) - m.x_max), 1e-12 * scale) << k;
    EXPECT_LE(std::abs(conductance_ltd(0, m) - m.x_min), 1e-12 * scale) << k;
    EXPECT_LE(std::abs(conductance_ltd(m.p_max, m) - m.x_max), 1e-12 * scale) << k;
  }
}

TEST(PulseModel, CurvesMonotoneAndSaturating) {
  const PulseUpdateModel m;
  double prev_p = -1, prev_d = -1;
  for (int p = 0; p <= 100; ++p) {
    const double gp = conductance_ltp(p, m), gd = conductance_ltd(p, m);
    EXPECT_GT(gp, prev_p);
    EXPECT_GT(gd, prev_d);
    prev_p = gp;
    prev_d = gd;
  }
  // Potentiation saturates: early pulses move more than late ones.
  EXPECT_GT(ltp_slope(0, m), ltp_slope(100, m));
  EXPECT_LT(ltd_slope(0, m), ltd_slope(100, m));
}

TEST(PulseModel, PositionInvertsCurve) {
  const PulseUpdateModel m;
  for (double p : {0.0, 1.5, 37.0, 99.0, 100.0}) {
    EXPECT_NEAR(ltp_position(conductance_ltp(p, m), m), p, 1e-8);
    EXPECT_NEAR(ltd_position(conductance_ltd(p, m), m), p, 1e-8);
  }
}

TEST(PulseModel, OutOfRangePulsesThrow) {
  const PulseUpdateModel m;
  EXPECT_THROW(conductance_ltp(-1, m), InputError);
  EXPECT_THROW(conductance_ltd(101, m), InputError);
  EXPECT_THROW(conductance_ltp(std::nan(""), m), InputError);
}

TEST(PulseModel, InvalidModelRejected) {
  EXPECT_THROW((PulseUpdateModel{1e-5, 1e-5, 100, 30}.validate()), ConfigError);
  EXPECT_THROW((PulseUpdateModel{0, 1e-5, 0.5, 30}.validate()), ConfigError);
  EXPECT_THROW((PulseUpdateModel{0, 1e-5, 100, 0}.validate()), ConfigError);
}

TEST(Device, ZeroUpdateIsNoOp) {
  const auto d = make_device({}, 7e-6);
  EXPECT_EQ(program_weight_update(d, 0.0), d);
}

TEST(Device, UpdatesMoveInRequestedDirection) {
  const auto d = make_device({}, 1e-5);
  EXPECT_GT(program_weight_update(d, 1e-7).g, d.g);
  EXPECT_LT(program_weight_update(d, -1e-7).g, d.g);
  // Small steps follow the local slope closely.
  EXPECT_NEAR(program_weight_update(d, 1e-9).g - d.g, 1e-9, 1e-12);
}

TEST(Device, SaturatesSilently) {
  const PulseUpdateModel m;
  bool sat = false;
  const auto top = program_weight_update(make_device(m, 1.9e-5), 1e-4, nullptr, &sat);
  EXPECT_TRUE(sat);
  EXPECT_EQ(top.g, m.x_max);
  const auto bottom = program_weight_update(make_device(m, 1e-6), -1e-4, nullptr, &sat);
  EXPECT_TRUE(sat);
  EXPECT_NEAR(bottom.g, m.x_min, 1e-18);
}

TEST(Device, StaysOnCurveAndInRangeUnderRandomUpdates) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 2e-6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(rng);
    auto d = make_device(m, 0.5 * (m.x_min + m.x_max));
    for (int k = 0; k < 200; ++k) {
      d = program_weight_update(d, g(rng));
      ASSERT_GE(d.g, m.x_min);
      ASSERT_LE(d.g, m.x_max);
      ASSERT_NEAR(d.g, conductance_ltp(d.pulse_pos, m), 1e-9);
    }
  }
}

TEST(Crossbar, HandVmm) {
  Matrix w(2, 2);
  w.data = {1, 2, 3, 4};
  const auto xb = crossbar_from_weights(w, {}, 1e5, true);
  const std::vector<double> ones{1, 1};
  EXPECT_EQ(vmm(xb, ones), (std::vector<double>{4, 6}));
  Matrix eye(3, 3);
  eye(0, 0) = eye(1, 1) = eye(2, 2) = 1;
  const std::vector<double> x{0.5, -2, 7};
  EXPECT_EQ(vmm(crossbar_from_weights(eye, {}, 1e5, true), x), x);
}

TEST(Crossbar, DeviceVmmMatchesNaive) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const auto xb = crossbar_from_weights(random_matrix(7, 5, rng, 0.3), {}, 1e5);
    const auto x = random_matrix(1, 7, rng).data;
    const auto w = dense(xb);
    const auto y = vmm(xb, x);
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < 7; ++i) s += x[i] * w(i, j);
      EXPECT_LE(std::abs(y[j] - s), 1e-10 * std::max(1.0, std::abs(s)));
    }
  }
}

TEST(Crossbar, WrongInputLengthThrows) {
  const auto xb = crossbar_from_weights(Matrix(3, 2), {}, 1e5, true);
  EXPECT_THROW(vmm(xb, std::vector<double>(2)), InputError);
}

TEST(Crossbar, DifferentialWeightWithinDeviceRange) {
  std::mt19937_64 rng(4);
  const PulseUpdateModel m;
  const auto xb = crossbar_from_weights(random_matrix(10, 10, rng, 5.0), m, 1e5);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_GE(xb.weight_siemens(i, j), -(m.x_max - m.x_min));
      EXPECT_LE(xb.weight_siemens(i, j), m.x_max - m.x_min);
    }
}

TEST(Crossbar, RegionClipBindsEveryPair) {
  std::mt19937_64 rng(5);
  auto xb = crossbar_from_weights(random_matrix(8, 8, rng, 1.0), {}, 1e5);
  const auto r = region_preset(RegionPreset::R3);
  clip_region(xb, r);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_GE(xb.weight_siemens(i, j), r.lo - 1e-18);
      EXPECT_LE(xb.weight_siemens(i, j), r.hi + 1e-18);
    }
}

TEST(Crossbar, RegionPresetsNested) {
  const auto r1 = region_preset(RegionPreset::R1), r2 = region_preset(RegionPreset::R2),
             r3 = region_preset(RegionPreset::R3);
  EXPECT_EQ(r1, (Region{-1.3e-5, 0.4e-5}));
  EXPECT_LE(r1.lo, r2.lo);
  EXPECT_LE(r2.lo, r3.lo);
  EXPECT_GE(r1.hi, r2.hi);
  EXPECT_GE(r2.hi, r3.hi);
}

TEST(Forward, MatchesNaiveOracle) {
  std::mt19937_64 rng(6);
  for (Head head : {Head::Softmax, Head::Linear})
    for (bool ideal : {true, false}) {
      ReadoutConfig cfg;
      cfg.n_hidden = 9;
      cfg.ideal = ideal;
      const auto m = make_readout(6, 4, head, cfg);
      const auto x = random_matrix(1, 6, rng).data;
      const auto got = forward(m, x), want = naive_forward(m, x);
      for (std::size_t j = 0; j < 4; ++j) EXPECT_LE(std::abs(got[j] - want[j]), 1e-10 * std::max(1.0, std::abs(want[j])));
    }
}

TEST(Forward, SoftmaxNormalized) {
  std::mt19937_64 rng(7);
  ReadoutConfig cfg;
  cfg.n_hidden = 16;
  cfg.init_scale = 5.0;
  const auto m = make_readout(10, 10, Head::Softmax, cfg);
  for (int k = 0; k < 20; ++k) {
    const auto y = forward(m, random_matrix(1, 10, rng, 3.0).data);
    double s = 0;
    for (double v : y) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Gradients, MatchCentralDifferences) {
  std::mt19937_64 rng(9);
  for (auto [head, loss] : {std::pair{Head::Softmax, Loss::CrossEntropy}, std::pair{Head::Linear, Loss::Mse}}) {
    ReadoutConfig cfg;
    cfg.n_hidden = 7;
    cfg.ideal = true;
    cfg.seed = rng();
    auto m = make_readout(5, 3, head, cfg);
    const auto x = random_matrix(6, 5, rng);
    const auto y = head == Head::Softmax ? one_hot_rows(6, 3, rng) : random_matrix(6, 3, rng);
    const std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5};
    const auto g = loss_and_gradients(m, x, y, loss, batch);
    const double h = 1e-6;
    for (auto [layer, grad] : {std::pair{&m.layer1, &g.g1}, std::pair{&m.layer2, &g.g2}})
      for (std::size_t k = 0; k < layer->w.data.size(); ++k) {
        const double w0 = layer->w.data[k];
        layer->w.data[k] = w0 + h;
        const double up = loss_and_gradients(m, x, y, loss, batch).loss;
        layer->w.data[k] = w0 - h;
        const double down = loss_and_gradients(m, x, y, loss, batch).loss;
        layer->w.data[k] = w0;
        const double fd = (up - down) / (2 * h), an = grad->data[k];
        EXPECT_LE(std::abs(fd - an), 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-9) << k;
      }
  }
}

TEST(Training, ReducesLossOnSeparableData) {
  std::mt19937_64 rng(10);
  const auto x = random_matrix(60, 4, rng);
  Matrix y(60, 2);
  for (std::size_t r = 0; r < 60; ++r) y(r, x(r, 0) + x(r, 1) > 0 ? 0 : 1) = 1.0;
  for (bool ideal : {true, false}) {
    ReadoutConfig cfg;
    cfg.n_hidden = 8;
    cfg.ideal = ideal;
    auto m = make_readout(4, 2, Head::Softmax, cfg);
    const double before = evaluate(m, x, y, Loss::CrossEntropy).loss;
    TrainConfig tc;
    tc.epochs = 40;
    tc.batch = 8;
    tc.lr = 1e-2;
    const auto log = train(m, x, y, tc);
    ASSERT_EQ(log.size(), 40u);
    EXPECT_LT(log.back().train_loss, 0.6 * before) << ideal;
    EXPECT_GT(log.back().train_acc, 0.9) << ideal;
  }
}

TEST(Training, ZeroLearningRateChangesNothing) {
  std::mt19937_64 rng(11);
  const auto x = random_matrix(20, 3, rng);
  const auto y = one_hot_rows(20, 2, rng);
  ReadoutConfig cfg;
  cfg.n_hidden = 5;
  auto m = make_readout(3, 2, Head::Softmax, cfg);
  const auto w1 = m.layer1.w.data, w2 = m.layer2.w.data;
  TrainConfig tc;
  tc.epochs = 3;
  tc.lr = 0.0;
  train(m, x, y, tc);
  EXPECT_EQ(m.layer1.w.data, w1);
  EXPECT_EQ(m.layer2.w.data, w2);
}

TEST(Training, FullRangeRegionMatchesUnclipped) {
  std::mt19937_64 rng(12);
  const auto x = random_matrix(40, 4, rng);
  const auto y = one_hot_rows(40, 3, rng);
  ReadoutConfig cfg;
  cfg.n_hidden = 6;
  auto a = make_readout(4, 3, Head::Softmax, cfg);
  auto b = a;
  clip_region(b, full_range(cfg.pulse));
  TrainConfig tc;
  tc.epochs = 10;
  tc.batch = 8;
  train(a, x, y, tc);
  train(b, x, y, tc);
  EXPECT_EQ(a.layer1.w.data, b.layer1.w.data);
  EXPECT_EQ(a.layer2.w.data, b.layer2.w.data);
}

TEST(Training, ConductancesStayInRangeUnderVariationAndRegion) {
  std::mt19937_64 rng(13);
  const auto x = random_matrix(40, 4, rng, 3.0);
  const auto y = one_hot_rows(40, 3, rng);
  ReadoutConfig cfg;
  cfg.n_hidden = 6;
  auto m = make_readout(4, 3, Head::Softmax, cfg);
  apply_d2d(m, 0.3, 99);
  const auto r = region_preset(RegionPreset::R2);
  clip_region(m, r);
  TrainConfig tc;
  tc.epochs = 15;
  tc.batch = 4;
  tc.lr = 0.05;
  train(m, x, y, tc);
  for (const Crossbar* xb : {&m.layer1, &m.layer2})
    for (std::size_t k = 0; k < xb->pos.size(); ++k) {
      for (const auto* d : {&xb->pos[k], &xb->neg[k]}) {
        ASSERT_GE(d->g, d->model.x_min);
        ASSERT_LE(d->g, d->model.x_max);
      }
      const double w = xb->pos[k].g - xb->neg[k].g;
      ASSERT_GE(w, r.lo - 1e-18);
      ASSERT_LE(w, r.hi + 1e-18);
    }
}

TEST(Variation, ZeroSigmaIsNoOp) {
  ReadoutConfig cfg;
  cfg.n_hidden = 5;
  auto m = make_readout(4, 3, Head::Softmax, cfg);
  const auto before = m.layer1.pos;
  apply_d2d(m, 0.0, 1);
  EXPECT_EQ(m.layer1.pos, before);
}

TEST(Variation, PerturbsWithinThreeSigma) {
  ReadoutConfig cfg;
  cfg.n_hidden = 20;
  auto m = make_readout(10, 10, Head::Softmax, cfg);
  apply_d2d(m, 0.1, 3);
  const PulseUpdateModel nominal;
  int changed = 0;
  for (const auto& d : m.layer1.pos) {
    EXPECT_LE(std::abs(d.model.a / nominal.a - 1.0), 0.3 + 1e-12);
    EXPECT_LE(std::abs(d.model.x_max / nominal.x_max - 1.0), 0.3 + 1e-12);
    EXPECT_LT(d.model.x_min, d.model.x_max);
    changed += d.model.a != nominal.a;
  }
  EXPECT_EQ(changed, static_cast<int>(m.layer1.pos.size()));
  EXPECT_THROW(apply_d2d(m, -0.1, 3), ConfigError);
}

TEST(Variation, SameSeedSameDevices) {
  ReadoutConfig cfg;
  cfg.n_hidden = 5;
  auto a = make_readout(4, 3, Head::Softmax, cfg), b = a;
  apply_d2d(a, 0.2, 77);
  apply_d2d(b, 0.2, 77);
  EXPECT_EQ(a.layer1.pos, b.layer1.pos);
  EXPECT_EQ(a.layer2.neg, b.layer2.neg);
}

TEST(Export, WeightSnapshotShape) {
  Matrix w(2, 3);
  const auto csv = weight_snapshot_csv(crossbar_from_weights(w, {}, 1e5)).str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "input,out_0,out_1,out_2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
