#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "memrc/reservoir.hpp"

using namespace memrc;
using namespace memrc::reservoir;

namespace {

ReservoirConfig small_config() {
  ReservoirConfig c;
  c.n_channels = 6;
  c.mask_length = 20;
  c.pulse_width = 1e-3;
  c.substeps = 4;
  c.feature_bounds = std::pair{-3.0, 3.0};
  c.threads = 1;
  return c;
}

std::vector<std::vector<double>> random_features(std::size_t n, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> out(n, std::vector<double>(len));
  for (auto& row : out)
    for (auto& x : row) x = g(rng);
  return out;
}

}  // namespace

TEST(Mask, EntriesAreBipolar) {
  const auto m = make_bipolar_mask(40, 325, 11);
  ASSERT_EQ(m.values.size(), 40u * 325u);
  for (auto v : m.values) EXPECT_EQ(v * v, 1);
}

TEST(Mask, SameSeedIsBitIdentical) {
  EXPECT_EQ(make_bipolar_mask(10, 4, 5), make_bipolar_mask(10, 4, 5));
  EXPECT_NE(make_bipolar_mask(10, 4, 5).values, make_bipolar_mask(10, 4, 6).values);
}

TEST(Mask, LeadingRowsStableWhenChannelsAdded) {
  const auto a = make_bipolar_mask(7, 13, 3), b = make_bipolar_mask(8, 13, 3);
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 13; ++c) EXPECT_EQ(a.at(r, c), b.at(r, c));
}

TEST(Mask, RoughlyBalanced) {
  const auto m = make_bipolar_mask(1, 100000, 42);
  const double mean = std::accumulate(m.values.begin(), m.values.end(), 0.0) / 1e5;
  EXPECT_NEAR(mean, 0.0, 0.02);
}

TEST(Mask, ZeroDimensionThrows) {
  EXPECT_THROW(make_bipolar_mask(0, 4, 1), ConfigError);
  EXPECT_THROW(make_bipolar_mask(4, 0, 1), ConfigError);
}

TEST(Encode, MapsObservedRangeOntoVoltageRange) {
  ReservoirConfig c;
  c.v_min = 0.2;
  c.v_max = 1.0;
  const std::vector<double> x{-1.0, 0.0, 3.0};
  const auto v = encode_voltages(x, c);
  EXPECT_DOUBLE_EQ(v[0], 0.2);
  EXPECT_DOUBLE_EQ(v[1], 0.4);
  EXPECT_DOUBLE_EQ(v[2], 1.0);
}

TEST(Encode, DegenerateRangeMapsToLowVoltage) {
  ReservoirConfig c;
  c.v_min = 0.3;
  const std::vector<double> x(5, 2.5);
  for (double v : encode_voltages(x, c)) EXPECT_EQ(v, 0.3);
}

TEST(Encode, FixedBoundsClamp) {
  ReservoirConfig c;
  c.feature_bounds = std::pair{-1.0, 1.0};
  const std::vector<double> x{-5.0, 0.0, 5.0};
  const auto v = encode_voltages(x, c);
  EXPECT_DOUBLE_EQ(v[0], c.v_min);
  EXPECT_DOUBLE_EQ(v[1], 0.5 * (c.v_min + c.v_max));
  EXPECT_DOUBLE_EQ(v[2], c.v_max);
}

TEST(Encode, NonFiniteFeatureThrows) {
  ReservoirConfig c;
  const std::vector<double> x{0.0, std::nan("")};
  EXPECT_THROW(encode_voltages(x, c), InputError);
}

TEST(Channel, ZeroInputReadsRestingCurrent) {
  auto c = small_config();
  const std::vector<std::int8_t> mask(c.mask_length, 1);
  const std::vector<double> volts(c.mask_length, 0.0);
  const auto out = run_channel(mask, volts, c);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0], devicesim::dm_current({0.0}, c.dm, c.v_read));
}

TEST(Channel, MaskSignChangesResponse) {
  auto c = small_config();
  std::vector<std::int8_t> mask(c.mask_length, 1);
  const std::vector<double> volts(c.mask_length, 1.2);
  const double up = run_channel(mask, volts, c)[0];
  mask.back() = -1;
  EXPECT_NE(run_channel(mask, volts, c)[0], up);
}

TEST(Channel, WrongMaskLengthThrows) {
  auto c = small_config();
  const std::vector<std::int8_t> mask(c.mask_length - 1, 1);
  const std::vector<double> volts(c.mask_length, 0.5);
  EXPECT_THROW(run_channel(mask, volts, c), InputError);
}

TEST(States, OneByOneShape) {
  ReservoirConfig c;
  c.n_channels = 1;
  c.mask_length = 3;
  const auto s = reservoir_states(std::vector<std::vector<double>>{{0.1, 0.5, 0.9}}, c);
  EXPECT_EQ(s.rows, 1u);
  EXPECT_EQ(s.cols, 1u);
}

TEST(States, SpokenDigitLayoutHasOneReadPerChannel) {
  ReservoirConfig c;
  c.pulse_width = 1e-4;
  c.threads = 1;
  const auto s = reservoir_states(random_features(2, 325, 1), c);
  EXPECT_EQ(s.rows, 2u);
  EXPECT_EQ(s.cols, 40u);
  for (double x : s.data) EXPECT_TRUE(std::isfinite(x));
}

TEST(States, TimeSeriesLayoutHasFortyNodes) {
  ReservoirConfig c;
  c.n_channels = 10;
  c.mask_length = 4;
  c.virtual_nodes_per_step = 4;
  c.v_max = 0.3;
  const std::vector<double> steps{0.1, 0.2, 0.05, 0.3, 0.0};
  const auto s = run_sequence(steps, c);
  EXPECT_EQ(s.rows, 5u);
  EXPECT_EQ(s.cols, 40u);
}

TEST(States, RaggedRowsThrow) {
  auto c = small_config();
  std::vector<std::vector<double>> f{std::vector<double>(20, 0.1), std::vector<double>(40, 0.1)};
  EXPECT_THROW(reservoir_states(f, c), InputError);
}

TEST(States, PartialMaskPeriodThrows) {
  auto c = small_config();
  EXPECT_THROW(reservoir_states(random_features(2, 25, 1), c), InputError);
}

TEST(States, IndependentOfThreadCount) {
  auto c = small_config();
  const auto f = random_features(17, 40, 9);
  c.threads = 1;
  const auto a = reservoir_states(f, c);
  c.threads = 4;
  const auto b = reservoir_states(f, c);
  EXPECT_EQ(a.data, b.data);
}

TEST(States, IndependentOfSampleOrder) {
  auto c = small_config();
  auto f = random_features(9, 20, 2);
  const auto a = reservoir_states(f, c);
  std::reverse(f.begin(), f.end());
  const auto b = reservoir_states(f, c);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t k = 0; k < a.cols; ++k) EXPECT_EQ(a(r, k), b(a.rows - 1 - r, k));
}

TEST(States, RemovingChannelLeavesOthersUnchanged) {
  auto c = small_config();
  const auto f = random_features(4, 20, 3);
  const auto full = reservoir_states(f, c);
  c.n_channels -= 1;
  const auto fewer = reservoir_states(f, c);
  for (std::size_t r = 0; r < f.size(); ++r)
    for (std::size_t k = 0; k < fewer.cols; ++k) EXPECT_EQ(full(r, k), fewer(r, k));
}

TEST(States, DistinctSamplesGiveDistinctRows) {
  ReservoirConfig c;
  c.pulse_width = 1e-4;
  c.threads = 1;
  c.feature_bounds = std::pair{-3.0, 3.0};
  const auto f = random_features(10, 325, 4);
  const auto s = reservoir_states(f, c);
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = i + 1; j < s.rows; ++j) {
      const auto a = s.row(i), b = s.row(j);
      EXPECT_FALSE(std::equal(a.begin(), a.end(), b.begin())) << i << " " << j;
    }
  // A single-feature change is also visible.
  auto g = f[0];
  g[100] += 0.5;
  const auto t = reservoir_states(std::vector<std::vector<double>>{f[0], g}, c);
  const auto a = t.row(0), b = t.row(1);
  EXPECT_FALSE(std::equal(a.begin(), a.end(), b.begin()));
}

TEST(States, CarriedStateRemembersPreviousSteps) {
  ReservoirConfig c;
  c.n_channels = 10;
  c.mask_length = 4;
  c.virtual_nodes_per_step = 4;
  c.v_max = 0.3;
  std::vector<double> steps{0.05, 0.3, 0.1, 0.25, 0.0, 0.2, 0.15};
  const auto a = run_sequence(steps, c);
  // Shuffle every step but the last; the final row must change.
  std::mt19937_64 rng(5);
  auto shuffled = steps;
  do std::shuffle(shuffled.begin(), shuffled.end() - 1, rng);
  while (std::equal(shuffled.begin(), shuffled.end(), steps.begin()));
  const auto b = run_sequence(shuffled, c);
  const auto ra = a.row(a.rows - 1), rb = b.row(b.rows - 1);
  EXPECT_FALSE(std::equal(ra.begin(), ra.end(), rb.begin()));
}

TEST(States, IdenticalMaskRowsGiveIdenticalChannels) {
  auto c = small_config();
  const auto m = make_bipolar_mask(c.n_channels, c.mask_length, c.seed);
  const auto f = random_features(1, 20, 6)[0];
  const auto s = sample_state(f, c, m);
  MaskMatrix twin = m;
  for (std::size_t k = 0; k < c.mask_length; ++k) twin.values[c.mask_length + k] = m.at(0, k);
  const auto t = sample_state(f, c, twin);
  EXPECT_EQ(t[0], t[1]);
  EXPECT_EQ(t[0], s[0]);
}

TEST(States, WorkerExceptionPropagates) {
  EXPECT_THROW(parallel_for(8, 4,
                            [](std::size_t i) {
                              if (i == 5) throw InputError("boom");
                            }),
               InputError);
}

TEST(StateDump, OneRowPerEntry) {
  Matrix m(2, 6);
  for (std::size_t k = 0; k < m.data.size(); ++k) m.data[k] = static_cast<double>(k);
  const auto text = state_dump_csv(m, 3, 2).str();
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample_id,channel,node,current_A");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);
}

TEST(Config, InvalidSettingsRejected) {
  ReservoirConfig c;
  c.v_min = 1.0;
  c.v_max = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.pulse_width = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.virtual_nodes_per_step = c.mask_length + 1;
  EXPECT_THROW(c.validate(), ConfigError);
}
