#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "memrc/signalio.hpp"

using namespace memrc;
using namespace memrc::signalio;
namespace fs = std::filesystem;

namespace {

AudioClip tone(double freq, double seconds, double rate = 8000.0, double amp = 0.5) {
  AudioClip c;
  c.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  for (std::size_t k = 0; k < n; ++k)
    c.samples.push_back(amp * std::sin(2 * std::numbers::pi * freq * static_cast<double>(k) / rate));
  return c;
}

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void poke16(std::vector<unsigned char>& b, std::size_t off, std::uint16_t v) {
  b[off] = v & 0xff;
  b[off + 1] = v >> 8;
}

std::uint64_t parse_offset(const std::vector<unsigned char>& b) {
  try {
    parse_wav(b);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "expected ParseError";
  return ~0ull;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("memrc_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Wav, QuantizedClipRoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> q(-32768, 32767);
  AudioClip c;
  c.sample_rate = 8000;
  for (int k = 0; k < 1001; ++k) c.samples.push_back(q(rng) / 32768.0);
  const auto back = parse_wav(bytes_of(encode_wav(c)));
  EXPECT_EQ(back.sample_rate, 8000.0);
  EXPECT_EQ(back.samples, c.samples);
}

TEST(Wav, FileRoundTrip) {
  TempDir dir("wav");
  AudioClip c;
  c.sample_rate = 16000;
  c.samples = {0.0, 0.5, -0.5, -1.0, 32767.0 / 32768.0};
  write_wav(dir.path / "a.wav", c);
  EXPECT_EQ(read_wav(dir.path / "a.wav").samples, c.samples);
  EXPECT_EQ(fs::file_size(dir.path / "a.wav"), 44u + 10u);
}

TEST(Wav, StereoIsAveraged) {
  AudioClip c;
  c.samples = {0.25, 0.5};
  auto b = bytes_of(encode_wav(c));
  // Reinterpret the two mono samples as one stereo frame.
  poke16(b, 22, 2);
  poke16(b, 32, 4);
  const auto s = parse_wav(b);
  ASSERT_EQ(s.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(s.samples[0], 0.375);
}

TEST(Wav, SkipsUnknownChunksWithPadding) {
  AudioClip c;
  c.samples = {0.25, -0.25};
  const auto plain = encode_wav(c);
  std::string s = plain.substr(0, 36) + std::string("LIST\x03\0\0\0abc\0", 12) + plain.substr(36);
  EXPECT_EQ(parse_wav(bytes_of(s)).samples, c.samples);
}

TEST(Wav, BadMagicReportsOffset) {
  auto b = bytes_of(encode_wav(tone(440, 0.01)));
  b[0] = 'X';
  EXPECT_EQ(parse_offset(b), 0u);
  b = bytes_of(encode_wav(tone(440, 0.01)));
  b[9] = 'X';
  EXPECT_EQ(parse_offset(b), 8u);
}

TEST(Wav, NonPcmRejected) {
  auto b = bytes_of(encode_wav(tone(440, 0.01)));
  poke16(b, 20, 3);
  EXPECT_EQ(parse_offset(b), 20u);
  b = bytes_of(encode_wav(tone(440, 0.01)));
  poke16(b, 34, 8);
  EXPECT_EQ(parse_offset(b), 34u);
}

TEST(Wav, TruncationRejected) {
  auto b = bytes_of(encode_wav(tone(440, 0.01)));
  b.resize(b.size() - 3);
  EXPECT_EQ(parse_offset(b), 36u);
  b.resize(8);
  EXPECT_EQ(parse_offset(b), 8u);
}

TEST(Wav, MissingFileIsDataError) { EXPECT_THROW(read_wav("/nonexistent/x.wav"), DataError); }

TEST(Resample, LengthAndTone) {
  const auto hi = tone(1000, 1.0, 16000);
  const auto lo = resample(hi, 8000);
  ASSERT_EQ(lo.samples.size(), 8000u);
  const auto ref = tone(1000, 1.0, 8000);
  for (std::size_t k = 0; k < 8000; ++k) EXPECT_NEAR(lo.samples[k], ref.samples[k], 1e-9);
  EXPECT_EQ(resample(tone(100, 0.1, 44100), 8000).samples.size(), 800u);
}

TEST(Mfcc, Shape) {
  const auto m = mfcc(tone(440, 0.5), {});
  EXPECT_EQ(m.rows, 25u);
  EXPECT_EQ(m.cols, 13u);
  EXPECT_EQ(MfccConfig{}.feature_length(), 325u);
}

TEST(Mfcc, Deterministic) {
  const auto clip = tone(300, 0.3);
  EXPECT_EQ(mfcc(clip, {}).data, mfcc(clip, {}).data);
}

TEST(Mfcc, ShortClipPaddedWithSilence) {
  const auto m = mfcc(tone(440, 0.05), {});
  const auto sil = silence_coefficients({});
  EXPECT_EQ(frame_count(400, {}), 3u);
  for (std::size_t f = 3; f < 25; ++f)
    for (std::size_t k = 0; k < 13; ++k) EXPECT_EQ(m(f, k), sil[k]);
  EXPECT_NE(m(0, 0), sil[0]);
}

TEST(Mfcc, SilentClipIsFinite) {
  AudioClip c;
  c.samples.assign(4000, 0.0);
  for (double v : mfcc(c, {}).data) EXPECT_TRUE(std::isfinite(v));
}

TEST(Mfcc, RateMismatchRejected) { EXPECT_THROW(mfcc(tone(440, 0.1, 16000), {}), ConfigError); }

TEST(Mfcc, ToneEnergyPeaksInFilterCoveringIt) {
  const MfccConfig c;
  const double f = 1000.0;
  const auto clip = tone(f, 0.025);
  const auto e = mel_energies(clip.samples, c);
  const auto peak = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
  // The winning filter's support must contain the tone.
  const double top = hz_to_mel(c.sample_rate / 2);
  const double lo = mel_to_hz(top * static_cast<double>(peak) / (c.n_mels + 1));
  const double hi = mel_to_hz(top * static_cast<double>(peak + 2) / (c.n_mels + 1));
  EXPECT_GT(f, lo);
  EXPECT_LT(f, hi);
}

TEST(Mfcc, FftMatchesDirectDft) {
  const MfccConfig c;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> frame(200);
  for (auto& x : frame) x = g(rng);
  detail::RealFft fft(c.n_fft);
  const auto mag = fft.magnitude(frame);
  for (std::size_t k : {0u, 1u, 37u, 128u, 256u}) {
    double re = 0, im = 0;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      const double ang = -2 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(c.n_fft);
      re += frame[n] * std::cos(ang);
      im += frame[n] * std::sin(ang);
    }
    EXPECT_NEAR(mag[k], std::hypot(re, im), 1e-9) << k;
  }
}

TEST(Mfcc, DctIsOrthonormal) {
  const std::size_t n = 26;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> ei(n, 0.0);
    ei[i] = 1.0;
    const auto ci = dct2_ortho(ei, n);
    double norm = 0;
    for (double v : ci) norm += v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12);
  }
  std::vector<double> flat(n, 2.0);
  const auto cf = dct2_ortho(flat, 3);
  EXPECT_NEAR(cf[0], 2.0 * std::sqrt(static_cast<double>(n)), 1e-12);
  EXPECT_NEAR(cf[1], 0.0, 1e-12);
}

TEST(Mfcc, FilterbankCoversSpectrum) {
  const auto fb = mel_filterbank({});
  EXPECT_EQ(fb.rows, 26u);
  EXPECT_EQ(fb.cols, 257u);
  for (double v : fb.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_NEAR(hz_to_mel(mel_to_hz(1234.5)), 1234.5, 1e-9);
}

TEST(Mfcc, InvalidConfigRejected) {
  MfccConfig c;
  c.n_coeffs = 30;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.hop = 0.03;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Standardize, ZeroMeanUnitStd) {
  Matrix x(4, 2);
  x.data = {1, 5, 2, 5, 3, 5, 4, 5};
  const auto s = fit_standardizer(x);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(s.std[0], std::sqrt(1.25));
  const auto z = standardize(x, s);
  double sum = 0, sq = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    sum += z(r, 0);
    sq += z(r, 0) * z(r, 0);
    EXPECT_EQ(z(r, 1), 0.0);
  }
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_NEAR(sq / 4, 1.0, 1e-12);
}

TEST(Standardize, TestSplitUsesTrainStats) {
  Matrix f(10, 1);
  for (std::size_t r = 0; r < 10; ++r) f(r, 0) = static_cast<double>(r * r);
  Matrix y(10, 1);
  auto d = make_dataset(f, y, split(10, 0.7, 4));
  EXPECT_EQ(d.stats.source, "train");
  const auto train_stats = fit_standardizer(take_rows(f, d.indices.train));
  EXPECT_EQ(d.stats.mean, train_stats.mean);
  const auto t = d.test_x();
  for (std::size_t k = 0; k < d.indices.test.size(); ++k)
    EXPECT_DOUBLE_EQ(t(k, 0), (f(d.indices.test[k], 0) - train_stats.mean[0]) / train_stats.std[0]);
  d.stats.source = "test";
  EXPECT_THROW(d.test_x(), ConfigError);
}

TEST(Labels, OneHot) {
  const auto v = one_hot(3, 10);
  EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0), 1.0);
  EXPECT_EQ(v[3], 1.0);
  EXPECT_THROW(one_hot(10, 10), InputError);
  EXPECT_THROW(one_hot(-1, 10), InputError);
}

TEST(Split, SizesAndDeterminism) {
  const auto s = split(3000, 0.75, 42);
  EXPECT_EQ(s.train.size(), 2250u);
  EXPECT_EQ(s.test.size(), 750u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t k = 0; k < all.size(); ++k) EXPECT_EQ(all[k], k);
  EXPECT_EQ(split(3000, 0.75, 42).train, s.train);
  EXPECT_NE(split(3000, 0.75, 43).train, s.train);
  EXPECT_THROW(split(3, 0.01, 1), ConfigError);
}

TEST(Fsdd, NameParsing) {
  const auto e = parse_fsdd_name("recordings/7_jackson_32.wav");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->label, 7);
  EXPECT_EQ(e->speaker, "jackson");
  EXPECT_EQ(e->index, 32);
  EXPECT_FALSE(parse_fsdd_name("7_jackson_32.mp3"));
  EXPECT_FALSE(parse_fsdd_name("12_jackson_3.wav"));
  EXPECT_FALSE(parse_fsdd_name("7_jackson.wav"));
  EXPECT_FALSE(parse_fsdd_name("7_jackson_x.wav"));
}

TEST(Fsdd, ScanSortsAndFilters) {
  TempDir dir("fsdd");
  AudioClip c;
  c.samples = {0.0};
  for (const char* n : {"3_b_1.wav", "1_a_0.wav", "notes.txt", "9_a_10.wav"}) write_wav(dir.path / n, c);
  const auto list = scan_fsdd(dir.path);
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[0].path.filename(), "1_a_0.wav");
  EXPECT_EQ(list[2].label, 9);
}

TEST(Fsdd, MissingOrEmptyDirectoryIsDataError) {
  EXPECT_THROW(scan_fsdd("/nonexistent/fsdd"), DataError);
  TempDir dir("fsdd_empty");
  EXPECT_THROW(scan_fsdd(dir.path), DataError);
}

TEST(MackeyGlass, FixedPointIsStationary) {
  MgParams p;
  p.x0 = 1.0;
  p.n_steps = 5000;
  p.washout = 0;
  // beta x / (1 + x^n) = gamma x at x = 1 when beta = 2 gamma.
  for (double x : mackey_glass(p).x) ASSERT_NEAR(x, 1.0, 1e-9);
}

TEST(MackeyGlass, NoDelayNoFeedbackDecaysExponentially) {
  MgParams p;
  p.tau = 0;
  p.beta = 0;
  p.n_steps = 1000;
  p.washout = 0;
  const auto s = mackey_glass(p);
  for (std::size_t k = 0; k < s.x.size(); k += 100)
    EXPECT_NEAR(s.x[k], p.x0 * std::exp(-p.gamma * static_cast<double>(k) * p.dt), 1e-9);
}

TEST(MackeyGlass, StepMustDivideDelay) {
  MgParams p;
  p.dt = 0.3;
  EXPECT_THROW(mackey_glass(p), ConfigError);
}

TEST(MackeyGlass, HalvingStepConverges) {
  MgParams a;
  a.n_steps = 5000;
  a.washout = 0;
  MgParams b = a;
  b.dt = a.dt / 2;
  b.n_steps = 2 * a.n_steps;
  const double xa = mackey_glass(a).x.back(), xb = mackey_glass(b).x.back();
  EXPECT_LT(std::abs(xa - xb) / std::abs(xb), 1e-3);
}

TEST(MackeyGlass, BoundedAfterWashout) {
  const auto s = mackey_glass({});
  EXPECT_EQ(s.x.size(), 30001u);
  EXPECT_DOUBLE_EQ(s.t0, 50.0);
  for (double x : s.x) {
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 2.0);
  }
}

TEST(MackeyGlass, DelayEmbedding) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto e0 = delay_embed(x, 0);
  ASSERT_EQ(e0.size(), 4u);
  for (const auto& [a, b] : e0) EXPECT_EQ(a, b);
  const auto e2 = delay_embed(x, 2);
  ASSERT_EQ(e2.size(), 2u);
  EXPECT_EQ(e2[0], (std::pair{1.0, 3.0}));
  EXPECT_THROW(delay_embed(x, 4), ConfigError);
}
