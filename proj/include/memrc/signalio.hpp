#pragma once

// Data ingestion and generation: RIFF/WAVE PCM, resampling, MFCC features,
// standardization, label encoding, dataset splits and the Mackey-Glass
// delay differential equation.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "memrc/common.hpp"

namespace memrc::signalio {

struct AudioClip {
  std::vector<double> samples;  // [-1, 1]
  double sample_rate = 8000.0;
  int label = -1;
  std::string speaker;
};

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

namespace detail {
inline std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }
inline void put32(std::string& s, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
inline void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
}  // namespace detail

/// Parses 16-bit PCM RIFF/WAVE bytes. Multi-channel audio is averaged to mono.
inline AudioClip parse_wav(std::span<const unsigned char> bytes) {
  using detail::le16;
  using detail::le32;
  if (bytes.size() < 12) throw ParseError("file shorter than RIFF header", bytes.size());
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) throw ParseError("missing RIFF magic", 0);
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) throw ParseError("missing WAVE magic", 8);
  std::size_t off = 12;
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (true) {
    if (off + 8 > bytes.size()) throw ParseError(have_fmt ? "no data chunk" : "no fmt chunk", off);
    const unsigned char* hdr = bytes.data() + off;
    const std::uint32_t size = le32(hdr + 4);
    const std::size_t body = off + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw ParseError("truncated fmt chunk", off);
      const std::uint16_t tag = le16(bytes.data() + body);
      if (tag != 1) throw ParseError(fmt::format("unsupported format tag {} (only PCM = 1)", tag), body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (bits != 16) throw ParseError(fmt::format("unsupported bit depth {}", bits), body + 14);
      if (channels == 0 || rate == 0) throw ParseError("zero channels or sample rate", body + 2);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("data chunk before fmt chunk", off);
      if (body + size > bytes.size()) throw ParseError("truncated data chunk", off);
      const std::size_t frame_bytes = 2u * channels;
      const std::size_t frames = size / frame_bytes;
      AudioClip clip;
      clip.sample_rate = rate;
      clip.samples.resize(frames);
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const auto raw = static_cast<std::int16_t>(le16(bytes.data() + body + f * frame_bytes + 2 * c));
          acc += raw / 32768.0;
        }
        clip.samples[f] = acc / channels;
      }
      return clip;
    }
    if (body + size > bytes.size()) throw ParseError("truncated chunk", off);
    off = body + size + (size & 1u);
  }
}

inline AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

/// Canonical 44-byte-header, 16-bit mono PCM.
inline std::string encode_wav(const AudioClip& clip) {
  std::string s;
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
  s += "RIFF";
  detail::put32(s, 36 + 2 * n);
  s += "WAVEfmt ";
  detail::put32(s, 16);
  detail::put16(s, 1);
  detail::put16(s, 1);
  detail::put32(s, rate);
  detail::put32(s, rate * 2);
  detail::put16(s, 2);
  detail::put16(s, 16);
  s += "data";
  detail::put32(s, 2 * n);
  for (double x : clip.samples) {
    const long q = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
    detail::put16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return s;
}

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  write_file_atomic(path, encode_wav(clip));
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Linear interpolation; output length round(len * target / source).
inline AudioClip resample(const AudioClip& clip, double target_rate) {
  require(clip.sample_rate > 0.0 && target_rate > 0.0, "sample rates must be > 0");
  if (target_rate == clip.sample_rate) return clip;
  AudioClip out = clip;
  out.sample_rate = target_rate;
  const std::size_t n_in = clip.samples.size();
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * target_rate / clip.sample_rate));
  out.samples.assign(n_out, 0.0);
  if (n_in == 0) return out;
  const double step = clip.sample_rate / target_rate;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double pos = static_cast<double>(k) * step;
    const auto i0 = static_cast<std::size_t>(pos);
    if (i0 + 1 >= n_in) {
      out.samples[k] = clip.samples.back();
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out.samples[k] = clip.samples[i0] + frac * (clip.samples[i0 + 1] - clip.samples[i0]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MFCC
// ---------------------------------------------------------------------------

struct MfccConfig {
  double sample_rate = 8000.0;  // clips are resampled to this first
  double frame_len = 0.025;     // s
  double hop = 0.010;           // s
  std::size_t n_fft = 512;
  std::size_t n_mels = 26;
  std::size_t n_coeffs = 13;
  double pre_emphasis = 0.97;
  std::size_t max_frames = 25;
  double log_floor = 1e-10;

  std::size_t frame_samples() const { return static_cast<std::size_t>(std::lround(frame_len * sample_rate)); }
  std::size_t hop_samples() const { return static_cast<std::size_t>(std::lround(hop * sample_rate)); }
  std::size_t feature_length() const { return max_frames * n_coeffs; }

  void validate() const {
    require(hop > 0.0 && hop <= frame_len, "MFCC requires 0 < hop <= frame_len");
    require(n_coeffs >= 1 && n_coeffs <= n_mels, "MFCC requires 1 <= n_coeffs <= n_mels");
    require(max_frames >= 1, "MFCC max_frames must be >= 1");
    require(frame_samples() >= 1 && hop_samples() >= 1, "MFCC frame and hop must span at least one sample");
    require(n_fft >= frame_samples(), "n_fft must be >= frame length in samples");
    require(sample_rate > 0.0, "MFCC sample rate must be > 0");
  }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist,
/// evaluated at FFT bin centre frequencies. n_mels x (n_fft/2 + 1).
inline Matrix mel_filterbank(const MfccConfig& c) {
  const std::size_t bins = c.n_fft / 2 + 1;
  Matrix fb(c.n_mels, bins);
  const double top = hz_to_mel(c.sample_rate / 2.0);
  std::vector<double> edges(c.n_mels + 2);
  for (std::size_t k = 0; k < edges.size(); ++k)
    edges[k] = mel_to_hz(top * static_cast<double>(k) / static_cast<double>(c.n_mels + 1));
  for (std::size_t m = 0; m < c.n_mels; ++m) {
    const double lo = edges[m], ce = edges[m + 1], hi = edges[m + 2];
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * c.sample_rate / static_cast<double>(c.n_fft);
      double w = 0.0;
      if (f > lo && f <= ce) w = (f - lo) / (ce - lo);
      else if (f > ce && f < hi) w = (hi - f) / (hi - ce);
      fb(m, b) = w;
    }
  }
  return fb;
}

inline std::vector<double> mel_centers(const MfccConfig& c) {
  const double top = hz_to_mel(c.sample_rate / 2.0);
  std::vector<double> out(c.n_mels);
  for (std::size_t m = 0; m < c.n_mels; ++m)
    out[m] = mel_to_hz(top * static_cast<double>(m + 1) / static_cast<double>(c.n_mels + 1));
  return out;
}

namespace detail {
// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  /// Magnitude spectrum of `frame`, zero-padded to n.
  std::vector<double> magnitude(std::span<const double> frame) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    std::vector<double> mag(n_ / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out_[k][0], out_[k][1]);
    return mag;
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_{};
};
}  // namespace detail

/// Mel filter energies of one frame (pre-emphasis already applied).
inline std::vector<double> mel_energies(std::span<const double> frame, const MfccConfig& c, const Matrix& fb,
                                        detail::RealFft& fft) {
  const std::size_t n = frame.size();
  std::vector<double> win(n);
  for (std::size_t k = 0; k < n; ++k)
    win[k] = frame[k] * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
  const auto mag = fft.magnitude(win);
  std::vector<double> e(c.n_mels, 0.0);
  for (std::size_t m = 0; m < c.n_mels; ++m)
    for (std::size_t b = 0; b < mag.size(); ++b) e[m] += fb(m, b) * mag[b];
  return e;
}

inline std::vector<double> mel_energies(std::span<const double> frame, const MfccConfig& c) {
  detail::RealFft fft(c.n_fft);
  return mel_energies(frame, c, mel_filterbank(c), fft);
}

/// Orthonormal DCT-II, first `keep` coefficients.
inline std::vector<double> dct2_ortho(std::span<const double> x, std::size_t keep) {
  const std::size_t n = x.size();
  std::vector<double> out(keep, 0.0);
  for (std::size_t i = 0; i < keep; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      s += x[m] * std::cos(std::numbers::pi * static_cast<double>(i) * (static_cast<double>(m) + 0.5) / static_cast<double>(n));
    out[i] = s * std::sqrt((i == 0 ? 1.0 : 2.0) / static_cast<double>(n));
  }
  return out;
}

/// Frames before padding/truncation: 1 + floor((len - frame) / hop), with
/// clips shorter than one frame counting as one zero-padded frame.
inline std::size_t frame_count(std::size_t n_samples, const MfccConfig& c) {
  const std::size_t fl = c.frame_samples();
  if (n_samples <= fl) return 1;
  return 1 + (n_samples - fl) / c.hop_samples();
}

/// Coefficient vector of a digitally silent frame (all log energies at the floor).
inline std::vector<double> silence_coefficients(const MfccConfig& c) {
  std::vector<double> logs(c.n_mels, std::log(c.log_floor));
  return dct2_ortho(logs, c.n_coeffs);
}

/// max_frames x n_coeffs matrix. The clip must already be at c.sample_rate.
/// Missing frames are filled with the silence coefficient vector.
inline Matrix mfcc(const AudioClip& clip, const MfccConfig& c) {
  c.validate();
  if (std::abs(clip.sample_rate - c.sample_rate) > 1e-9)
    throw ConfigError(fmt::format("clip rate {} differs from MFCC rate {}; resample first", clip.sample_rate, c.sample_rate));
  std::vector<double> x = clip.samples;
  for (std::size_t k = x.size(); k-- > 1;) x[k] -= c.pre_emphasis * x[k - 1];
  const std::size_t fl = c.frame_samples(), hop = c.hop_samples();
  if (x.size() < fl) x.resize(fl, 0.0);
  const std::size_t frames = std::min(frame_count(x.size(), c), c.max_frames);
  const Matrix fb = mel_filterbank(c);
  detail::RealFft fft(c.n_fft);
  Matrix out(c.max_frames, c.n_coeffs);
  const auto silence = silence_coefficients(c);
  for (std::size_t f = 0; f < c.max_frames; ++f) {
    if (f >= frames) {
      std::copy(silence.begin(), silence.end(), out.row(f).begin());
      continue;
    }
    auto e = mel_energies(std::span<const double>(x.data() + f * hop, fl), c, fb, fft);
    for (auto& v : e) v = std::log(std::max(v, c.log_floor));
    const auto cc = dct2_ortho(e, c.n_coeffs);
    std::copy(cc.begin(), cc.end(), out.row(f).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standardization, labels, splits
// ---------------------------------------------------------------------------

struct StandardizerStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::string source;  // which split the stats were fitted on
};

/// Per-column mean and population standard deviation.
inline StandardizerStats fit_standardizer(const Matrix& x, std::string source = "train") {
  StandardizerStats s{std::vector<double>(x.cols, 0.0), std::vector<double>(x.cols, 0.0), std::move(source)};
  if (x.rows == 0) return s;
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) s.mean[c] += x(r, c);
  for (auto& m : s.mean) m /= static_cast<double>(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) s.std[c] += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
  for (auto& v : s.std) v = std::sqrt(v / static_cast<double>(x.rows));
  return s;
}

/// (x - mean) / std per column; zero-std columns map to 0.
inline Matrix standardize(const Matrix& x, const StandardizerStats& s) {
  require(s.mean.size() == x.cols, "standardizer width mismatch");
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) out(r, c) = s.std[c] > 0.0 ? (x(r, c) - s.mean[c]) / s.std[c] : 0.0;
  return out;
}

inline Matrix standardize(const Matrix& x) { return standardize(x, fit_standardizer(x)); }

inline std::vector<double> one_hot(int label, int n_classes) {
  if (label < 0 || label >= n_classes)
    throw InputError(fmt::format("label {} outside [0, {})", label, n_classes));
  std::vector<double> v(static_cast<std::size_t>(n_classes), 0.0);
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1, first round(n * fraction) go to train.
inline Split split(std::size_t n, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must be in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n) throw ConfigError(fmt::format("split of {} samples leaves an empty side", n));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return s;
}

inline Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols);
  for (std::size_t k = 0; k < rows.size(); ++k) std::copy(x.row(rows[k]).begin(), x.row(rows[k]).end(), out.row(k).begin());
  return out;
}

/// Features and targets with a split and train-fitted standardization stats.
struct Dataset {
  Matrix features;
  Matrix targets;
  Split indices;
  StandardizerStats stats;

  Matrix train_x() const { return standardize(take_rows(features, indices.train), checked()); }
  Matrix test_x() const { return standardize(take_rows(features, indices.test), checked()); }
  Matrix train_y() const { return take_rows(targets, indices.train); }
  Matrix test_y() const { return take_rows(targets, indices.test); }

 private:
  const StandardizerStats& checked() const {
    if (stats.source != "train") throw ConfigError("standardization stats were not fitted on the train split");
    return stats;
  }
};

inline Dataset make_dataset(Matrix features, Matrix targets, Split indices) {
  Dataset d{std::move(features), std::move(targets), std::move(indices), {}};
  d.stats = fit_standardizer(take_rows(d.features, d.indices.train), "train");
  return d;
}

// ---------------------------------------------------------------------------
// FSDD layout
// ---------------------------------------------------------------------------

struct FsddEntry {
  std::filesystem::path path;
  int label = -1;
  std::string speaker;
  int index = 0;
};

/// Parses `{digit}_{speaker}_{index}.wav`; returns nullopt for other names.
inline std::optional<FsddEntry> parse_fsdd_name(const std::filesystem::path& p) {
  if (p.extension() != ".wav") return std::nullopt;
  const auto parts = split_string(p.stem().string(), '_');
  if (parts.size() != 3 || parts[0].size() != 1 || parts[0][0] < '0' || parts[0][0] > '9' || parts[1].empty())
    return std::nullopt;
  FsddEntry e;
  e.path = p;
  e.label = parts[0][0] - '0';
  e.speaker = parts[1];
  const auto& idx = parts[2];
  auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), e.index);
  if (ec != std::errc{} || ptr != idx.data() + idx.size()) return std::nullopt;
  return e;
}

/// All recordings under `dir` (searched recursively), sorted by file name.
inline std::vector<FsddEntry> scan_fsdd(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw DataError(fmt::format("FSDD directory '{}' not found; expected WAV files named "
                                "{{digit}}_{{speaker}}_{{index}}.wav (e.g. recordings/ of the "
                                "free-spoken-digit-dataset)",
                                dir.string()));
  std::vector<FsddEntry> out;
  for (const auto& de : fs::recursive_directory_iterator(dir))
    if (de.is_regular_file())
      if (auto e = parse_fsdd_name(de.path())) out.push_back(std::move(*e));
  if (out.empty())
    throw DataError(fmt::format("no {{digit}}_{{speaker}}_{{index}}.wav files under '{}'", dir.string()));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.path.filename().string() < b.path.filename().string();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Mackey-Glass
// ---------------------------------------------------------------------------

struct MgParams {
  double beta = 0.2;
  double gamma = 0.1;
  double n = 10.0;
  double tau = 17.0;
  double x0 = 1.2;
  double dt = 0.1;
  std::size_t n_steps = 30500;
  std::size_t washout = 500;  // discarded leading samples

  std::size_t lag_steps() const { return static_cast<std::size_t>(std::llround(tau / dt)); }

  void validate() const {
    require(beta >= 0.0 && gamma > 0.0 && dt > 0.0, "Mackey-Glass needs beta >= 0, gamma > 0, dt > 0");
    require(tau >= 0.0, "Mackey-Glass delay must be >= 0");
    const double r = tau / dt;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
      throw ConfigError(fmt::format("Mackey-Glass dt {} does not divide tau {}", dt, tau));
    require(washout <= n_steps, "washout exceeds the number of steps");
  }
};

struct MgSeries {
  double t0 = 0.0;  // time of x.front()
  double dt = 0.1;
  std::vector<double> x;
};

/// RK4 on dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t). Delayed
/// values come from the step-aligned history (cubic interpolation at the
/// half steps); history before t = 0 is x0. Returns x(k dt) for
/// k = washout..n_steps.
inline MgSeries mackey_glass(const MgParams& p) {
  p.validate();
  const std::size_t lag = p.lag_steps();
  auto feedback = [&](double xd) { return p.beta * xd / (1.0 + std::pow(xd, p.n)); };
  std::vector<double> hist;  // hist[k] = x(k dt), k >= 0
  hist.reserve(p.n_steps + 1);
  hist.push_back(p.x0);
  auto at = [&](long k) { return k < 0 ? p.x0 : hist[static_cast<std::size_t>(k)]; };
  for (std::size_t k = 0; k < p.n_steps; ++k) {
    const double x = hist.back();
    double next;
    if (lag == 0) {
      auto f = [&](double y, double) { return feedback(y) - p.gamma * y; };
      next = 0.0 + [&] {
        const double k1 = f(x, 0), k2 = f(x + 0.5 * p.dt * k1, 0), k3 = f(x + 0.5 * p.dt * k2, 0),
                     k4 = f(x + p.dt * k3, 0);
        return x + p.dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      }();
    } else {
      const long d = static_cast<long>(k) - static_cast<long>(lag);
      const double xd0 = at(d), xd1 = at(d + 1);
      const double xdh = lag >= 2 ? (-at(d - 1) + 9.0 * xd0 + 9.0 * xd1 - at(d + 2)) / 16.0 : 0.5 * (xd0 + xd1);
      const double f0 = feedback(xd0), fh = feedback(xdh), f1 = feedback(xd1);
      const double k1 = f0 - p.gamma * x;
      const double k2 = fh - p.gamma * (x + 0.5 * p.dt * k1);
      const double k3 = fh - p.gamma * (x + 0.5 * p.dt * k2);
      const double k4 = f1 - p.gamma * (x + p.dt * k3);
      next = x + p.dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!std::isfinite(next)) throw NumericalError(fmt::format("Mackey-Glass diverged at step {}", k));
    hist.push_back(next);
  }
  MgSeries s;
  s.dt = p.dt;
  s.t0 = static_cast<double>(p.washout) * p.dt;
  s.x.assign(hist.begin() + static_cast<std::ptrdiff_t>(p.washout), hist.end());
  return s;
}

/// Pairs (x(t - lag), x(t)) for t = lag..len-1.
inline std::vector<std::pair<double, double>> delay_embed(std::span<const double> series, std::size_t lag) {
  require(lag < series.size(), "embedding lag must be shorter than the series");
  std::vector<std::pair<double, double>> out;
  out.reserve(series.size() - lag);
  for (std::size_t t = lag; t < series.size(); ++t) out.emplace_back(series[t - lag], series[t]);
  return out;
}

inline CsvWriter series_csv(const MgSeries& s) {
  CsvWriter csv({"t", "x"});
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    csv.cell(s.t0 + static_cast<double>(k) * s.dt).cell(s.x[k]);
    csv.end_row();
  }
  return csv;
}

}  // namespace memrc::signalio
