#pragma once

// Synthetic spoken-digit corpus with the same file layout as the free spoken
// digit recordings ({digit}_{speaker}_{index}.wav, 8 kHz mono 16-bit). Each
// digit is a fixed sequence of formant-synthesized voiced segments, frication
// noise and closures; speakers differ in pitch, vocal-tract scale and rate,
// and every utterance gets its own timing, formant and noise jitter. Useful as
// a stand-in when the real recordings are not available.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "memrc/common.hpp"
#include "memrc/signalio.hpp"

namespace memrc::synth {

struct Segment {
  enum class Kind { Voiced, Noise, Silence };
  Kind kind;
  double duration;  // s, before rate scaling
  double f1a, f2a;  // formants at segment start (Hz), or noise centre in f1a
  double f1b, f2b;  // formants at segment end
  double gain = 1.0;
};

inline std::vector<Segment> digit_template(int digit) {
  using K = Segment::Kind;
  auto v = [](double d, double f1, double f2, double g1, double g2, double gain = 1.0) {
    return Segment{K::Voiced, d, f1, f2, g1, g2, gain};
  };
  auto n = [](double d, double centre, double gain = 0.35) { return Segment{K::Noise, d, centre, 0, centre, 0, gain}; };
  auto s = [](double d) { return Segment{K::Silence, d, 0, 0, 0, 0, 0.0}; };
  switch (digit) {
    case 0: return {n(0.06, 3200, 0.25), v(0.06, 400, 2000, 450, 1300), v(0.12, 450, 1300, 500, 900)};
    case 1: return {v(0.05, 300, 700, 640, 1200), v(0.10, 640, 1200, 600, 1200), v(0.06, 250, 1500, 250, 1500, 0.4)};
    case 2: return {s(0.02), n(0.03, 2500, 0.45), v(0.16, 320, 1100, 300, 870)};
    case 3: return {n(0.07, 1500, 0.15), v(0.05, 450, 1300, 350, 1900), v(0.12, 300, 2200, 280, 2250)};
    case 4: return {n(0.07, 1200, 0.2), v(0.10, 570, 840, 550, 900), v(0.06, 480, 1300, 450, 1300)};
    case 5: return {n(0.06, 1200, 0.2), v(0.14, 730, 1090, 400, 2000), n(0.04, 1000, 0.12)};
    case 6: return {n(0.08, 3500, 0.4), v(0.08, 400, 2000, 400, 2000), s(0.04), n(0.07, 3500, 0.4)};
    case 7: return {n(0.07, 3500, 0.4), v(0.07, 530, 1850, 530, 1800), v(0.04, 500, 1500, 500, 1500, 0.5),
                    v(0.06, 500, 1500, 250, 1500, 0.6)};
    case 8: return {v(0.14, 530, 1850, 380, 2150), s(0.03), n(0.03, 2800, 0.4)};
    case 9: return {v(0.05, 250, 1500, 250, 1500, 0.4), v(0.13, 730, 1090, 400, 2000), v(0.05, 250, 1500, 250, 1500, 0.4)};
    default: throw ConfigError(fmt::format("digit {} outside 0..9", digit));
  }
}

struct Speaker {
  std::string name;
  double f0;            // Hz
  double tract_scale;   // multiplies every formant
  double rate;          // multiplies every duration
};

inline std::vector<Speaker> default_speakers() {
  return {{"alder", 105, 0.92, 1.05}, {"birch", 125, 1.0, 0.9},  {"cedar", 150, 1.05, 1.0},
          {"dogwood", 190, 1.12, 1.1}, {"elm", 215, 1.15, 0.95}, {"fir", 95, 0.9, 1.15}};
}

struct SynthConfig {
  double sample_rate = 8000.0;
  double formant_jitter = 0.08;  // relative std per utterance and segment
  double timing_jitter = 0.15;   // relative std per segment
  double noise_level = 0.02;     // background noise std relative to peak
  double lead_max = 0.03;        // s, random leading silence
};

namespace detail {
// Two-pole resonator with unit gain at its centre frequency.
struct Resonator {
  double y1 = 0.0, y2 = 0.0;
  double run(double x, double freq, double bw, double fs) {
    const double r = std::exp(-std::numbers::pi * bw / fs);
    const double c = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
    const double gain = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(4.0 * std::numbers::pi * freq / fs) + r * r);
    const double y = gain * x + c * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};
}  // namespace detail

/// One utterance; identical arguments give identical samples.
inline signalio::AudioClip synthesize(int digit, const Speaker& spk, int index, const SynthConfig& cfg = {}) {
  const auto tmpl = digit_template(digit);
  std::uint64_t name_hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : spk.name) name_hash = (name_hash ^ ch) * 0x100000001b3ull;
  std::seed_seq seq{static_cast<std::uint32_t>(digit), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(name_hash), static_cast<std::uint32_t>(name_hash >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double fs = cfg.sample_rate;
  const double f0 = spk.f0 * (1.0 + 0.06 * gauss(rng));
  const double rate = spk.rate * (1.0 + 0.08 * gauss(rng));
  const double scale = spk.tract_scale * (1.0 + 0.03 * gauss(rng));

  signalio::AudioClip clip;
  clip.sample_rate = fs;
  clip.label = digit;
  clip.speaker = spk.name;
  auto& out = clip.samples;
  out.assign(static_cast<std::size_t>(uni(rng) * cfg.lead_max * fs), 0.0);

  detail::Resonator r1, r2, r3, rn;
  double phase = 0.0;
  for (const auto& seg : tmpl) {
    const double dur = std::max(0.01, seg.duration * rate * (1.0 + cfg.timing_jitter * gauss(rng)));
    const auto n = static_cast<std::size_t>(dur * fs);
    const double j1 = 1.0 + cfg.formant_jitter * gauss(rng), j2 = 1.0 + cfg.formant_jitter * gauss(rng);
    const double gain = seg.gain * (1.0 + 0.15 * gauss(rng));
    for (std::size_t k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(n);
      const double env = std::sin(std::numbers::pi * std::min(1.0, std::min(u, 1.0 - u) * 8.0) / 2.0);
      double y = 0.0;
      if (seg.kind == Segment::Kind::Voiced) {
        const double f1 = scale * j1 * (seg.f1a + u * (seg.f1b - seg.f1a));
        const double f2 = scale * j2 * (seg.f2a + u * (seg.f2b - seg.f2a));
        const double pitch = f0 * (1.0 - 0.15 * u);
        phase += pitch / fs;
        double src = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          src = 1.0;
        }
        src += 0.01 * gauss(rng);
        y = r1.run(src, f1, 80, fs);
        y = r2.run(y, f2, 120, fs) * 0.6 + y * 0.4;
        y = r3.run(y, std::min(scale * 2600.0, 0.45 * fs), 200, fs) * 0.3 + y * 0.7;
        y *= 6.0;
      } else if (seg.kind == Segment::Kind::Noise) {
        y = rn.run(gauss(rng), std::min(scale * seg.f1a, 0.45 * fs), 600, fs);
      }
      out.push_back(gain * env * y);
    }
  }
  out.resize(out.size() + static_cast<std::size_t>(0.05 * fs), 0.0);
  double peak = 0.0;
  for (double x : out) peak = std::max(peak, std::abs(x));
  const double level = 0.3 + 0.4 * uni(rng);
  for (auto& x : out) {
    x = (peak > 0.0 ? x / peak * level : 0.0) + cfg.noise_level * level * gauss(rng);
    x = std::clamp(x, -1.0, 32767.0 / 32768.0);
  }
  return clip;
}

/// Writes digits x speakers x per_speaker files into `dir`; returns the count.
inline std::size_t write_corpus(const std::filesystem::path& dir, int per_speaker,
                                const std::vector<Speaker>& speakers = default_speakers(), const SynthConfig& cfg = {}) {
  require(per_speaker >= 1, "need at least one utterance per speaker");
  std::filesystem::create_directories(dir);
  std::size_t count = 0;
  for (int d = 0; d < 10; ++d)
    for (const auto& s : speakers)
      for (int i = 0; i < per_speaker; ++i) {
        signalio::write_wav(dir / fmt::format("{}_{}_{}.wav", d, s.name, i), synthesize(d, s, i, cfg));
        ++count;
      }
  return count;
}

}  // namespace memrc::synth
