#pragma once

// Behavioral memristor models: a TiOx non-volatile device with threshold
// drift and a window function, and a volatile WOx device whose state decays
// with a diffusion time constant. Every routine is a pure function of
// (state, params, drive).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memrc/common.hpp"

namespace memrc::devicesim {

// ---------------------------------------------------------------------------
// Fixed-step RK4 over piecewise-constant drive
// ---------------------------------------------------------------------------

struct DriveSegment {
  double value = 0.0;     // drive held constant over the segment (V)
  double duration = 0.0;  // s
};

struct Rk4Result {
  double y = 0.0;
  /// y at every segment boundary, starting with y0 (size = segments + 1).
  std::vector<double> boundary_trace;
};

/// Number of dt steps that exactly tile `duration`; throws if dt does not divide it.
inline std::size_t steps_per_segment(double duration, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integration step must be positive and finite");
  if (duration < 0.0 || !std::isfinite(duration)) throw ConfigError("segment duration must be >= 0");
  const double n = std::round(duration / dt);
  if (std::abs(n * dt - duration) > 1e-9 * std::max(duration, dt))
    throw ConfigError(fmt::format("dt {} does not divide segment duration {}", dt, duration));
  return static_cast<std::size_t>(n);
}

/// One classical RK4 step of dy/dt = f(y, u) with u held constant.
template <class Deriv>
double rk4_step(Deriv&& f, double y, double u, double dt) {
  const double k1 = f(y, u);
  const double k2 = f(y + 0.5 * dt * k1, u);
  const double k3 = f(y + 0.5 * dt * k2, u);
  const double k4 = f(y + dt * k3, u);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct NoProjection {
  double operator()(double y) const { return y; }
};

/// Integrates dy/dt = f(y, u(t)) where u is piecewise constant. `project` is
/// applied after every step (used for hard state clamps).
template <class Deriv, class Project = NoProjection>
Rk4Result integrate_rk4(Deriv&& f, double y0, std::span<const DriveSegment> drive, double dt,
                        bool keep_trace = false, Project project = {}) {
  Rk4Result out;
  double y = y0;
  if (keep_trace) out.boundary_trace.push_back(y);
  for (const auto& seg : drive) {
    const auto n = steps_per_segment(seg.duration, dt);
    for (std::size_t k = 0; k < n; ++k) y = project(rk4_step(f, y, seg.value, dt));
    if (keep_trace) out.boundary_trace.push_back(y);
  }
  out.y = y;
  return out;
}

// ---------------------------------------------------------------------------
// Pulses
// ---------------------------------------------------------------------------

struct PulseSpec {
  double amplitude = 0.0;        // V
  double width = 0.1;            // s
  int count = 1;
  double inter_pulse_gap = 0.0;  // s

  void validate() const {
    require(std::isfinite(amplitude), "pulse amplitude must be finite");
    require(width > 0.0 && std::isfinite(width), "pulse width must be > 0");
    require(count >= 1, "pulse count must be >= 1");
    require(inter_pulse_gap >= 0.0 && std::isfinite(inter_pulse_gap), "pulse gap must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// TiOx non-volatile memristor
// ---------------------------------------------------------------------------

struct NvmParams {
  double mu_v = 10e-17;  // ion mobility, model units
  double r_on = 1e3;     // Ohm
  double r_off = 1e5;    // Ohm
  double d = 10.0;       // nm
  double i_on = 20e-6;   // A
  double i_off = 22e-6;  // A
  double i_0 = 1e-6;     // A
  int p = 10;
  double v_t_plus = 1.0;
  double v_t_minus = -1.0;
  /// Multiplier on the drift prefactor mu_v * R_ON / D. The tabulated
  /// constants alone move the state by ~1e-17 nm per 100 ms pulse, which is
  /// below double resolution; 3e14 puts a 50-pulse SET train across most of
  /// the conductance window.
  double drift_scale = 3e14;

  void validate() const {
    require(d > 0.0, "NVM thickness d must be > 0");
    require(p >= 1, "NVM window exponent p must be >= 1");
    require(v_t_minus < 0.0 && v_t_plus > 0.0, "NVM thresholds must satisfy v_t_minus < 0 < v_t_plus");
    require(r_on > 0.0 && r_on < r_off, "NVM resistances must satisfy 0 < r_on < r_off");
    require(i_on != 0.0, "NVM i_on must be non-zero");
    require(v_t_plus / r_off > i_0, "NVM i_0 must stay below the smallest SET current v_t_plus / r_off");
    require(mu_v > 0.0 && drift_scale > 0.0, "NVM mobility and drift scale must be > 0");
  }
};

struct NvmState {
  double w = 0.5;  // nm, in [0, d]
};

/// Window f(w) = 1 - (2w/d - 1)^(2p).
inline double nvm_window(double w, const NvmParams& params) {
  if (!(w >= 0.0 && w <= params.d))
    throw InputError(fmt::format("nvm_window: w = {} outside [0, {}]", w, params.d));
  const double x = 2.0 * w / params.d - 1.0;
  return 1.0 - std::pow(x, 2 * params.p);
}

/// Linear mixing between the on and off resistances.
inline double nvm_resistance(double w, const NvmParams& params) {
  const double frac = w / params.d;
  return params.r_on * frac + params.r_off * (1.0 - frac);
}

inline double nvm_current(double w, double v, const NvmParams& params) {
  return v / nvm_resistance(w, params);
}

/// dw/dt in nm/s. Arguments outside [0, d] (RK4 stages) are evaluated at the
/// nearest boundary.
inline double nvm_drift(double w, double v, const NvmParams& params) {
  if (v >= params.v_t_minus && v <= params.v_t_plus) return 0.0;
  const double wc = std::clamp(w, 0.0, params.d);
  const double i = nvm_current(wc, v, params);
  const double k = params.drift_scale * params.mu_v * params.r_on / params.d;
  const double f = nvm_window(wc, params);
  if (v > params.v_t_plus) return k * params.i_off / (i - params.i_0) * f;
  return k * i / params.i_on * f;
}

inline NvmState nvm_step(NvmState state, const NvmParams& params, double v, double dt) {
  require_finite(v, "nvm_step voltage");
  require_finite(dt, "nvm_step dt");
  if (!(dt > 0.0)) throw InputError("nvm_step dt must be > 0");
  if (v >= params.v_t_minus && v <= params.v_t_plus) return state;  // dead zone, bit-exact
  auto f = [&](double w, double u) { return nvm_drift(w, u, params); };
  state.w = std::clamp(rk4_step(f, state.w, v, dt), 0.0, params.d);
  return state;
}

/// Holds `v` for `duration` using `substeps` RK4 steps.
inline NvmState nvm_hold(NvmState state, const NvmParams& params, double v, double duration, int substeps) {
  if (v >= params.v_t_minus && v <= params.v_t_plus) return state;
  const double dt = duration / substeps;
  for (int k = 0; k < substeps; ++k) state = nvm_step(state, params, v, dt);
  return state;
}

struct PulseSample {
  int pulse_index = 0;
  double conductance = 0.0;  // S
};

/// Applies the SET train then the RESET train, reading conductance at
/// `v_read` after every pulse. The integrator takes `substeps` RK4 steps per
/// pulse width.
inline std::vector<PulseSample> nvm_pulse_response(const NvmParams& params, const PulseSpec& set,
                                                   const PulseSpec& reset, double v_read,
                                                   NvmState initial = {}, int substeps = 10) {
  params.validate();
  set.validate();
  reset.validate();
  require(substeps >= 1, "substeps must be >= 1");
  if (!(v_read >= params.v_t_minus && v_read <= params.v_t_plus))
    throw InputError(fmt::format("read voltage {} V outside the non-disturbing band [{}, {}]", v_read,
                                 params.v_t_minus, params.v_t_plus));
  std::vector<PulseSample> out;
  out.reserve(static_cast<std::size_t>(set.count + reset.count));
  NvmState s = initial;
  int index = 0;
  for (const PulseSpec* train : {&set, &reset}) {
    for (int k = 0; k < train->count; ++k) {
      s = nvm_hold(s, params, train->amplitude, train->width, substeps);
      // Gap is spent at 0 V, inside the dead zone.
      const double g = v_read != 0.0 ? nvm_current(s.w, v_read, params) / v_read
                                     : 1.0 / nvm_resistance(s.w, params);
      out.push_back({index++, g});
    }
  }
  return out;
}

struct IvSample {
  double t = 0.0;
  double v = 0.0;
  double i = 0.0;
  double w = 0.0;
};

/// Sinusoidal drive v(t) = A sin(2 pi f t) sampled every dt.
inline std::vector<IvSample> nvm_iv_trace(const NvmParams& params, double v_amplitude, double frequency,
                                          int cycles, double dt, NvmState initial = {}) {
  params.validate();
  require_finite(v_amplitude, "amplitude");
  require(frequency > 0.0 && std::isfinite(frequency), "frequency must be > 0");
  require(cycles >= 1, "cycles must be >= 1");
  require(dt > 0.0 && std::isfinite(dt), "dt must be > 0");
  const double omega = 2.0 * std::numbers::pi * frequency;
  const auto n = static_cast<std::size_t>(std::llround(cycles / (frequency * dt)));
  auto drive = [&](double t) {
    // Exact zeros at half-period multiples keep the origin pinch exact.
    const double phase = t * frequency * 2.0;
    if (std::abs(phase - std::round(phase)) < 1e-12) return 0.0;
    return v_amplitude * std::sin(omega * t);
  };
  std::vector<IvSample> out;
  out.reserve(n + 1);
  double w = initial.w;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double v = drive(t);
    out.push_back({t, v, nvm_current(w, v, params), w});
    if (k == n) break;
    // Time-varying drive: evaluate v at the RK4 stage times.
    const double vh = drive(t + 0.5 * dt), v1 = drive(t + dt);
    const double k1 = nvm_drift(w, v, params);
    const double k2 = nvm_drift(w + 0.5 * dt * k1, vh, params);
    const double k3 = nvm_drift(w + 0.5 * dt * k2, vh, params);
    const double k4 = nvm_drift(w + dt * k3, v1, params);
    w = std::clamp(w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), 0.0, params.d);
  }
  return out;
}

/// |closed-path integral of i dv| over the trace (trapezoid rule).
inline double hysteresis_area(std::span<const IvSample> trace) {
  double a = 0.0;
  for (std::size_t k = 1; k < trace.size(); ++k)
    a += 0.5 * (trace[k].i + trace[k - 1].i) * (trace[k].v - trace[k - 1].v);
  return std::abs(a);
}

// ---------------------------------------------------------------------------
// WOx dynamic memristor
// ---------------------------------------------------------------------------

struct DmParams {
  double alpha = 2.5e-6;
  double beta = 0.5;
  double gamma = 2.5e-6;
  double delta = 4.0;
  double lambda = 2.5;
  double eta = 2.0;
  double tau = 0.05;  // s

  void validate() const {
    for (double x : {alpha, beta, gamma, delta, lambda, eta, tau})
      require(x > 0.0 && std::isfinite(x), "all DM parameters must be strictly positive");
  }
};

struct DmState {
  double w = 0.0;  // in [0, 1]
};

inline double dm_current(DmState state, const DmParams& params, double v) {
  return (1.0 - state.w) * params.alpha * (1.0 - std::exp(-params.beta * v)) +
         state.w * params.gamma * std::sinh(params.delta * v);
}

inline double dm_drift(double w, double v, const DmParams& params) {
  return params.lambda * std::sinh(params.eta * v) - w / params.tau;
}

inline DmState dm_step(DmState state, const DmParams& params, double v, double dt) {
  require_finite(v, "dm_step voltage");
  require_finite(dt, "dm_step dt");
  require_finite(state.w, "dm_step state");
  if (!(dt > 0.0)) throw InputError("dm_step dt must be > 0");
  // The drive term is constant over the step, so it is hoisted out of the stages.
  const double source = params.lambda * std::sinh(params.eta * v);
  const double inv_tau = 1.0 / params.tau;
  auto f = [&](double w, double) { return source - w * inv_tau; };
  state.w = std::clamp(rk4_step(f, state.w, v, dt), 0.0, 1.0);
  return state;
}

inline DmState dm_hold(DmState state, const DmParams& params, double v, double duration, int substeps) {
  const double dt = duration / substeps;
  for (int k = 0; k < substeps; ++k) state = dm_step(state, params, v, dt);
  return state;
}

/// Default stream timing for the 4-bit demo: 1.8 V / 10 ms pulses, 10 ms gaps.
inline PulseSpec default_dm_stream_pulse() { return {1.8, 0.01, 4, 0.01}; }

/// Drives a pulse stream ('1' = pulse at amplitude, '0' = 0 V for the same
/// slot, earliest bit first, gap between slots) and returns the final state.
inline DmState dm_apply_stream(const DmParams& params, std::string_view bits, const PulseSpec& pulse,
                               DmState initial = {}, int substeps = 10) {
  params.validate();
  pulse.validate();
  require(!bits.empty(), "pulse stream must have at least one bit");
  require(substeps >= 1, "substeps must be >= 1");
  DmState s = initial;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    const char b = bits[k];
    if (b != '0' && b != '1') throw InputError(fmt::format("invalid bit '{}' in pulse stream", b));
    s = dm_hold(s, params, b == '1' ? pulse.amplitude : 0.0, pulse.width, substeps);
    if (k + 1 < bits.size() && pulse.inter_pulse_gap > 0.0) {
      const auto n = std::max<long>(1, std::lround(substeps * pulse.inter_pulse_gap / pulse.width));
      s = dm_hold(s, params, 0.0, pulse.inter_pulse_gap, static_cast<int>(n));
    }
  }
  return s;
}

/// Read current after the stream, sampled at `v_read`.
inline double dm_pulse_stream_state(const DmParams& params, std::string_view bits, const PulseSpec& pulse,
                                    double v_read = 0.5, int substeps = 10) {
  return dm_current(dm_apply_stream(params, bits, pulse, {}, substeps), params, v_read);
}

inline std::string bit_pattern(unsigned value, unsigned width) {
  std::string s(width, '0');
  for (unsigned k = 0; k < width; ++k)
    if (value & (1u << (width - 1 - k))) s[k] = '1';
  return s;
}

struct StreamReadout {
  std::string pattern;
  double current = 0.0;
};

/// All sixteen 4-bit streams, in pattern order 0000..1111.
inline std::array<StreamReadout, 16> dm_sixteen_states(const DmParams& params,
                                                       const PulseSpec& pulse = default_dm_stream_pulse(),
                                                       double v_read = 0.5, int substeps = 10) {
  std::array<StreamReadout, 16> out;
  for (unsigned k = 0; k < 16; ++k) {
    out[k].pattern = bit_pattern(k, 4);
    out[k].current = dm_pulse_stream_state(params, out[k].pattern, pulse, v_read, substeps);
  }
  return out;
}

/// Smallest gap between sorted currents divided by their span.
inline double min_relative_gap(std::span<const StreamReadout> states) {
  std::vector<double> c;
  for (const auto& s : states) c.push_back(s.current);
  std::sort(c.begin(), c.end());
  const double span = c.back() - c.front();
  double g = span;
  for (std::size_t k = 1; k < c.size(); ++k) g = std::min(g, c[k] - c[k - 1]);
  return span > 0.0 ? g / span : 0.0;
}

/// Per-substep transient of a DM under a stream, for t,v,i,w plots.
inline std::vector<IvSample> dm_stream_trace(const DmParams& params, std::string_view bits,
                                             const PulseSpec& pulse, int substeps = 10) {
  params.validate();
  pulse.validate();
  std::vector<IvSample> out;
  DmState s{};
  double t = 0.0;
  out.push_back({t, 0.0, 0.0, s.w});
  auto hold = [&](double v, double duration, int n) {
    const double dt = duration / n;
    for (int k = 0; k < n; ++k) {
      s = dm_step(s, params, v, dt);
      t += dt;
      out.push_back({t, v, dm_current(s, params, v), s.w});
    }
  };
  for (std::size_t k = 0; k < bits.size(); ++k) {
    hold(bits[k] == '1' ? pulse.amplitude : 0.0, pulse.width, substeps);
    if (k + 1 < bits.size() && pulse.inter_pulse_gap > 0.0)
      hold(0.0, pulse.inter_pulse_gap,
           static_cast<int>(std::max<long>(1, std::lround(substeps * pulse.inter_pulse_gap / pulse.width))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

inline CsvWriter transient_csv(std::span<const IvSample> trace) {
  CsvWriter csv({"t", "v", "i", "w"});
  for (const auto& s : trace) {
    csv.cell(s.t).cell(s.v).cell(s.i).cell(s.w);
    csv.end_row();
  }
  return csv;
}

inline CsvWriter pulse_response_csv(std::span<const PulseSample> samples) {
  CsvWriter csv({"pulse_index", "conductance_S"});
  for (const auto& s : samples) {
    csv.cell(s.pulse_index).cell(s.conductance);
    csv.end_row();
  }
  return csv;
}

}  // namespace memrc::devicesim
