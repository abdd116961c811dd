#pragma once

// Memristive crossbar readout. Signed weights are differential conductance
// pairs; updates are realized as pulse trains along saturating LTP/LTD curves,
// so the weight that lands on the array is not the weight the optimizer asked for.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "memrc/common.hpp"

namespace memrc::readout {

// ---------------------------------------------------------------------------
// Pulse-number -> conductance model
// ---------------------------------------------------------------------------

struct PulseUpdateModel {
  double x_min = 0.0;    // S
  double x_max = 2e-5;   // S
  double p_max = 100.0;  // pulses for a full swing
  double a = 30.0;       // nonlinearity, signed

  void validate() const {
    require(x_min < x_max, "pulse model requires x_min < x_max");
    require(p_max >= 1.0, "pulse model requires p_max >= 1");
    require(a != 0.0 && std::isfinite(a), "pulse model nonlinearity a must be non-zero");
  }
  bool operator==(const PulseUpdateModel&) const = default;
};

/// B = (x_max - x_min) / (1 - exp(-p_max / a)).
inline double scale_factor_b(const PulseUpdateModel& m) {
  require(m.a != 0.0 && m.p_max >= 1.0, "scale factor needs a != 0 and p_max >= 1");
  return (m.x_max - m.x_min) / -std::expm1(-m.p_max / m.a);
}

inline void check_pulses(double p, const PulseUpdateModel& m) {
  if (!(p >= 0.0 && p <= m.p_max))
    throw InputError(fmt::format("pulse count {} outside [0, {}]", p, m.p_max));
}

/// Potentiation curve X(P) = B (1 - exp(-P/a)) + x_min.
inline double conductance_ltp(double pulses, const PulseUpdateModel& m) {
  check_pulses(pulses, m);
  return scale_factor_b(m) * -std::expm1(-pulses / m.a) + m.x_min;
}

/// Depression curve X(P) = -B (1 - exp((P - p_max)/a)) + x_max.
inline double conductance_ltd(double pulses, const PulseUpdateModel& m) {
  check_pulses(pulses, m);
  return scale_factor_b(m) * std::expm1((pulses - m.p_max) / m.a) + m.x_max;
}

inline double ltp_slope(double pulses, const PulseUpdateModel& m) {
  return scale_factor_b(m) / m.a * std::exp(-pulses / m.a);
}

inline double ltd_slope(double pulses, const PulseUpdateModel& m) {
  return scale_factor_b(m) / m.a * std::exp((pulses - m.p_max) / m.a);
}

/// Inverse of the potentiation curve, clamped to [0, p_max].
inline double ltp_position(double g, const PulseUpdateModel& m) {
  const double frac = (g - m.x_min) / scale_factor_b(m);
  const double p = -m.a * std::log1p(-frac);
  return std::isfinite(p) ? std::clamp(p, 0.0, m.p_max) : (frac > 0 ? m.p_max : 0.0);
}

inline double ltd_position(double g, const PulseUpdateModel& m) {
  const double frac = (m.x_max - g) / scale_factor_b(m);
  const double p = m.p_max + m.a * std::log1p(-frac);
  return std::isfinite(p) ? std::clamp(p, 0.0, m.p_max) : 0.0;
}

// ---------------------------------------------------------------------------
// Devices and crossbars
// ---------------------------------------------------------------------------

struct CrossbarDevice {
  double g = 0.0;          // S, always conductance_ltp(pulse_pos, model)
  double pulse_pos = 0.0;  // continuous, in [0, p_max]
  PulseUpdateModel model{};

  bool operator==(const CrossbarDevice&) const = default;
};

/// Device sitting at conductance `g` (clamped into its range) on its own curve.
inline CrossbarDevice make_device(const PulseUpdateModel& model, double g) {
  CrossbarDevice d;
  d.model = model;
  d.pulse_pos = ltp_position(std::clamp(g, model.x_min, model.x_max), model);
  d.g = conductance_ltp(d.pulse_pos, model);
  return d;
}

/// Realizes a requested conductance change as a pulse displacement. The pulse
/// count comes from the local slope of the controller's curve (the device's
/// own curve when no controller is given); the device then moves along its
/// own LTP (delta_g > 0) or LTD (delta_g < 0) curve. Saturation at either end
/// is silent; `saturated` reports it.
inline CrossbarDevice program_weight_update(const CrossbarDevice& device, double delta_g,
                                            const PulseUpdateModel* controller = nullptr,
                                            bool* saturated = nullptr) {
  if (saturated) *saturated = false;
  if (delta_g == 0.0 || !std::isfinite(delta_g)) return device;
  const PulseUpdateModel& ctrl = controller ? *controller : device.model;
  const PulseUpdateModel& own = device.model;
  CrossbarDevice out = device;
  if (delta_g > 0.0) {
    if (device.pulse_pos >= own.p_max) {
      if (saturated) *saturated = true;
      return device;
    }
    const double p = device.pulse_pos + delta_g / ltp_slope(std::min(device.pulse_pos, ctrl.p_max), ctrl);
    if (p > own.p_max && saturated) *saturated = true;
    out.pulse_pos = std::clamp(p, 0.0, own.p_max);
    out.g = conductance_ltp(out.pulse_pos, own);
    return out;
  }
  if (device.pulse_pos <= 0.0) {
    if (saturated) *saturated = true;
    return device;
  }
  const double q = ltd_position(device.g, own);
  const double q_new = q + delta_g / ltd_slope(std::min(q, ctrl.p_max), ctrl);
  if (q_new < 0.0 && saturated) *saturated = true;
  const double g = conductance_ltd(std::clamp(q_new, 0.0, own.p_max), own);
  out.pulse_pos = ltp_position(g, own);
  out.g = conductance_ltp(out.pulse_pos, own);
  return out;
}

/// Weight clip interval on g_pos - g_neg, in Siemens.
struct Region {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Region&) const = default;
};

enum class RegionPreset { R1, R2, R3 };

inline Region region_preset(RegionPreset r) {
  switch (r) {
    case RegionPreset::R1: return {-1.30e-5, 0.40e-5};
    case RegionPreset::R2: return {-1.20e-5, 0.30e-5};
    case RegionPreset::R3: return {-1.10e-5, 0.30e-5};
  }
  return {};
}

struct Crossbar {
  std::size_t rows = 0;  // inputs
  std::size_t cols = 0;  // outputs
  std::vector<CrossbarDevice> pos, neg;
  double weight_scale = 1.0;  // network units per Siemens
  PulseUpdateModel nominal{};
  std::optional<Region> region;
  bool ideal = false;  // float weights, devices bypassed
  Matrix w;            // effective weights in network units (cache in device mode)

  std::size_t index(std::size_t i, std::size_t j) const { return i * cols + j; }
  double weight(std::size_t i, std::size_t j) const { return w(i, j); }
  double weight_siemens(std::size_t i, std::size_t j) const {
    return ideal ? w(i, j) / weight_scale : pos[index(i, j)].g - neg[index(i, j)].g;
  }
  void refresh(std::size_t k) {
    if (!ideal) w.data[k] = (pos[k].g - neg[k].g) * weight_scale;
  }
  void refresh_all() {
    for (std::size_t k = 0; k < w.data.size(); ++k) refresh(k);
  }
};

inline void set_pair(Crossbar& xb, std::size_t k, double g_pos, double g_neg) {
  xb.pos[k] = make_device(xb.pos[k].model, g_pos);
  xb.neg[k] = make_device(xb.neg[k].model, g_neg);
  xb.refresh(k);
}

/// Programs a crossbar directly to the given weights (network units), pairs
/// centred on the nominal midpoint conductance.
inline Crossbar crossbar_from_weights(const Matrix& weights, const PulseUpdateModel& model, double weight_scale,
                                      bool ideal = false) {
  model.validate();
  require(weight_scale > 0.0, "weight scale must be > 0");
  Crossbar xb;
  xb.rows = weights.rows;
  xb.cols = weights.cols;
  xb.weight_scale = weight_scale;
  xb.nominal = model;
  xb.ideal = ideal;
  xb.w = weights;
  if (ideal) return xb;
  const double mid = 0.5 * (model.x_min + model.x_max);
  xb.pos.assign(weights.data.size(), make_device(model, mid));
  xb.neg = xb.pos;
  for (std::size_t k = 0; k < weights.data.size(); ++k) {
    const double half = 0.5 * weights.data[k] / weight_scale;
    set_pair(xb, k, mid + half, mid - half);
  }
  return xb;
}

/// Uniform(-limit, limit) weights with limit = init_scale * sqrt(6 / (rows + cols)).
inline Crossbar make_crossbar(std::size_t rows, std::size_t cols, const PulseUpdateModel& model, double weight_scale,
                              double init_scale, std::mt19937_64& rng, bool ideal = false) {
  require(rows >= 1 && cols >= 1, "crossbar dimensions must be >= 1");
  const double limit = init_scale * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix w(rows, cols);
  for (auto& x : w.data) x = u(rng);
  return crossbar_from_weights(w, model, weight_scale, ideal);
}

/// y_j = sum_i x_i w_ij, ascending i.
inline std::vector<double> vmm(const Crossbar& xb, std::span<const double> x) {
  if (x.size() != xb.rows)
    throw InputError(fmt::format("vmm: input length {} does not match crossbar rows {}", x.size(), xb.rows));
  std::vector<double> y(xb.cols, 0.0);
  for (std::size_t i = 0; i < xb.rows; ++i) {
    const double xi = x[i];
    const double* wr = xb.w.data.data() + i * xb.cols;
    for (std::size_t j = 0; j < xb.cols; ++j) y[j] += xi * wr[j];
  }
  return y;
}

/// Pulls every pair back inside the region by reprogramming both devices.
inline void enforce_region(Crossbar& xb, std::size_t k) {
  if (!xb.region) return;
  const auto [lo, hi] = *xb.region;
  if (xb.ideal) {
    xb.w.data[k] = std::clamp(xb.w.data[k], lo * xb.weight_scale, hi * xb.weight_scale);
    return;
  }
  const double ws = xb.pos[k].g - xb.neg[k].g;
  if (ws >= lo && ws <= hi) return;
  const double target = std::clamp(ws, lo, hi);
  const auto& mp = xb.pos[k].model;
  const auto& mn = xb.neg[k].model;
  const double centre = 0.5 * (xb.pos[k].g + xb.neg[k].g);
  double gp = std::clamp(centre + 0.5 * target, mp.x_min, mp.x_max);
  const double gn = std::clamp(gp - target, mn.x_min, mn.x_max);
  gp = std::clamp(gn + target, mp.x_min, mp.x_max);
  set_pair(xb, k, gp, gn);
}

inline void clip_region(Crossbar& xb, Region region) {
  require(region.lo < region.hi, "region requires lo < hi");
  xb.region = region;
  for (std::size_t k = 0; k < xb.w.data.size(); ++k) enforce_region(xb, k);
}

/// Applies an update in network units. Device mode splits each change evenly
/// over the pair (potentiate one side, depress the other). Returns the number
/// of device programming events that hit a curve end.
inline std::size_t apply_update(Crossbar& xb, const Matrix& delta_w) {
  std::size_t saturations = 0;
  for (std::size_t k = 0; k < xb.w.data.size(); ++k) {
    const double d = delta_w.data[k];
    if (d == 0.0) continue;
    if (xb.ideal) {
      xb.w.data[k] += d;
    } else {
      const double dg = d / xb.weight_scale;
      bool sp = false, sn = false;
      xb.pos[k] = program_weight_update(xb.pos[k], 0.5 * dg, &xb.nominal, &sp);
      xb.neg[k] = program_weight_update(xb.neg[k], -0.5 * dg, &xb.nominal, &sn);
      saturations += sp + sn;
      xb.refresh(k);
    }
    enforce_region(xb, k);
  }
  return saturations;
}

// ---------------------------------------------------------------------------
// Two-layer readout
// ---------------------------------------------------------------------------

enum class Head { Softmax, Linear };

struct ReadoutModel {
  Crossbar layer1;
  Crossbar layer2;
  Head head = Head::Softmax;

  std::size_t n_in() const { return layer1.rows; }
  std::size_t n_hidden() const { return layer1.cols; }
  std::size_t n_out() const { return layer2.cols; }
};

struct ReadoutConfig {
  std::size_t n_hidden = 64;
  PulseUpdateModel pulse{};
  double weight_scale = 1e5;  // 1 network unit = 10 uS of differential conductance
  double init_scale = 1.0;
  bool ideal = false;
  std::uint64_t seed = 1;
};

inline ReadoutModel make_readout(std::size_t n_in, std::size_t n_out, Head head, const ReadoutConfig& cfg) {
  cfg.pulse.validate();
  std::mt19937_64 rng(cfg.seed);
  ReadoutModel m;
  m.layer1 = make_crossbar(n_in, cfg.n_hidden, cfg.pulse, cfg.weight_scale, cfg.init_scale, rng, cfg.ideal);
  m.layer2 = make_crossbar(cfg.n_hidden, n_out, cfg.pulse, cfg.weight_scale, cfg.init_scale, rng, cfg.ideal);
  m.head = head;
  return m;
}

inline void softmax_inplace(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) s += (v = std::exp(v - mx));
  for (auto& v : z) v /= s;
}

struct ForwardTrace {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> output;  // after head
};

inline ForwardTrace forward_trace(const ReadoutModel& m, std::span<const double> x) {
  if (m.layer1.cols != m.layer2.rows) throw InputError("readout layer shapes do not chain");
  ForwardTrace t;
  t.hidden_pre = vmm(m.layer1, x);
  t.hidden = t.hidden_pre;
  for (auto& h : t.hidden) h = std::max(h, 0.0);
  t.output = vmm(m.layer2, t.hidden);
  if (m.head == Head::Softmax) softmax_inplace(t.output);
  return t;
}

/// layer2(ReLU(layer1(x))) followed by the head.
inline std::vector<double> forward(const ReadoutModel& m, std::span<const double> x) {
  return forward_trace(m, x).output;
}

inline Matrix predict(const ReadoutModel& m, const Matrix& x) {
  Matrix out(x.rows, m.n_out());
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto y = forward(m, x.row(r));
    std::copy(y.begin(), y.end(), out.row(r).begin());
  }
  return out;
}

enum class Loss { CrossEntropy, Mse };

inline double sample_loss(Loss loss, std::span<const double> out, std::span<const double> target) {
  double l = 0.0;
  if (loss == Loss::CrossEntropy) {
    for (std::size_t j = 0; j < out.size(); ++j)
      if (target[j] != 0.0) l -= target[j] * std::log(std::max(out[j], 1e-300));
  } else {
    for (std::size_t j = 0; j < out.size(); ++j) l += (out[j] - target[j]) * (out[j] - target[j]);
    l /= static_cast<double>(out.size());
  }
  return l;
}

struct Gradients {
  double loss = 0.0;  // batch mean
  Matrix g1, g2;
};

/// Mean loss and its gradient w.r.t. the effective weights of both layers over
/// the rows listed in `batch` (accumulated in list order).
inline Gradients loss_and_gradients(const ReadoutModel& m, const Matrix& x, const Matrix& y, Loss loss,
                                    std::span<const std::size_t> batch) {
  const std::size_t nh = m.n_hidden(), no = m.n_out(), ni = m.n_in();
  Gradients g{0.0, Matrix(ni, nh), Matrix(nh, no)};
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dz(no), dh(nh);
  for (std::size_t r : batch) {
    const auto xr = x.row(r);
    const auto yr = y.row(r);
    const auto t = forward_trace(m, xr);
    g.loss += sample_loss(loss, t.output, yr) * inv_b;
    // Softmax + cross-entropy and linear + MSE both give a residual-form dL/dz.
    for (std::size_t j = 0; j < no; ++j)
      dz[j] = loss == Loss::CrossEntropy ? (t.output[j] - yr[j]) * inv_b
                                         : 2.0 * (t.output[j] - yr[j]) * inv_b / static_cast<double>(no);
    for (std::size_t h = 0; h < nh; ++h) {
      double s = 0.0;
      for (std::size_t j = 0; j < no; ++j) {
        g.g2(h, j) += t.hidden[h] * dz[j];
        s += m.layer2.w(h, j) * dz[j];
      }
      dh[h] = t.hidden_pre[h] > 0.0 ? s : 0.0;
    }
    for (std::size_t i = 0; i < ni; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      double* gr = g.g1.data.data() + i * nh;
      for (std::size_t h = 0; h < nh; ++h) gr[h] += xi * dh[h];
    }
  }
  return g;
}

struct TrainConfig {
  int epochs = 200;
  std::size_t batch = 32;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Loss loss = Loss::CrossEntropy;
  std::uint64_t seed = 1;  // shuffling
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = std::nan("");
  double val_loss = std::nan("");
  double val_acc = std::nan("");
  std::size_t saturations = 0;
};

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = std::nan("");
};

inline Evaluation evaluate(const ReadoutModel& m, const Matrix& x, const Matrix& y, Loss loss) {
  Evaluation e;
  if (x.rows == 0) return {std::nan(""), std::nan("")};
  std::size_t correct = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto out = forward(m, x.row(r));
    e.loss += sample_loss(loss, out, y.row(r));
    if (argmax(out) == argmax(y.row(r))) ++correct;
  }
  e.loss /= static_cast<double>(x.rows);
  if (loss == Loss::CrossEntropy) e.accuracy = static_cast<double>(correct) / static_cast<double>(x.rows);
  return e;
}

class AdamState {
 public:
  explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  /// Fills `delta` with the Adam step for gradient `g` at iteration t (1-based).
  void step(const Matrix& g, Matrix& delta, const TrainConfig& c, long t) {
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
    for (std::size_t k = 0; k < g.data.size(); ++k) {
      m_[k] = c.beta1 * m_[k] + (1.0 - c.beta1) * g.data[k];
      v_[k] = c.beta2 * v_[k] + (1.0 - c.beta2) * g.data[k] * g.data[k];
      delta.data[k] = -c.lr * (m_[k] / bc1) / (std::sqrt(v_[k] / bc2) + c.eps);
    }
  }

 private:
  std::vector<double> m_, v_;
};

/// Mini-batch Adam on the realized weights; every step is pushed through the
/// device update path (or applied directly for ideal crossbars). One metrics
/// row per epoch, evaluated on the full train and validation sets.
inline std::vector<EpochMetrics> train(ReadoutModel& m, const Matrix& x, const Matrix& y, const TrainConfig& cfg,
                                       const Matrix* x_val = nullptr, const Matrix* y_val = nullptr) {
  require(x.rows == y.rows && x.rows > 0, "training set must be non-empty with matching targets");
  require(x.cols == m.n_in() && y.cols == m.n_out(), "training data shape does not match readout");
  require(cfg.batch >= 1 && cfg.epochs >= 0, "batch >= 1 and epochs >= 0 required");
  if (x_val) require(y_val && x_val->rows == y_val->rows, "validation targets missing or mismatched");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  AdamState a1(m.layer1.w.data.size()), a2(m.layer2.w.data.size());
  Matrix d1(m.layer1.rows, m.layer1.cols), d2(m.layer2.rows, m.layer2.cols);
  std::vector<EpochMetrics> log;
  long t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t sats = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch) {
      const std::span<const std::size_t> batch(order.data() + b, std::min(cfg.batch, order.size() - b));
      const auto g = loss_and_gradients(m, x, y, cfg.loss, batch);
      if (!std::isfinite(g.loss))
        throw NumericalError(fmt::format("training loss became {} at epoch {}, batch starting {}", g.loss, epoch, b));
      if (cfg.lr == 0.0) continue;
      ++t;
      a1.step(g.g1, d1, cfg, t);
      a2.step(g.g2, d2, cfg, t);
      sats += apply_update(m.layer1, d1);
      sats += apply_update(m.layer2, d2);
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.saturations = sats;
    const auto tr = evaluate(m, x, y, cfg.loss);
    em.train_loss = tr.loss;
    em.train_acc = tr.accuracy;
    if (x_val && x_val->rows) {
      const auto va = evaluate(m, *x_val, *y_val, cfg.loss);
      em.val_loss = va.loss;
      em.val_acc = va.accuracy;
    }
    if (!std::isfinite(em.train_loss)) throw NumericalError(fmt::format("non-finite loss after epoch {}", epoch));
    log.push_back(em);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Nonidealities
// ---------------------------------------------------------------------------

struct NonidealitySpec {
  double d2d_sigma = 0.0;
  std::optional<Region> region;
  std::uint64_t seed = 1;
};

namespace detail {
inline double truncated_gauss(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  while (true) {
    const double e = n(rng);
    if (std::abs(e) <= 3.0 * sigma) return e;
  }
}

inline void perturb_devices(std::vector<CrossbarDevice>& devs, double sigma, std::mt19937_64& rng) {
  for (auto& d : devs) {
    auto m = d.model;
    m.a *= 1.0 + truncated_gauss(rng, sigma);
    m.x_min *= 1.0 + truncated_gauss(rng, sigma);
    m.x_max *= 1.0 + truncated_gauss(rng, sigma);
    if (m.x_min > m.x_max) std::swap(m.x_min, m.x_max);
    if (m.x_min == m.x_max) m.x_max = std::nextafter(m.x_max, INFINITY);
    d.model = m;
    d.pulse_pos = std::min(d.pulse_pos, m.p_max);
    d.g = conductance_ltp(d.pulse_pos, m);
  }
}
}  // namespace detail

/// Multiplies each device's a, x_min and x_max by an independent (1 + e),
/// e ~ N(0, sigma) truncated at 3 sigma. Devices keep their pulse positions.
inline void apply_d2d(ReadoutModel& m, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0 && sigma <= 0.5, "D2D sigma must be in [0, 0.5]");
  if (sigma == 0.0) return;
  std::mt19937_64 rng(seed);
  for (Crossbar* xb : {&m.layer1, &m.layer2}) {
    if (xb->ideal) continue;
    detail::perturb_devices(xb->pos, sigma, rng);
    detail::perturb_devices(xb->neg, sigma, rng);
    xb->refresh_all();
    if (xb->region)
      for (std::size_t k = 0; k < xb->w.data.size(); ++k) enforce_region(*xb, k);
  }
}

inline void clip_region(ReadoutModel& m, Region region) {
  clip_region(m.layer1, region);
  clip_region(m.layer2, region);
}

/// Full device range of the nominal model, i.e. a region that never binds.
inline Region full_range(const PulseUpdateModel& m) { return {-(m.x_max - m.x_min), m.x_max - m.x_min}; }

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

/// Effective weights in Siemens, one row per input line.
inline CsvWriter weight_snapshot_csv(const Crossbar& xb) {
  std::vector<std::string> header{"input"};
  for (std::size_t j = 0; j < xb.cols; ++j) header.push_back(fmt::format("out_{}", j));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < xb.rows; ++i) {
    csv.cell(i);
    for (std::size_t j = 0; j < xb.cols; ++j) csv.cell(xb.weight_siemens(i, j));
    csv.end_row();
  }
  return csv;
}

inline CsvWriter training_log_csv(std::span<const EpochMetrics> log) {
  CsvWriter csv({"epoch", "train_loss", "train_acc", "val_loss", "val_acc"});
  for (const auto& e : log) {
    csv.cell(e.epoch).cell(e.train_loss).cell(e.train_acc).cell(e.val_loss).cell(e.val_acc);
    csv.end_row();
  }
  return csv;
}

}  // namespace memrc::readout
