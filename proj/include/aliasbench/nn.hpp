#pragma once

// Feedforward WaveNet-style temporal convolutional network: a stack of
// dilated causal 1-D convolutions whose activated outputs feed per-layer
// skip connections, summed and mapped to one output sample by a linear 1x1
// head.  Includes hand-written reverse-mode gradients for the pre-emphasized
// ESR loss and a standard Adam optimizer.
//
// Layer k (input stream r_k, C channels; r_0 is the mono input):
//   u_k = dilated_conv_k(r_k)                       (C outputs, 2C if gated)
//   h_k = Act(u_k)            or  Act(u_k[0:C]) * sigmoid(u_k[C:2C])
//   skip_k = h_k              or  P_k h_k           (width C, or C/2 gated)
//   r_{k+1} = r_k + R_k h_k   (layer 0: R_0 h_0; last layer: no residual)
//   y = head_w . sum_k skip_k (+ head bias when enabled)
//
// All arithmetic is in 64-bit floats.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "aliasbench/activations.hpp"
#include "aliasbench/errors.hpp"
#include "aliasbench/rng.hpp"
#include "aliasbench/signal.hpp"

namespace aliasbench::nn {

using activations::ActivationSpec;

// Two stacked runs of 1, 2, 4, ..., 256.
inline std::vector<int> default_dilations() {
  std::vector<int> d;
  for (int rep = 0; rep < 2; ++rep)
    for (int v = 1; v <= 256; v <<= 1) d.push_back(v);
  return d;
}

struct TcnConfig {
  int channels = 16;
  int kernel_size = 3;
  std::vector<int> dilations = default_dilations();
  ActivationSpec activation{};  // non-gated CustomTanh, alpha 1
  bool head_bias = false;
  bool conv_bias = true;
  int input_channels = 1;

  int skip_channels() const { return activation.gated ? channels / 2 : channels; }

  void validate() const {
    if (channels < 1) raise(Errc::config_error, "TcnConfig: channels must be >= 1");
    if (kernel_size < 1) raise(Errc::config_error, "TcnConfig: kernel_size must be >= 1");
    if (dilations.empty()) raise(Errc::config_error, "TcnConfig: dilation list is empty");
    for (int d : dilations)
      if (d < 1) raise(Errc::config_error, "TcnConfig: dilations must be >= 1");
    if (input_channels != 1) raise(Errc::config_error, "TcnConfig: input is mono (input_channels = 1)");
    if (activation.gated && channels % 2 != 0)
      raise(Errc::config_error, "TcnConfig: gated activations need an even channel count");
    if (activations::uses_alpha(activation.kind) && !(activation.alpha > 0.0))
      raise(Errc::config_error, "TcnConfig: activation alpha must be positive");
  }
};

// Number of past input samples influencing one output sample.
inline std::size_t receptive_field(const TcnConfig& c) {
  c.validate();
  std::size_t sum = 0;
  for (int d : c.dilations) sum += static_cast<std::size_t>(d);
  return 1 + static_cast<std::size_t>(c.kernel_size - 1) * sum;
}

struct LayerShape {
  int in_ch;
  int conv_out;
  int kernel;
  int dilation;
  bool has_residual;  // last layer feeds no next stream
};

inline LayerShape layer_shape(const TcnConfig& c, std::size_t k) {
  LayerShape s;
  s.in_ch = k == 0 ? c.input_channels : c.channels;
  s.conv_out = c.activation.gated ? 2 * c.channels : c.channels;
  s.kernel = c.kernel_size;
  s.dilation = c.dilations[k];
  s.has_residual = k + 1 < c.dilations.size();
  return s;
}

struct LayerBuffers {
  std::vector<double> conv_w;  // [conv_out][in_ch][kernel]
  std::vector<double> conv_b;  // [conv_out], empty without conv bias
  std::vector<double> res_w;   // [C][C] 1x1 residual projection, empty on the last layer
  std::vector<double> skip_w;  // [C/2][C] gated skip down-projection, empty when non-gated
};

// All trainable buffers of a model (or, with the same shapes, a gradient or
// Adam moment set).  Buffer order is part of the format: checkpoints, the
// optimizer and the initializer all walk it identically.
struct ParamSet {
  std::vector<LayerBuffers> layers;
  std::vector<double> head_w;
  std::vector<double> head_b;  // one entry when the head has a bias

  template <typename F>
  void for_each_buffer(F&& f) {
    for (auto& l : layers) {
      f(l.conv_w);
      f(l.conv_b);
      f(l.res_w);
      f(l.skip_w);
    }
    f(head_w);
    f(head_b);
  }

  template <typename F>
  void for_each_buffer(F&& f) const {
    for (const auto& l : layers) {
      f(l.conv_w);
      f(l.conv_b);
      f(l.res_w);
      f(l.skip_w);
    }
    f(head_w);
    f(head_b);
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for_each_buffer([&](const std::vector<double>& b) { n += b.size(); });
    return n;
  }
};

using GradientSet = ParamSet;

inline ParamSet make_param_set(const TcnConfig& c) {
  c.validate();
  ParamSet p;
  p.layers.resize(c.dilations.size());
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const LayerShape s = layer_shape(c, k);
    auto& l = p.layers[k];
    l.conv_w.assign(static_cast<std::size_t>(s.conv_out) * s.in_ch * s.kernel, 0.0);
    if (c.conv_bias) l.conv_b.assign(static_cast<std::size_t>(s.conv_out), 0.0);
    if (s.has_residual) l.res_w.assign(static_cast<std::size_t>(c.channels) * c.channels, 0.0);
    if (c.activation.gated) l.skip_w.assign(static_cast<std::size_t>(c.skip_channels()) * c.channels, 0.0);
  }
  p.head_w.assign(static_cast<std::size_t>(c.skip_channels()), 0.0);
  if (c.head_bias) p.head_b.assign(1, 0.0);
  return p;
}

struct TcnModel {
  TcnConfig config;
  ParamSet params;

  std::size_t parameter_count() const { return params.total_size(); }
};

// Deterministic: the same (config, seed) produces bit-identical buffers.
// Weights are uniform in +-1/sqrt(fan_in) per projection.
inline TcnModel init_model(const TcnConfig& config, std::uint64_t seed) {
  TcnModel m{config, make_param_set(config)};
  Rng rng(seed);
  auto fill = [&rng](std::vector<double>& buf, double bound) {
    for (double& v : buf) v = rng.uniform(-bound, bound);
  };
  for (std::size_t k = 0; k < m.params.layers.size(); ++k) {
    const LayerShape s = layer_shape(config, k);
    auto& l = m.params.layers[k];
    const double conv_bound = 1.0 / std::sqrt(static_cast<double>(s.in_ch) * s.kernel);
    fill(l.conv_w, conv_bound);
    fill(l.conv_b, conv_bound);
    const double one_by_sqrt_c = 1.0 / std::sqrt(static_cast<double>(config.channels));
    fill(l.res_w, one_by_sqrt_c);
    fill(l.skip_w, one_by_sqrt_c);
  }
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(config.skip_channels()));
  fill(m.params.head_w, head_bound);
  fill(m.params.head_b, head_bound);
  return m;
}

namespace detail {

// u[o][n] = b[o] + sum_{c,t} w[o][c][t] * x[c][n - t*d], zero left history.
inline void conv_forward(const double* x, int in_ch, const double* w, const double* b, int out_ch,
                         int kernel, int dilation, double* u, std::size_t t_len) {
  for (int o = 0; o < out_ch; ++o) {
    double* __restrict uo = u + static_cast<std::size_t>(o) * t_len;
    const double bias = b ? b[o] : 0.0;
    for (std::size_t n = 0; n < t_len; ++n) uo[n] = bias;
    for (int c = 0; c < in_ch; ++c) {
      const double* __restrict xc = x + static_cast<std::size_t>(c) * t_len;
      for (int t = 0; t < kernel; ++t) {
        const double wv = w[(static_cast<std::size_t>(o) * in_ch + c) * kernel + t];
        const std::size_t off = static_cast<std::size_t>(t) * dilation;
        if (off >= t_len) continue;
        for (std::size_t n = off; n < t_len; ++n) uo[n] += wv * xc[n - off];
      }
    }
  }
}

// Accumulates d_w, d_b and (when dx != nullptr) the input gradient.
inline void conv_backward(const double* x, int in_ch, const double* w, int out_ch, int kernel,
                          int dilation, const double* du, std::size_t t_len, double* dw, double* db,
                          double* dx) {
  for (int o = 0; o < out_ch; ++o) {
    const double* __restrict duo = du + static_cast<std::size_t>(o) * t_len;
    if (db) {
      double acc = 0.0;
      for (std::size_t n = 0; n < t_len; ++n) acc += duo[n];
      db[o] += acc;
    }
    for (int c = 0; c < in_ch; ++c) {
      const double* __restrict xc = x + static_cast<std::size_t>(c) * t_len;
      double* __restrict dxc = dx ? dx + static_cast<std::size_t>(c) * t_len : nullptr;
      for (int t = 0; t < kernel; ++t) {
        const std::size_t wi = (static_cast<std::size_t>(o) * in_ch + c) * kernel + t;
        const std::size_t off = static_cast<std::size_t>(t) * dilation;
        if (off >= t_len) continue;
        double acc = 0.0;
        for (std::size_t n = off; n < t_len; ++n) acc += duo[n] * xc[n - off];
        dw[wi] += acc;
        if (dxc) {
          const double wv = w[wi];
          for (std::size_t n = off; n < t_len; ++n) dxc[n - off] += wv * duo[n];
        }
      }
    }
  }
}

// y[i][n] += m[i][j] x[j][n]
inline void mat_apply(const double* m, int out_ch, int in_ch, const double* x, double* y,
                      std::size_t t_len) {
  for (int i = 0; i < out_ch; ++i) {
    double* __restrict yi = y + static_cast<std::size_t>(i) * t_len;
    for (int j = 0; j < in_ch; ++j) {
      const double w = m[static_cast<std::size_t>(i) * in_ch + j];
      const double* __restrict xj = x + static_cast<std::size_t>(j) * t_len;
      for (std::size_t n = 0; n < t_len; ++n) yi[n] += w * xj[n];
    }
  }
}

// dx[j][n] += m[i][j] dy[i][n]
inline void mat_backward_input(const double* m, int out_ch, int in_ch, const double* dy, double* dx,
                               std::size_t t_len) {
  for (int i = 0; i < out_ch; ++i) {
    const double* __restrict dyi = dy + static_cast<std::size_t>(i) * t_len;
    for (int j = 0; j < in_ch; ++j) {
      const double w = m[static_cast<std::size_t>(i) * in_ch + j];
      double* __restrict dxj = dx + static_cast<std::size_t>(j) * t_len;
      for (std::size_t n = 0; n < t_len; ++n) dxj[n] += w * dyi[n];
    }
  }
}

// dm[i][j] += sum_n dy[i][n] x[j][n]
inline void mat_backward_weight(const double* dy, int out_ch, const double* x, int in_ch, double* dm,
                                std::size_t t_len) {
  for (int i = 0; i < out_ch; ++i) {
    const double* __restrict dyi = dy + static_cast<std::size_t>(i) * t_len;
    for (int j = 0; j < in_ch; ++j) {
      const double* __restrict xj = x + static_cast<std::size_t>(j) * t_len;
      double acc = 0.0;
      for (std::size_t n = 0; n < t_len; ++n) acc += dyi[n] * xj[n];
      dm[static_cast<std::size_t>(i) * in_ch + j] += acc;
    }
  }
}

inline void apply_activation(const TcnConfig& cfg, const double* u, double* h, std::size_t t_len) {
  ActivationSpec plain = cfg.activation;
  plain.gated = false;
  const int c_ch = cfg.channels;
  if (!cfg.activation.gated) {
    for (int o = 0; o < c_ch; ++o) {
      const double* uo = u + static_cast<std::size_t>(o) * t_len;
      double* ho = h + static_cast<std::size_t>(o) * t_len;
      for (std::size_t n = 0; n < t_len; ++n) ho[n] = activations::eval(plain, uo[n]);
    }
    return;
  }
  for (int o = 0; o < c_ch; ++o) {
    const double* ao = u + static_cast<std::size_t>(o) * t_len;
    const double* go = u + static_cast<std::size_t>(c_ch + o) * t_len;
    double* ho = h + static_cast<std::size_t>(o) * t_len;
    for (std::size_t n = 0; n < t_len; ++n)
      ho[n] = activations::eval(plain, ao[n]) * activations::sigmoid(go[n]);
  }
}

// du = d(loss)/d(preactivation) from dh, recomputing the cheap elementwise
// terms from the stored preactivations.
inline void activation_backward(const TcnConfig& cfg, const double* u, const double* dh, double* du,
                                std::size_t t_len) {
  ActivationSpec plain = cfg.activation;
  plain.gated = false;
  const int c_ch = cfg.channels;
  if (!cfg.activation.gated) {
    for (int o = 0; o < c_ch; ++o) {
      const double* uo = u + static_cast<std::size_t>(o) * t_len;
      const double* dho = dh + static_cast<std::size_t>(o) * t_len;
      double* duo = du + static_cast<std::size_t>(o) * t_len;
      for (std::size_t n = 0; n < t_len; ++n) duo[n] = activations::grad(plain, uo[n]) * dho[n];
    }
    return;
  }
  for (int o = 0; o < c_ch; ++o) {
    const double* ao = u + static_cast<std::size_t>(o) * t_len;
    const double* go = u + static_cast<std::size_t>(c_ch + o) * t_len;
    const double* dho = dh + static_cast<std::size_t>(o) * t_len;
    double* dao = du + static_cast<std::size_t>(o) * t_len;
    double* dgo = du + static_cast<std::size_t>(c_ch + o) * t_len;
    for (std::size_t n = 0; n < t_len; ++n) {
      const double s = activations::sigmoid(go[n]);
      dao[n] = activations::grad(plain, ao[n]) * s * dho[n];
      dgo[n] = activations::eval(plain, ao[n]) * s * (1.0 - s) * dho[n];
    }
  }
}

}  // namespace detail

// Causal inference pass: output[n] depends only on x[0..n].
inline dsp::Signal forward(const TcnModel& model, const dsp::Signal& x) {
  if (x.empty()) raise(Errc::invalid_argument, "forward: empty input");
  const TcnConfig& cfg = model.config;
  const std::size_t t_len = x.size();
  const std::size_t layers = cfg.dilations.size();
  const int c_ch = cfg.channels;
  const int s_ch = cfg.skip_channels();

  std::vector<double> cur;  // residual stream for layers >= 1
  std::vector<double> next(static_cast<std::size_t>(c_ch) * t_len);
  std::vector<double> u;
  std::vector<double> h(static_cast<std::size_t>(c_ch) * t_len);
  std::vector<double> skip(static_cast<std::size_t>(s_ch) * t_len, 0.0);

  for (std::size_t k = 0; k < layers; ++k) {
    const LayerShape s = layer_shape(cfg, k);
    const auto& l = model.params.layers[k];
    const double* in = k == 0 ? x.samples.data() : cur.data();
    u.assign(static_cast<std::size_t>(s.conv_out) * t_len, 0.0);
    detail::conv_forward(in, s.in_ch, l.conv_w.data(), l.conv_b.empty() ? nullptr : l.conv_b.data(),
                         s.conv_out, s.kernel, s.dilation, u.data(), t_len);
    detail::apply_activation(cfg, u.data(), h.data(), t_len);
    if (cfg.activation.gated) {
      detail::mat_apply(l.skip_w.data(), s_ch, c_ch, h.data(), skip.data(), t_len);
    } else {
      for (std::size_t i = 0; i < skip.size(); ++i) skip[i] += h[i];
    }
    if (s.has_residual) {
      if (k == 0) {
        std::fill(next.begin(), next.end(), 0.0);
      } else {
        next = cur;
      }
      detail::mat_apply(l.res_w.data(), c_ch, c_ch, h.data(), next.data(), t_len);
      cur.swap(next);
    }
  }

  dsp::Signal y;
  y.sample_rate = x.sample_rate;
  y.samples.assign(t_len, model.params.head_b.empty() ? 0.0 : model.params.head_b[0]);
  for (int c = 0; c < s_ch; ++c) {
    const double w = model.params.head_w[c];
    const double* sc = skip.data() + static_cast<std::size_t>(c) * t_len;
    for (std::size_t n = 0; n < t_len; ++n) y.samples[n] += w * sc[n];
  }
  return y;
}

enum class LossKind { esr_preemphasized };

struct ForwardBackwardResult {
  double loss = 0.0;
  GradientSet grads;
};

// Loss and exact gradients in one pass.  The loss is the pre-emphasized ESR
// over the segment with the first receptive_field - 1 output samples
// excluded (those see zero-padded history).
inline ForwardBackwardResult forward_backward(const TcnModel& model, const dsp::Signal& x,
                                              const dsp::Signal& target,
                                              LossKind loss_kind = LossKind::esr_preemphasized) {
  (void)loss_kind;  // single loss today
  if (x.empty()) raise(Errc::invalid_argument, "forward_backward: empty input");
  if (x.size() != target.size()) raise(Errc::length_mismatch, "forward_backward: input/target length mismatch");
  if (x.sample_rate != target.sample_rate)
    raise(Errc::sample_rate_mismatch, "forward_backward: input/target sample rate mismatch");

  const TcnConfig& cfg = model.config;
  const std::size_t t_len = x.size();
  const std::size_t layers = cfg.dilations.size();
  const int c_ch = cfg.channels;
  const int s_ch = cfg.skip_channels();
  const std::size_t warmup = receptive_field(cfg) - 1;
  if (t_len <= warmup)
    raise(Errc::invalid_argument, "forward_backward: segment must be longer than the receptive field");

  // --- forward with tape ---
  std::vector<std::vector<double>> inputs(layers);  // stream entering each layer
  std::vector<std::vector<double>> preact(layers);
  std::vector<std::vector<double>> post(layers);
  std::vector<double> skip(static_cast<std::size_t>(s_ch) * t_len, 0.0);

  inputs[0] = x.samples;
  for (std::size_t k = 0; k < layers; ++k) {
    const LayerShape s = layer_shape(cfg, k);
    const auto& l = model.params.layers[k];
    preact[k].assign(static_cast<std::size_t>(s.conv_out) * t_len, 0.0);
    detail::conv_forward(inputs[k].data(), s.in_ch, l.conv_w.data(),
                         l.conv_b.empty() ? nullptr : l.conv_b.data(), s.conv_out, s.kernel,
                         s.dilation, preact[k].data(), t_len);
    post[k].assign(static_cast<std::size_t>(c_ch) * t_len, 0.0);
    detail::apply_activation(cfg, preact[k].data(), post[k].data(), t_len);
    if (cfg.activation.gated) {
      detail::mat_apply(l.skip_w.data(), s_ch, c_ch, post[k].data(), skip.data(), t_len);
    } else {
      for (std::size_t i = 0; i < skip.size(); ++i) skip[i] += post[k][i];
    }
    if (s.has_residual) {
      if (k == 0) {
        inputs[k + 1].assign(static_cast<std::size_t>(c_ch) * t_len, 0.0);
      } else {
        inputs[k + 1] = inputs[k];
      }
      detail::mat_apply(l.res_w.data(), c_ch, c_ch, post[k].data(), inputs[k + 1].data(), t_len);
    }
  }

  std::vector<double> y(t_len, model.params.head_b.empty() ? 0.0 : model.params.head_b[0]);
  for (int c = 0; c < s_ch; ++c) {
    const double w = model.params.head_w[c];
    const double* sc = skip.data() + static_cast<std::size_t>(c) * t_len;
    for (std::size_t n = 0; n < t_len; ++n) y[n] += w * sc[n];
  }

  // --- loss: pre-emphasized ESR over [warmup, t_len) ---
  std::vector<double> yp(t_len), pp(t_len);
  yp[0] = target.samples[0];
  pp[0] = y[0];
  for (std::size_t n = 1; n < t_len; ++n) {
    yp[n] = target.samples[n] - dsp::kPreemphasisCoeff * target.samples[n - 1];
    pp[n] = y[n] - dsp::kPreemphasisCoeff * y[n - 1];
  }
  double denom = 0.0, numer = 0.0;
  for (std::size_t n = warmup; n < t_len; ++n) {
    denom += yp[n] * yp[n];
    const double e = pp[n] - yp[n];
    numer += e * e;
  }
  if (denom == 0.0)
    raise(Errc::zero_energy_target, "forward_backward: target has zero pre-emphasized energy past warmup");

  ForwardBackwardResult result;
  result.loss = numer / denom;
  result.grads = make_param_set(cfg);

  // d loss / d y, through the loss window and the pre-emphasis adjoint
  std::vector<double> dpp(t_len, 0.0);
  for (std::size_t n = warmup; n < t_len; ++n) dpp[n] = 2.0 * (pp[n] - yp[n]) / denom;
  std::vector<double> dy(t_len);
  for (std::size_t n = 0; n < t_len; ++n) {
    dy[n] = dpp[n];
    if (n + 1 < t_len) dy[n] -= dsp::kPreemphasisCoeff * dpp[n + 1];
  }

  // --- head backward ---
  if (!result.grads.head_b.empty()) {
    double acc = 0.0;
    for (std::size_t n = 0; n < t_len; ++n) acc += dy[n];
    result.grads.head_b[0] = acc;
  }
  std::vector<double> dskip(static_cast<std::size_t>(s_ch) * t_len);
  for (int c = 0; c < s_ch; ++c) {
    const double w = model.params.head_w[c];
    const double* sc = skip.data() + static_cast<std::size_t>(c) * t_len;
    double* dsc = dskip.data() + static_cast<std::size_t>(c) * t_len;
    double acc = 0.0;
    for (std::size_t n = 0; n < t_len; ++n) {
      acc += dy[n] * sc[n];
      dsc[n] = w * dy[n];
    }
    result.grads.head_w[c] = acc;
  }

  // --- layers in reverse ---
  std::vector<double> d_next;  // gradient w.r.t. the stream entering layer k+1
  std::vector<double> dh(static_cast<std::size_t>(c_ch) * t_len);
  std::vector<double> du;
  for (std::size_t k = layers; k-- > 0;) {
    const LayerShape s = layer_shape(cfg, k);
    const auto& l = model.params.layers[k];
    auto& g = result.grads.layers[k];

    std::fill(dh.begin(), dh.end(), 0.0);
    if (cfg.activation.gated) {
      detail::mat_backward_input(l.skip_w.data(), s_ch, c_ch, dskip.data(), dh.data(), t_len);
      detail::mat_backward_weight(dskip.data(), s_ch, post[k].data(), c_ch, g.skip_w.data(), t_len);
    } else {
      for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dskip[i];
    }
    if (s.has_residual) {
      detail::mat_backward_input(l.res_w.data(), c_ch, c_ch, d_next.data(), dh.data(), t_len);
      detail::mat_backward_weight(d_next.data(), c_ch, post[k].data(), c_ch, g.res_w.data(), t_len);
    }

    du.assign(static_cast<std::size_t>(s.conv_out) * t_len, 0.0);
    detail::activation_backward(cfg, preact[k].data(), dh.data(), du.data(), t_len);

    if (k == 0) {
      detail::conv_backward(inputs[k].data(), s.in_ch, l.conv_w.data(), s.conv_out, s.kernel,
                            s.dilation, du.data(), t_len, g.conv_w.data(),
                            g.conv_b.empty() ? nullptr : g.conv_b.data(), nullptr);
      break;
    }
    std::vector<double> d_in(static_cast<std::size_t>(s.in_ch) * t_len, 0.0);
    detail::conv_backward(inputs[k].data(), s.in_ch, l.conv_w.data(), s.conv_out, s.kernel,
                          s.dilation, du.data(), t_len, g.conv_w.data(),
                          g.conv_b.empty() ? nullptr : g.conv_b.data(), d_in.data());
    if (s.has_residual) {
      // identity branch of r_{k+1} = r_k + R_k h_k
      for (std::size_t i = 0; i < d_in.size(); ++i) d_in[i] += d_next[i];
    }
    d_next.swap(d_in);
  }
  return result;
}

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  long step = 0;
};

inline AdamState make_adam_state(const TcnConfig& config) {
  return {make_param_set(config), make_param_set(config), 0};
}

namespace detail {

inline void check_congruent(const ParamSet& a, const ParamSet& b, const char* what) {
  if (a.layers.size() != b.layers.size()) raise(Errc::shape_mismatch, std::string(what) + ": layer count differs");
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    const auto& x = a.layers[k];
    const auto& y = b.layers[k];
    if (x.conv_w.size() != y.conv_w.size() || x.conv_b.size() != y.conv_b.size() ||
        x.res_w.size() != y.res_w.size() || x.skip_w.size() != y.skip_w.size())
      raise(Errc::shape_mismatch, std::string(what) + ": layer buffer shapes differ");
  }
  if (a.head_w.size() != b.head_w.size() || a.head_b.size() != b.head_b.size())
    raise(Errc::shape_mismatch, std::string(what) + ": head shapes differ");
}

}  // namespace detail

// dst += src, buffer by buffer.  Used to accumulate batch gradients.
inline void accumulate(ParamSet& dst, const ParamSet& src) {
  detail::check_congruent(dst, src, "accumulate");
  std::vector<std::vector<double>*> d;
  std::vector<const std::vector<double>*> s;
  dst.for_each_buffer([&](std::vector<double>& b) { d.push_back(&b); });
  src.for_each_buffer([&](const std::vector<double>& b) { s.push_back(&b); });
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i]->size(); ++j) (*d[i])[j] += (*s[i])[j];
}

inline void scale(ParamSet& p, double factor) {
  p.for_each_buffer([&](std::vector<double>& b) {
    for (double& v : b) v *= factor;
  });
}

// Standard Adam update with bias correction; deterministic.
inline void adam_step(TcnModel& model, const GradientSet& grads, AdamState& state,
                      const AdamHyper& hyper) {
  detail::check_congruent(model.params, grads, "adam_step(gradients)");
  detail::check_congruent(model.params, state.m, "adam_step(state)");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));

  std::vector<std::vector<double>*> p, m, v;
  std::vector<const std::vector<double>*> g;
  model.params.for_each_buffer([&](std::vector<double>& b) { p.push_back(&b); });
  grads.for_each_buffer([&](const std::vector<double>& b) { g.push_back(&b); });
  state.m.for_each_buffer([&](std::vector<double>& b) { m.push_back(&b); });
  state.v.for_each_buffer([&](std::vector<double>& b) { v.push_back(&b); });

  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& pb = *p[i];
    const auto& gb = *g[i];
    auto& mb = *m[i];
    auto& vb = *v[i];
    for (std::size_t j = 0; j < pb.size(); ++j) {
      mb[j] = hyper.beta1 * mb[j] + (1.0 - hyper.beta1) * gb[j];
      vb[j] = hyper.beta2 * vb[j] + (1.0 - hyper.beta2) * gb[j] * gb[j];
      const double mhat = mb[j] / bc1;
      const double vhat = vb[j] / bc2;
      pb[j] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
    }
  }
}

}  // namespace aliasbench::nn
