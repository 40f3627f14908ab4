#pragma once

// The activation catalog: the custom shapes under study (CustomTanh, Snake,
// ReLUSquared, ReLUSquaredDip, Swish, Gaussian) plus a representative set of
// standard activations, each with value and exact analytic derivative, and
// the sigmoid-gated combinator z = Act(a) * sigmoid(g).
//
// At non-differentiable points (Hardtanh corners, ReLU-family kink at zero)
// grad() returns the right-hand derivative.

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "aliasbench/errors.hpp"

namespace aliasbench::activations {

enum class Kind {
  custom_tanh,
  snake,
  relu_squared,
  relu_squared_dip,
  swish,
  gaussian,
  sigmoid,
  hardtanh,
  selu,
  elu,
  prelu,
  softsign,
  mish,
  identity,
};

inline constexpr std::array<Kind, 14> kCatalog = {
    Kind::custom_tanh, Kind::snake,    Kind::relu_squared, Kind::relu_squared_dip,
    Kind::swish,       Kind::gaussian, Kind::sigmoid,      Kind::hardtanh,
    Kind::selu,        Kind::elu,      Kind::prelu,        Kind::softsign,
    Kind::mish,        Kind::identity,
};

// Canonical published constants for the standard kinds.
inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;  // self-normalizing nets scale
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kPreluNegativeSlope = 0.01;  // fixed, not learned

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::custom_tanh: return "CustomTanh";
    case Kind::snake: return "Snake";
    case Kind::relu_squared: return "ReLUSquared";
    case Kind::relu_squared_dip: return "ReLUSquaredDip";
    case Kind::swish: return "Swish";
    case Kind::gaussian: return "Gaussian";
    case Kind::sigmoid: return "Sigmoid";
    case Kind::hardtanh: return "Hardtanh";
    case Kind::selu: return "SELU";
    case Kind::elu: return "ELU";
    case Kind::prelu: return "PReLU";
    case Kind::softsign: return "Softsign";
    case Kind::mish: return "Mish";
    case Kind::identity: return "Identity";
  }
  return "?";
}

// Kinds whose shape depends on the alpha parameter.
inline bool uses_alpha(Kind k) {
  return k == Kind::custom_tanh || k == Kind::snake || k == Kind::relu_squared ||
         k == Kind::relu_squared_dip;
}

// Which nonlinearity, its alpha parameter, and whether the layer gates it
// with a sigmoid path.  alpha is normalized to 1 for kinds that ignore it so
// specs compare (and round-trip through labels) cleanly.
struct ActivationSpec {
  Kind kind = Kind::custom_tanh;
  double alpha = 1.0;
  bool gated = false;

  bool operator==(const ActivationSpec&) const = default;
};

inline ActivationSpec make_spec(Kind kind, double alpha = 1.0, bool gated = false) {
  if (!uses_alpha(kind)) return {kind, 1.0, gated};
  if (!(alpha > 0.0)) raise(Errc::invalid_argument, "ActivationSpec: alpha must be positive");
  return {kind, alpha, gated};
}

// Numerically stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Activation value, gating ignored (the gate lives in gated_eval).
inline double eval(const ActivationSpec& spec, double x) {
  const double a = spec.alpha;
  switch (spec.kind) {
    case Kind::custom_tanh: return std::tanh(x / a);
    case Kind::snake: {
      const double s = std::sin(a * x);
      return x + s * s / a;
    }
    case Kind::relu_squared: return x > 0.0 ? a * x * x : 0.0;
    case Kind::relu_squared_dip: return x >= 0.0 ? x * x : a * x * sigmoid(x);
    case Kind::swish: return x * sigmoid(x);
    case Kind::gaussian: return std::exp(-x * x);
    case Kind::sigmoid: return sigmoid(x);
    case Kind::hardtanh: return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
    case Kind::selu: return x >= 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
    case Kind::elu: return x >= 0.0 ? x : std::expm1(x);
    case Kind::prelu: return x >= 0.0 ? x : kPreluNegativeSlope * x;
    case Kind::softsign: return x / (1.0 + std::abs(x));
    case Kind::mish: return x * std::tanh(softplus(x));
    case Kind::identity: return x;
  }
  return 0.0;
}

// Exact derivative of eval with respect to x.
inline double grad(const ActivationSpec& spec, double x) {
  const double a = spec.alpha;
  switch (spec.kind) {
    case Kind::custom_tanh: {
      const double t = std::tanh(x / a);
      return (1.0 - t * t) / a;
    }
    case Kind::snake: return 1.0 + std::sin(2.0 * a * x);
    case Kind::relu_squared: return x > 0.0 ? 2.0 * a * x : 0.0;
    case Kind::relu_squared_dip: {
      if (x >= 0.0) return 2.0 * x;
      const double s = sigmoid(x);
      return a * (s + x * s * (1.0 - s));
    }
    case Kind::swish: {
      const double s = sigmoid(x);
      return s + x * s * (1.0 - s);
    }
    case Kind::gaussian: return -2.0 * x * std::exp(-x * x);
    case Kind::sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Kind::hardtanh: return (x >= -1.0 && x < 1.0) ? 1.0 : 0.0;
    case Kind::selu: return x >= 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
    case Kind::elu: return x >= 0.0 ? 1.0 : std::exp(x);
    case Kind::prelu: return x >= 0.0 ? 1.0 : kPreluNegativeSlope;
    case Kind::softsign: {
      const double d = 1.0 + std::abs(x);
      return 1.0 / (d * d);
    }
    case Kind::mish: {
      const double sp = softplus(x);
      const double t = std::tanh(sp);
      return t + x * (1.0 - t * t) * sigmoid(x);
    }
    case Kind::identity: return 1.0;
  }
  return 0.0;
}

// Gated form: Act(a) * sigmoid(g), where a and g come from the two linear
// projections of the layer input.
inline double gated_eval(double a, double g, const ActivationSpec& spec) {
  if (!spec.gated) raise(Errc::invalid_argument, "gated_eval: spec is not gated");
  ActivationSpec plain = spec;
  plain.gated = false;
  return eval(plain, a) * sigmoid(g);
}

// Label grammar: (True|False)_<KindName>(_<alpha>)?, alpha present exactly
// for the kinds that consume it.  e.g. "False_CustomTanh_2", "True_SELU".
inline std::string format(const ActivationSpec& spec) {
  std::string out = spec.gated ? "True_" : "False_";
  out += kind_name(spec.kind);
  if (uses_alpha(spec.kind)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", spec.alpha);
    out += '_';
    out += buf;
  }
  return out;
}

inline ActivationSpec parse(std::string_view label) {
  bool gated;
  if (label.starts_with("True_")) {
    gated = true;
    label.remove_prefix(5);
  } else if (label.starts_with("False_")) {
    gated = false;
    label.remove_prefix(6);
  } else {
    raise(Errc::parse_error, "activation label must start with True_ or False_: " + std::string(label));
  }
  const std::size_t underscore = label.find('_');
  const std::string_view name = label.substr(0, underscore);
  Kind kind{};
  bool found = false;
  for (Kind k : kCatalog) {
    if (name == kind_name(k)) {
      kind = k;
      found = true;
      break;
    }
  }
  if (!found) raise(Errc::parse_error, "unknown activation kind: " + std::string(name));

  if (underscore == std::string_view::npos) {
    return make_spec(kind, 1.0, gated);  // parameterized kinds default to alpha = 1
  }
  const std::string alpha_str(label.substr(underscore + 1));
  if (!uses_alpha(kind))
    raise(Errc::parse_error, "activation " + std::string(name) + " takes no alpha parameter");
  char* end = nullptr;
  const double alpha = std::strtod(alpha_str.c_str(), &end);
  if (end == alpha_str.c_str() || *end != '\0' || !(alpha > 0.0))
    raise(Errc::parse_error, "bad alpha in activation label: " + alpha_str);
  return make_spec(kind, alpha, gated);
}

}  // namespace aliasbench::activations
