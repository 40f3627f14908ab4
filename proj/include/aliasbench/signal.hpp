#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "aliasbench/errors.hpp"

namespace aliasbench::dsp {

// First-order high-pass 1 - 0.95 z^-1 applied before the training loss.
inline constexpr double kPreemphasisCoeff = 0.95;

// Mono sample buffer, the universal audio currency.  Samples are
// dimensionless with nominal range +-1.
struct Signal {
  std::vector<double> samples;
  int sample_rate = 0;  // Hz

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// |Y(k)|^2 for bins k = 0 .. (N-1)/2 of an N-point DFT.
struct HalfSpectrum {
  std::vector<double> magnitudes_sq;
  std::size_t dft_length = 0;

  std::size_t bins() const { return magnitudes_sq.size(); }
};

inline Signal slice(const Signal& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.size()) raise(Errc::invalid_argument, "slice: range past end of signal");
  Signal out;
  out.sample_rate = x.sample_rate;
  out.samples.assign(x.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     x.samples.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

// out[0] = x[0], out[n] = x[n] - 0.95 x[n-1].  Zero history before n = 0.
inline Signal preemphasis(const Signal& x) {
  if (x.empty()) raise(Errc::invalid_argument, "preemphasis: empty input");
  Signal out;
  out.sample_rate = x.sample_rate;
  out.samples.resize(x.size());
  out.samples[0] = x.samples[0];
  for (std::size_t n = 1; n < x.size(); ++n)
    out.samples[n] = x.samples[n] - kPreemphasisCoeff * x.samples[n - 1];
  return out;
}

// Phase of sample i of a bin-exact sine: 2*pi*((k0*i) mod n)/n.  Reducing the
// integer product first keeps the argument small so sin() stays accurate even
// for very long signals.
inline double bin_sine_phase(std::uint64_t k0, std::uint64_t i, std::uint64_t n) {
  std::uint64_t r = ((k0 % n) * (i % n)) % n;
  return 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n);
}

// Test tone landing exactly on DFT bin k0 of an N-point transform:
// samples[i] = amplitude * sin(2 pi k0 i / N), exactly N samples.
inline Signal generate_sine(int sample_rate, std::size_t k0, std::size_t n, double amplitude) {
  if (sample_rate <= 0) raise(Errc::invalid_argument, "generate_sine: sample rate must be positive");
  if (n == 0) raise(Errc::invalid_argument, "generate_sine: zero length");
  if (k0 < 1 || k0 > (n - 1) / 2) raise(Errc::invalid_argument, "generate_sine: k0 out of range [1, (N-1)/2]");
  if (!(amplitude > 0.0)) raise(Errc::invalid_argument, "generate_sine: amplitude must be positive");
  Signal s;
  s.sample_rate = sample_rate;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.samples[i] = amplitude * std::sin(bin_sine_phase(k0, i, n));
  return s;
}

}  // namespace aliasbench::dsp
