#pragma once

// Arbitrary-length DFT, prime lengths included.
//
// Power-of-two lengths go straight through an iterative radix-2 FFT.  Every
// other length uses the Bluestein chirp-z expansion: the DFT becomes a
// circular convolution with a precomputed chirp, carried out by radix-2 FFTs
// of length M = next_pow2(2N - 1).  Chirp phases are reduced with integer
// arithmetic (n^2 mod 2N) before touching floating point, which keeps the
// transform accurate at lengths like N = 48017.
//
// A DftPlan owns the tables for one length and can be reused across calls.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "aliasbench/errors.hpp"
#include "aliasbench/signal.hpp"

namespace aliasbench::dsp {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline std::vector<std::uint32_t> bit_reversal(std::size_t n) {
  std::vector<std::uint32_t> rev(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    std::uint32_t r = rev[i >> 1] >> 1;
    if (i & 1) r |= static_cast<std::uint32_t>(n >> 1);
    rev[i] = r;
  }
  return rev;
}

// tw[j] = exp(-2 pi i j / n), j < n/2
inline std::vector<std::complex<double>> fft_twiddles(std::size_t n) {
  std::vector<std::complex<double>> tw(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j)
    tw[j] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n));
  return tw;
}

// In-place radix-2 DIT transform.  a.size() must match the tables.
inline void fft_pow2(std::vector<std::complex<double>>& a,
                     const std::vector<std::complex<double>>& tw,
                     const std::vector<std::uint32_t>& rev) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t j = rev[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::complex<double> w = tw[j * step];
        const std::complex<double> u = a[base + j];
        const std::complex<double> v = a[base + j + half] * w;
        a[base + j] = u + v;
        a[base + j + half] = u - v;
      }
    }
  }
}

inline void ifft_pow2(std::vector<std::complex<double>>& a,
                      const std::vector<std::complex<double>>& tw,
                      const std::vector<std::uint32_t>& rev) {
  for (auto& v : a) v = std::conj(v);
  fft_pow2(a, tw, rev);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v = std::conj(v) * scale;
}

}  // namespace detail

class DftPlan {
public:
  explicit DftPlan(std::size_t n) : n_(n) {
    if (n_ == 0) raise(Errc::invalid_argument, "DftPlan: zero length");
    if (detail::is_pow2(n_)) {
      m_ = n_;
      tw_ = detail::fft_twiddles(m_);
      rev_ = detail::bit_reversal(m_);
      return;
    }
    m_ = detail::next_pow2(2 * n_ - 1);
    tw_ = detail::fft_twiddles(m_);
    rev_ = detail::bit_reversal(m_);
    chirp_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::uint64_t r = (static_cast<std::uint64_t>(k) * k) % (2 * n_);
      chirp_[k] = std::polar(1.0, -M_PI * static_cast<double>(r) / static_cast<double>(n_));
    }
    // Wrapped convolution kernel exp(+i pi m^2 / N), symmetric in m.
    chirp_fft_.assign(m_, {0.0, 0.0});
    chirp_fft_[0] = std::conj(chirp_[0]);
    for (std::size_t j = 1; j < n_; ++j) {
      chirp_fft_[j] = std::conj(chirp_[j]);
      chirp_fft_[m_ - j] = std::conj(chirp_[j]);
    }
    detail::fft_pow2(chirp_fft_, tw_, rev_);
  }

  std::size_t length() const { return n_; }

  // Full complex spectrum X(k), k = 0 .. N-1.
  std::vector<std::complex<double>> transform(std::span<const double> x) const {
    if (x.size() != n_) raise(Errc::length_mismatch, "DftPlan::transform: input length differs from plan");
    if (chirp_.empty()) {
      std::vector<std::complex<double>> a(n_);
      for (std::size_t i = 0; i < n_; ++i) a[i] = {x[i], 0.0};
      detail::fft_pow2(a, tw_, rev_);
      return a;
    }
    std::vector<std::complex<double>> a(m_, {0.0, 0.0});
    for (std::size_t i = 0; i < n_; ++i) a[i] = chirp_[i] * x[i];
    detail::fft_pow2(a, tw_, rev_);
    for (std::size_t j = 0; j < m_; ++j) a[j] *= chirp_fft_[j];
    detail::ifft_pow2(a, tw_, rev_);
    std::vector<std::complex<double>> out(n_);
    for (std::size_t k = 0; k < n_; ++k) out[k] = chirp_[k] * a[k];
    return out;
  }

  // |X(k)|^2 for k = 0 .. (N-1)/2, no windowing or zero padding.
  HalfSpectrum power_half(std::span<const double> x) const {
    const auto full = transform(x);
    HalfSpectrum hs;
    hs.dft_length = n_;
    hs.magnitudes_sq.resize((n_ - 1) / 2 + 1);
    for (std::size_t k = 0; k < hs.magnitudes_sq.size(); ++k) hs.magnitudes_sq[k] = std::norm(full[k]);
    return hs;
  }

private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;  // FFT working size
  std::vector<std::complex<double>> tw_;
  std::vector<std::uint32_t> rev_;
  std::vector<std::complex<double>> chirp_;      // exp(-i pi k^2 / N)
  std::vector<std::complex<double>> chirp_fft_;  // spectrum of the wrapped inverse chirp
};

inline HalfSpectrum dft_power_half(const Signal& x) {
  if (x.empty()) raise(Errc::invalid_argument, "dft_power_half: empty input");
  return DftPlan(x.size()).power_half(x.samples);
}

}  // namespace aliasbench::dsp
