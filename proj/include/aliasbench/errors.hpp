#pragma once

#include <stdexcept>
#include <string>

namespace aliasbench {

// Every failure mode the library reports, so callers can branch on the
// category instead of parsing message strings.
enum class Errc {
  invalid_argument,
  length_mismatch,
  sample_rate_mismatch,
  zero_energy_target,
  zero_harmonic_energy,
  wav_unsupported,
  wav_malformed,
  wav_empty_data,
  config_error,
  shape_mismatch,
  divergence,
  parse_error,
  io_error,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace aliasbench
