#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mks {

enum class Errc {
  off_manifold,
  step_too_large,
  sampler_stalled,
  empty_sample,
  degenerate_denominator,
  missing_responses,
  resolution_too_coarse,
  unknown_moment,
  unsupported_manifold,
  convergence_failure,
  empty_ball,
  degenerate_variance,
  invalid_argument,
  schema_error,
  range_error,
  io_error,
};

std::string_view errc_name(Errc code);

// Every failure raised by the library carries one of the codes above; the CLI
// maps schema/range errors to exit code 2 and everything else to 3.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  bool is_config_error() const noexcept {
    return code_ == Errc::schema_error || code_ == Errc::range_error;
  }

private:
  Errc code_;
};

}  // namespace mks
