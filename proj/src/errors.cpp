#include "mks/errors.hpp"

namespace mks {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::off_manifold: return "OffManifold";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::sampler_stalled: return "SamplerStalled";
    case Errc::empty_sample: return "EmptySample";
    case Errc::degenerate_denominator: return "DegenerateDenominator";
    case Errc::missing_responses: return "MissingResponses";
    case Errc::resolution_too_coarse: return "ResolutionTooCoarse";
    case Errc::unknown_moment: return "UnknownMoment";
    case Errc::unsupported_manifold: return "UnsupportedManifold";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::empty_ball: return "EmptyBall";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::schema_error: return "SchemaError";
    case Errc::range_error: return "RangeError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace mks
