#include "levsense/trace.hpp"

#include "levsense/errors.hpp"

namespace levsense {

std::string_view to_string(Units units) {
  switch (units) {
    case Units::volts:
      return "V";
    case Units::metres:
      return "m";
    case Units::dimensionless:
      return "dimensionless";
  }
  return "dimensionless";
}

Units units_from_string(std::string_view text) {
  if (text == "V") return Units::volts;
  if (text == "m") return Units::metres;
  if (text == "dimensionless") return Units::dimensionless;
  throw ValidationError("unknown units '" + std::string(text) + "' (expected V, m or dimensionless)");
}

void RawTrace::validate() const {
  if (!(sample_rate > 0)) throw ValidationError("RawTrace: sample rate must be positive");
  if (samples.size() == 0) throw ValidationError("RawTrace: empty trace");
  if (!samples.allFinite()) throw ValidationError("RawTrace: non-finite samples");
}

void DemodTrace::validate() const {
  if (!(output_rate > 0)) throw ValidationError("DemodTrace: output rate must be positive");
  if (!(center_frequency >= 0)) throw ValidationError("DemodTrace: center frequency must be non-negative");
  if (samples.size() == 0) throw ValidationError("DemodTrace: empty trace");
  if (!samples.allFinite()) throw ValidationError("DemodTrace: non-finite samples");
}

}  // namespace levsense
