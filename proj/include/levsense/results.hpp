#pragma once

#include <string>

#include <json.hpp>

#include "levsense/calibration.hpp"
#include "levsense/estimation.hpp"
#include "levsense/gravity.hpp"
#include "levsense/pipeline.hpp"
#include "levsense/provenance.hpp"

namespace levsense {

using ojson = nlohmann::ordered_json;

// Non-finite numbers are written as the strings "inf", "-inf" and "nan".
ojson to_json(const CalibrationResult& c);
CalibrationResult calibration_from_json(const nlohmann::json& j);
ojson to_json(const ExpFit& f);
ojson to_json(const ScaleFit& f);
ojson to_json(const SweepResult& s);
/// Scalars only; spectra go to CSV.
ojson to_json(const PipelineReport& r);
ojson to_json(const Provenance& p);

/// Pretty JSON with a trailing newline.
std::string dump(const ojson& j);

std::string_view to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view text);

/// displacement_m,amplitude_n,phase_rad,phase_of_max_force_rad,envelope_low_n,envelope_high_n
std::string sweep_csv(const SweepResult& s);
/// frequency_hz,displacement_m_per_rthz,force_n_per_rthz
std::string spectra_csv(const Spectrum& displacement, const Spectrum& force);

/// Log-scale line plot of one spectrum, with a marker line at `mark_frequency`.
std::string spectrum_svg(const Spectrum& s, double mark_frequency, const std::string& title);

}  // namespace levsense
