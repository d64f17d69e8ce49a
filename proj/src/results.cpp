#include "levsense/results.hpp"

#include <algorithm>
#include <cmath>

#include "levsense/errors.hpp"
#include "levsense/trace_file.hpp"

namespace levsense {

namespace {

ojson num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double get_num(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing '") + key + "'");
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) return parse_double(it->get<std::string>(), key);
  throw ValidationError(std::string("'") + key + "' must be a number");
}

}  // namespace

ojson to_json(const CalibrationResult& c) {
  ojson j;
  j["beta_squared"] = num(c.beta_squared);
  j["flux_sensitivity_wb_per_m"] = num(c.flux_sensitivity);
  j["flux_sensitivity_phi0_per_um"] = num(c.flux_sensitivity_phi0() * 1e-6);
  j["voltage_sensitivity_v_per_m"] = num(c.voltage_sensitivity);
  j["relative_error"] = num(c.relative_error);
  j["beta_squared_relative_error"] = num(c.beta_squared_relative_error());
  return j;
}

CalibrationResult calibration_from_json(const nlohmann::json& j) {
  const nlohmann::json& c = j.contains("calibration") ? j["calibration"] : j;
  CalibrationResult r;
  r.beta_squared = get_num(c, "beta_squared");
  r.flux_sensitivity = get_num(c, "flux_sensitivity_wb_per_m");
  r.voltage_sensitivity = get_num(c, "voltage_sensitivity_v_per_m");
  r.relative_error = get_num(c, "relative_error");
  if (!(r.voltage_sensitivity > 0)) throw ValidationError("calibration voltage sensitivity must be positive");
  return r;
}

ojson to_json(const ExpFit& f) {
  ojson j;
  j["amplitude"] = num(f.amplitude);
  j["decay_time_s"] = num(f.decay_time);
  j["amplitude_stderr"] = num(f.amplitude_stderr);
  j["decay_time_stderr_s"] = num(f.decay_time_stderr);
  j["residual_rms"] = num(f.residual_rms);
  j["decaying"] = f.decaying;
  j["stderr_available"] = f.stderr_available;
  j["iterations"] = f.iterations;
  return j;
}

ojson to_json(const ScaleFit& f) {
  ojson j;
  j["scale"] = num(f.scale);
  j["scale_stderr"] = num(f.scale_stderr);
  j["stderr_available"] = f.stderr_available;
  j["objective"] = num(f.objective);
  ojson res = ojson::array();
  for (double r : f.per_point_residuals) res.push_back(num(r));
  j["per_point_residuals"] = res;
  return j;
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::vertical ? "vertical" : "longitudinal"; }

SweepAxis sweep_axis_from_string(std::string_view text) {
  if (text == "vertical") return SweepAxis::vertical;
  if (text == "longitudinal") return SweepAxis::longitudinal;
  throw ValidationError("axis must be 'vertical' or 'longitudinal', got '" + std::string(text) + "'");
}

ojson to_json(const SweepResult& s) {
  ojson j;
  j["axis"] = std::string(to_string(s.axis));
  ojson pts = ojson::array();
  for (const auto& p : s.points) {
    pts.push_back({{"displacement_m", num(p.displacement)},
                   {"amplitude_n", num(p.amplitude)},
                   {"phase_rad", num(p.phase)},
                   {"phase_of_max_force_rad", num(p.phase_of_max_force)},
                   {"envelope_low_n", num(p.envelope_low)},
                   {"envelope_high_n", num(p.envelope_high)}});
  }
  j["points"] = pts;
  return j;
}

ojson to_json(const PipelineReport& r) {
  ojson j;
  j["ringdown_fit"] = to_json(r.ringdown_fit);
  j["ringdown_coefficient"] = {num(r.ringdown_coefficient.real()), num(r.ringdown_coefficient.imag())};
  j["detuning_applied_hz"] = num(r.detuning_applied);
  j["crop_start"] = r.crop_start;
  j["crop_length"] = r.crop_length;
  j["crop_cycles"] = num(r.crop_cycles);
  j["end_match_step"] = {num(r.end_match_step.real()), num(r.end_match_step.imag())};
  j["bin_width_hz"] = num(r.bin_width);
  j["drive_frequency_hz"] = num(r.drive_frequency);
  j["displacement_density_at_drive_m_per_rthz"] = num(r.displacement_density_at_drive);
  j["force_density_at_drive_n_per_rthz"] = num(r.force_density_at_drive);
  j["integrated_force_n"] = num(r.integrated_force);
  j["force_noise_floor_n_per_rthz"] = num(r.force_noise_floor);
  j["floor_x_rms_m"] = num(r.floor_x_rms);
  j["mode_temperature_k"] = num(r.mode_temperature);
  j["band_x_rms_m"] = num(r.band_x_rms);
  j["spectrum_bins"] = r.force.size();
  j["displacement_parseval_ratio"] =
      num(r.displacement.source_power > 0 ? r.displacement.integrated_power() / r.displacement.source_power : 0.0);
  return j;
}

ojson to_json(const Provenance& p) {
  ojson j = ojson::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string sweep_csv(const SweepResult& s) {
  std::string out = "displacement_m,amplitude_n,phase_rad,phase_of_max_force_rad,envelope_low_n,envelope_high_n\n";
  for (const auto& p : s.points) {
    out += format_double(p.displacement) + "," + format_double(p.amplitude) + "," + format_double(p.phase) + "," +
           format_double(p.phase_of_max_force) + "," + format_double(p.envelope_low) + "," +
           format_double(p.envelope_high) + "\n";
  }
  return out;
}

std::string spectra_csv(const Spectrum& d, const Spectrum& f) {
  if (d.size() != f.size()) throw DomainError("spectra_csv: spectra differ in length");
  std::string out = "frequency_hz,displacement_m_per_rthz,force_n_per_rthz\n";
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    out += format_double(d.frequencies(i)) + "," + format_double(d.amplitude_density(i)) + "," +
           format_double(f.amplitude_density(i)) + "\n";
  }
  return out;
}

std::string spectrum_svg(const Spectrum& s, double mark, const std::string& title) {
  constexpr double W = 800, H = 480, L = 80, R = 20, T = 40, B = 60;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" viewBox=\"0 0 800 480\">\n";
  out += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + title +
         "</text>\n";
  if (s.size() < 2) return out + "</svg>\n";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double v = s.amplitude_density(i);
    if (v > 0) lo = std::min(lo, v), hi = std::max(hi, v);
  }
  if (!(hi > 0)) return out + "</svg>\n";
  const double ylo = std::floor(std::log10(lo)), yhi = std::ceil(std::log10(hi)) + (lo == hi ? 1 : 0);
  const double f0 = s.frequencies(0), f1 = s.frequencies(s.size() - 1);
  auto px = [&](double f) { return L + (f - f0) / (f1 - f0) * (W - L - R); };
  auto py = [&](double v) {
    const double lv = v > 0 ? std::log10(v) : ylo;
    return H - B - (lv - ylo) / (yhi - ylo) * (H - T - B);
  };
  out += "<rect x=\"80\" y=\"40\" width=\"700\" height=\"380\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = ylo; e <= yhi; e += 1.0) {
    const std::string y = format_double(std::round(py(std::pow(10.0, e)) * 10) / 10);
    out += "<line x1=\"80\" x2=\"780\" y1=\"" + y + "\" y2=\"" + y + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"74\" y=\"" + y + "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  out += "<text x=\"430\" y=\"460\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">frequency - " +
         format_double(f0) + " Hz</text>\n";
  if (mark >= f0 && mark <= f1) {
    const std::string x = format_double(std::round(px(mark) * 10) / 10);
    out += "<line x1=\"" + x + "\" x2=\"" + x + "\" y1=\"40\" y2=\"420\" stroke=\"#c33\" stroke-dasharray=\"4 3\"/>\n";
  }
  out += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\" points=\"";
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out += format_double(std::round(px(s.frequencies(i)) * 10) / 10) + "," +
           format_double(std::round(py(s.amplitude_density(i)) * 10) / 10) + " ";
  }
  out += "\"/>\n</svg>\n";
  return out;
}

}  // namespace levsense
