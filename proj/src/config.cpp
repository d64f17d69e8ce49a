#include "levsense/config.hpp"

#include <cmath>
#include <set>

#include "levsense/errors.hpp"
#include "levsense/provenance.hpp"

namespace levsense {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

Wheel WheelConfig::wheel() const {
  Wheel w = Wheel::below_particle(standoff, rim_radius, shape);
  w.mass_count = mass_count;
  w.mass_each = mass_each;
  w.initial_phase = initial_phase;
  return w;
}

OscillatorMode RunConfig::oscillator() const {
  return derive_mode(mode.frequency, mode.decay_time, mode.effective_mass);
}

CalibrationResult RunConfig::calibration() const {
  const auto m = oscillator();
  if (circuit.beta_squared) return calibrate(circuit.circuit, m, *circuit.beta_squared, circuit.relative_error);
  return calibrate_from_voltage(circuit.circuit, m, circuit.voltage_sensitivity, circuit.relative_error);
}

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  s.mode = oscillator();
  s.duffing_coefficient = simulation.duffing;
  s.noise_temperature = simulation.noise_temperature;
  if (simulation.drive_amplitude != 0.0) {
    s.drives.push_back({simulation.drive_amplitude, mode.frequency + simulation.drive_offset, simulation.drive_phase});
  }
  s.sample_rate = simulation.sample_rate;
  s.seed = simulation.seed;
  s.initial_displacement = simulation.initial_displacement;
  s.thermal_initial_state = simulation.thermal_initial_state;
  return s;
}

DemodOptions RunConfig::demod_options() const {
  return {.center_frequency = mode.frequency - simulation.lockin_detuning, .output_rate = simulation.output_rate};
}

void RunConfig::validate() const {
  (void)oscillator();
  circuit.circuit.validate();
  suspension.validate();
  wheel.wheel().validate();
  if (wheel.grid_level < 0 || wheel.grid_level > 6) throw ValidationError("wheel.grid_level must be 0..6");
  sim_config().validate();
  if (!(simulation.duration > 0)) throw ValidationError("simulation.duration_s must be positive");
  if (!(simulation.output_rate > 0)) throw ValidationError("simulation.output_rate_hz must be positive");
  if (!(pipeline.reference_frequency > 0)) throw ValidationError("pipeline.reference_frequency_hz must be positive");
  if (!(pipeline.band_width > 0)) throw ValidationError("pipeline.band_width_hz must be positive");
}

namespace {

// Reads keys from one section and remembers which were seen.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    auto it = root.find(name_);
    if (it == root.end()) return;
    if (!it->is_object()) throw ValidationError("section '" + name_ + "' must be an object");
    obj_ = &*it;
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_) return;
    auto it = obj_->find(key);
    if (it == obj_->end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError(name_ + "." + key + " has the wrong type");
    }
  }

  void get_double(const char* key, double& out) {
    seen_.insert(key);
    if (!obj_) return;
    auto it = obj_->find(key);
    if (it == obj_->end()) return;
    if (it->is_string() && it->get<std::string>() == "inf") {
      out = std::numeric_limits<double>::infinity();
    } else if (it->is_number()) {
      out = it->get<double>();
    } else {
      throw ValidationError(name_ + "." + key + " must be a number");
    }
  }

  void get_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!obj_) return;
    auto it = obj_->find(key);
    if (it == obj_->end()) return;
    if (it->is_null()) {
      out.reset();
    } else if (it->is_number()) {
      out = it->get<double>();
    } else {
      throw ValidationError(name_ + "." + key + " must be a number or null");
    }
  }

  void get_vec3(const char* key, Eigen::Vector3d& out) {
    seen_.insert(key);
    if (!obj_) return;
    auto it = obj_->find(key);
    if (it == obj_->end()) return;
    if (!it->is_array() || it->size() != 3) throw ValidationError(name_ + "." + key + " must be [x, y, z]");
    for (int i = 0; i < 3; ++i) out(i) = (*it)[i].get<double>();
  }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError("unknown config key '" + name_ + "." + it.key() + "'");
    }
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

json number_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> sections = {"particle", "mode",       "circuit", "wheel",
                                                 "suspension", "simulation", "pipeline"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!sections.count(it.key())) throw ValidationError("unknown config section '" + it.key() + "'");
  }
  RunConfig c;
  {
    Section s(root, "particle");
    s.get_double("total_mass_kg", c.particle.total_mass);
    s.get_double("magnet_edge_m", c.particle.magnet_edge);
    s.get("magnet_count", c.particle.magnet_count);
    s.get_double("bead_radius_m", c.particle.bead_radius);
    s.get_double("remnant_magnetization_t", c.particle.remnant_magnetization);
    s.finish();
  }
  {
    Section s(root, "mode");
    s.get_double("frequency_hz", c.mode.frequency);
    s.get_double("decay_time_s", c.mode.decay_time);
    s.get_double("effective_mass_kg", c.mode.effective_mass);
    s.finish();
  }
  {
    Section s(root, "circuit");
    auto& k = c.circuit.circuit;
    s.get_double("l_pickup_h", k.l_pickup);
    s.get_double("l_twisted_pair_h", k.l_twisted_pair);
    s.get_double("l_input_h", k.l_input);
    s.get_double("l_calibration_h", k.l_calibration);
    double inv = constants::Phi0 / k.mutual_inductance_in_sq;
    s.get_double("mutual_inverse_a_per_phi0", inv);
    k.mutual_inductance_in_sq = DetectionCircuit::mutual_from_inverse(inv);
    s.get_double("squid_gain_v_per_phi0", k.squid_gain);
    s.get_optional("beta_squared", c.circuit.beta_squared);
    s.get_double("voltage_sensitivity_v_per_m", c.circuit.voltage_sensitivity);
    s.get_double("relative_error", c.circuit.relative_error);
    s.finish();
  }
  {
    Section s(root, "wheel");
    s.get("mass_count", c.wheel.mass_count);
    s.get_double("mass_each_kg", c.wheel.mass_each);
    s.get_double("rim_radius_m", c.wheel.rim_radius);
    s.get_double("standoff_m", c.wheel.standoff);
    s.get_double("cylinder_radius_m", c.wheel.shape.radius);
    s.get_double("cylinder_height_m", c.wheel.shape.height);
    s.get("grid_level", c.wheel.grid_level);
    s.get_double("initial_phase_rad", c.wheel.initial_phase);
    s.get_vec3("systematics_longitudinal_m", c.wheel.systematics_longitudinal);
    s.get_vec3("systematics_vertical_m", c.wheel.systematics_vertical);
    s.finish();
  }
  {
    Section s(root, "suspension");
    s.get_double("platform_mass_kg", c.suspension.platform_mass);
    s.get_double("resonance_frequency_hz", c.suspension.resonance_frequency);
    s.get_double("quality_factor", c.suspension.quality_factor);
    s.get_vec3("platform_offset_m", c.platform.offset);
    s.finish();
  }
  {
    Section s(root, "simulation");
    auto& m = c.simulation;
    s.get_double("duration_s", m.duration);
    s.get_double("sample_rate_hz", m.sample_rate);
    s.get_double("output_rate_hz", m.output_rate);
    s.get_double("noise_temperature_k", m.noise_temperature);
    s.get_double("drive_amplitude_n", m.drive_amplitude);
    s.get_double("drive_offset_hz", m.drive_offset);
    s.get_double("drive_phase_rad", m.drive_phase);
    s.get_double("lockin_detuning_hz", m.lockin_detuning);
    s.get_double("duffing_n_per_m3", m.duffing);
    s.get("seed", m.seed);
    s.get("thermal_initial_state", m.thermal_initial_state);
    s.get_double("initial_displacement_m", m.initial_displacement);
    s.finish();
  }
  {
    Section s(root, "pipeline");
    auto& p = c.pipeline;
    s.get_double("reference_frequency_hz", p.reference_frequency);
    s.get_double("detuning_hz", p.detuning);
    s.get_double("band_width_hz", p.band_width);
    s.get("subtract_ringdown", p.subtract_ringdown);
    s.get("end_match", p.end_match);
    s.get("hann_window", p.hann_window);
    s.finish();
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

ojson config_to_json(const RunConfig& c) {
  ojson j;
  j["particle"] = {{"total_mass_kg", c.particle.total_mass},
                   {"magnet_edge_m", c.particle.magnet_edge},
                   {"magnet_count", c.particle.magnet_count},
                   {"bead_radius_m", c.particle.bead_radius},
                   {"remnant_magnetization_t", c.particle.remnant_magnetization}};
  j["mode"] = {{"frequency_hz", c.mode.frequency},
               {"decay_time_s", number_or_inf(c.mode.decay_time)},
               {"effective_mass_kg", c.mode.effective_mass}};
  const auto& k = c.circuit.circuit;
  j["circuit"] = {{"l_pickup_h", k.l_pickup},
                  {"l_twisted_pair_h", k.l_twisted_pair},
                  {"l_input_h", k.l_input},
                  {"l_calibration_h", k.l_calibration},
                  {"mutual_inverse_a_per_phi0", constants::Phi0 / k.mutual_inductance_in_sq},
                  {"squid_gain_v_per_phi0", k.squid_gain},
                  {"beta_squared", c.circuit.beta_squared ? ojson(*c.circuit.beta_squared) : ojson(nullptr)},
                  {"voltage_sensitivity_v_per_m", c.circuit.voltage_sensitivity},
                  {"relative_error", c.circuit.relative_error}};
  const auto& w = c.wheel;
  j["wheel"] = {{"mass_count", w.mass_count},
                {"mass_each_kg", w.mass_each},
                {"rim_radius_m", w.rim_radius},
                {"standoff_m", w.standoff},
                {"cylinder_radius_m", w.shape.radius},
                {"cylinder_height_m", w.shape.height},
                {"grid_level", w.grid_level},
                {"initial_phase_rad", w.initial_phase},
                {"systematics_longitudinal_m",
                 {w.systematics_longitudinal(0), w.systematics_longitudinal(1), w.systematics_longitudinal(2)}},
                {"systematics_vertical_m",
                 {w.systematics_vertical(0), w.systematics_vertical(1), w.systematics_vertical(2)}}};
  j["suspension"] = {{"platform_mass_kg", c.suspension.platform_mass},
                     {"resonance_frequency_hz", c.suspension.resonance_frequency},
                     {"quality_factor", number_or_inf(c.suspension.quality_factor)},
                     {"platform_offset_m", {c.platform.offset(0), c.platform.offset(1), c.platform.offset(2)}}};
  const auto& m = c.simulation;
  j["simulation"] = {{"duration_s", m.duration},
                     {"sample_rate_hz", m.sample_rate},
                     {"output_rate_hz", m.output_rate},
                     {"noise_temperature_k", m.noise_temperature},
                     {"drive_amplitude_n", m.drive_amplitude},
                     {"drive_offset_hz", m.drive_offset},
                     {"drive_phase_rad", m.drive_phase},
                     {"lockin_detuning_hz", m.lockin_detuning},
                     {"duffing_n_per_m3", m.duffing},
                     {"seed", m.seed},
                     {"thermal_initial_state", m.thermal_initial_state},
                     {"initial_displacement_m", m.initial_displacement}};
  const auto& p = c.pipeline;
  j["pipeline"] = {{"reference_frequency_hz", p.reference_frequency},
                   {"detuning_hz", p.detuning},
                   {"band_width_hz", p.band_width},
                   {"subtract_ringdown", p.subtract_ringdown},
                   {"end_match", p.end_match},
                   {"hann_window", p.hann_window}};
  return j;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(config_to_json(config).dump()); }

}  // namespace levsense
