// levsense command-line front end.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "levsense/calibration.hpp"
#include "levsense/config.hpp"
#include "levsense/errors.hpp"
#include "levsense/estimation.hpp"
#include "levsense/gravity.hpp"
#include "levsense/ingest.hpp"
#include "levsense/levitation.hpp"
#include "levsense/pipeline.hpp"
#include "levsense/provenance.hpp"
#include "levsense/results.hpp"
#include "levsense/suspension.hpp"
#include "levsense/synth.hpp"
#include "levsense/trace_file.hpp"

namespace fs = std::filesystem;
using namespace levsense;

namespace {

fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("LEVSENSE_OUTPUT_DIR"); dir && *dir) return fs::path(dir) / path;
  }
  return path;
}

unsigned thread_count() {
  if (const char* t = std::getenv("LEVSENSE_THREADS"); t && *t) {
    char* end = nullptr;
    const long v = std::strtol(t, &end, 10);
    if (*end != '\0' || v < 1) throw ValidationError("LEVSENSE_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Loaded {
  RunConfig config;
  std::string hash;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.config = path.empty() ? RunConfig{} : load_config(path);
  l.config.validate();
  l.hash = config_hash(l.config);
  return l;
}

std::string provenance_comment(const Provenance& p, std::string_view prefix) {
  std::string out;
  for (const auto& [k, v] : p) out += std::string(prefix) + k + " = " + v + "\n";
  return out;
}

std::string svg_with_provenance(std::string svg, const Provenance& p) {
  std::string c = "<!--\n" + provenance_comment(p, "") + "-->\n";
  auto pos = svg.find('\n');
  return svg.insert(pos + 1, c);
}

void write_json(const fs::path& path, ojson body, const Provenance& prov) {
  body["provenance"] = to_json(prov);
  atomic_write(path, dump(body));
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw ValidationError("--steps must be at least 1");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

SweepResult run_sweep(const RunConfig& c, SweepAxis axis, const std::vector<double>& positions) {
  const auto cloud = decompose(c.wheel.mass_each, c.wheel.shape, c.wheel.grid_level);
  return sweep(c.wheel.wheel(), cloud, c.mode.effective_mass, c.mode.frequency, axis, positions,
               c.wheel.systematics(axis), thread_count());
}

ExpFit ringdown_fit(const DemodTrace& trace) {
  const Eigen::Index skip = std::clamp<Eigen::Index>(trace.transient_samples, 0, trace.size());
  std::vector<double> t, y;
  for (Eigen::Index i = skip; i < trace.size(); ++i) {
    t.push_back(trace.time(i) - trace.time(skip));
    y.push_back(std::abs(trace.samples(i)));
  }
  return fit_exponential(t, y);
}

const DemodTrace& demod_of(const TraceFile& f) {
  if (!f.is_demod()) throw ValidationError("this command needs a demodulated (lock-in) trace");
  return std::get<DemodTrace>(f.trace);
}

OscillatorMode mode_for(const TraceFile& f, const RunConfig& c, bool have_config) {
  if (f.mode && !have_config) return *f.mode;
  return c.oscillator();
}

struct AnalyzeOutput {
  PipelineReport report;
  Provenance prov;
};

AnalyzeOutput analyze(const std::string& trace_path, const std::string& config_path, const std::string& cal_path) {
  const auto l = load(config_path);
  const TraceFile file = read_trace(trace_path);
  const DemodTrace& trace = demod_of(file);
  std::optional<CalibrationResult> cal;
  Provenance prov = base_provenance(l.hash);
  prov["input.trace_sha256"] = file_sha256(trace_path);
  if (!cal_path.empty()) {
    cal = calibration_from_json(nlohmann::json::parse(read_file(cal_path)));
    prov["input.calibration_sha256"] = file_sha256(cal_path);
  }
  if (trace.units == Units::volts && !cal && !trace.calibration) {
    throw ValidationError("trace has no calibration metadata; pass --calibration");
  }
  const auto mode = mode_for(file, l.config, !config_path.empty());
  return {run_pipeline(trace, mode, cal, l.config.pipeline), prov};
}

struct ScaleData {
  std::vector<double> x, y, sx, sy;
};

// header row, then x,y,sigma_x,sigma_y
ScaleData read_scale_data(const std::string& path) {
  ScaleData d;
  std::istringstream ss(read_file(path));
  std::string line;
  bool header = true;
  std::size_t row = 0;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> v;
    std::size_t p = 0;
    while (true) {
      auto c = line.find(',', p);
      v.push_back(parse_double(std::string_view(line).substr(p, c == std::string::npos ? std::string::npos : c - p),
                               "value in row " + std::to_string(row)));
      if (c == std::string::npos) break;
      p = c + 1;
    }
    if (v.size() != 4) throw ValidationError("row " + std::to_string(row) + " needs x,y,sigma_x,sigma_y");
    d.x.push_back(v[0]), d.y.push_back(v[1]), d.sx.push_back(v[2]), d.sy.push_back(v[3]);
    ++row;
  }
  if (d.x.empty()) throw ValidationError("no data rows in " + path);
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"levsense: levitated-magnet force sensing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  std::string config_path, out, trace_path, cal_path, input, map_path, axis = "vertical";
  bool raw = false, binary = false, allow_gaps = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration, beta2, volts_per_m, rotation;
  double from = 0.0, to = 0.15;
  int steps = 16;

  auto* sim = app.add_subcommand("simulate", "synthesise a detector trace (lock-in output by default)");
  sim->add_option("--config", config_path, "run config (JSON)");
  sim->add_option("--out", out, "trace file")->required();
  sim->add_flag("--raw", raw, "write the undemodulated SQUID voltage");
  sim->add_flag("--binary", binary, "little-endian float64 body");
  sim->add_option("--seed", seed);
  sim->add_option("--duration", duration, "seconds");

  auto* cal = app.add_subcommand("calibrate", "displacement calibration chain");
  cal->add_option("--config", config_path);
  cal->add_option("--beta2", beta2, "measured energy coupling");
  cal->add_option("--voltage-sensitivity", volts_per_m, "measured dV/dx in V/m");
  cal->add_option("--out", out)->required();

  auto* ring = app.add_subcommand("ringdown", "exponential fit of the lock-in envelope");
  ring->add_option("--trace", trace_path)->required()->check(CLI::ExistingFile);
  ring->add_option("--out", out)->required();

  auto* an = app.add_subcommand("analyze", "force pipeline on a lock-in trace");
  an->add_option("--trace", trace_path)->required()->check(CLI::ExistingFile);
  an->add_option("--config", config_path);
  an->add_option("--calibration", cal_path)->check(CLI::ExistingFile);
  an->add_option("--out-dir", out)->required();

  auto* sw = app.add_subcommand("sweep", "drive amplitude against wheel displacement");
  sw->add_option("--config", config_path);
  sw->add_option("--axis", axis)->check(CLI::IsMember({"vertical", "longitudinal"}));
  sw->add_option("--from", from, "m");
  sw->add_option("--to", to, "m");
  sw->add_option("--steps", steps);
  sw->add_option("--out", out, "CSV file")->required();

  auto* fs_cmd = app.add_subcommand("fit-scale", "orthogonal-distance fit of y = s x");
  fs_cmd->add_option("--input", input, "CSV with x,y,sigma_x,sigma_y")->required()->check(CLI::ExistingFile);
  fs_cmd->add_option("--out", out)->required();

  auto* rep = app.add_subcommand("report", "one document with every result");
  rep->add_option("--config", config_path);
  rep->add_option("--trace", trace_path)->check(CLI::ExistingFile);
  rep->add_option("--calibration", cal_path)->check(CLI::ExistingFile);
  rep->add_option("--scale-data", input)->check(CLI::ExistingFile);
  rep->add_option("--out", out)->required();

  auto* ing = app.add_subcommand("ingest", "normalise an external lock-in export");
  ing->add_option("--input", input)->required()->check(CLI::ExistingFile);
  ing->add_option("--map", map_path, "column map (JSON)")->required()->check(CLI::ExistingFile);
  ing->add_option("--out", out)->required();
  ing->add_flag("--allow-gaps", allow_gaps, "drop non-finite rows instead of failing");
  ing->add_flag("--binary", binary);

  auto fail = [](const char* kind, const std::string& msg, int code) {
    nlohmann::json e{{"error", kind}, {"message", msg}, {"exit_code", code}};
    std::cerr << e.dump() << "\n";
    return code;
  };

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      return fail("usage", e.what(), 1);
    }

    if (*sim) {
      auto l = load(config_path);
      if (seed) l.config.simulation.seed = *seed;
      if (duration) l.config.simulation.duration = *duration;
      l.config.validate();
      l.hash = config_hash(l.config);
      const auto c = l.config;
      const auto calib = c.calibration();
      TraceFile f;
      f.seed = c.simulation.seed;
      f.mode = c.oscillator();
      f.mode_table = measured_mode_table();
      f.provenance = base_provenance(l.hash);
      f.encoding = binary ? Encoding::binary : Encoding::text;
      if (raw) {
        auto r = to_squid_volts(simulate(c.sim_config(), c.simulation.duration), calib.voltage_sensitivity);
        f.trace = std::move(r);
      } else {
        auto d = simulate_lockin(c.sim_config(), c.simulation.duration, calib.voltage_sensitivity, c.demod_options());
        d.calibration = calib;
        f.trace = std::move(d);
      }
      write_trace(output_path(out), f);
    } else if (*cal) {
      const auto l = load(config_path);
      if (beta2 && volts_per_m) throw ValidationError("give --beta2 or --voltage-sensitivity, not both");
      const auto mode = l.config.oscillator();
      const auto& k = l.config.circuit;
      CalibrationResult r = beta2          ? calibrate(k.circuit, mode, *beta2, k.relative_error)
                            : volts_per_m ? calibrate_from_voltage(k.circuit, mode, *volts_per_m, k.relative_error)
                                          : l.config.calibration();
      ojson body;
      body["calibration"] = to_json(r);
      write_json(output_path(out), body, base_provenance(l.hash));
    } else if (*ring) {
      const TraceFile f = read_trace(trace_path);
      Provenance prov = base_provenance("");
      prov["input.trace_sha256"] = file_sha256(trace_path);
      ojson body;
      body["ringdown"] = to_json(ringdown_fit(demod_of(f)));
      write_json(output_path(out), body, prov);
    } else if (*an) {
      const auto res = analyze(trace_path, config_path, cal_path);
      const fs::path dir = output_path(out);
      ojson body;
      body["report"] = to_json(res.report);
      write_json(dir / "report.json", body, res.prov);
      atomic_write(dir / "spectra.csv",
                   provenance_comment(res.prov, "# ") + spectra_csv(res.report.displacement, res.report.force));
      atomic_write(dir / "force_spectrum.svg",
                   svg_with_provenance(spectrum_svg(res.report.force, res.report.drive_frequency, "force ASD (N/rtHz)"),
                                       res.prov));
      atomic_write(dir / "displacement_spectrum.svg",
                   svg_with_provenance(spectrum_svg(res.report.displacement, res.report.drive_frequency,
                                                    "displacement ASD (m/rtHz)"),
                                       res.prov));
    } else if (*sw) {
      const auto l = load(config_path);
      const auto result = run_sweep(l.config, sweep_axis_from_string(axis), linspace(from, to, steps));
      atomic_write(output_path(out), provenance_comment(base_provenance(l.hash), "# ") + sweep_csv(result));
    } else if (*fs_cmd) {
      const auto d = read_scale_data(input);
      Provenance prov = base_provenance("");
      prov["input.scale_data_sha256"] = file_sha256(input);
      ojson body;
      body["scale_fit"] = to_json(fit_scale_odr(d.x, d.y, d.sx, d.sy));
      write_json(output_path(out), body, prov);
    } else if (*rep) {
      const auto l = load(config_path);
      const auto& c = l.config;
      Provenance prov = base_provenance(l.hash);
      ojson body;
      body["config"] = config_to_json(c);
      const auto lev = solve_levitation(c.particle);
      body["levitation"] = {{"dipole_moment_a_m2", c.particle.dipole_moment()},
                            {"equilibrium_height_m", lev.equilibrium_height},
                            {"z_frequency_hz", lev.z_frequency}};
      const auto mode = c.oscillator();
      body["mode"] = {{"frequency_hz", mode.frequency()},
                      {"decay_time_s", mode.decay_time()},
                      {"q_factor", mode.q_factor()},
                      {"linewidth_hz", mode.linewidth()},
                      {"stiffness_n_per_m", mode.stiffness()},
                      {"x_zpm_m", zero_point_motion(mode.effective_mass(), mode.frequency())}};
      const auto calib = c.calibration();
      body["calibration"] = to_json(calib);
      const auto zp = zero_point_flux_and_g0(calib.flux_sensitivity,
                                             zero_point_motion(mode.effective_mass(), mode.frequency()), 1e9);
      body["zero_point"] = {{"flux_phi0", zp.flux_phi0}, {"g0_hz", zp.g0}};
      const auto wheel = c.wheel.wheel();
      const auto cloud = decompose(c.wheel.mass_each, c.wheel.shape, c.wheel.grid_level);
      const auto drive = drive_component(wheel, cloud, mode.effective_mass(), mode.frequency());
      body["gravity"] = {{"drive_amplitude_n", drive.amplitude},
                         {"phase_rad", drive.phase},
                         {"phase_of_max_force_rad", drive.phase_of_max_force},
                         {"quadrature_nodes", drive.quadrature_nodes}};
      body["sweep_vertical"] = to_json(run_sweep(c, SweepAxis::vertical, linspace(0.0, 0.12, 5)));
      // platform gravity gradient: the same wheel seen from the platform centroid
      Wheel at_platform = wheel;
      at_platform.hub_position -= c.platform.offset;
      const double a_t = drive_component(at_platform, cloud, 1.0, mode.frequency()).amplitude;
      const double a_p = drive.amplitude / mode.effective_mass();
      const auto supp = effective_drive(a_p, a_t, mode.frequency(), c.suspension);
      body["suspension"] = {{"particle_accel_m_per_s2", a_p},
                            {"platform_accel_m_per_s2", a_t},
                            {"platform_phase_rad", supp.platform_phase},
                            {"residual_factor", supp.residual_factor},
                            {"residual", {supp.residual.real(), supp.residual.imag()}}};
      if (!trace_path.empty()) {
        const auto res = analyze(trace_path, config_path, cal_path);
        for (const auto& [k, v] : res.prov) prov[k] = v;
        body["ringdown"] = to_json(ringdown_fit(demod_of(read_trace(trace_path))));
        body["pipeline"] = to_json(res.report);
      }
      if (!input.empty()) {
        prov["input.scale_data_sha256"] = file_sha256(input);
        const auto d = read_scale_data(input);
        body["scale_fit"] = to_json(fit_scale_odr(d.x, d.y, d.sx, d.sy));
      }
      write_json(output_path(out), body, prov);
    } else if (*ing) {
      const ColumnMap map = parse_column_map(read_file(map_path));
      auto result = ingest(read_file(input), map, allow_gaps);
      result.file.encoding = binary ? Encoding::binary : Encoding::text;
      result.file.provenance["toolkit_version"] = std::string(kToolkitVersion);
      result.file.provenance["input.source_sha256"] = file_sha256(input);
      result.file.provenance["input.column_map_sha256"] = file_sha256(map_path);
      write_trace(output_path(out), result.file);
      if (!result.rejected_rows.empty()) {
        nlohmann::json w{{"warning", "rows dropped; later samples move up one period per dropped row"},
                         {"rows", result.rejected_rows}};
        std::cerr << w.dump() << "\n";
      }
    }
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), 2);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), 1);
  } catch (const DomainError& e) {
    return fail("validation", e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return fail("validation", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("numerical", e.what(), 2);
  }
  return 0;
}
