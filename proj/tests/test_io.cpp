#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "levsense/config.hpp"
#include "levsense/errors.hpp"
#include "levsense/ingest.hpp"
#include "levsense/provenance.hpp"
#include "levsense/results.hpp"
#include "levsense/trace_file.hpp"

using namespace levsense;
namespace fs = std::filesystem;

namespace {

TraceFile sample_demod(Eigen::Index n = 50) {
  DemodTrace t;
  t.center_frequency = 26.7;
  t.output_rate = 0.25;
  t.start_time = 3.681552327538633;
  t.transient_samples = 1;
  t.filter_time_constant = 0.08;
  t.units = Units::volts;
  t.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) t.samples(i) = {std::sin(0.1 * i) / 3.0, 1e-7 * std::cos(0.37 * i) + 1e-300};
  t.calibration = CalibrationResult{2.2652572517847656e-06, 1.4734883720930234e-07, 160000.0, 0.07};
  TraceFile f;
  f.trace = t;
  f.seed = 12345678901234ULL;
  f.mode = derive_mode(26.7, 1.09e5, 0.43e-6);
  f.provenance = base_provenance("abc");
  return f;
}

const DemodTrace& demod_of(const TraceFile& f) { return std::get<DemodTrace>(f.trace); }

bool bit_equal(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(std::complex<double>) * a.size()) == 0;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("levsense_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" LEVSENSE_CLI "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(TraceFileFormat, FormatDoubleRoundTrips) {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1e-300, 5e-324, 1.7976931348623157e308, -3.681552327538633}) {
    EXPECT_EQ(parse_double(format_double(v), "v"), v);
  }
  EXPECT_TRUE(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()), "v")));
  EXPECT_THROW(parse_double("1.0x", "v"), ValidationError);
  EXPECT_THROW(parse_double("", "v"), ValidationError);
}

TEST(TraceFileFormat, TextRoundTripBitExact) {
  const TraceFile f = sample_demod();
  const std::string text = serialize_trace(f);
  const TraceFile g = parse_trace(text);
  ASSERT_TRUE(g.is_demod());
  EXPECT_TRUE(bit_equal(demod_of(f).samples, demod_of(g).samples));
  EXPECT_EQ(demod_of(g).start_time, demod_of(f).start_time);
  EXPECT_EQ(demod_of(g).center_frequency, 26.7);
  EXPECT_EQ(demod_of(g).transient_samples, 1);
  ASSERT_TRUE(demod_of(g).calibration);
  EXPECT_EQ(demod_of(g).calibration->voltage_sensitivity, 160000.0);
  EXPECT_EQ(g.seed, f.seed);
  ASSERT_TRUE(g.mode);
  EXPECT_EQ(g.mode->q_factor(), f.mode->q_factor());
  EXPECT_EQ(g.provenance, f.provenance);
  EXPECT_EQ(serialize_trace(g), text);
}

TEST(TraceFileFormat, BinaryRoundTripBitExact) {
  TraceFile f = sample_demod(333);
  f.encoding = Encoding::binary;
  const std::string bytes = serialize_trace(f);
  const TraceFile g = parse_trace(bytes);
  EXPECT_EQ(g.encoding, Encoding::binary);
  EXPECT_TRUE(bit_equal(demod_of(f).samples, demod_of(g).samples));
  EXPECT_EQ(serialize_trace(g), bytes);
}

TEST(TraceFileFormat, RawTraceRoundTrip) {
  RawTrace r;
  r.sample_rate = 640.0;
  r.units = Units::metres;
  r.samples = Eigen::VectorXd::LinSpaced(100, -1e-9, 1e-9);
  TraceFile f;
  f.trace = r;
  for (Encoding e : {Encoding::text, Encoding::binary}) {
    f.encoding = e;
    const TraceFile g = parse_trace(serialize_trace(f));
    ASSERT_FALSE(g.is_demod());
    const auto& s = std::get<RawTrace>(g.trace).samples;
    EXPECT_EQ(std::memcmp(s.data(), r.samples.data(), sizeof(double) * 100), 0);
  }
}

TEST(TraceFileFormat, HeaderValidation) {
  const std::string good = serialize_trace(sample_demod(5));
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
  };
  EXPECT_THROW(parse_trace(replaced("# length = 5", "# length = 6")), ValidationError);
  EXPECT_THROW(parse_trace(replaced("# units = V", "# units = mV")), ValidationError);
  EXPECT_THROW(parse_trace(replaced("# levsense-trace", "# other")), ValidationError);
  EXPECT_THROW(parse_trace(replaced("# kind = demod", "# kind = demod\n# kind = demod")), ValidationError);
  EXPECT_THROW(parse_trace(replaced("# end-header\n", "")), ValidationError);
  EXPECT_THROW(parse_trace(good + "1,2,3\n"), ValidationError);
}

TEST(TraceFileFormat, AtomicWriteAndRead) {
  TempDir dir;
  const TraceFile f = sample_demod();
  write_trace(dir / "sub/a.trace", f);
  EXPECT_FALSE(fs::exists(dir / "sub/a.trace.tmp"));
  EXPECT_TRUE(bit_equal(demod_of(read_trace(dir / "sub/a.trace")).samples, demod_of(f).samples));
}

TEST(Provenance, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig c = parse_config(R"({"simulation": {"duration_s": 100, "seed": 9}, "mode": {"decay_time_s": "inf"}})");
  EXPECT_EQ(c.simulation.duration, 100.0);
  EXPECT_EQ(c.simulation.seed, 9u);
  EXPECT_TRUE(std::isinf(c.mode.decay_time));
  EXPECT_EQ(c.wheel.mass_count, 3);
  EXPECT_EQ(parse_config("{}").simulation.duration, 28800.0);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(R"({"simulation": {"duration": 100}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"simulaton": {}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"simulation": {"duration_s": "long"}})"), ValidationError);
}

TEST(Config, HashStableAndRoundTrips) {
  const RunConfig a = parse_config(R"({"wheel": {"rim_radius_m": 0.25}})");
  const RunConfig b = parse_config(config_to_json(a).dump());
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  EXPECT_NE(config_hash(a), config_hash(RunConfig{}));
}

TEST(Ingest, ThreeColumnDemod) {
  ColumnMap map;
  map.sample_rate = 0.25;
  map.center_frequency = 26.7;
  const IngestResult r = ingest("t,I,Q\n0,1,2\n4,3,4\n8,5,6\n", map, false);
  EXPECT_EQ(r.rows_read, 3u);
  ASSERT_TRUE(r.file.is_demod());
  EXPECT_EQ(r.file.size(), 3);
  EXPECT_EQ(demod_of(r.file).samples(2), std::complex<double>(5, 6));
}

TEST(Ingest, NamedAndIndexedColumnsFromMap) {
  const ColumnMap map = parse_column_map(
      R"({"kind": "demod", "delimiter": ";", "columns": {"time": 2, "i": "x", "q": "y"}, "sample_rate_hz": 1, "center_frequency_hz": 5, "units": "m"})");
  const IngestResult r = ingest("# exported\ny;x;time\n1;2;0\n3;4;1\n", map, false);
  EXPECT_EQ(demod_of(r.file).samples(1), std::complex<double>(4, 3));
  EXPECT_EQ(demod_of(r.file).units, Units::metres);
  EXPECT_THROW(parse_column_map(R"({"sample_rate_hz": 1, "colour": 2})"), ValidationError);
}

TEST(Ingest, NanRowPolicy) {
  ColumnMap map;
  map.sample_rate = 1.0;
  const std::string data = "t,I,Q\n0,1,2\n1,nan,4\n2,5,6\n3,7,8\n";
  try {
    ingest(data, map, false);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
  const IngestResult r = ingest(data, map, true);
  ASSERT_EQ(r.rejected_rows.size(), 1u);
  EXPECT_EQ(r.rejected_rows[0], 1u);
  EXPECT_EQ(r.file.size(), 3);
  EXPECT_EQ(r.file.provenance.count("ingest.rejected_rows"), 1u);
}

TEST(Ingest, NonMonotoneTimeNamesRow) {
  ColumnMap map;
  map.sample_rate = 1.0;
  try {
    ingest("t,I,Q\n0,1,2\n1,3,4\n1,5,6\n", map, false);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  map.time = std::string("missing");
  EXPECT_THROW(ingest("t,I,Q\n0,1,2\n", map, false), ValidationError);
}

TEST(Ingest, ExportIngestBitExact) {
  const TraceFile f = sample_demod(200);
  ColumnMap map;
  map.sample_rate = 0.25;
  map.center_frequency = 26.7;
  const IngestResult r = ingest(export_delimited(f), map, false);
  EXPECT_TRUE(bit_equal(demod_of(r.file).samples, demod_of(f).samples));
  EXPECT_EQ(demod_of(r.file).start_time, demod_of(f).start_time);
}

TEST(Results, SweepCsvHasEnvelopeColumnsAndOneRowPerPoint) {
  SweepResult s{SweepAxis::vertical, {{0.0, 2e-17, 0.1, 0.2, 1.9e-17, 2.1e-17}, {0.01, 1.8e-17, 0.1, 0.2, 1.7e-17, 1.9e-17}}};
  const std::string csv = sweep_csv(s);
  EXPECT_EQ(csv.rfind("displacement_m,amplitude_n,phase_rad,phase_of_max_force_rad,envelope_low_n,envelope_high_n\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Results, CalibrationJsonRoundTrip) {
  const CalibrationResult c{2.2652572517847656e-06, 1.4734883720930234e-07, 160000.0, 0.07};
  const CalibrationResult d = calibration_from_json(nlohmann::json::parse(dump(to_json(c))));
  EXPECT_EQ(d.beta_squared, c.beta_squared);
  EXPECT_EQ(d.voltage_sensitivity, c.voltage_sensitivity);
}

// ---- command line ----

TEST(Cli, AnalyzeWithoutCalibrationExitsOne) {
  TempDir dir;
  write_text(dir / "c.json", R"({"simulation": {"duration_s": 1000}})");
  ASSERT_EQ(run_cli("simulate --config " + (dir / "c.json").string() + " --out " + (dir / "t.trace").string()), 0);
  // strip the calibration lines
  std::string text = read_file(dir / "t.trace"), stripped;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# calibration.", 0) != 0) stripped += line + "\n";
  }
  write_text(dir / "nocal.trace", stripped);
  EXPECT_EQ(run_cli("analyze --trace " + (dir / "nocal.trace").string() + " --config " + (dir / "c.json").string() +
                    " --out-dir " + (dir / "out").string()),
            1);
  EXPECT_EQ(run_cli("analyze --trace " + (dir / "missing.trace").string()), 1);
}

TEST(Cli, SweepVerticalRowPerPosition) {
  TempDir dir;
  ASSERT_EQ(run_cli("sweep --axis vertical --from 0 --to 0.1 --steps 6 --out " + (dir / "s.csv").string()), 0);
  std::ifstream in(dir / "s.csv");
  int rows = 0;
  bool header = false;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      EXPECT_NE(line.find("envelope_low_n"), std::string::npos);
      continue;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}

TEST(Cli, SimulateAnalyzeRecoversForce) {
  TempDir dir;
  write_text(dir / "c.json", R"({"simulation": {"duration_s": 28800, "seed": 3}})");
  const std::string cfg = " --config " + (dir / "c.json").string();
  ASSERT_EQ(run_cli("simulate" + cfg + " --out " + (dir / "t.trace").string()), 0);
  ASSERT_EQ(run_cli("analyze" + cfg + " --trace " + (dir / "t.trace").string() + " --out-dir " + (dir / "out").string()), 0);
  const auto report = nlohmann::json::parse(read_file(dir / "out/report.json"));
  EXPECT_NEAR(report["report"]["integrated_force_n"].get<double>() / 30e-18, 1.0, 0.10);
  EXPECT_TRUE(report["provenance"].contains("input.trace_sha256"));
  EXPECT_TRUE(fs::exists(dir / "out/spectra.csv"));
  EXPECT_TRUE(fs::exists(dir / "out/force_spectrum.svg"));
}

TEST(Cli, ReportRerunByteIdentical) {
  TempDir dir;
  write_text(dir / "c.json", R"({"simulation": {"duration_s": 2000}})");
  const std::string cfg = " --config " + (dir / "c.json").string();
  ASSERT_EQ(run_cli("simulate" + cfg + " --out " + (dir / "t.trace").string()), 0);
  const std::string args = "report" + cfg + " --trace " + (dir / "t.trace").string() + " --out ";
  ASSERT_EQ(run_cli(args + (dir / "a.json").string(), "LEVSENSE_THREADS=1"), 0);
  ASSERT_EQ(run_cli(args + (dir / "b.json").string(), "LEVSENSE_THREADS=3"), 0);
  EXPECT_EQ(read_file(dir / "a.json"), read_file(dir / "b.json"));
}

TEST(Cli, OutputDirectoryOverride) {
  TempDir dir;
  ASSERT_EQ(run_cli("calibrate --out cal.json", "LEVSENSE_OUTPUT_DIR=" + dir.path.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "cal.json"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write_text(dir / "bad.json", R"({"simulation": {"bogus_key": 1}})");
  EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "t.trace").string()), 1);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  write_text(dir / "tiny.json", R"({"particle": {"total_mass_kg": 1e-30}})");
  EXPECT_EQ(run_cli("report --config " + (dir / "tiny.json").string() + " --out " + (dir / "r.json").string()), 2);
}
