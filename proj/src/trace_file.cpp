#include "levsense/trace_file.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <vector>

#include "levsense/errors.hpp"

namespace levsense {

static_assert(std::endian::native == std::endian::little, "binary traces assume a little-endian host");

Eigen::Index TraceFile::size() const {
  return std::visit([](const auto& t) { return t.size(); }, trace);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan" || text == "NaN" || text == "NAN") return std::numeric_limits<double>::quiet_NaN();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("cannot parse " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return v;
}

namespace {

using Header = std::map<std::string, std::string, std::less<>>;

void put(std::string& out, std::string_view key, std::string_view value) {
  if (value.find('\n') != std::string_view::npos) throw ValidationError("header value contains a newline");
  out += "# ";
  out += key;
  out += " = ";
  out += value;
  out += '\n';
}

void put(std::string& out, std::string_view key, double value) { put(out, key, format_double(value)); }

const std::string& need(const Header& h, std::string_view key) {
  auto it = h.find(key);
  if (it == h.end()) throw ValidationError("trace header is missing '" + std::string(key) + "'");
  return it->second;
}

double need_double(const Header& h, std::string_view key) { return parse_double(need(h, key), key); }

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("cannot parse integer " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("cannot parse " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return v;
}

void append_f64(std::string& out, double v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  out.append(bytes, 8);
}

double read_f64(const char* p) {
  double v;
  std::memcpy(&v, p, 8);
  return v;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(delim, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::string serialize_trace(const TraceFile& file) {
  std::string out;
  const bool demod = file.is_demod();
  const Eigen::Index n = file.size();
  out += "# levsense-trace\n";
  put(out, "format_version", std::to_string(kTraceFormatVersion));
  put(out, "kind", demod ? "demod" : "raw");
  if (demod) {
    const auto& t = std::get<DemodTrace>(file.trace);
    t.validate();
    put(out, "units", to_string(t.units));
    put(out, "output_rate", t.output_rate);
    put(out, "center_frequency", t.center_frequency);
    put(out, "start_time", t.start_time);
    put(out, "transient_samples", std::to_string(t.transient_samples));
    put(out, "filter_time_constant", t.filter_time_constant);
    if (t.calibration) {
      put(out, "calibration.beta_squared", t.calibration->beta_squared);
      put(out, "calibration.flux_sensitivity", t.calibration->flux_sensitivity);
      put(out, "calibration.voltage_sensitivity", t.calibration->voltage_sensitivity);
      put(out, "calibration.relative_error", t.calibration->relative_error);
    }
  } else {
    const auto& t = std::get<RawTrace>(file.trace);
    t.validate();
    put(out, "units", to_string(t.units));
    put(out, "sample_rate", t.sample_rate);
    put(out, "start_time", t.start_time);
    if (t.sensitivity) put(out, "sensitivity", *t.sensitivity);
  }
  if (file.seed) put(out, "seed", std::to_string(*file.seed));
  if (file.mode) {
    put(out, "mode.frequency", file.mode->frequency());
    put(out, "mode.decay_time", file.mode->decay_time());
    put(out, "mode.effective_mass", file.mode->effective_mass());
  }
  if (!file.mode_table.empty()) {
    put(out, "mode_table.count", std::to_string(file.mode_table.size()));
    for (std::size_t i = 0; i < file.mode_table.size(); ++i) {
      const auto& e = file.mode_table.entries()[i];
      put(out, "mode_table." + std::to_string(i),
          format_double(e.frequency) + "," + format_double(e.decay_time) + "," + format_double(e.q_factor));
    }
  }
  for (const auto& [k, v] : file.provenance) put(out, "provenance." + k, v);
  put(out, "length", std::to_string(n));
  put(out, "encoding", file.encoding == Encoding::text ? "text" : "binary-le-f64");
  put(out, "columns", demod ? "time,I,Q" : "time,value");
  out += "# end-header\n";

  auto row = [&](double t, const double* comps, int k) {
    if (file.encoding == Encoding::binary) {
      append_f64(out, t);
      for (int c = 0; c < k; ++c) append_f64(out, comps[c]);
    } else {
      out += format_double(t);
      for (int c = 0; c < k; ++c) {
        out += ',';
        out += format_double(comps[c]);
      }
      out += '\n';
    }
  };
  if (demod) {
    const auto& t = std::get<DemodTrace>(file.trace);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c[2] = {t.samples(i).real(), t.samples(i).imag()};
      row(t.time(i), c, 2);
    }
  } else {
    const auto& t = std::get<RawTrace>(file.trace);
    for (Eigen::Index i = 0; i < n; ++i) row(t.time(i), &t.samples(i), 1);
  }
  return out;
}

TraceFile parse_trace(std::string_view contents) {
  Header h;
  std::size_t pos = 0;
  bool ended = false;
  bool first = true;
  while (pos < contents.size()) {
    auto eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) throw ValidationError("trace header is not terminated");
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (first) {
      if (line != "# levsense-trace") throw ValidationError("not a trace file (bad magic line)");
      first = false;
      continue;
    }
    if (line == "# end-header") {
      ended = true;
      break;
    }
    if (line.size() < 2 || line.substr(0, 2) != "# ") throw ValidationError("malformed header line: " + std::string(line));
    auto eq = line.find(" = ");
    if (eq == std::string_view::npos) throw ValidationError("malformed header line: " + std::string(line));
    std::string key(line.substr(2, eq - 2));
    if (!h.emplace(key, std::string(line.substr(eq + 3))).second) {
      throw ValidationError("duplicate header key '" + key + "'");
    }
  }
  if (!ended) throw ValidationError("trace header is not terminated");

  if (parse_int(need(h, "format_version"), "format_version") != kTraceFormatVersion) {
    throw ValidationError("unsupported trace format version " + need(h, "format_version"));
  }
  TraceFile file;
  const std::string& kind = need(h, "kind");
  if (kind != "demod" && kind != "raw") throw ValidationError("unknown trace kind '" + kind + "'");
  const bool demod = kind == "demod";
  const Units units = units_from_string(need(h, "units"));
  const std::int64_t length = parse_int(need(h, "length"), "length");
  if (length < 0) throw ValidationError("negative length");
  const std::string& enc = need(h, "encoding");
  if (enc == "text") {
    file.encoding = Encoding::text;
  } else if (enc == "binary-le-f64") {
    file.encoding = Encoding::binary;
  } else {
    throw ValidationError("unknown encoding '" + enc + "'");
  }
  const int comps = demod ? 2 : 1;
  const std::string expected_cols = demod ? "time,I,Q" : "time,value";
  if (need(h, "columns") != expected_cols) throw ValidationError("columns must be " + expected_cols);

  if (auto it = h.find("seed"); it != h.end()) file.seed = parse_u64(it->second, "seed");
  if (h.count("mode.frequency")) {
    file.mode = derive_mode(need_double(h, "mode.frequency"), need_double(h, "mode.decay_time"),
                            need_double(h, "mode.effective_mass"));
  }
  if (auto it = h.find("mode_table.count"); it != h.end()) {
    const auto count = parse_int(it->second, "mode_table.count");
    std::vector<ModeEntry> entries;
    for (std::int64_t i = 0; i < count; ++i) {
      auto parts = split(need(h, "mode_table." + std::to_string(i)), ',');
      if (parts.size() != 3) throw ValidationError("mode_table entry needs f,tau,Q");
      entries.push_back({parse_double(parts[0], "mode_table f"), parse_double(parts[1], "mode_table tau"),
                         parse_double(parts[2], "mode_table Q")});
    }
    file.mode_table = ModeTable(std::move(entries));
  }
  for (const auto& [k, v] : h) {
    if (k.rfind("provenance.", 0) == 0) file.provenance[k.substr(11)] = v;
  }

  // body
  Eigen::MatrixXd body(length, comps + 1);
  std::string_view rest = contents.substr(pos);
  if (file.encoding == Encoding::binary) {
    const std::size_t need_bytes = static_cast<std::size_t>(length) * static_cast<std::size_t>(comps + 1) * 8;
    if (rest.size() != need_bytes) {
      throw ValidationError("binary body holds " + std::to_string(rest.size()) + " bytes, header declares " +
                            std::to_string(need_bytes));
    }
    for (std::int64_t i = 0; i < length; ++i) {
      for (int c = 0; c <= comps; ++c) body(i, c) = read_f64(rest.data() + (i * (comps + 1) + c) * 8);
    }
  } else {
    std::int64_t row = 0;
    std::size_t p = 0;
    while (p < rest.size()) {
      auto eol = rest.find('\n', p);
      std::string_view line = rest.substr(p, eol == std::string_view::npos ? std::string_view::npos : eol - p);
      p = eol == std::string_view::npos ? rest.size() : eol + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      if (row >= length) throw ValidationError("body has more rows than the declared length " + std::to_string(length));
      auto fields = split(line, ',');
      if (static_cast<int>(fields.size()) != comps + 1) {
        throw ValidationError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " columns");
      }
      for (int c = 0; c <= comps; ++c) body(row, c) = parse_double(fields[c], "sample");
      ++row;
    }
    if (row != length) {
      throw ValidationError("body has " + std::to_string(row) + " rows, header declares " + std::to_string(length));
    }
  }

  if (demod) {
    DemodTrace t;
    t.units = units;
    t.output_rate = need_double(h, "output_rate");
    t.center_frequency = need_double(h, "center_frequency");
    t.start_time = need_double(h, "start_time");
    t.transient_samples = static_cast<int>(parse_int(need(h, "transient_samples"), "transient_samples"));
    t.filter_time_constant = need_double(h, "filter_time_constant");
    if (h.count("calibration.voltage_sensitivity")) {
      CalibrationResult c;
      c.beta_squared = need_double(h, "calibration.beta_squared");
      c.flux_sensitivity = need_double(h, "calibration.flux_sensitivity");
      c.voltage_sensitivity = need_double(h, "calibration.voltage_sensitivity");
      c.relative_error = need_double(h, "calibration.relative_error");
      t.calibration = c;
    }
    t.samples.resize(length);
    for (std::int64_t i = 0; i < length; ++i) t.samples(i) = {body(i, 1), body(i, 2)};
    t.validate();
    file.trace = std::move(t);
  } else {
    RawTrace t;
    t.units = units;
    t.sample_rate = need_double(h, "sample_rate");
    t.start_time = need_double(h, "start_time");
    if (auto it = h.find("sensitivity"); it != h.end()) t.sensitivity = parse_double(it->second, "sensitivity");
    t.samples = body.col(1);
    t.validate();
    file.trace = std::move(t);
  }
  // time column must agree with the declared rate and start
  const double rate = demod ? std::get<DemodTrace>(file.trace).output_rate : std::get<RawTrace>(file.trace).sample_rate;
  for (std::int64_t i = 0; i < length; ++i) {
    const double expect =
        std::visit([i](const auto& t) { return t.time(static_cast<Eigen::Index>(i)); }, file.trace);
    if (std::abs(body(i, 0) - expect) > 1e-6 / rate + 1e-12 * std::abs(expect)) {
      throw ValidationError("row " + std::to_string(i) + " time " + format_double(body(i, 0)) +
                            " disagrees with the declared rate");
    }
  }
  return file;
}

void write_trace(const std::filesystem::path& path, const TraceFile& file) {
  atomic_write(path, serialize_trace(file));
}

TraceFile read_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

}  // namespace levsense
