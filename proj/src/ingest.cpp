#include "levsense/ingest.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "levsense/errors.hpp"

namespace levsense {

namespace {

ColumnRef column_ref(const nlohmann::json& j, const std::string& key) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer() && j.get<int>() >= 0) return j.get<int>();
  throw ValidationError("column map: '" + key + "' must be a column name or a non-negative index");
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(delim, pos);
    auto f = line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    while (!f.empty() && (f.front() == ' ' || f.front() == '"')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '"' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::size_t resolve(const ColumnRef& ref, const std::vector<std::string>& names, const char* role) {
  if (auto idx = std::get_if<int>(&ref)) return static_cast<std::size_t>(*idx);
  const auto& name = std::get<std::string>(ref);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw ValidationError(std::string("missing column '") + name + "' for " + role);
}

}  // namespace

ColumnMap parse_column_map(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("column map is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("column map must be a JSON object");
  static const std::set<std::string> known = {"kind", "delimiter", "header_row", "comment_prefix",
                                              "columns", "sample_rate_hz", "center_frequency_hz", "units"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError("unknown column map key '" + it.key() + "'");
  }
  ColumnMap m;
  try {
    if (j.contains("kind")) {
      const auto kind = j["kind"].get<std::string>();
      if (kind != "demod" && kind != "raw") throw ValidationError("column map kind must be demod or raw");
      m.demod = kind == "demod";
    }
    if (j.contains("delimiter")) {
      const auto d = j["delimiter"].get<std::string>();
      if (d.size() != 1) throw ValidationError("delimiter must be one character");
      m.delimiter = d == "t" ? '\t' : d[0];
    }
    if (j.contains("header_row")) m.header_row = j["header_row"].get<bool>();
    if (j.contains("comment_prefix")) m.comment_prefix = j["comment_prefix"].get<std::string>();
    if (j.contains("units")) m.units = units_from_string(j["units"].get<std::string>());
    if (!j.contains("sample_rate_hz")) throw ValidationError("column map must declare sample_rate_hz");
    m.sample_rate = j["sample_rate_hz"].get<double>();
    if (j.contains("center_frequency_hz")) m.center_frequency = j["center_frequency_hz"].get<double>();
    if (!j.contains("columns") || !j["columns"].is_object()) throw ValidationError("column map needs a 'columns' object");
    const auto& c = j["columns"];
    static const std::set<std::string> roles = {"time", "i", "q", "value"};
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (!roles.count(it.key())) throw ValidationError("unknown column role '" + it.key() + "'");
    }
    if (!c.contains("time")) throw ValidationError("column map must name the time column");
    m.time = column_ref(c["time"], "time");
    if (m.demod) {
      if (!c.contains("i") || !c.contains("q")) throw ValidationError("demod column map must name i and q");
      m.in_phase = column_ref(c["i"], "i");
      m.quadrature = column_ref(c["q"], "q");
    } else {
      if (!c.contains("value")) throw ValidationError("raw column map must name value");
      m.value = column_ref(c["value"], "value");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("column map: ") + e.what());
  }
  if (!(m.sample_rate > 0)) throw ValidationError("sample_rate_hz must be positive");
  return m;
}

IngestResult ingest(std::string_view contents, const ColumnMap& map, bool allow_gaps) {
  std::vector<std::string> names;
  bool need_header = map.header_row;
  std::size_t time_col = 0, a_col = 0, b_col = 0;
  auto resolve_all = [&] {
    time_col = resolve(map.time, names, "time");
    if (map.demod) {
      a_col = resolve(map.in_phase, names, "I");
      b_col = resolve(map.quadrature, names, "Q");
    } else {
      a_col = resolve(map.value, names, "value");
    }
  };
  if (!need_header) resolve_all();

  std::vector<double> times, a, b;
  IngestResult result;
  std::size_t row = 0, pos = 0;
  double last_time = -std::numeric_limits<double>::infinity();
  while (pos < contents.size()) {
    auto eol = contents.find('\n', pos);
    std::string_view line = contents.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? contents.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!map.comment_prefix.empty() && line.substr(0, map.comment_prefix.size()) == map.comment_prefix) continue;
    auto fields = split(line, map.delimiter);
    if (need_header) {
      for (auto f : fields) names.emplace_back(f);
      resolve_all();
      need_header = false;
      continue;
    }
    const std::size_t need_cols = std::max({time_col, a_col, map.demod ? b_col : 0}) + 1;
    if (fields.size() < need_cols) {
      throw ValidationError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " columns, need " + std::to_string(need_cols));
    }
    const double t = parse_double(fields[time_col], "time at row " + std::to_string(row));
    const double va = parse_double(fields[a_col], "value at row " + std::to_string(row));
    const double vb = map.demod ? parse_double(fields[b_col], "value at row " + std::to_string(row)) : 0.0;
    if (!std::isfinite(t) || !std::isfinite(va) || !std::isfinite(vb)) {
      result.rejected_rows.push_back(row);
    } else {
      if (!(t > last_time)) throw ValidationError("non-monotone time at row " + std::to_string(row));
      last_time = t;
      times.push_back(t);
      a.push_back(va);
      b.push_back(vb);
    }
    ++row;
  }
  result.rows_read = row;
  if (!result.rejected_rows.empty() && !allow_gaps) {
    std::string list;
    for (std::size_t i = 0; i < result.rejected_rows.size() && i < 20; ++i) {
      list += (i ? "," : "") + std::to_string(result.rejected_rows[i]);
    }
    throw ValidationError("non-finite values in rows [" + list + "]; rerun with --allow-gaps to drop them");
  }
  if (times.empty()) throw ValidationError("no data rows");

  const auto n = static_cast<Eigen::Index>(times.size());
  if (map.demod) {
    DemodTrace t;
    t.output_rate = map.sample_rate;
    t.center_frequency = map.center_frequency;
    t.start_time = times.front();
    t.units = map.units;
    t.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) t.samples(i) = {a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]};
    t.validate();
    result.file.trace = std::move(t);
  } else {
    RawTrace t;
    t.sample_rate = map.sample_rate;
    t.start_time = times.front();
    t.units = map.units;
    t.samples = Eigen::Map<const Eigen::VectorXd>(a.data(), n);
    t.validate();
    result.file.trace = std::move(t);
  }
  if (!result.rejected_rows.empty()) {
    std::string list;
    for (std::size_t i = 0; i < result.rejected_rows.size(); ++i) list += (i ? "," : "") + std::to_string(result.rejected_rows[i]);
    result.file.provenance["ingest.rejected_rows"] = list;
  }
  return result;
}

std::string export_delimited(const TraceFile& file, char delimiter) {
  std::string out;
  const std::string d(1, delimiter);
  if (file.is_demod()) {
    const auto& t = std::get<DemodTrace>(file.trace);
    out = "t" + d + "I" + d + "Q\n";
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      out += format_double(t.time(i)) + d + format_double(t.samples(i).real()) + d +
             format_double(t.samples(i).imag()) + "\n";
    }
  } else {
    const auto& t = std::get<RawTrace>(file.trace);
    out = "t" + d + "V\n";
    for (Eigen::Index i = 0; i < t.size(); ++i) out += format_double(t.time(i)) + d + format_double(t.samples(i)) + "\n";
  }
  return out;
}

}  // namespace levsense
