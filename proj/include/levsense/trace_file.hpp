#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "levsense/core_model.hpp"
#include "levsense/provenance.hpp"
#include "levsense/trace.hpp"

namespace levsense {

enum class Encoding { text, binary };

/// On-disk trace: "# key = value" header lines, "# end-header", then either
/// delimited text rows (time, then components) or little-endian float64 rows
/// in the same column order.
struct TraceFile {
  std::variant<RawTrace, DemodTrace> trace;
  std::optional<std::uint64_t> seed;
  std::optional<OscillatorMode> mode;
  ModeTable mode_table;
  Provenance provenance;
  Encoding encoding = Encoding::text;

  bool is_demod() const { return std::holds_alternative<DemodTrace>(trace); }
  Eigen::Index size() const;
};

inline constexpr int kTraceFormatVersion = 1;

/// Shortest text that parses back to the same double.
std::string format_double(double value);
/// Full-string parse; throws ValidationError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

std::string serialize_trace(const TraceFile& file);
TraceFile parse_trace(std::string_view contents);

void write_trace(const std::filesystem::path& path, const TraceFile& file);
TraceFile read_trace(const std::filesystem::path& path);

}  // namespace levsense
