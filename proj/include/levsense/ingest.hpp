#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "levsense/trace_file.hpp"

namespace levsense {

/// Column reference: header name or zero-based index.
using ColumnRef = std::variant<std::string, int>;

/// Describes an external delimited export. Demod files name time, I and Q;
/// raw files name time and value.
struct ColumnMap {
  bool demod = true;
  char delimiter = ',';
  bool header_row = true;
  std::string comment_prefix = "#";
  ColumnRef time = std::string("t");
  ColumnRef in_phase = std::string("I");
  ColumnRef quadrature = std::string("Q");
  ColumnRef value = std::string("V");
  double sample_rate = 0.0;        // Hz, declared
  double center_frequency = 0.0;   // Hz, demod only
  Units units = Units::volts;
};

/// Parses the JSON column-map file; unknown keys are rejected.
ColumnMap parse_column_map(std::string_view json_text);

struct IngestResult {
  TraceFile file;
  /// Data-row indices (0-based, excluding header and comments) dropped for non-finite values.
  std::vector<std::size_t> rejected_rows;
  std::size_t rows_read = 0;
};

/// Normalises an external file into a TraceFile. Non-monotone time throws
/// ValidationError naming the row; non-finite rows throw unless allow_gaps,
/// in which case they are dropped and listed.
IngestResult ingest(std::string_view contents, const ColumnMap& map, bool allow_gaps);

/// Writes a trace as a plain delimited file with a header row (t,I,Q or t,V),
/// the inverse of ingest under the default map.
std::string export_delimited(const TraceFile& file, char delimiter = ',');

}  // namespace levsense
