#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace esgpv::detail {

// Minimal RFC-4180 reader: quoted fields, "" escapes, LF or CRLF rows.
// Returns one row of cells, or nullopt at end of stream.
std::optional<std::vector<std::string>> read_csv_row(std::istream& in);

// Quotes a cell when it contains a comma, quote or newline.
std::string csv_escape(const std::string& cell);

} // namespace esgpv::detail
