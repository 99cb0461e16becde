#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alr::csv {

/// Splits one record. Double-quoted fields may contain commas; "" is an
/// escaped quote. Trailing '\r' is dropped.
std::vector<std::string> split_record(std::string_view line);

/// Quotes the field only if it contains a comma, quote, or newline.
std::string escape(std::string_view field);

/// Strict full-field double parse (leading/trailing spaces allowed).
std::optional<double> parse_double(std::string_view text);

/// Shortest "%.17g" rendering; always round-trips through parse_double.
std::string format_double(double value);

}  // namespace alr::csv
