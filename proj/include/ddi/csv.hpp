#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ddi::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

std::string_view trim(std::string_view s);

// Strips a trailing '\r' left by CRLF files.
std::string_view chomp(std::string_view s);

}  // namespace ddi::csv
