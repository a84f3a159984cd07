#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "llnlab/experiments.hpp"

namespace llnlab {

/// RFC-4180 escaping: fields containing comma, quote, CR or LF are quoted,
/// embedded quotes doubled.
std::string csv_escape(std::string_view field);

/// Header plus rows, CRLF line endings, '.' decimal separator (cells are
/// preformatted upstream).
std::string curve_to_csv(const Curve& curve);

/// Write via a temp file in the same directory, then rename into place, so
/// readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace llnlab
