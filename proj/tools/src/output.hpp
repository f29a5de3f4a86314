#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bwmr/error.hpp"

namespace bwmr::cli {

// Rounded to `digits` significant digits; non-finite values become null.
nlohmann::ordered_json number(double x, int digits = 10);
std::string fixed_sig(double x, int digits = 6);  // TSV cell, "NA" if not finite

std::string sha256_file(const std::string& path);
std::string utc_timestamp();
std::string basename_of(const std::string& path);

void write_error(std::ostream& err, std::string_view kind, const std::string& message);
int exit_code(ErrorKind kind);

// Writes `text` to `path`, or to `out` when path is empty.
void emit(const std::string& path, std::ostream& out, const std::string& text);

}  // namespace bwmr::cli
