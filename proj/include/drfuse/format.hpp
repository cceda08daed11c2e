#pragma once

#include "drfuse/error.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace drfuse {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
/// Fixed-point with `decimals` digits, as printed in report tables.
std::string format_fixed(double v, int decimals = 4);

/// Strict full-string parses; throw Error(kind) naming `what` on failure.
double parse_double(std::string_view text, std::string_view what,
                    ErrorKind kind = ErrorKind::Config);
std::int64_t parse_int(std::string_view text, std::string_view what,
                       ErrorKind kind = ErrorKind::Config);
std::uint64_t parse_u64(std::string_view text, std::string_view what,
                        ErrorKind kind = ErrorKind::Config);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// FNV-1a, used to fingerprint configurations in file headers.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace drfuse
