// weylsys command line: coeffs, identities, flow, loops, verify, asym.
//
// Exit codes: 0 ok, 1 a reported check failed, 2 configuration or usage,
// 3 mathematical failure (degeneracy, ellipticity, ...), 4 i/o.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace weyl {

inline constexpr const char* kToolVersion = "weylsys 0.1.0";

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace weyl
