#ifndef STAB_IO_JSON_HPP
#define STAB_IO_JSON_HPP

#include <cstdint>
#include <string>

#include "stab/analyzer.hpp"

namespace stab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Loads a problem file: UTF-8 JSON with fields
///   {n, m, f: "expr", F: ["expr", ...], g: {kind, ...}, point: {x, y_star}}.
/// g kinds: polyhedral {A, c, eq_rows}, box {l, u} (null = unbounded),
/// l1 {weights}, quadratic {Q, c}, separable {parts: [1-D g specs]}.
/// Throws ValidationError / ParseError with diagnostics.
ProblemInstance load_problem(const std::string& path);
ProblemInstance parse_problem(const std::string& json_text,
                              const std::string& origin = "<string>");

/// Report JSON: {verdicts, certificates, jacobian, notes, tool_version,
/// seed}; every float is serialized with 17 significant digits.
std::string report_to_json(const StabilityReport& report, uint64_t seed);

}  // namespace stab

#endif  // STAB_IO_JSON_HPP
