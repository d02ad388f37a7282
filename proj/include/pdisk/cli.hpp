#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pdisk/structure.hpp"

namespace pdisk::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { ok = 0, usage = 1, not_converged = 2, no_disk = 3 };

/// Entry point of the `pdisk` tool. Results go to --out (atomically) or to
/// `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "1,0" or "0.5:0.2,0" (re:im per component).
std::vector<cplx> parse_complex_list(const std::string& text);

/// Structure file: {"n", "R", "R1", "terms": [{"i", "mbar", "alpha", "beta",
/// "re", "im"}]} with 1-based indices i, mbar. Errors name the offending field.
AlmostComplexStructure load_structure(const std::string& path);
AlmostComplexStructure parse_structure(const std::string& json_text);

/// Writes to a temporary file next to `path` and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace pdisk::cli
