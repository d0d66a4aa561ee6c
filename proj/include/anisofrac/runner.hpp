#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "anisofrac/config.hpp"

namespace anisofrac {

enum ExitStatus : int { kOk = 0, kValidation = 2, kNonConvergence = 3 };

[[nodiscard]] const std::vector<std::string>& subcommands();

// Runs one experiment. The CSV goes to config.output_path (temp file + rename)
// or to `out` when no path is set; a one-line summary always goes to `out`.
[[nodiscard]] int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

// Writes through a temporary file in the target directory, then renames.
void write_atomically(const std::string& path, const std::function<void(std::ostream&)>& body);

}  // namespace anisofrac
