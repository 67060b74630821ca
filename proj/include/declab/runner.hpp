#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "declab/config.hpp"

namespace declab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResolution = 3;

struct RunOptions {
  bool quiet = false;
  std::ostream* log = nullptr;  ///< progress and errors; std::cerr when null
};

/// Subcommands: curve-info, ratio, scan, rescale-check, expsum, selftest.
const std::vector<std::string>& subcommands();

/// Runs one subcommand and writes its artifacts into config.output.dir.
/// Returns 0 on success, 2 on configuration errors, 3 on resolution, budget
/// or coverage errors, 1 otherwise (including failed self checks).
int run(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options = {});

/// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string format_double(double v);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace declab
