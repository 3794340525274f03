#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sweepsim/analytics.h"
#include "sweepsim/experiments.h"

namespace sweepsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

struct CliConfig {
  std::string subcommand;
  std::optional<std::filesystem::path> config_file;
  std::optional<std::uint64_t> seed_override;
  /// Output directory; empty means standard output.
  std::optional<std::filesystem::path> output_dir;
  int verbosity = 0;
};

/// Parses argv, dispatches and returns the exit code: 0 on success, 1 on a
/// failed validation or malformed configuration, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

enum class PlotKind { Theory, Empirical };

/// Tidy plot tables (tau, series, value, branch, alpha), one per file name.
/// Theory tables cover every branch of the regime; empirical ones need the
/// exponent-path report and throw std::invalid_argument without it.
std::map<std::string, std::string> emit_plot_data(const analytics::ScenarioTimes& times,
                                                  const std::vector<double>& tau_grid,
                                                  const experiments::ExponentPathReport* report,
                                                  PlotKind kind);

}  // namespace sweepsim::cli
