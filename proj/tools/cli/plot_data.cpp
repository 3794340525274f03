#include <stdexcept>

#include "cli.h"

namespace sweepsim::cli {

std::map<std::string, std::string> emit_plot_data(const analytics::ScenarioTimes& times,
                                                  const std::vector<double>& tau_grid,
                                                  const experiments::ExponentPathReport* report,
                                                  PlotKind kind) {
  using analytics::Branch;
  std::map<std::string, std::string> files;
  if (kind == PlotKind::Empirical) {
    if (report == nullptr || report->median_path.empty()) {
      throw std::invalid_argument("no empirical exponent series in the report");
    }
    files["exponent_path_" + std::string(analytics::to_string(report->branch)) + ".csv"] =
        experiments::exponent_plot_csv(times, report->branch, report->tau_grid, report);
    return files;
  }
  const bool sub = times.regime == Regime::SubCritical;
  const std::vector<Branch> branches =
      sub ? std::vector<Branch>{Branch::NoEstablish, Branch::NoRecombinant, Branch::Fixation3}
          : std::vector<Branch>{Branch::SuperA, Branch::SuperB};
  for (Branch b : branches) {
    files["theory_" + std::string(analytics::to_string(b)) + ".csv"] =
        experiments::exponent_plot_csv(times, b, tau_grid, nullptr);
  }
  return files;
}

}  // namespace sweepsim::cli
