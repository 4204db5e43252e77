#include <iostream>

#include "hsg/diagnostics.hpp"
#include "hsg/ergodicity.hpp"
#include "hsg/property_suite.hpp"

// Runs the four Gibbs scans on a small simulated mixed model and prints the
// lag-normalized autocorrelations of the residual-plus-precision test function.
int main(int argc, char** argv) {
  using namespace hsg;
  const std::size_t hs_iterations = argc > 1 ? std::stoul(argv[1]) : 6000;
  const GlmmModel model = setting_model(1, 101);
  std::cout << check_glmm(model).text() << "\n";

  const std::size_t base = hs_iterations / 3;
  const std::vector<std::pair<ScanSpec, std::size_t>> plan{{ScanSpec::ss(), 2 * base},
                                                           {ScanSpec::hs(0.5), 3 * base},
                                                           {ScanSpec::hss(0.5, true, false), 3 * base},
                                                           {ScanSpec::rs(), 6 * base}};
  std::vector<Chain> chains;
  for (const auto& [scan, n] : plan) {
    chains.push_back(run_chain(model, scan, n, 7));
    const auto& c = chains.back().meta;
    std::cout << c.scan_detail << ": " << n << " iterations in " << format_double(c.wall_seconds) << " s";
    if (c.counters.group_move_trials > 0)
      std::cout << ", group move acceptance " << format_double(c.counters.group_move_acceptance());
    std::cout << "\n";
  }
  const AcfTable table = compare_table(
      chains, [&](const Chain& c) { return glmm_test_function_series(model, c); }, 10, "residual SS + lambda0 + lambda1");
  std::cout << "\n" << table.summary();
  return 0;
}
