#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sgda/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Smoothed gradient descent-ascent experiments"};
  app.require_subcommand(1);

  std::string config, config_a, config_b, out, seeds, window;
  bool svg = false;
  unsigned jobs = 0;

  auto* run = app.add_subcommand("run", "Solve one configured instance");
  run->add_option("--config", config, "experiment JSON")->required();
  run->add_option("--out", out, "output directory")->required();
  run->add_flag("--svg", svg, "also write residuals.svg");

  auto* compare = app.add_subcommand("compare", "Run two configs on the same problem");
  compare->add_option("--config-a", config_a)->required();
  compare->add_option("--config-b", config_b)->required();
  compare->add_option("--out", out)->required();

  auto* rate = app.add_subcommand("rate", "Fit log-log residual slopes over seeds");
  rate->add_option("--config", config)->required();
  rate->add_option("--seeds", seeds, "e.g. 0-9 or 1,4,7")->required();
  rate->add_option("--window", window, "lo,hi iteration window")->required();
  rate->add_option("--out", out)->required();
  rate->add_option("--jobs", jobs, "concurrent seeds (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sgda::kExitConfig;
  }

  if (*run) return sgda::cmd_run(config, out, svg, std::cerr);
  if (*compare) return sgda::cmd_compare(config_a, config_b, out, std::cerr);

  double lo = 0, hi = 0;
  char comma = 0;
  std::istringstream ws(window);
  if (!(ws >> lo >> comma >> hi) || comma != ',') {
    std::cerr << "error: --window must be lo,hi\n";
    return sgda::kExitConfig;
  }
  try {
    return sgda::cmd_rate(config, sgda::parse_seed_list(seeds), lo, hi, out, std::cerr, jobs);
  } catch (const sgda::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sgda::kExitConfig;
  }
}
