#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "canosys/cli.hpp"

int main(int argc, char** argv) {
  using namespace canosys;
  CLI::App app{"Spectral analysis of canonical systems J y' = (C0 + lambda C1) y"};
  app.require_subcommand(1);

  RunConfig config;
  std::string window, variant, format = "json", out;
  std::vector<std::string> contours;
  double h = 0, half_length = 0;
  int steps = 0;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"check", "Run the invariant suite on a problem file"},
      {"reduce", "Print the first-order pencil a problem file reduces to"},
      {"spectrum", "Eigenvalues of a bounded problem in a real window"},
      {"evans", "Essential spectrum, Evans scan and winding counts for a line problem"},
      {"scan", "Sample D(lambda) or E(lambda) on a real window"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("problem", config.problem_path, "Problem file")->required();
    sub->add_option("--window", window, "Real window a:b");
    sub->add_option("--contour", contours, "Rectangle re0:re1:im0:im1 (repeatable)");
    sub->add_option("--steps", steps, "Number of scan points");
    sub->add_option("--h", h, "Integration step");
    sub->add_option("--L", half_length, "Truncation length of line problems");
    sub->add_option("--variant", variant, "NLS variant")->check(CLI::IsMember({"paper", "corrected"}));
    sub->add_option("--out", out, "Output file (default: stdout)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "Seed for randomized witnesses");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : exit_code::config;
  }

  RunResult result;
  try {
    const CLI::App* sub = app.get_subcommands().front();
    config.command = parse_command(sub->get_name());
    if (!window.empty()) config.window = parse_window(window);
    for (const std::string& c : contours) config.contours.push_back(parse_rectangle(c));
    if (sub->count("--steps")) config.n_scan = steps;
    if (sub->count("--h")) config.h = h;
    if (sub->count("--L")) config.half_length = half_length;
    if (sub->count("--seed")) config.seed = seed;
    if (!variant.empty()) config.variant = parse_variant(variant);
    config.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    config.out_path = out;
    result = run(config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status_for(e.code());
  }

  const std::string artifact = render_artifact(config, result);
  std::ostream& summary = config.out_path.empty() ? std::cerr : std::cout;
  for (const std::string& line : result.summary) summary << line << "\n";
  if (config.out_path.empty()) {
    std::cout << artifact;
  } else {
    std::ofstream file(config.out_path);
    if (!file) {
      std::cerr << "error: cannot write " << config.out_path << "\n";
      return exit_code::config;
    }
    file << artifact;
  }
  return result.exit_status;
}
