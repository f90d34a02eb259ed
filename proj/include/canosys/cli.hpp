#pragma once

// Command dispatch shared by the canosys executable and the tests.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canosys/problem_io.hpp"
#include "canosys/report_io.hpp"

namespace canosys {

enum class Command { Check, Reduce, Spectrum, Evans, Scan };
enum class OutputFormat { Json, Csv };

Command parse_command(const std::string& name);
std::string_view command_name(Command c);

struct RunConfig {
  Command command = Command::Check;
  std::filesystem::path problem_path;
  std::optional<std::string> problem_text;  // used instead of the path when set
  std::optional<std::pair<double, double>> window;
  std::vector<Rectangle> contours;
  std::optional<double> h;
  std::optional<double> half_length;
  std::optional<int> n_scan;
  std::optional<std::uint64_t> seed;
  std::optional<NlsVariant> variant;
  std::filesystem::path out_path;
  OutputFormat format = OutputFormat::Json;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int numerical = 2;
}  // namespace exit_code

struct RunResult {
  int exit_status = exit_code::ok;
  Json report;               // always present on success and on numerical failure
  std::string csv;           // scan CSV for spectrum / evans / scan
  std::vector<std::string> summary;  // human-readable lines
};

/// Exit status for an error code: 1 for configuration problems, 2 for numerical failures.
int exit_status_for(ErrorCode code);

RunResult run_check(const RunConfig& config);
RunResult run_reduce(const RunConfig& config);
RunResult run_spectrum(const RunConfig& config);
RunResult run_evans(const RunConfig& config);
RunResult run_scan(const RunConfig& config);

/// Dispatches on config.command; never throws. Errors become a report {"error": ...} and a status.
RunResult run(const RunConfig& config);

/// Writes the artifact selected by config.format to config.out_path (or returns it as text when
/// out_path is empty).
std::string render_artifact(const RunConfig& config, const RunResult& result);

}  // namespace canosys
