#pragma once

// Problem files: INI-style sections with decimal numbers, bracketed row-list matrices and
// named coefficient profiles. See README.md for the format.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canosys/evans.hpp"
#include "canosys/spectral.hpp"

namespace canosys {

struct NumericsConfig {
  double h = 1e-3;
  Scheme scheme = Scheme::Midpoint;
  int renorm_every = 20;
  int n_scan = 400;
  std::uint64_t seed = 42;
  std::optional<std::pair<double, double>> window;
  std::vector<Rectangle> contours;
  std::optional<cplx> lambda_ref;
  std::optional<cplx> gauge_point;
  // Evans propagation defaults are coarser (fourth order) than the bounded-interval ones.
  double evans_h = 1e-2;
  Scheme evans_scheme = Scheme::Magnus4;
};

struct ProblemOverrides {
  std::optional<double> half_length;  // L of line / half-line truncations and of the NLS problem
  std::optional<NlsVariant> variant;
};

struct ProblemFile {
  CanonicalProblem problem;
  NumericsConfig numerics;
  std::string source;  // path or "<string>"
};

/// Throws Error(ConfigError) for malformed input; frame/dimension errors keep their own codes.
ProblemFile parse_problem(const std::string& text, const std::filesystem::path& base_dir = {},
                          const ProblemOverrides& overrides = {});
ProblemFile load_problem_file(const std::filesystem::path& path, const ProblemOverrides& overrides = {});

/// "[[1, 0], [0, 2]]"; entries are real decimals or complex "re+imi" (also "imi").
CMat parse_matrix(const std::string& text);
/// "dirichlet", "neumann", "alpha:<angle>", "asymptotic", or an explicit d x 2d matrix (theta1 | theta2).
BoundaryCondition parse_boundary(const std::string& text, int d);
/// "const:c", "sech2:A:rate" (A sech^2(rate x)), "linear:c0:c1" (c0 + c1 x).
ScalarFunction parse_profile(const std::string& text);
/// Whitespace-separated lines "x h_11 h_12 ... h_nn" (row-major, real), '#' comments.
HamiltonianField load_sampled_field(const std::filesystem::path& path);
/// "re0:re1:im0:im1".
Rectangle parse_rectangle(const std::string& text);
/// "a:b" with a < b.
std::pair<double, double> parse_window(const std::string& text);
NlsVariant parse_variant(const std::string& text);

}  // namespace canosys
