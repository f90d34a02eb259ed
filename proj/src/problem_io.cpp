#include "canosys/problem_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace canosys {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string strip_comment(const std::string& s) {
  const auto cut = s.find_first_of(";#");
  return trim(cut == std::string::npos ? s : s.substr(0, cut));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    config_error("cannot parse " + what + " '" + text + "' as a number");
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) config_error(what + " must be an integer");
  return static_cast<int>(v);
}

cplx parse_complex(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) config_error("empty matrix entry");
  const char* s = t.c_str();
  char* end = nullptr;
  const double first = std::strtod(s, &end);
  if (end == s) {
    // "i", "-i"
    if (t == "i" || t == "+i") return {0.0, 1.0};
    if (t == "-i") return {0.0, -1.0};
    config_error("cannot parse matrix entry '" + t + "'");
  }
  std::string rest(end);
  if (rest.empty()) return {first, 0.0};
  if (rest == "i" || rest == "j") return {0.0, first};
  if (rest.back() != 'i' && rest.back() != 'j') config_error("cannot parse matrix entry '" + t + "'");
  rest.pop_back();
  if (rest == "+") return {first, 1.0};
  if (rest == "-") return {first, -1.0};
  const double second = std::strtod(rest.c_str(), &end);
  if (end != rest.c_str() + rest.size() || (rest[0] != '+' && rest[0] != '-'))
    config_error("cannot parse matrix entry '" + t + "'");
  return {first, second};
}

Scheme parse_scheme(const std::string& text) {
  if (text == "midpoint") return Scheme::Midpoint;
  if (text == "magnus4") return Scheme::Magnus4;
  config_error("unknown scheme '" + text + "' (midpoint | magnus4)");
}

using Section = std::map<std::string, std::string>;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem", {"kind", "geometry", "a", "b", "N", "L"}},
      {"boundary", {"left", "right"}},
      {"coefficients", {"p", "q", "rho", "a", "b", "H", "H_file", "C0", "C1", "weight"}},
      {"nls", {"eta", "L", "variant"}},
      {"numerics",
       {"h", "scheme", "renorm_every", "n_scan", "seed", "window", "contours", "lambda_ref", "gauge_point", "evans_h",
        "evans_scheme"}},
  };
  return keys;
}

std::map<std::string, Section> read_sections(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(std::string("malformed problem file: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, Section> out;
  for (const auto& [name, section] : tree) {
    const auto known = allowed_keys().find(name);
    if (known == allowed_keys().end()) config_error("unknown section [" + name + "]");
    if (section.empty() && !section.data().empty()) config_error("key '" + name + "' outside of a section");
    for (const auto& [key, value] : section) {
      if (!known->second.contains(key)) config_error("unknown key '" + key + "' in [" + name + "]");
      out[name][key] = strip_comment(value.data());
    }
  }
  return out;
}

std::optional<std::string> get(const std::map<std::string, Section>& s, const std::string& section,
                               const std::string& key) {
  const auto sec = s.find(section);
  if (sec == s.end()) return std::nullopt;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return std::nullopt;
  return it->second;
}

std::string require(const std::map<std::string, Section>& s, const std::string& section, const std::string& key) {
  auto v = get(s, section, key);
  if (!v || v->empty()) config_error("missing key '" + key + "' in [" + section + "]");
  return *v;
}

Geometry parse_geometry(const std::map<std::string, Section>& s, const ProblemOverrides& overrides) {
  const std::string kind = get(s, "problem", "geometry").value_or("bounded");
  auto number = [&](const std::string& key) { return parse_double(require(s, "problem", key), key); };
  if (kind == "bounded") {
    const double a = get(s, "problem", "a") ? number("a") : 0.0;
    if (get(s, "problem", "b") && get(s, "problem", "N")) config_error("give either b or N in [problem], not both");
    return Geometry::bounded(a, get(s, "problem", "N") ? number("N") : number("b"));
  }
  const double l = overrides.half_length ? *overrides.half_length : number("L");
  if (kind == "half_line") return Geometry::half_line(get(s, "problem", "a") ? number("a") : 0.0, l);
  if (kind == "full_line") return Geometry::full_line(l);
  config_error("unknown geometry '" + kind + "' (bounded | half_line | full_line)");
}

BoundaryCondition boundary_for(const std::map<std::string, Section>& s, const std::string& key, const Geometry& g,
                               int d) {
  const bool asymptotic_end = g.kind == GeometryKind::FullLine || (g.kind == GeometryKind::HalfLine && key == "right");
  const auto text = get(s, "boundary", key);
  if (!text) {
    if (asymptotic_end) return Asymptotic{};
    config_error("missing boundary condition '" + key + "' in [boundary]");
  }
  return parse_boundary(*text, d);
}

}  // namespace

CMat parse_matrix(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.size() < 4 || t.substr(0, 2) != "[[" || t.substr(t.size() - 2) != "]]")
    config_error("matrix must be written as [[a, b], [c, d]]: '" + text + "'");
  t = t.substr(2, t.size() - 4);
  std::vector<std::vector<cplx>> rows;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = t.find("],[", pos);
    const std::string row = t.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (row.find_first_of("[]") != std::string::npos) config_error("malformed matrix '" + text + "'");
    std::vector<cplx> entries;
    for (const std::string& e : split(row, ',')) entries.push_back(parse_complex(e));
    rows.push_back(std::move(entries));
    if (end == std::string::npos) break;
    pos = end + 3;
  }
  const std::size_t cols = rows.front().size();
  CMat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) config_error("matrix rows have different lengths: '" + text + "'");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

BoundaryCondition parse_boundary(const std::string& text, int d) {
  const std::string t = trim(text);
  if (t == "asymptotic") return Asymptotic{};
  if (!t.empty() && t.front() == '[') {
    const CMat theta = parse_matrix(t);
    if (theta.rows() != d || theta.cols() != 2 * d)
      throw Error(ErrorCode::DimensionMismatch, "boundary frame must be d x 2d with d = " + std::to_string(d));
    return make_lagrangian(theta.leftCols(d), theta.rightCols(d));
  }
  return frame_preset(t, d);
}

ScalarFunction parse_profile(const std::string& text) {
  const auto parts = split(trim(text), ':');
  if (parts.empty()) config_error("empty coefficient profile");
  const std::string& kind = parts.front();
  auto arg = [&](std::size_t i) { return parse_double(parts[i], "profile parameter"); };
  if (kind == "const" && parts.size() == 2) return constant_profile(arg(1));
  if (kind == "sech2" && parts.size() == 3) return sech2_profile(arg(1), arg(2));
  if (kind == "linear" && parts.size() == 3) {
    const double c0 = arg(1), c1 = arg(2);
    return [c0, c1](double x) { return c0 + c1 * x; };
  }
  config_error("unknown coefficient profile '" + text + "' (const:c | sech2:A:rate | linear:c0:c1)");
}

HamiltonianField load_sampled_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open sampled Hamiltonian file '" + path.string() + "'");
  std::vector<double> nodes;
  std::vector<CMat> values;
  std::string line;
  int lineno = 0;
  Eigen::Index n = -1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (line.empty()) continue;
    std::istringstream is(line);
    std::vector<double> nums;
    std::string tok;
    while (is >> tok) nums.push_back(parse_double(tok, "sample at line " + std::to_string(lineno)));
    const auto entries = static_cast<Eigen::Index>(nums.size()) - 1;
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(std::max<Eigen::Index>(entries, 0)))));
    if (entries < 4 || side * side != entries || side % 2 != 0)
      config_error("line " + std::to_string(lineno) + " of '" + path.string() +
                   "' must hold x followed by (2d)^2 matrix entries");
    if (n >= 0 && side != n) config_error("inconsistent matrix size at line " + std::to_string(lineno));
    n = side;
    CMat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = nums[static_cast<std::size_t>(1 + i * n + j)];
    nodes.push_back(nums.front());
    values.push_back(std::move(m));
  }
  return HamiltonianField::sampled(std::move(nodes), std::move(values));
}

Rectangle parse_rectangle(const std::string& text) {
  const auto parts = split(trim(text), ':');
  if (parts.size() != 4) config_error("contour must be re0:re1:im0:im1, got '" + text + "'");
  Rectangle r{parse_double(parts[0], "re0"), parse_double(parts[1], "re1"), parse_double(parts[2], "im0"),
              parse_double(parts[3], "im1")};
  if (!(r.re1 > r.re0) || !(r.im1 > r.im0)) config_error("contour rectangle '" + text + "' is empty");
  return r;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto parts = split(trim(text), ':');
  if (parts.size() != 2) config_error("window must be a:b, got '" + text + "'");
  const double a = parse_double(parts[0], "window start");
  const double b = parse_double(parts[1], "window end");
  if (!(b > a)) config_error("window '" + text + "' is empty");
  return {a, b};
}

NlsVariant parse_variant(const std::string& text) {
  if (text == "paper") return NlsVariant::Paper;
  if (text == "corrected") return NlsVariant::Corrected;
  config_error("unknown variant '" + text + "' (paper | corrected)");
}

ProblemFile parse_problem(const std::string& text, const std::filesystem::path& base_dir,
                          const ProblemOverrides& overrides) {
  const auto s = read_sections(text);
  ProblemFile file;
  file.source = "<string>";
  const std::string kind = require(s, "problem", "kind");

  if (kind == "nls_soliton" || kind == "nls") {
    const double eta = parse_double(get(s, "nls", "eta").value_or("1"), "eta");
    const double l = overrides.half_length ? *overrides.half_length
                                           : parse_double(get(s, "nls", "L").value_or("15"), "L");
    const NlsVariant variant =
        overrides.variant ? *overrides.variant : parse_variant(get(s, "nls", "variant").value_or("corrected"));
    file.problem = nls_soliton_problem(eta, l, variant);
  } else {
    const Geometry geometry = parse_geometry(s, overrides);
    if (kind == "sturm_liouville") {
      auto profile = [&](const std::string& key, const char* fallback) {
        return parse_profile(get(s, "coefficients", key).value_or(fallback));
      };
      file.problem = sturm_liouville_to_canonical(profile("p", "const:1"), profile("q", "const:0"),
                                                  profile("rho", "const:1"), geometry,
                                                  boundary_for(s, "left", geometry, 1),
                                                  boundary_for(s, "right", geometry, 1));
    } else if (kind == "traveling_wave") {
      file.problem = traveling_wave_to_canonical(parse_profile(get(s, "coefficients", "a").value_or("const:0")),
                                                 parse_profile(get(s, "coefficients", "b").value_or("const:0")),
                                                 geometry, boundary_for(s, "left", geometry, 1),
                                                 boundary_for(s, "right", geometry, 1));
    } else if (kind == "canonical") {
      std::optional<HamiltonianField> field;
      if (auto f = get(s, "coefficients", "H_file")) {
        std::filesystem::path p(*f);
        if (p.is_relative()) p = base_dir / p;
        field = load_sampled_field(p);
      } else {
        const CMat h = parse_matrix(require(s, "coefficients", "H"));
        if (h.rows() != h.cols() || h.rows() % 2 != 0)
          throw Error(ErrorCode::DimensionMismatch, "H must be 2d x 2d");
        field = HamiltonianField::constant("H", h);
      }
      const int d = field->dim().half();
      file.problem = canonical_form_problem(*field, geometry, boundary_for(s, "left", geometry, d),
                                            boundary_for(s, "right", geometry, d));
    } else if (kind == "raw_pencil" || kind == "pencil") {
      const CMat c0 = parse_matrix(require(s, "coefficients", "C0"));
      const CMat c1 = parse_matrix(require(s, "coefficients", "C1"));
      if (c0.rows() != c0.cols() || c0.rows() % 2 != 0 || c1.rows() != c0.rows() || c1.cols() != c0.cols())
        throw Error(ErrorCode::DimensionMismatch, "C0 and C1 must both be 2d x 2d");
      const CMat w = get(s, "coefficients", "weight") ? parse_matrix(*get(s, "coefficients", "weight")) : c1;
      if (w.rows() != c0.rows() || w.cols() != c0.cols())
        throw Error(ErrorCode::DimensionMismatch, "weight must be 2d x 2d");
      const SymplecticDim dim(static_cast<int>(c0.rows() / 2));
      file.problem = raw_pencil_problem(
          dim, [c0](double) { return c0; }, [c1](double) { return c1; }, HamiltonianField::constant("weight", w),
          geometry, boundary_for(s, "left", geometry, dim.half()), boundary_for(s, "right", geometry, dim.half()));
      file.problem.pencil.c0_limit_minus = c0;
      file.problem.pencil.c0_limit_plus = c0;
    } else {
      config_error("unknown problem kind '" + kind + "' (sturm_liouville | traveling_wave | nls_soliton | canonical | raw_pencil)");
    }
  }

  NumericsConfig& n = file.numerics;
  if (auto v = get(s, "numerics", "h")) n.h = parse_double(*v, "h");
  if (auto v = get(s, "numerics", "scheme")) n.scheme = parse_scheme(*v);
  if (auto v = get(s, "numerics", "renorm_every")) n.renorm_every = parse_int(*v, "renorm_every");
  if (auto v = get(s, "numerics", "n_scan")) n.n_scan = parse_int(*v, "n_scan");
  if (auto v = get(s, "numerics", "seed")) {
    const double seed = parse_double(*v, "seed");
    if (seed < 0 || seed != std::floor(seed)) config_error("seed must be a non-negative integer");
    n.seed = static_cast<std::uint64_t>(seed);
  }
  if (auto v = get(s, "numerics", "window")) n.window = parse_window(*v);
  if (auto v = get(s, "numerics", "contours")) {
    std::istringstream is(*v);
    std::string tok;
    while (is >> tok) n.contours.push_back(parse_rectangle(tok));
  }
  if (auto v = get(s, "numerics", "lambda_ref")) n.lambda_ref = parse_complex(*v);
  if (auto v = get(s, "numerics", "gauge_point")) n.gauge_point = parse_complex(*v);
  if (auto v = get(s, "numerics", "evans_h")) n.evans_h = parse_double(*v, "evans_h");
  if (auto v = get(s, "numerics", "evans_scheme")) n.evans_scheme = parse_scheme(*v);
  if (!(n.h > 0) || !(n.evans_h > 0)) config_error("step sizes must be positive");
  if (n.n_scan < 2) config_error("n_scan must be at least 2");
  return file;
}

ProblemFile load_problem_file(const std::filesystem::path& path, const ProblemOverrides& overrides) {
  std::ifstream in(path);
  if (!in) config_error("cannot open problem file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  ProblemFile file = parse_problem(buffer.str(), path.parent_path(), overrides);
  file.source = path.string();
  return file;
}

}  // namespace canosys
