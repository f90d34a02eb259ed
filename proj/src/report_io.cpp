#include "canosys/report_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace canosys {

namespace {

enum class Kind { Number, Integer, String, Bool, Array, Object, NumberOrNull, ObjectOrNull };

struct Field {
  const char* key;
  Kind kind;
};

bool has_kind(const Json& v, Kind kind) {
  switch (kind) {
    case Kind::Number: return v.is_number();
    case Kind::Integer: return v.is_number_integer();
    case Kind::String: return v.is_string();
    case Kind::Bool: return v.is_boolean();
    case Kind::Array: return v.is_array();
    case Kind::Object: return v.is_object();
    case Kind::NumberOrNull: return v.is_number() || v.is_null();
    case Kind::ObjectOrNull: return v.is_object() || v.is_null();
  }
  return false;
}

void require_fields(const Json& obj, const std::string& where, std::initializer_list<Field> fields,
                    std::vector<std::string>& problems) {
  if (!obj.is_object()) {
    problems.push_back(where + " is not an object");
    return;
  }
  for (const Field& f : fields) {
    if (!obj.contains(f.key))
      problems.push_back(where + " lacks '" + f.key + "'");
    else if (!has_kind(obj.at(f.key), f.kind))
      problems.push_back(where + "." + f.key + " has the wrong type");
  }
}

template <class Check>
void each(const Json& obj, const char* key, const std::string& where, Check&& check,
          std::vector<std::string>& problems) {
  if (!obj.contains(key) || !obj.at(key).is_array()) return;
  std::size_t i = 0;
  for (const Json& item : obj.at(key)) check(item, where + "." + key + "[" + std::to_string(i++) + "]", problems);
}

void check_complex(const Json& v, const std::string& where, std::vector<std::string>& problems) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    problems.push_back(where + " is not a [re, im] pair");
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json matrix_to_json(const CMat& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ir = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ir.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return Json{{"re", std::move(re)}, {"im", std::move(im)}};
}

Json complex_to_json(cplx z) { return Json::array({number_or_null(z.real()), number_or_null(z.imag())}); }

Json to_json(const EigenPair& pair) {
  return Json{{"lambda", complex_to_json(pair.lambda)},
              {"multiplicity", pair.multiplicity},
              {"boundary_residual", number_or_null(pair.boundary_residual)},
              {"ode_residual", number_or_null(pair.ode_residual)}};
}

Json to_json(const Witnesses& w) {
  return Json{{"max_symmetry_defect", number_or_null(w.max_symmetry_defect)},
              {"max_offdiag_gram", number_or_null(w.max_offdiag_gram)},
              {"modes", w.gram.rows()}};
}

Json to_json(const EssentialSpectrumBands& bands) {
  Json list = Json::array();
  for (const Band& b : bands.bands)
    list.push_back(Json{{"lo", b.lo_infinite ? Json(nullptr) : Json(b.lo)},
                        {"hi", b.hi_infinite ? Json(nullptr) : Json(b.hi)},
                        {"text", b.to_string()}});
  return Json{{"bands", std::move(list)}, {"text", bands.to_string()}};
}

Json to_json(const WindingReport& r) {
  Json zeros = Json::array();
  for (cplx z : r.zeros) zeros.push_back(complex_to_json(z));
  return Json{{"contour", Json::array({r.contour.re0, r.contour.re1, r.contour.im0, r.contour.im1})},
              {"count", r.count},
              {"winding", number_or_null(r.winding)},
              {"samples_per_side", r.samples_per_side},
              {"max_phase_jump", number_or_null(r.max_phase_jump)},
              {"min_conditioning", number_or_null(r.min_conditioning)},
              {"zeros", std::move(zeros)}};
}

Json to_json(const ZeroModeReport& r) {
  return Json{{"residual_y1", number_or_null(r.residual_y1)},
              {"residual_y2", number_or_null(r.residual_y2)},
              {"hnorm_y1", number_or_null(r.hnorm_y1)},
              {"hnorm_y2", number_or_null(r.hnorm_y2)},
              {"max_v1", number_or_null(r.max_v1)}};
}

Json to_json(const PsdReport& r) {
  return Json{{"min_eigenvalue", number_or_null(r.min_eigenvalue)},
              {"argmin_x", number_or_null(r.argmin_x)},
              {"hermitian_defect", number_or_null(r.hermitian_defect)},
              {"nondegenerate", r.nondegenerate},
              {"passed", r.passed}};
}

void write_scan_csv(std::ostream& os, const std::vector<ScanSample>& scan) {
  os << "lambda,re_D,im_D,abs_D\n";
  for (const ScanSample& s : scan) {
    const cplx d = s.value();
    os << format_number(s.lambda) << ',' << format_number(d.real()) << ',' << format_number(d.imag()) << ','
       << format_number(std::abs(d)) << '\n';
  }
}

void write_evans_csv(std::ostream& os, const std::vector<EvansValue>& values) {
  os << "re_lambda,im_lambda,re_E,im_E,log_scale\n";
  for (const EvansValue& v : values)
    os << format_number(v.lambda.real()) << ',' << format_number(v.lambda.imag()) << ','
       << format_number(v.value.real()) << ',' << format_number(v.value.imag()) << ','
       << format_number(v.log_scale) << '\n';
}

std::vector<std::string> validate_report(const Json& report) {
  std::vector<std::string> problems;
  if (report.is_object() && report.contains("error")) {
    require_fields(report, "report", {{"command", Kind::String}, {"error", Kind::Object}}, problems);
    if (problems.empty())
      require_fields(report.at("error"), "error", {{"code", Kind::String}, {"message", Kind::String}}, problems);
    return problems;
  }
  require_fields(report, "report",
                 {{"command", Kind::String}, {"problem", Kind::Object}, {"warnings", Kind::Array}}, problems);
  if (!problems.empty()) return problems;
  require_fields(report.at("problem"), "problem",
                 {{"kind", Kind::String}, {"dim", Kind::Integer}, {"geometry", Kind::String},
                  {"left", Kind::Number}, {"right", Kind::Number}, {"hermitian", Kind::Bool}},
                 problems);
  each(report, "warnings", "report",
       [](const Json& w, const std::string& where, std::vector<std::string>& p) {
         if (!w.is_string()) p.push_back(where + " is not a string");
       },
       problems);

  const std::string command = report.at("command");
  if (command == "check") {
    require_fields(report, "report",
                   {{"passed", Kind::Bool}, {"failures", Kind::Array}, {"checks", Kind::Array}}, problems);
    each(report, "checks", "report",
         [](const Json& c, const std::string& where, std::vector<std::string>& p) {
           require_fields(c, where, {{"name", Kind::String}, {"passed", Kind::Bool}, {"value", Kind::NumberOrNull},
                                     {"tolerance", Kind::NumberOrNull}},
                          p);
         },
         problems);
  } else if (command == "reduce") {
    require_fields(report, "report", {{"state_labels", Kind::Array}, {"samples", Kind::Array}}, problems);
    each(report, "samples", "report",
         [](const Json& s, const std::string& where, std::vector<std::string>& p) {
           require_fields(s, where, {{"x", Kind::Number}, {"C0", Kind::Object}, {"C1", Kind::Object},
                                     {"weight", Kind::Object}},
                          p);
         },
         problems);
  } else if (command == "spectrum") {
    require_fields(report, "report",
                   {{"window", Kind::Array}, {"n_scan", Kind::Integer}, {"eigenpairs", Kind::Array},
                    {"witnesses", Kind::ObjectOrNull}},
                   problems);
    each(report, "eigenpairs", "report",
         [](const Json& e, const std::string& where, std::vector<std::string>& p) {
           require_fields(e, where, {{"lambda", Kind::Array}, {"multiplicity", Kind::Integer},
                                     {"boundary_residual", Kind::NumberOrNull}, {"ode_residual", Kind::NumberOrNull}},
                          p);
           if (e.contains("lambda")) check_complex(e.at("lambda"), where + ".lambda", p);
         },
         problems);
  } else if (command == "evans") {
    require_fields(report, "report",
                   {{"essential_spectrum", Kind::Object}, {"windings", Kind::Array}, {"verdict", Kind::String}},
                   problems);
    each(report, "windings", "report",
         [](const Json& w, const std::string& where, std::vector<std::string>& p) {
           require_fields(w, where, {{"contour", Kind::Array}}, p);
           if (!w.contains("error"))
             require_fields(w, where, {{"count", Kind::Integer}, {"zeros", Kind::Array}}, p);
         },
         problems);
  } else if (command == "scan") {
    require_fields(report, "report", {{"samples", Kind::Array}}, problems);
    each(report, "samples", "report",
         [](const Json& s, const std::string& where, std::vector<std::string>& p) {
           require_fields(s, where, {{"lambda", Kind::Array}, {"value", Kind::Array}, {"log_scale", Kind::Number}},
                          p);
         },
         problems);
  } else {
    problems.push_back("unknown command '" + command + "'");
  }
  return problems;
}

}  // namespace canosys
