#include "qqr/system_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json_writer.hpp"

namespace qqr {

using detail::json;

namespace {

json matrix_to_json(const Matrix& M) {
  json cols = json::array();
  for (Index j = 0; j < M.cols(); ++j) {
    json col = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
      col.push_back(M(i, j));
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
  }
  return out;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ParseError("field " + field + ": " + what);
}

const json& require(const json& obj, const std::string& field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    field_error(field, "missing");
  }
  return *it;
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) {
    field_error(field, "expected a number, got " + std::string(j.type_name()));
  }
  return j.get<double>();
}

Index index_at(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    field_error(field, "expected a non-negative integer");
  }
  return static_cast<Index>(j.get<long long>());
}

Matrix matrix_from_json(const json& j, const std::string& field, Index rows, Index cols) {
  if (!j.is_array()) {
    field_error(field, "expected an array of column arrays");
  }
  if (static_cast<Index>(j.size()) != cols) {
    field_error(field, "expected " + std::to_string(cols) + " columns, got " +
                           std::to_string(j.size()));
  }
  Matrix M(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    const json& col = j[static_cast<std::size_t>(c)];
    const std::string where = field + "[" + std::to_string(c) + "]";
    if (!col.is_array() || static_cast<Index>(col.size()) != rows) {
      field_error(where, "expected a column of " + std::to_string(rows) + " numbers");
    }
    for (Index r = 0; r < rows; ++r) {
      M(r, c) = number_at(col[static_cast<std::size_t>(r)], where);
    }
  }
  return M;
}

Vector vector_from_json(const json& j, const std::string& field, Index len) {
  if (!j.is_array() || static_cast<Index>(j.size()) != len) {
    field_error(field, "expected an array of " + std::to_string(len) + " numbers");
  }
  Vector v(len);
  for (Index i = 0; i < len; ++i) {
    v[i] = number_at(j[static_cast<std::size_t>(i)], field);
  }
  return v;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

std::string to_text(const json& doc) {
  std::ostringstream os;
  detail::write_json(os, doc);
  return os.str();
}

}  // namespace

std::string system_to_string(const SystemFile& file) {
  const QuadraticSystem& s = file.system;
  s.validate();
  json doc = json::object();
  doc["name"] = file.name;
  doc["n"] = s.n();
  doc["m"] = s.m();
  if (!file.generator.empty()) doc["generator"] = file.generator;
  if (file.seed) doc["seed"] = *file.seed;
  if (file.eps) doc["eps"] = *file.eps;
  doc["A"] = matrix_to_json(s.A);
  doc["B"] = matrix_to_json(s.B);
  doc["N"] = matrix_to_json(s.N);
  doc["Q2"] = matrix_to_json(s.Q2);
  doc["R2"] = matrix_to_json(s.R2);
  return to_text(doc);
}

SystemFile system_from_string(const std::string& text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) {
    throw ParseError("system file: top level must be an object");
  }
  SystemFile file;
  const json& name = require(doc, "name");
  if (!name.is_string()) field_error("name", "expected a string");
  file.name = name.get<std::string>();
  const Index n = index_at(require(doc, "n"), "n");
  const Index m = index_at(require(doc, "m"), "m");
  if (n < 1) field_error("n", "must be >= 1");
  if (m < 1) field_error("m", "must be >= 1");
  if (auto it = doc.find("generator"); it != doc.end()) {
    if (!it->is_string()) field_error("generator", "expected a string");
    file.generator = it->get<std::string>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) field_error("seed", "expected a non-negative integer");
    file.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("eps"); it != doc.end()) {
    file.eps = number_at(*it, "eps");
  }
  QuadraticSystem& s = file.system;
  s.A = matrix_from_json(require(doc, "A"), "A", n, n);
  s.B = matrix_from_json(require(doc, "B"), "B", n, m);
  s.N = matrix_from_json(require(doc, "N"), "N", n, n * n);
  s.Q2 = matrix_from_json(require(doc, "Q2"), "Q2", n, n);
  s.R2 = matrix_from_json(require(doc, "R2"), "R2", m, m);
  return file;
}

void save_system(const std::filesystem::path& path, const SystemFile& file) {
  write_file(path, system_to_string(file));
}

SystemFile load_system(const std::filesystem::path& path) {
  try {
    return system_from_string(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

CoefficientFile make_coefficient_file(const QqrSolution& solution, std::string method) {
  CoefficientFile file;
  file.n = solution.feedback.base_dim();
  file.m = solution.feedback.input_dim();
  file.degree = solution.feedback.degree();
  file.method = std::move(method);
  file.value = solution.value.symmetrized();
  file.feedback = solution.feedback.symmetrized();
  file.are_residual = solution.riccati.residual;
  file.are_seconds = solution.are_seconds;
  file.reports = solution.reports;
  return file;
}

std::string coefficients_to_string(const CoefficientFile& file, bool include_run) {
  json doc = json::object();
  doc["n"] = file.n;
  doc["m"] = file.m;
  doc["degree"] = file.degree;
  doc["method"] = file.method;
  doc["status"] = file.status;
  if (!file.message.empty()) doc["message"] = file.message;
  if (file.ok()) {
    json value = json::object();
    for (const auto& v : file.value.coeffs()) {
      value["v" + std::to_string(v.order())] = vector_to_json(v.values());
    }
    doc["value"] = std::move(value);
    json feedback = json::object();
    for (int d = 1; d <= file.feedback.degree(); ++d) {
      feedback["K" + std::to_string(d)] = matrix_to_json(file.feedback.gain(d));
    }
    doc["feedback"] = std::move(feedback);
    doc["are_residual"] = file.are_residual;
    json reports = json::array();
    for (const auto& r : file.reports) {
      json rep = json::object();
      rep["value_degree"] = r.value_degree;
      rep["residual_norm"] = r.solve.residual_norm;
      rep["min_pivot"] = r.solve.min_pivot;
      rep["recursion_depth"] = r.solve.recursion_depth;
      rep["imaginary_ratio"] = r.solve.imaginary_ratio;
      rep["residual_warning"] = r.solve.residual_warning;
      reports.push_back(std::move(rep));
    }
    doc["reports"] = std::move(reports);
  }
  if (include_run) {
    json run = json::object();
    run["command"] = file.command;
    json params = json::object();
    for (const auto& [key, val] : file.parameters) {
      params[key] = val;
    }
    run["parameters"] = std::move(params);
    json t = json::object();
    t["are_seconds"] = file.are_seconds;
    json stages = json::array();
    for (const auto& r : file.reports) {
      json s = json::object();
      s["value_degree"] = r.value_degree;
      s["rhs_seconds"] = r.rhs_seconds;
      s["solve_seconds"] = r.solve_seconds;
      s["feedback_seconds"] = r.feedback_seconds;
      stages.push_back(std::move(s));
    }
    t["degrees"] = std::move(stages);
    run["timings"] = std::move(t);
    doc["run"] = std::move(run);
  }
  return to_text(doc);
}

CoefficientFile coefficients_from_string(const std::string& text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) {
    throw ParseError("coefficient file: top level must be an object");
  }
  CoefficientFile file;
  file.n = index_at(require(doc, "n"), "n");
  file.m = index_at(require(doc, "m"), "m");
  file.degree = static_cast<int>(index_at(require(doc, "degree"), "degree"));
  const json& method = require(doc, "method");
  const json& status = require(doc, "status");
  if (!method.is_string()) field_error("method", "expected a string");
  if (!status.is_string()) field_error("status", "expected a string");
  file.method = method.get<std::string>();
  file.status = status.get<std::string>();
  if (auto it = doc.find("message"); it != doc.end() && it->is_string()) {
    file.message = it->get<std::string>();
  }
  if (!file.ok()) {
    return file;
  }
  if (file.n < 1 || file.m < 1 || file.degree < 1 || file.degree > kMaxFeedbackDegree) {
    throw ParseError("coefficient file: n, m or degree out of range");
  }
  const json& value = require(doc, "value");
  std::vector<CoeffVector> coeffs;
  for (int d = 2; d <= file.degree + 1; ++d) {
    const std::string key = "v" + std::to_string(d);
    coeffs.emplace_back(file.n, d,
                        vector_from_json(require(value, key), key, int_pow(file.n, d)));
  }
  file.value = PolyValueFunction(file.n, std::move(coeffs));
  const json& feedback = require(doc, "feedback");
  std::vector<Matrix> gains;
  for (int d = 1; d <= file.degree; ++d) {
    const std::string key = "K" + std::to_string(d);
    gains.push_back(matrix_from_json(require(feedback, key), key, file.m, int_pow(file.n, d)));
  }
  file.feedback = PolyFeedbackLaw(file.n, file.m, std::move(gains));
  if (auto it = doc.find("are_residual"); it != doc.end()) {
    file.are_residual = number_at(*it, "are_residual");
  }
  if (auto it = doc.find("reports"); it != doc.end() && it->is_array()) {
    for (const json& rep : *it) {
      DegreeReport r;
      r.value_degree = static_cast<int>(index_at(require(rep, "value_degree"), "value_degree"));
      r.solve.residual_norm = number_at(require(rep, "residual_norm"), "residual_norm");
      r.solve.min_pivot = number_at(require(rep, "min_pivot"), "min_pivot");
      r.solve.recursion_depth =
          static_cast<int>(index_at(require(rep, "recursion_depth"), "recursion_depth"));
      r.solve.imaginary_ratio = number_at(require(rep, "imaginary_ratio"), "imaginary_ratio");
      const json& warn = require(rep, "residual_warning");
      if (!warn.is_boolean()) field_error("residual_warning", "expected a boolean");
      r.solve.residual_warning = warn.get<bool>();
      file.reports.push_back(r);
    }
  }
  if (auto run = doc.find("run"); run != doc.end() && run->is_object()) {
    if (auto c = run->find("command"); c != run->end() && c->is_string()) {
      file.command = c->get<std::string>();
    }
    if (auto p = run->find("parameters"); p != run->end() && p->is_object()) {
      for (const auto& [key, val] : p->items()) {
        if (val.is_string()) file.parameters.emplace_back(key, val.get<std::string>());
      }
    }
    if (auto t = run->find("timings"); t != run->end() && t->is_object()) {
      if (auto a = t->find("are_seconds"); a != t->end()) file.are_seconds = number_at(*a, "are_seconds");
      if (auto stages = t->find("degrees"); stages != t->end() && stages->is_array()) {
        for (const json& st : *stages) {
          const int d = static_cast<int>(index_at(require(st, "value_degree"), "value_degree"));
          for (auto& r : file.reports) {
            if (r.value_degree != d) continue;
            r.rhs_seconds = number_at(require(st, "rhs_seconds"), "rhs_seconds");
            r.solve_seconds = number_at(require(st, "solve_seconds"), "solve_seconds");
            r.feedback_seconds = number_at(require(st, "feedback_seconds"), "feedback_seconds");
          }
        }
      }
    }
  }
  return file;
}

void save_coefficients(const std::filesystem::path& path, const CoefficientFile& file,
                       bool include_run) {
  write_file(path, coefficients_to_string(file, include_run));
}

CoefficientFile load_coefficients(const std::filesystem::path& path) {
  try {
    return coefficients_from_string(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string comparison_to_string(const ValueComparison& cmp, const Vector& x0, int degree) {
  json doc = json::object();
  doc["degree"] = degree;
  doc["x0"] = vector_to_json(x0);
  doc["J_sim"] = cmp.J_sim;
  doc["v_poly"] = cmp.v_poly;
  doc["gap"] = cmp.gap;
  doc["tail_estimate"] = cmp.tail_estimate;
  doc["horizon_limited"] = cmp.horizon_limited;
  doc["valid"] = cmp.valid;
  return to_text(doc);
}

void save_comparison(const std::filesystem::path& path, const ValueComparison& cmp,
                     const Vector& x0, int degree) {
  write_file(path, comparison_to_string(cmp, x0, degree));
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.empty()) {
    throw ContractViolation("write_trajectory_csv: empty trajectory");
  }
  const Index n = traj.states.front().size();
  const Index m = traj.controls.front().size();
  os << "t";
  for (Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Index i = 1; i <= m; ++i) os << ",u" << i;
  os << ",cost\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << detail::format_double(traj.times[k]);
    for (Index i = 0; i < n; ++i) os << ',' << detail::format_double(traj.states[k][i]);
    for (Index i = 0; i < m; ++i) os << ',' << detail::format_double(traj.controls[k][i]);
    os << ',' << detail::format_double(traj.cost_to_t[k]) << '\n';
  }
}

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  write_trajectory_csv(out, traj);
}

}  // namespace qqr
