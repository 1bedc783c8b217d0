#include "arinfo/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace arinfo {

using nlohmann::json;

json to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      if (std::isfinite(m(i, j))) {
        row.push_back(m(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kParseError, "matrix must be an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols) {
      throw Error(ErrorCode::kParseError, "ragged matrix");
    }
    for (int k = 0; k < cols; ++k) {
      // null is how NaN is written out
      if (j[i][k].is_null()) {
        m(i, k) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (!j[i][k].is_number()) throw Error(ErrorCode::kParseError, "matrix entry not a number");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

json to_json(const NoiseModel& noise) {
  return {{"kind", noise.kind},
          {"parameters", noise.parameters},
          {"regularized", noise.regularized},
          {"p", noise.p()},
          {"n", noise.n()}};
}

json to_json(const Controller& c) {
  json g = json::array(), f = json::array();
  for (const auto& m : c.G) g.push_back(to_json(m));
  for (const auto& m : c.F) f.push_back(to_json(m));
  return {{"L", c.L}, {"m", c.m}, {"p", c.p}, {"G", g}, {"F", f}};
}

Controller controller_from_json(const json& j) {
  try {
    Controller c;
    c.L = j.at("L").get<int>();
    for (const auto& g : j.at("G")) c.G.push_back(matrix_from_json(g));
    for (const auto& f : j.at("F")) c.F.push_back(matrix_from_json(f));
    c.m = c.G.empty() ? 0 : static_cast<int>(c.G[0].rows());
    c.p = c.F.empty() ? 0 : static_cast<int>(c.F[0].cols());
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("controller: ") + e.what());
  }
}

json to_json(const ArSystem& sys) {
  json p = json::array(), q = json::array();
  for (const auto& m : sys.P) p.push_back(to_json(m));
  for (const auto& m : sys.Q) q.push_back(to_json(m));
  return {{"L", sys.L}, {"m", sys.m}, {"p", sys.p}, {"P", p}, {"Q", q}};
}

ArSystem system_from_json(const json& j) {
  try {
    ArSystem s;
    s.L = j.at("L").get<int>();
    s.m = j.at("m").get<int>();
    s.p = j.at("p").get<int>();
    for (const auto& m : j.at("P")) s.P.push_back(matrix_from_json(m));
    for (const auto& m : j.at("Q")) {
      Matrix q = matrix_from_json(m);
      if (q.size() == 0) q = Matrix::Zero(s.p, s.m);
      s.Q.push_back(q);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("plant: ") + e.what());
  }
}

json to_json(const StabilityReport& r) {
  json j = {{"schema_version", kReportSchemaVersion},
            {"kind", "stability"},
            {"verdict", r.informative ? "informative" : "not_informative"},
            {"solver_status", to_string(r.status)},
            {"L", r.L},
            {"p", r.p},
            {"h1_full_rank", r.h1_full_rank},
            {"lmi_size", r.lmi_size},
            {"unknowns", r.unknowns},
            {"margins", {{"lmi", r.lmi_margin}, {"lmi_relative", r.lmi_relative_margin}}},
            {"diagnostics", r.diagnostics}};
  if (r.informative) {
    j["Phi"] = to_json(r.Phi);
    j["Psi"] = to_json(r.Psi);
    j["margins"]["phi_condition"] = r.phi_condition;
  }
  return j;
}

json to_json(const SynthesisResult& r, const VerificationReport* v) {
  json sizes = r.lmi_sizes;
  json j = {{"schema_version", kReportSchemaVersion},
            {"kind", "stabilization"},
            {"verdict", r.informative ? "informative" : "not_informative"},
            {"solver_status", to_string(r.status)},
            {"method", to_string(r.method)},
            {"L", r.L},
            {"m", r.m},
            {"p", r.p},
            {"lmi_sizes", sizes},
            {"unknowns", r.unknowns},
            {"margins",
             {{"lmi", r.margins.lmi},
              {"lmi_relative", r.margins.lmi_relative},
              {"alternative_qmi", r.margins.alternative_qmi},
              {"phi_min_eig_balanced", r.margins.phi_min_eig},
              {"phi_condition_balanced", r.margins.phi_condition}}},
            {"diagnostics", r.diagnostics}};
  if (r.informative) {
    j["Phi"] = to_json(r.Phi);
    j["D"] = to_json(r.D);
    j["C"] = to_json(r.C);
    j["controller"] = to_json(r.controller);
  }
  if (v) {
    j["verification"] = {{"trials", v->trials},
                         {"passed", v->passed},
                         {"pass_fraction", v->pass_fraction},
                         {"worst_margin", v->worst_lyapunov},
                         {"worst_spectral_radius", v->worst_spectral_radius}};
  }
  return j;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw Error(ErrorCode::kParseError, path + ": bad number");
    if (!row.empty()) rows.push_back(row);
  }
  const int n = static_cast<int>(rows.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw Error(ErrorCode::kParseError, path + ": matrix must be square");
    }
    for (int k = 0; k < n; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

NoiseModel parse_noise_spec(const std::string& spec, int p, int n) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "noise spec '" + spec + "': bad number");
    }
  };
  if (kind == "exact" && arg.empty()) return noise_exact(p, n);
  if (kind == "per-sample") return noise_per_sample(p, n, number(arg));
  if (kind == "per-sample-aggregate") return noise_per_sample_aggregate(p, n, number(arg));
  if (kind == "energy") return noise_energy(p, n, SymMatrix(read_matrix_file(arg)));
  if (kind == "covariance") {
    const auto comma = arg.find(',');
    const std::string path = arg.substr(0, comma);
    const double mu = comma == std::string::npos ? 1e-8 : number(arg.substr(comma + 1));
    return noise_covariance(p, n, SymMatrix(read_matrix_file(path)), mu);
  }
  throw Error(ErrorCode::kParseError, "unknown noise spec '" + spec + "'");
}

}  // namespace arinfo
