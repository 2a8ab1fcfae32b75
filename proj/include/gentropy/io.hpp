#pragma once

// File formats: matrices as CSV (optional "# n,T" comment header) or JSON
// {"n","T","rows"}, subset-keyed vectors and tensors as JSON objects, sweep
// grids and reports as CSV/JSON.

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gentropy/hyperdet.hpp"
#include "gentropy/inequalities.hpp"
#include "gentropy/matrices.hpp"
#include "gentropy/minor_assignment.hpp"
#include "gentropy/region3.hpp"
#include "gentropy/subsets.hpp"

namespace gentropy::io {

using nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatrixFile {
  int n = 0;
  int T = 1;
  Matrix dense;

  BlockCovariance as_block() const { return BlockCovariance(n, T, dense); }
  SymmetricMatrix as_symmetric() const {
    if (T != 1) throw ParseError("matrix has T > 1, scalar matrix expected");
    return SymmetricMatrix(dense);
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << content;
}

inline MatrixFile parse_matrix_csv(const std::string& text) {
  MatrixFile f;
  std::vector<std::vector<double>> rows;
  int header_n = 0, header_T = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') {
      // "# n,T" comment header; any two integers accepted
      std::string digits;
      std::vector<int> vals;
      for (char c : line) {
        if (c >= '0' && c <= '9') {
          digits += c;
        } else if (!digits.empty()) {
          vals.push_back(std::stoi(digits));
          digits.clear();
        }
      }
      if (!digits.empty()) vals.push_back(std::stoi(digits));
      if (vals.size() >= 2) {
        header_n = vals[0];
        header_T = vals[1];
      } else if (vals.size() == 1) {
        header_n = vals[0];
        header_T = 1;
      }
      continue;
    }
    std::vector<double> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad CSV cell: " + cell);
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix CSV");
  const std::size_t dim = rows.size();
  f.dense = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (rows[i].size() != dim) throw ParseError("matrix CSV is not square");
    for (std::size_t j = 0; j < dim; ++j) f.dense(i, j) = rows[i][j];
  }
  if (header_n > 0) {
    f.n = header_n;
    f.T = header_T > 0 ? header_T : 1;
    if (static_cast<std::size_t>(f.n) * f.T != dim)
      throw ParseError("matrix CSV: n*T does not match row count");
  } else {
    f.n = static_cast<int>(dim);
    f.T = 1;
  }
  return f;
}

inline MatrixFile parse_matrix_json(const json& j) {
  MatrixFile f;
  if (!j.contains("n") || !j.contains("rows"))
    throw ParseError("matrix JSON needs \"n\" and \"rows\"");
  f.n = j.at("n").get<int>();
  f.T = j.value("T", 1);
  const auto& rows = j.at("rows");
  const std::size_t dim = rows.size();
  if (dim != static_cast<std::size_t>(f.n) * f.T)
    throw ParseError("matrix JSON: rows != n*T");
  f.dense = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (rows[i].size() != dim) throw ParseError("matrix JSON is not square");
    for (std::size_t jj = 0; jj < dim; ++jj)
      f.dense(i, jj) = rows[i][jj].get<double>();
  }
  return f;
}

inline MatrixFile load_matrix(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return parse_matrix_json(json::parse(text));
  return parse_matrix_csv(text);
}

inline std::string matrix_to_csv(const Matrix& m, int n, int T) {
  std::ostringstream out;
  out << "# " << n << "," << T << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << m(i, j);
    }
    out << "\n";
  }
  return out.str();
}

inline json subset_vector_to_json(const SubsetVector& v) {
  json entries = json::object();
  for (SubsetMask s : enumerate_subsets(v.n)) entries[subset_to_string(s)] = v[s];
  return json{{"n", v.n}, {"entries", entries}};
}

// Strict: every nonempty subset must be present exactly once.
inline SubsetVector subset_vector_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("entries"))
    throw ParseError("subset vector JSON needs \"n\" and \"entries\"");
  const int n = j.at("n").get<int>();
  SubsetVector v(n);
  std::vector<bool> seen(v.size(), false);
  for (const auto& [key, value] : j.at("entries").items()) {
    SubsetMask s;
    try {
      s = parse_subset(key, n);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("bad subset key: ") + e.what());
    }
    if (seen[s - 1]) throw ParseError("duplicate subset key " + key);
    seen[s - 1] = true;
    v[s] = value.get<double>();
  }
  for (SubsetMask s : enumerate_subsets(n))
    if (!seen[s - 1]) throw ParseError("missing subset key " + subset_to_string(s));
  return v;
}

inline SubsetVector load_subset_vector(const std::string& path) {
  return subset_vector_from_json(json::parse(read_file(path)));
}

// Tensor index strings are in axis order i1 i2 ... in; axis j is bit j-1.
inline std::string tensor_index_string(SubsetMask idx, int n) {
  std::string s(n, '0');
  for (int j = 0; j < n; ++j)
    if ((idx >> j) & 1u) s[j] = '1';
  return s;
}

inline json tensor_to_json(const Tensor2n& t) {
  json coeffs = json::object();
  for (SubsetMask idx = 0; idx < (SubsetMask{1} << t.n); ++idx)
    coeffs[tensor_index_string(idx, t.n)] = t[idx];
  return json{{"n", t.n}, {"coeffs", coeffs}};
}

inline Tensor2n tensor_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("coeffs"))
    throw ParseError("tensor JSON needs \"n\" and \"coeffs\"");
  const int n = j.at("n").get<int>();
  Tensor2n t(n);
  std::vector<bool> seen(std::size_t{1} << n, false);
  for (const auto& [key, value] : j.at("coeffs").items()) {
    if (static_cast<int>(key.size()) != n)
      throw ParseError("tensor index " + key + " has wrong length");
    SubsetMask idx = 0;
    for (int b = 0; b < n; ++b) {
      if (key[b] == '1')
        idx |= SubsetMask{1} << b;
      else if (key[b] != '0')
        throw ParseError("tensor index " + key + " must be binary");
    }
    if (seen[idx]) throw ParseError("duplicate tensor index " + key);
    seen[idx] = true;
    t[idx] = value.get<double>();
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ParseError("missing tensor index " +
                                   tensor_index_string(static_cast<SubsetMask>(i), n));
  return t;
}

inline Tensor2n load_tensor(const std::string& path) {
  return tensor_from_json(json::parse(read_file(path)));
}

inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out.precision(17);
  out << "epsilon,a2,feasible,violates,ingleton_value\n";
  for (const auto& c : cells) {
    const char* feas = c.feasibility == FamilyFeasibility::Feasible ? "feasible"
                       : c.feasibility == FamilyFeasibility::Boundary ? "boundary"
                                                                      : "infeasible";
    out << c.epsilon << "," << c.a2 << "," << feas << ","
        << (c.feasibility != FamilyFeasibility::Infeasible && c.violates ? 1 : 0)
        << ",";
    if (std::isnan(c.ingleton_value))
      out << "nan";
    else
      out << c.ingleton_value;
    out << "\n";
  }
  return out.str();
}

inline json shannon_report_to_json(const ShannonReport& r) {
  json viols = json::array();
  for (const auto& v : r.violations)
    viols.push_back(
        {{"kind", v.kind == ShannonViolation::Kind::Monotonicity ? "monotonicity"
                                                                 : "submodularity"},
         {"s", subset_to_string(v.s)},
         {"t", subset_to_string(v.t)},
         {"slack", v.slack}});
  return json{{"tol", r.tol}, {"ok", r.ok()}, {"violations", viols}};
}

inline json check_report_to_json(const CheckReport& r) {
  json eqs = json::array();
  for (const auto& e : r.equations) {
    const char* type = e.type == EquationResidual::Type::PairSquare ? "pair-square"
                       : e.type == EquationResidual::Type::TripleProduct
                           ? "triple-product"
                           : "determinant";
    json entry{{"type", type},
               {"indices", e.indices},
               {"residual", e.residual},
               {"pass", e.pass}};
    if (e.beta != 0) entry["beta"] = subset_to_string(e.beta);
    if (e.diagnostic) entry["diagnostic"] = true;
    eqs.push_back(entry);
  }
  return json{{"n", r.n},
              {"tol", r.tol},
              {"pass", r.pass},
              {"equations", eqs},
              {"equation_count", r.counted_equations()},
              {"max_residual", r.max_residual()}};
}

inline json region_verdict_to_json(const RegionVerdict& v) {
  const char* zone = v.zone == RegionVerdict::Zone::Inside    ? "inside"
                     : v.zone == RegionVerdict::Zone::Outside ? "outside"
                                                              : "boundary";
  json out{{"status", "CONJECTURAL"},
           {"zone", zone},
           {"pairwise_ok", v.pairwise_ok},
           {"branch", v.tighter_branch ? "tighter123" : "3ent"},
           {"y_tilde", v.y_tilde},
           {"x", {v.x[0], v.x[1], v.x[2]}}};
  if (std::isnan(v.bound_g123))
    out["bound_g123"] = nullptr;
  else if (v.bound_g123 == -kInf)
    out["bound_g123"] = "-inf";
  else
    out["bound_g123"] = v.bound_g123;
  return out;
}

inline json profile_to_json(const FDeltaProfile& p) {
  json out{{"case", p.case_id}, {"sup_f", p.sup_f}, {"attained", p.attained}};
  switch (p.location) {
    case DeltaLocation::Finite: out["delta0"] = p.delta0; break;
    case DeltaLocation::ZeroPlus: out["delta0"] = "0+"; break;
    case DeltaLocation::Infinity: out["delta0"] = "inf"; break;
    case DeltaLocation::Everywhere: out["delta0"] = "everywhere"; break;
  }
  return out;
}

inline json achieve_result_to_json(const AchieveResult& r) {
  return json{
      {"theta_prime", r.theta_prime},
      {"asymptotic", r.asymptotic},
      {"profile", profile_to_json(r.profile)},
      {"solution",
       {{"theta", r.solution.theta},
        {"delta", r.solution.delta},
        {"cos_psi", r.solution.cos_psi},
        {"alpha_diag", {r.solution.alpha_diag[0], r.solution.alpha_diag[1],
                        r.solution.alpha_diag[2]}},
        {"alpha_off", {r.solution.alpha_off[0], r.solution.alpha_off[1],
                       r.solution.alpha_off[2]}},
        {"theta_rational",
         {{"That", r.solution.That_rational},
          {"T", r.solution.T_rational},
          {"error", r.solution.theta_rational_error}}}}},
      {"achieved_q", subset_vector_to_json(r.achieved_q)},
      {"max_rel_gap", r.max_rel_gap}};
}

inline json diagnostics_to_json(const BoundaryDiagnostics& d) {
  return json{{"objective", d.objective},
              {"kkt_residual", d.kkt_residual},
              {"ortho_deviation", d.ortho_deviation},
              {"phi_product_deviation", d.phi_product_deviation},
              {"iterations", d.iterations},
              {"best_restart", d.best_restart},
              {"converged", d.converged}};
}

}  // namespace gentropy::io
