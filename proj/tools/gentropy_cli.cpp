// Command-line surface over the library: entropy vectors, inequality checks,
// the Ingleton family sweep, hyperdeterminants, principal-minor assignment,
// and the 3-variable region tools. Thin adapters only; all numerics live in
// the headers.
//
// Exit codes: 0 pass/success, 1 checked-failure verdicts, 2 input/usage errors.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "gentropy/entropy.hpp"
#include "gentropy/hyperdet.hpp"
#include "gentropy/inequalities.hpp"
#include "gentropy/io.hpp"
#include "gentropy/matrices.hpp"
#include "gentropy/minor_assignment.hpp"
#include "gentropy/region3.hpp"

namespace {

using namespace gentropy;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitCheckedFail = 1;
constexpr int kExitInputError = 2;

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

struct CommonOpts {
  std::string matrix_path;
  std::string vector_path;
  std::string tensor_path;
  std::string out_path;
  int T = 0;
  double tol = -1.0;  // negative: use the command's default
  int res = 200;
  std::uint64_t seed = 1;
  bool csv = false;

  double tol_or(double fallback) const { return tol >= 0.0 ? tol : fallback; }
};

BlockCovariance load_block(const CommonOpts& o) {
  io::MatrixFile f = io::load_matrix(o.matrix_path);
  if (o.T > 0) {
    if (f.dense.rows() % o.T != 0)
      throw io::ParseError("--T does not divide the matrix dimension");
    f.T = o.T;
    f.n = static_cast<int>(f.dense.rows()) / o.T;
  }
  return f.as_block();
}

int cmd_entropy(const CommonOpts& o) {
  const auto g = entropy_g(load_block(o));
  json out = io::subset_vector_to_json(g.data);
  out["kind"] = "g";
  emit(out);
  return kExitPass;
}

int cmd_check_shannon(const CommonOpts& o) {
  const SubsetVector h = io::load_subset_vector(o.vector_path);
  const double tol = o.tol_or(1e-9);
  const auto report = check_shannon(h, tol);
  emit(io::shannon_report_to_json(report));
  return report.ok() ? kExitPass : kExitCheckedFail;
}

int cmd_check_ingleton(const CommonOpts& o) {
  SubsetVector g(4);
  if (!o.matrix_path.empty()) {
    const auto block = load_block(o);
    if (block.n != 4) throw io::ParseError("check-ingleton expects 4 variables");
    g = entropy_g(block).data;
  } else if (!o.vector_path.empty()) {
    g = io::load_subset_vector(o.vector_path);
    if (g.n != 4) throw io::ParseError("check-ingleton expects an n=4 vector");
  } else {
    throw io::ParseError("check-ingleton needs --matrix or --vector");
  }
  const auto quad = singleton_quad();
  const double value = ingleton_value(g, quad);
  // minor-ratio domain: exp of the g-domain value
  json out{{"ingleton_value", value},
           {"minor_ratio", std::exp(value)},
           {"violated", value > 0.0},
           {"subsets", {"[1]", "[2]", "[3]", "[4]"}}};
  emit(out);
  return value > 0.0 ? kExitCheckedFail : kExitPass;
}

int cmd_ingleton_sweep(const CommonOpts& o) {
  const double tol = o.tol_or(1e-10);
  const auto cells = ingleton_sweep(o.res, tol);
  const std::string csv = io::sweep_to_csv(cells);
  std::cerr << "# ingleton-sweep res=" << o.res << " psd_tol=" << tol << "\n";
  if (!o.out_path.empty())
    io::write_file(o.out_path, csv);
  else
    std::cout << csv;
  return kExitPass;
}

int cmd_hyperdet(const CommonOpts& o) {
  const Tensor2n t = io::load_tensor(o.tensor_path);
  if (t.n != 3) throw io::ParseError("hyperdet expects a 2x2x2 tensor");
  const double cay = cayley222(t);
  const double det = det_formula_222(t);
  const double scale = std::max(cayley222_scale(t), 1e-300);
  emit(json{{"cayley", cay},
            {"det_formula", det},
            {"relative_gap", std::abs(cay - det) / scale},
            {"scale", scale}});
  return kExitPass;
}

int cmd_pm_check(const CommonOpts& o) {
  const SubsetVector a = io::load_subset_vector(o.vector_path);
  const double tol = o.tol_or(a.n <= 4 ? 1e-9 : 1e-8);
  MinorCandidate cand(a);
  try {
    const auto report = run_conditions(cand, tol);
    emit(io::check_report_to_json(report));
    return report.pass ? kExitPass : kExitCheckedFail;
  } catch (const DegenerateInput& e) {
    emit(json{{"pass", false}, {"tol", tol}, {"error", e.what()}});
    return kExitCheckedFail;
  }
}

int cmd_pm_reconstruct(const CommonOpts& o) {
  const SubsetVector a = io::load_subset_vector(o.vector_path);
  const double tol = o.tol_or(a.n <= 4 ? 1e-9 : 1e-8);
  try {
    const SymmetricMatrix m = reconstruct(MinorCandidate(a), tol);
    const std::string csv = io::matrix_to_csv(m.m, m.n, 1);
    if (!o.out_path.empty())
      io::write_file(o.out_path, csv);
    else
      std::cout << csv;
    std::cerr << "# pm-reconstruct tol=" << tol << "\n";
    return kExitPass;
  } catch (const DegenerateInput& e) {
    std::cerr << e.what() << "\n";
    return kExitCheckedFail;
  } catch (const ConditionsFailed& e) {
    std::cerr << e.what() << " (residual " << e.residual << ")\n";
    return kExitCheckedFail;
  }
}

int cmd_gauss_entropic(const CommonOpts& o) {
  const SubsetVector g = io::load_subset_vector(o.vector_path);
  const double tol = o.tol_or(g.n <= 4 ? 1e-9 : 1e-8);
  try {
    const auto report = gauss_entropic_check(g, tol);
    json out{{"pass", report.pass},
             {"psd", report.psd},
             {"conditions", io::check_report_to_json(report.conditions)}};
    emit(out);
    return report.pass ? kExitPass : kExitCheckedFail;
  } catch (const DegenerateInput& e) {
    emit(json{{"pass", false}, {"tol", tol}, {"error", e.what()}});
    return kExitCheckedFail;
  }
}

XTriple x_from_g(const SubsetVector& g) {
  if (g.n != 3) throw io::ParseError("expected an n=3 g-vector");
  const double x1 = std::exp(g[mask_of({2, 3})] - g[mask_of({2})] - g[mask_of({3})]);
  const double x2 = std::exp(g[mask_of({1, 3})] - g[mask_of({1})] - g[mask_of({3})]);
  const double x3 = std::exp(g[mask_of({1, 2})] - g[mask_of({1})] - g[mask_of({2})]);
  auto clamp1 = [](double v) { return std::min(v, 1.0); };
  if (x1 > 1.0 + 1e-9 || x2 > 1.0 + 1e-9 || x3 > 1.0 + 1e-9)
    throw io::ParseError("g violates a pairwise constraint; x outside (0,1]");
  return XTriple(clamp1(x1), clamp1(x2), clamp1(x3));
}

int cmd_region3_fprofile(const CommonOpts& o) {
  const SubsetVector g = io::load_subset_vector(o.vector_path);
  const XTriple x = x_from_g(g);
  const auto profile = f_profile(x);
  std::ostringstream csv;
  csv.precision(17);
  csv << "delta,f,y\n";
  const int points = 200;
  for (int i = 0; i < points; ++i) {
    const double delta = std::pow(10.0, -3.0 + 6.0 * i / (points - 1));
    csv << delta << "," << f_eval(x, delta) << "," << y_eval(x, delta) << "\n";
  }
  if (!o.out_path.empty()) io::write_file(o.out_path, csv.str());
  if (o.csv) {
    if (o.out_path.empty()) std::cout << csv.str();
  } else {
    json out = io::profile_to_json(profile);
    out["x_sorted"] = {x.x[0], x.x[1], x.x[2]};
    out["y_tilde"] = y_tilde(x);
    emit(out);
  }
  return kExitPass;
}

int cmd_region3_classify(const CommonOpts& o) {
  const SubsetVector g = io::load_subset_vector(o.vector_path);
  const double tol = o.tol_or(1e-9);
  const auto verdict = conjectured_region_classify(g, tol);
  json out = io::region_verdict_to_json(verdict);
  out["tol"] = tol;
  emit(out);
  return verdict.zone == RegionVerdict::Zone::Outside ? kExitCheckedFail : kExitPass;
}

int cmd_region3_achieve(const CommonOpts& o) {
  const SubsetVector p = io::load_subset_vector(o.vector_path);
  try {
    const auto result = achieve_in_cone(p);
    emit(io::achieve_result_to_json(result));
    return kExitPass;
  } catch (const NotInContinuousRegion& e) {
    emit(json{{"error", e.what()}});
    return kExitCheckedFail;
  }
}

int cmd_boundary_opt(const CommonOpts& o) {
  const SubsetVector coeffs = io::load_subset_vector(o.vector_path);
  if (coeffs.n != 3) throw io::ParseError("boundary-opt expects an n=3 gamma vector");
  LinearFunctional gamma(3);
  gamma.coeffs = coeffs;
  const int T = o.T > 0 ? o.T : 3;
  try {
    const auto result = boundary_optimize(gamma, T, o.seed);
    json out = io::diagnostics_to_json(result.diagnostics);
    out["T"] = T;
    out["seed"] = o.seed;
    emit(out);
    return result.diagnostics.converged ? kExitPass : kExitCheckedFail;
  } catch (const NotBalanced& e) {
    emit(json{{"error", e.what()}});
    return kExitCheckedFail;
  }
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--matrix", o.matrix_path, "matrix file (CSV or JSON)");
  cmd->add_option("--vector", o.vector_path, "subset-vector JSON file");
  cmd->add_option("--tensor", o.tensor_path, "tensor JSON file");
  cmd->add_option("--T", o.T, "block size");
  cmd->add_option("--tol", o.tol, "tolerance (module default when omitted)");
  cmd->add_option("--res", o.res, "grid resolution");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out_path, "output file path");
  cmd->add_flag("--csv", o.csv, "prefer CSV on stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian entropy vectors, principal minors, and the 3-variable "
               "entropy-region toolkit"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const CommonOpts&);
    CommonOpts opts;
  };
  std::vector<Entry> entries = {
      {"entropy", "g-vector of a (block) covariance matrix", cmd_entropy, {}},
      {"check-shannon", "basic Shannon inequalities on a subset vector",
       cmd_check_shannon, {}},
      {"check-ingleton", "Ingleton expression on singletons of an n=4 input",
       cmd_check_ingleton, {}},
      {"ingleton-sweep", "rasterize the epsilon/a^2 family violation region",
       cmd_ingleton_sweep, {}},
      {"hyperdet", "2x2x2 hyperdeterminant of a tensor, both routes",
       cmd_hyperdet, {}},
      {"pm-check", "minimal principal-minor-assignment conditions", cmd_pm_check, {}},
      {"pm-reconstruct", "reconstruct a symmetric matrix from its minors",
       cmd_pm_reconstruct, {}},
      {"gauss-entropic", "is exp(g) a symmetric PSD minor vector", cmd_gauss_entropic, {}},
      {"boundary-opt", "projected log-det ascent for a balanced gamma",
       cmd_boundary_opt, {}},
  };
  for (auto& e : entries) add_common(app.add_subcommand(e.name, e.help), e.opts);

  CLI::App* region = app.add_subcommand("region3", "3-variable region tools");
  region->require_subcommand(1);
  struct RegionEntry {
    const char* name;
    const char* help;
    int (*run)(const CommonOpts&);
    CommonOpts opts;
  };
  std::vector<RegionEntry> region_entries = {
      {"fprofile", "f(delta)/y(delta) profile and curve", cmd_region3_fprofile, {}},
      {"classify", "conjectured-region verdict for a g-vector",
       cmd_region3_classify, {}},
      {"achieve", "convex-cone achievability construction", cmd_region3_achieve, {}},
  };
  for (auto& e : region_entries) add_common(region->add_subcommand(e.name, e.help), e.opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    for (auto& e : entries)
      if (app.get_subcommand(e.name)->parsed()) return e.run(e.opts);
    for (auto& e : region_entries)
      if (region->get_subcommand(e.name)->parsed()) return e.run(e.opts);
    std::cerr << "no command\n";
    return kExitInputError;
  } catch (const io::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckedFail;
  }
}
