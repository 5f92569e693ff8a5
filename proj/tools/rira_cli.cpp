// Command-line driver: solve computes eigenpairs of a sparse matrix
// with the randomized implicitly restarted Arnoldi solver; bench-ortho
// traces the conditioning of the sketched orthonormalization variants;
// gen writes the synthetic test matrix with a prescribed spectrum.
//
// Exit codes: 0 success, 2 configuration or input errors, 3 iteration
// cap reached without convergence.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rira/rira.hpp"

namespace {

const std::map<std::string, rira::SpectrumTarget> kWhichMap = {
    {"LM", rira::SpectrumTarget::LargestModulus},
    {"SM", rira::SpectrumTarget::SmallestModulus},
    {"LR", rira::SpectrumTarget::LargestReal},
    {"SR", rira::SpectrumTarget::SmallestReal}};

const std::map<std::string, rira::SketchKind> kSketchMap = {
    {"gaussian", rira::SketchKind::Gaussian},
    {"srht", rira::SketchKind::Srht},
    {"sparse-sign", rira::SketchKind::SparseSign},
    {"identity", rira::SketchKind::Identity}};

const std::map<std::string, rira::OrthoMethod> kOrthoMap = {
    {"rgs", rira::OrthoMethod::Rgs},
    {"rcgs", rira::OrthoMethod::Rcgs},
    {"rcgs2", rira::OrthoMethod::Rcgs2},
    {"rcgs2w", rira::OrthoMethod::Rcgs2w}};

struct SolveOptions {
  std::string matrix_path;
  rira::Index toy_n = 0;
  rira::RiraConfig cfg;
  bool verify = false;
  std::string out_dir = ".";
};

rira::CsrMatrix load_matrix(const std::string& path, rira::Index toy_n) {
  if (toy_n > 0) return rira::gen_toy_spectrum(toy_n);
  return rira::read_matrix_market(path);
}

int run_solve(SolveOptions& opt) {
  rira::CsrMatrix a = load_matrix(opt.matrix_path, opt.toy_n);
  rira::RiraConfig& cfg = opt.cfg;
  if (cfg.ncv == 0)
    cfg.ncv = std::min<rira::Index>(a.n - 1, std::max<rira::Index>(2 * cfg.nev + 1,
                                                                   cfg.nev + cfg.extra + 2));
  cfg.materialize_ritz_vectors = cfg.materialize_ritz_vectors || opt.verify;

  rira::RiraReport rep = rira::rira_solve(a, cfg);
  if (opt.verify) rira::verify_true_residuals(a, rep);

  std::filesystem::create_directories(opt.out_dir);
  {
    std::ofstream json_out(opt.out_dir + "/report.json");
    json_out << rira::report_to_json(rep, cfg).dump(2) << "\n";
  }
  {
    std::ofstream csv_out(opt.out_dir + "/trace.csv");
    rira::write_trace_csv(csv_out, rep);
  }

  std::cout << "status: " << rira::to_string(rep.status) << " (" << rep.outer_iterations
            << " outer iterations, " << rep.matvecs << " matvecs)\n";
  if (std::isfinite(rep.residual_guarantee))
    std::cout << "embedding eps: " << rep.epsilon_hat
              << ", true-residual guarantee factor: " << rep.residual_guarantee << "\n";
  std::cout << "  eigenvalue                              sketched_resid";
  if (opt.verify) std::cout << "   true_resid";
  std::cout << "\n";
  std::cout.setf(std::ios::scientific);
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    const auto& p = rep.pairs[i];
    std::cout.precision(9);
    std::cout << "  " << p.theta.real() << (p.theta.imag() < 0 ? " - " : " + ")
              << std::abs(p.theta.imag()) << "i   ";
    std::cout.precision(3);
    std::cout << p.sres;
    if (opt.verify && i < rep.true_residuals.size())
      std::cout << "        " << rep.true_residuals[i];
    std::cout << "\n";
  }
  std::cout << "report: " << opt.out_dir << "/report.json, trace: " << opt.out_dir
            << "/trace.csv\n";
  return rep.status == rira::SolveStatus::MaxIter ? 3 : 0;
}

struct BenchOptions {
  rira::Index n = 10000;
  rira::Index k = 150;
  std::string methods = "rgs,rcgs2";
  rira::SketchKind sketch = rira::SketchKind::SparseSign;
  rira::Index sketch_dim = 0;
  int zeta = 8;
  std::uint64_t seed = 0;
  rira::Index stride = 1;
  std::string matrix_path;
  std::string out_dir = ".";
};

int run_bench(BenchOptions& opt) {
  Eigen::MatrixXd w;
  if (!opt.matrix_path.empty()) {
    rira::CsrMatrix a = rira::read_matrix_market(opt.matrix_path);
    w = a.to_dense().leftCols(std::min(opt.k, a.n));
  } else {
    w = rira::gen_singular_grid(opt.n, opt.k);
  }
  const rira::Index d = opt.sketch_dim > 0 ? opt.sketch_dim : 4 * w.cols();
  rira::SketchOperator op(opt.sketch, w.rows(), d, opt.seed, opt.zeta);

  std::vector<rira::OrthoMethod> methods;
  std::vector<std::string> names;
  std::stringstream list(opt.methods);
  std::string token;
  while (std::getline(list, token, ',')) {
    auto it = kOrthoMap.find(token);
    if (it == kOrthoMap.end()) {
      std::cerr << "unknown orthogonalization method: " << token << "\n";
      return 2;
    }
    methods.push_back(it->second);
    names.push_back(token);
  }
  if (methods.empty()) {
    std::cerr << "no methods requested\n";
    return 2;
  }

  std::filesystem::create_directories(opt.out_dir);
  for (std::size_t i = 0; i < methods.size(); ++i) {
    auto rows = rira::condition_trace(w, op, methods[i], opt.stride);
    const std::string path = opt.out_dir + "/ortho_" + names[i] + ".csv";
    std::ofstream out(path);
    rira::write_condition_trace_csv(out, rows);
    double kmax = 0.0;
    const double dev_final = rows.empty() ? 0.0 : rows.back().dev_sts;
    for (const auto& r : rows) kmax = std::max(kmax, r.kappa_q);
    std::cout << names[i] << ": " << rows.size() << " rows, max kappa(Q) = " << kmax
              << ", final |I - S'S| = " << dev_final << " -> " << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized implicitly restarted Arnoldi eigensolver"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  CLI::App* solve = app.add_subcommand("solve", "compute eigenpairs of a sparse matrix");
  auto* mx = solve->add_option("--matrix", solve_opt.matrix_path, "Matrix Market file (.mtx)");
  auto* toy = solve->add_option("--toy", solve_opt.toy_n,
                                "use the synthetic matrix with spectrum 1..N instead of a file");
  mx->excludes(toy);
  solve->add_option("--nev", solve_opt.cfg.nev, "number of eigenpairs")->default_val(6);
  solve->add_option("--ncv", solve_opt.cfg.ncv, "Krylov subspace dimension (0 = auto)");
  solve->add_option("--which", solve_opt.cfg.which, "spectrum target")
      ->transform(CLI::CheckedTransformer(kWhichMap))
      ->default_val("LM");
  solve->add_option("--tol", solve_opt.cfg.tol, "sketched-residual tolerance")->default_val(1e-10);
  solve->add_option("--max-iter", solve_opt.cfg.max_outer, "outer iteration cap")->default_val(100);
  solve->add_option("--sketch", solve_opt.cfg.sketch_kind, "embedding kind")
      ->transform(CLI::CheckedTransformer(kSketchMap))
      ->default_val("sparse-sign");
  solve->add_option("--sketch-dim", solve_opt.cfg.sketch_dim, "sketch rows d (0 = 4*ncv)");
  solve->add_option("--zeta", solve_opt.cfg.zeta, "nonzeros per column (sparse-sign)")
      ->default_val(8);
  solve->add_option("--ortho", solve_opt.cfg.ortho, "orthogonalization method")
      ->transform(CLI::CheckedTransformer(kOrthoMap))
      ->default_val("rgs");
  solve->add_option("--seed", solve_opt.cfg.seed, "reproducibility seed")->default_val(0);
  solve->add_option("--extra", solve_opt.cfg.extra, "supplementary pairs")->default_val(4);
  solve->add_flag("--relative", solve_opt.cfg.relative_criterion,
                  "use the relative criterion sres/|theta|");
  solve->add_flag("--check-invariants", solve_opt.cfg.check_invariants,
                  "verify restart legitimacy in-loop (slower)");
  solve->add_flag("--verify", solve_opt.verify, "compute true residuals |Ax - tx|/|x|");
  solve->add_option("--out", solve_opt.out_dir, "output directory")->default_val(".");

  BenchOptions bench_opt;
  CLI::App* bench = app.add_subcommand("bench-ortho", "trace sketched orthonormalization quality");
  bench->add_option("--n", bench_opt.n, "rows of the test panel")->default_val(10000);
  bench->add_option("--k", bench_opt.k, "columns of the test panel")->default_val(150);
  bench->add_option("--methods", bench_opt.methods, "comma list: rgs,rcgs,rcgs2,rcgs2w")
      ->default_val("rgs,rcgs2");
  bench->add_option("--sketch", bench_opt.sketch, "embedding kind")
      ->transform(CLI::CheckedTransformer(kSketchMap))
      ->default_val("sparse-sign");
  bench->add_option("--sketch-dim", bench_opt.sketch_dim, "sketch rows d (0 = 4*k)");
  bench->add_option("--zeta", bench_opt.zeta, "nonzeros per column (sparse-sign)")->default_val(8);
  bench->add_option("--seed", bench_opt.seed, "reproducibility seed")->default_val(0);
  bench->add_option("--stride", bench_opt.stride, "record every s-th prefix")->default_val(1);
  bench->add_option("--matrix", bench_opt.matrix_path,
                    "use the leading columns of this .mtx file instead of the synthetic panel");
  bench->add_option("--out", bench_opt.out_dir, "output directory")->default_val(".");

  rira::Index gen_n = 0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "write the synthetic matrix with spectrum 1..N");
  gen->add_option("--toy", gen_n, "dimension N")->required();
  gen->add_option("--out", gen_out, "output path (default toy_N.mtx)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) {
      if (solve_opt.matrix_path.empty() && solve_opt.toy_n <= 0) {
        std::cerr << "solve: provide --matrix PATH or --toy N\n";
        return 2;
      }
      return run_solve(solve_opt);
    }
    if (bench->parsed()) return run_bench(bench_opt);
    if (gen->parsed()) {
      if (gen_out.empty()) gen_out = "toy_" + std::to_string(gen_n) + ".mtx";
      rira::write_matrix_market(gen_out, rira::gen_toy_spectrum(gen_n));
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
