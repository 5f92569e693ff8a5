#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

#include "rira/solver.hpp"

namespace rira {

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Breakdown: return "breakdown";
  }
  return "unknown";
}

inline const char* to_string(SpectrumTarget t) {
  switch (t) {
    case SpectrumTarget::LargestModulus: return "LM";
    case SpectrumTarget::SmallestModulus: return "SM";
    case SpectrumTarget::LargestReal: return "LR";
    case SpectrumTarget::SmallestReal: return "SR";
  }
  return "?";
}

inline const char* to_string(SketchKind k) {
  switch (k) {
    case SketchKind::Gaussian: return "gaussian";
    case SketchKind::Srht: return "srht";
    case SketchKind::SparseSign: return "sparse-sign";
    case SketchKind::Identity: return "identity";
  }
  return "?";
}

inline const char* to_string(OrthoMethod m) {
  switch (m) {
    case OrthoMethod::Rgs: return "rgs";
    case OrthoMethod::Rcgs: return "rcgs";
    case OrthoMethod::Rcgs2: return "rcgs2";
    case OrthoMethod::Rcgs2w: return "rcgs2w";
  }
  return "?";
}

namespace detail {
inline nlohmann::json complex_json(const Complex& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}
}  // namespace detail

/// Stable, versioned JSON report: solver configuration, converged pairs
/// and the full outer-iteration trace.
inline nlohmann::json report_to_json(const RiraReport& rep, const RiraConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["status"] = to_string(rep.status);
  j["config"] = {{"nev", cfg.nev},
                 {"ncv", cfg.ncv},
                 {"which", to_string(cfg.which)},
                 {"tol", cfg.tol},
                 {"max_outer", cfg.max_outer},
                 {"extra", cfg.extra},
                 {"ortho", to_string(cfg.ortho)},
                 {"relative_criterion", cfg.relative_criterion},
                 {"sketch",
                  {{"kind", to_string(cfg.sketch_kind)},
                   {"dim", cfg.sketch_dim},
                   {"seed", cfg.seed},
                   {"zeta", cfg.zeta}}}};
  j["outer_iterations"] = rep.outer_iterations;
  j["matvecs"] = rep.matvecs;
  if (std::isfinite(rep.epsilon_hat)) j["epsilon_hat"] = rep.epsilon_hat;
  if (std::isfinite(rep.residual_guarantee)) j["residual_guarantee"] = rep.residual_guarantee;

  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    nlohmann::json p;
    p["theta"] = detail::complex_json(rep.pairs[i].theta);
    p["sketched_residual"] = rep.pairs[i].sres;
    if (i < rep.true_residuals.size()) p["true_residual"] = rep.true_residuals[i];
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);

  nlohmann::json trace = nlohmann::json::array();
  for (const auto& rec : rep.trace) {
    nlohmann::json t;
    t["iter"] = rec.iter;
    t["max_sres"] = rec.max_sres;
    t["min_sres"] = rec.min_sres;
    t["matvecs"] = rec.matvecs;
    t["seconds"] = rec.seconds;
    nlohmann::json wanted = nlohmann::json::array();
    for (const auto& z : rec.wanted) wanted.push_back(detail::complex_json(z));
    t["wanted"] = std::move(wanted);
    nlohmann::json shifts = nlohmann::json::array();
    for (const auto& z : rec.shifts) shifts.push_back(detail::complex_json(z));
    t["shifts"] = std::move(shifts);
    trace.push_back(std::move(t));
  }
  j["trace"] = std::move(trace);
  return j;
}

/// One CSV row per outer iteration.
inline void write_trace_csv(std::ostream& out, const RiraReport& rep) {
  out << "iter,max_sres,min_sres,matvecs,seconds\n";
  out.precision(12);
  for (const auto& rec : rep.trace)
    out << rec.iter << "," << rec.max_sres << "," << rec.min_sres << "," << rec.matvecs << ","
        << rec.seconds << "\n";
}

}  // namespace rira
