// Batch pipeline: model -> 1D spectrum -> gamma checks -> corrector ->
// prediction -> scalar-equation sweep -> optional evolution, with a
// deterministic JSON summary, per-mode CSVs, and a text report.  Every
// report field is copied from a module output; nothing is synthesized here.
#pragma once

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kspec/asymptotics.hpp"
#include "kspec/birman_schwinger.hpp"
#include "kspec/config.hpp"
#include "kspec/corrector.hpp"
#include "kspec/errors.hpp"
#include "kspec/evolution.hpp"
#include "kspec/gamma.hpp"
#include "kspec/models.hpp"
#include "kspec/operator1d.hpp"

namespace kspec {

inline int thread_count() {
  const char* env = std::getenv("KINK_SPECTRA_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  if (n < 1) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && n > static_cast<int>(hw)) n = static_cast<int>(hw);
  return n;
}

struct PipelineOutcome {
  int exit_code = 0;  // 0 success; 4 when a degenerate case was detected
  std::string summary_path;
  std::string report_path;
};

namespace detail {

inline nlohmann::ordered_json json_complex(cd z) {
  return nlohmann::ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

inline std::string case_summary(int case_id) {
  switch (case_id) {
    case 1: return "zero mode: unmoved at the computed orders";
    case 2: return "both branches persist as eigenvalues";
    case 3: return "both branches turn into resonances";
    case 4: return "branch pairing: one eigenvalue, one resonance";
    case 5: return "both branches turn into resonances";
    case 6: return "both branches persist as eigenvalues";
    default: return "outside the classification table";
  }
}

// Potential wrapper so templated operators accept AnyModel uniformly.
struct PotentialView {
  const AnyModel* m;
  double potential(double x) const { return model_potential(*m, x); }
  double lambda_e() const { return model_lambda_e(*m); }
};

}  // namespace detail

// Dry run for `validate`: checks the config against the model catalog,
// the kink ODE, and the damping-profile contracts without computing.
inline void validate_run_config(const RunConfig& cfg,
                                std::ostream& log = std::cerr) {
  AnyModel model = make_model(cfg.model);
  if (const auto* fm = std::get_if<FieldModel>(&model)) {
    ModelReport mr = validate_model(*fm, cfg.grid1d, cfg.model_tol);
    log << "model " << fm->name << ": kink residual " << mr.max_ode_residual
        << "\n";
  } else {
    log << "model " << model_name(model) << ": prescribed potential\n";
  }
  GammaSpec gamma = make_gamma(cfg.gamma_family, cfg.gamma_params);
  Grid1D parity_grid(cfg.grid1d.L, 201);
  check_parity(gamma, parity_grid, parity_grid);
  check_decay(gamma, {5.0, 10.0, 20.0, 30.0});
  log << "gamma " << gamma.family << " [" << parity_name(gamma.parity)
      << "]: parity and decay bounds hold\n";
}

inline PipelineOutcome run_pipeline(const RunConfig& cfg,
                                    std::ostream& log = std::cerr) {
  namespace fs = std::filesystem;
  const int threads = thread_count();
  fs::create_directories(cfg.out_dir);

  AnyModel model = make_model(cfg.model);
  if (const auto* fm = std::get_if<FieldModel>(&model)) {
    ModelReport mr = validate_model(*fm, cfg.grid1d, cfg.model_tol);
    log << "model " << fm->name << ": kink residual " << mr.max_ode_residual
        << " within " << cfg.model_tol << "\n";
  }
  const double lambda_e = model_lambda_e(model);

  detail::PotentialView pv{&model};
  Spectrum spec = eigen_h0(assemble_h0(pv, cfg.grid1d), cfg.grid1d);
  std::vector<int> discrete = discrete_modes(spec, lambda_e);
  log << "discrete modes below the edge " << lambda_e << ":";
  for (int j : discrete) log << " [" << j << "] " << spec.lambda[j];
  log << "\n";

  std::vector<int> selected;
  if (cfg.mode_index >= 0) {
    if (cfg.mode_index >= static_cast<int>(discrete.size()))
      throw ValidationError("modes",
                            "mode index " + std::to_string(cfg.mode_index) +
                                " out of range: " +
                                std::to_string(discrete.size()) +
                                " discrete mode(s) found");
    selected.push_back(discrete[cfg.mode_index]);
  } else {
    selected = discrete;
  }

  GammaSpec gamma = make_gamma(cfg.gamma_family, cfg.gamma_params);
  Grid1D parity_grid(cfg.grid1d.L, 201);
  check_parity(gamma, parity_grid, parity_grid);
  check_decay(gamma, {5.0, 10.0, 20.0, 30.0});

  export_modes_csv((fs::path(cfg.out_dir) / "modes.csv").string(), spec,
                   discrete);

  nlohmann::ordered_json summary;
  summary["model"] = model_name(model);
  summary["lambda_edge"] = lambda_e;
  summary["grid1d"] = {{"L", cfg.grid1d.L}, {"N", cfg.grid1d.N}};
  summary["gamma"] = {{"family", gamma.family},
                      {"parity", parity_name(gamma.parity)},
                      {"params", nlohmann::ordered_json::object()}};
  for (const auto& [k, v] : gamma.params) summary["gamma"]["params"][k] = v;
  summary["eps_list"] = cfg.eps_list;
  summary["modes"] = nlohmann::ordered_json::array();

  std::ostringstream report;
  report.precision(12);
  report << "spectral stability report\n";
  report << "model: " << model_name(model) << "  (essential edge " << lambda_e
         << ")\n";
  report << "damping profile: " << gamma.family << " ["
         << parity_name(gamma.parity) << "]\n\n";

  bool degenerate_seen = false;

  for (size_t sel = 0; sel < selected.size(); ++sel) {
    const int jstar = selected[sel];
    log << "mode " << jstar << " (lambda_* = " << spec.lambda[jstar]
        << ")...\n";
    CorrectorOptions copt = cfg.corrector;
    copt.check_residual = true;
    CorrectorField U =
        assemble_corrector(pv, spec, jstar, gamma, cfg.grid1d, copt);

    PredictOptions popt;
    popt.throw_on_degenerate = false;
    SpectralPrediction pred =
        predict(spec, jstar, gamma, cfg.grid1d, cfg.eps_list, U, popt);

    nlohmann::ordered_json jm;
    jm["index"] = jstar;
    jm["lambda_star"] = pred.lambda_star;
    jm["kappa_star"] = detail::json_complex(pred.kappa_star);
    jm["K1"] = pred.K1;
    jm["K2"] = detail::json_complex(pred.K2);
    jm["corrector_residual"] = U.residual;
    jm["slope_coefficient"] = U.slope_coefficient;
    jm["case"] = pred.case_id;
    jm["extended_regime"] = pred.extended_regime;
    jm["degenerate"] = pred.degenerate;

    report << "mode " << jstar << ": lambda_* = " << pred.lambda_star << "\n";
    report << "  K1 = " << pred.K1 << ", K2 = " << pred.K2.real();
    if (pred.K2.imag() != 0.0) report << " + " << pred.K2.imag() << "i";
    report << "\n";

    if (pred.degenerate) {
      degenerate_seen = true;
      report << "  degenerate (K1 = K2 = 0): outside the classification "
                "table; prediction undetermined at this order\n\n";
      jm["branches"] = nlohmann::ordered_json::array();
      summary["modes"].push_back(jm);
      continue;
    }

    report << "  classification case " << pred.case_id << ": "
           << detail::case_summary(pred.case_id);
    if (pred.extended_regime)
      report << " (extended regime: open channels below the mode)";
    report << "\n";

    jm["branches"] = nlohmann::ordered_json::array();
    for (const auto& br : pred.branches) {
      nlohmann::ordered_json jb;
      jb["b"] = br.b;
      jb["c1"] = detail::json_complex(br.c1);
      jb["c2"] = detail::json_complex(br.c2);
      jb["kind"] = kind_name(br.kind);
      jb["k_series"] = nlohmann::ordered_json::array();
      jb["lambda_series"] = nlohmann::ordered_json::array();
      for (size_t i = 0; i < pred.eps.size(); ++i) {
        jb["k_series"].push_back(detail::json_complex(br.k[i]));
        jb["lambda_series"].push_back(detail::json_complex(br.lambda[i]));
      }
      jm["branches"].push_back(jb);
      if (pred.case_id != 1)
        report << "  branch b = " << (br.b > 0 ? "+1" : "-1") << ": "
               << kind_name(br.kind) << "\n";
    }
    if (std::fabs(pred.K1) >= 1e-8)
      report << "  Re lambda ~ " << pred.re_lambda_coeff3
             << " * eps^3 (leading growth/decay rate)\n";

    const bool zero_mode = pred.case_id == 1;
    if (cfg.run_bs && !zero_mode) {
      ReducedResolvent rr(spec, jstar, gamma, lambda_e, cfg.bs);
      jm["bs_window"] = {{"K1", rr.K1w},
                         {"K2", detail::json_complex(rr.K2w)},
                         {"delta", rr.delta},
                         {"points", static_cast<int>(rr.xw.size())},
                         {"channels", static_cast<int>(rr.lams.size())}};
      std::vector<BSRoot> roots = eps_sweep(rr, cfg.eps_list, threads);
      std::string csv = (fs::path(cfg.out_dir) /
                         ("bs_mode" + std::to_string(jstar) + ".csv"))
                            .string();
      write_bs_csv(csv, roots);
      jm["bs_csv"] = fs::path(csv).filename().string();
      jm["bs_roots"] = nlohmann::ordered_json::array();
      for (const auto& r : roots) {
        nlohmann::ordered_json jr;
        jr["eps"] = r.eps;
        jr["b"] = r.b;
        jr["k"] = detail::json_complex(r.k);
        jr["lambda"] = detail::json_complex(r.lambda);
        jr["kind"] = kind_name(r.kind);
        jr["residual"] = r.residual;
        jr["newton_iters"] = r.newton_iters;
        if (r.winding_count >= 0) jr["winding_count"] = r.winding_count;
        jm["bs_roots"].push_back(jr);
      }
      double worst = 0.0;
      int mismatches = 0;
      for (const auto& r : roots) {
        worst = std::max(worst, r.residual);
        ModeKind want = r.b > 0 ? pred.branches[0].kind : pred.branches[1].kind;
        if (r.kind != want) {
          ++mismatches;
          report << "  kind mismatch at eps = " << r.eps << ", b = "
                 << (r.b > 0 ? "+1" : "-1") << ": root gives "
                 << kind_name(r.kind) << ", series predicts "
                 << kind_name(want) << "\n";
        }
      }
      jm["bs_kind_mismatches"] = mismatches;
      if (mismatches == 0)
        report << "  scalar-equation roots confirm the predicted kinds at "
               << cfg.eps_list.size() << " eps values (largest residual "
               << worst << ")\n";
    } else if (zero_mode) {
      report << "  scalar-equation sweep skipped (zero mode)\n";
    }

    if (cfg.run_evolution && !zero_mode) {
      // evolution uses its own coarse tensor grid; the mode is re-solved
      // there so the seed matches the evolution discretization
      Grid1D egx{cfg.grid2d.Lx, cfg.grid2d.Nx};
      Grid1D egy{cfg.grid2d.Ly, cfg.grid2d.Ny};
      Spectrum espec = eigen_h0(assemble_h0(pv, egx), egx);
      std::vector<int> edm = discrete_modes(espec, lambda_e);
      if (sel >= edm.size() && cfg.mode_index < 0)
        throw ValidationError("evolution",
                              "mode missing on the evolution grid");
      int ejstar = cfg.mode_index >= 0 ? edm.at(cfg.mode_index) : edm.at(sel);
      double omega = std::sqrt(std::max(espec.lambda[ejstar], 0.0));
      if (espec.lambda[ejstar] <= 0.0)
        throw ValidationError("evolution",
                              "evolution cross-check needs lambda_* > 0");
      Eigen::MatrixXd eps_gamma(egx.N, egy.N);
      for (int j = 0; j < egy.N; ++j)
        for (int i = 0; i < egx.N; ++i)
          eps_gamma(i, j) =
              cfg.evolution_eps * gamma.eval(egx.x(i), egy.x(j));
      EvolutionSetup setup(
          egx, egy, [&](double x) { return model_potential(model, x); },
          eps_gamma, cfg.evolution);
      GrowthResult growth = measure_growth(setup, espec.psi.col(ejstar),
                                           omega, cfg.evolution);
      std::string ecsv = (fs::path(cfg.out_dir) /
                          ("evolution_mode" + std::to_string(jstar) + ".csv"))
                             .string();
      write_evolution_csv(ecsv, growth);
      jm["evolution"] = {{"eps", cfg.evolution_eps},
                         {"rate", growth.fit.rate},
                         {"r2", growth.fit.r2},
                         {"ledger_defect",
                          std::max(growth.cosine.ledger_defect,
                                   growth.sine.ledger_defect)},
                         {"csv", fs::path(ecsv).filename().string()}};
      report << "  measured growth rate at eps = " << cfg.evolution_eps
             << ": " << growth.fit.rate << " (R^2 = " << growth.fit.r2
             << ")\n";
    }
    report << "\n";
    summary["modes"].push_back(jm);
  }

  PipelineOutcome out;
  out.exit_code = degenerate_seen ? 4 : 0;
  out.summary_path = (fs::path(cfg.out_dir) / "summary.json").string();
  out.report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  {
    std::ofstream jf(out.summary_path);
    if (!jf) throw KspecError("cannot write " + out.summary_path);
    jf << summary.dump(2) << "\n";
  }
  {
    std::ofstream rf(out.report_path);
    if (!rf) throw KspecError("cannot write " + out.report_path);
    rf << report.str();
  }
  return out;
}

}  // namespace kspec
