// Nonperturbative validation: the perturbed pencil reduces, through the
// star-channel pole of the reduced resolvent, to one scalar equation
//   2k = F(eps, k),  F = -eps lambda_b(k) <psi_*, g_inf>,
//   g_inf = gamma psi_* + eps lambda_b(k) gamma R~(k) g_inf,
// solved on a spatial window by Newton iteration with the series warm
// start.  R~(k) is the channel-kernel operator shared with the corrector
// module (its k = 0 slice produces U_* and K2).  Small-|k| roots of the
// scalar equation are the perturbed decay rates; k maps back to the
// spectral plane through lambda_b(k) = b i sqrt(kappa_*^2 - k^2).
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "kspec/asymptotics.hpp"
#include "kspec/corrector.hpp"
#include "kspec/errors.hpp"
#include "kspec/gamma.hpp"
#include "kspec/operator1d.hpp"

namespace kspec {

struct BSOptions {
  double window = 8.0;         // restrict to |x|, |y| <= window
  int stride = 2;              // subsample factor relative to the main grid
  double lam_cut_offset = 150.0;
  double fp_tol = 1e-12;       // fixed-point stop: max|g_{n+1}-g_n|
  int fp_maxit = 100;
  double newton_tol = 1e-12;   // stop on |2k - F| <= tol max(1,|k|)
  int newton_maxit = 40;
  double fd_scale = 1e-7;      // central-difference step fd_scale*max(1,|k|)
  int winding_points = 64;     // contour samples for the uniqueness guard
  double delta_factor = 0.5;   // disc radius factor (of |kap_*| and the gap)
};

struct BSRoot {
  double eps = 0.0;
  int b = +1;
  cd k{0.0, 0.0};
  cd lambda{0.0, 0.0};
  ModeKind kind = ModeKind::undetermined;
  double residual = 0.0;   // |2k - F| at the accepted root
  int newton_iters = 0;
  int fp_iters = 0;        // fixed-point sweeps in the last F evaluation
  bool ill_conditioned = false;  // |dF/dk| comparable to 2 at the root
  int winding_count = -1;  // argument-principle count when checked here
};

class ReducedResolvent {
 public:
  Eigen::VectorXd xw, ww;   // window coordinates and trapezoid weights
  double hw = 0.0;
  Eigen::VectorXd lams;     // kept channel eigenvalues
  Eigen::MatrixXd Psi;      // windowed channel functions (nw, nk)
  Eigen::MatrixXd PsiW;     // Psi with quadrature weights folded in
  int istar = -1;
  double lambda_star = 0.0;
  double lambda_edge = 0.0;
  cd kappa_star{0.0, 0.0};
  Eigen::MatrixXd gam, src;  // gamma and gamma psi_* on the window
  Eigen::MatrixXd absd;      // |y_i - y_j| for the star kernel
  double K1w = 0.0;          // window perturbation constants (warm start)
  cd K2w{0.0, 0.0};
  double delta = 0.0;        // root-localization disc radius
  BSOptions opt;

  ReducedResolvent(const Spectrum& sx, int jstar, const GammaSpec& gamma,
                   double lambda_e, const BSOptions& options = {})
      : opt(options) {
    const int N = sx.grid.N;
    std::vector<int> idx;
    for (int i = 0; i < N; ++i)
      if (std::fabs(sx.grid.x(i)) <= opt.window + 1e-12) idx.push_back(i);
    std::vector<int> sub;
    for (size_t m = 0; m < idx.size(); m += opt.stride) sub.push_back(idx[m]);
    const int nw = static_cast<int>(sub.size());
    if (nw < 8) throw ValidationError("birman_schwinger.window",
                                      "window holds fewer than 8 grid points");
    xw.resize(nw);
    for (int i = 0; i < nw; ++i) xw(i) = sx.grid.x(sub[i]);
    hw = xw(1) - xw(0);
    ww = Eigen::VectorXd::Constant(nw, hw);
    ww(0) = ww(nw - 1) = hw / 2.0;

    lambda_star = sx.lambda[jstar];
    lambda_edge = lambda_e;
    kappa_star = std::sqrt(cd(lambda_star, 0.0));
    std::vector<int> keep;
    for (int j = 0; j < N; ++j)
      if (sx.lambda[j] <= lambda_star + opt.lam_cut_offset) keep.push_back(j);
    const int nk = static_cast<int>(keep.size());
    lams.resize(nk);
    Psi.resize(nw, nk);
    for (int r = 0; r < nk; ++r) {
      lams(r) = sx.lambda[keep[r]];
      if (keep[r] == jstar) istar = r;
      for (int i = 0; i < nw; ++i) Psi(i, r) = sx.psi(sub[i], keep[r]);
    }
    if (istar < 0) throw BranchError("star channel fell outside the kept set");
    PsiW = Psi.array().colwise() * ww.array();

    gam.resize(nw, nw);
    for (int j = 0; j < nw; ++j)
      for (int i = 0; i < nw; ++i) gam(i, j) = gamma.eval(xw(i), xw(j));
    src = gam.array().colwise() * Psi.col(istar).array();
    absd.resize(nw, nw);
    for (int j = 0; j < nw; ++j)
      for (int i = 0; i < nw; ++i) absd(i, j) = std::fabs(xw(i) - xw(j));

    Eigen::VectorXd ps2 = Psi.col(istar).array().square();
    K1w = 0.5 * ww.dot((gam.array().colwise() * ps2.array()).matrix() * ww);
    Eigen::MatrixXcd U0 = apply(cd(0.0, 0.0), src.cast<cd>());
    Eigen::MatrixXcd integ =
        (U0.array() * (gam.array().colwise() * Psi.col(istar).array()).cast<cd>())
            .matrix();
    K2w = 0.5 * (ww.cast<cd>().transpose() * integ * ww.cast<cd>())(0, 0);

    delta = opt.delta_factor *
            std::min(std::abs(kappa_star), std::sqrt(lambda_edge - lambda_star));
  }

  // R~(k) g for a window field g(x_i, y_j)
  Eigen::MatrixXcd apply(cd k, const Eigen::MatrixXcd& g) const {
    const int nw = static_cast<int>(xw.size());
    const int nk = static_cast<int>(lams.size());
    Eigen::MatrixXd Are = PsiW.transpose() * g.real();
    Eigen::MatrixXd Aim = PsiW.transpose() * g.imag();
    Eigen::MatrixXcd out(nk, nw);
    Eigen::VectorXcd wg(nw);
    for (int r = 0; r < nk; ++r) {
      for (int i = 0; i < nw; ++i)
        wg(i) = ww(i) * cd(Are(r, i), Aim(r, i));
      if (r == istar) {
        if (std::abs(k) < 1e-12) {
          Eigen::VectorXd ure = absd * wg.real();
          Eigen::VectorXd uim = absd * wg.imag();
          for (int i = 0; i < nw; ++i) out(r, i) = 0.5 * cd(ure(i), uim(i));
        } else {
          cd mass = wg.sum();
          Eigen::VectorXcd conv = detail::conv_exp(k, hw, wg);
          for (int i = 0; i < nw; ++i) out(r, i) = (mass - conv(i)) / (2.0 * k);
        }
      } else {
        cd kap = channel_kappa(lams(r) - lambda_star, k);
        out.row(r) = (-detail::conv_exp(kap, hw, wg) / (2.0 * kap)).transpose();
      }
    }
    Eigen::MatrixXd Ure = Psi * out.real();
    Eigen::MatrixXd Uim = Psi * out.imag();
    Eigen::MatrixXcd res(nw, nw);
    res.real() = Ure;
    res.imag() = Uim;
    return res;
  }

  // <psi_*, g> with the product trapezoid rule
  cd ell_star(const Eigen::MatrixXcd& g) const {
    Eigen::MatrixXcd integ =
        (g.array().colwise() * Psi.col(istar).cast<cd>().array()).matrix();
    return (ww.cast<cd>().transpose() * integ * ww.cast<cd>())(0, 0);
  }

  // F(eps, k) on branch b through the fixed-point iteration for g_inf.
  // Pass tol/maxit <= 0 to use the configured defaults.  Divergence is
  // detected early: a growing step means the Neumann series for the
  // resolvent does not converge at this (eps, k).
  cd F(double eps, cd k, int b, int* fp_iters = nullptr, double tol = -1.0,
       int maxit = -1) const {
    if (tol <= 0.0) tol = opt.fp_tol;
    if (maxit <= 0) maxit = opt.fp_maxit;
    cd lam = lambda_of_k(k, kappa_star, b);
    Eigen::MatrixXcd g = src.cast<cd>();
    double d = 0.0, d0 = -1.0;
    for (int it = 0; it < maxit; ++it) {
      Eigen::MatrixXcd gn =
          src.cast<cd>() +
          (eps * lam) * (gam.array().cast<cd>() * apply(k, g).array()).matrix();
      d = (gn - g).cwiseAbs().maxCoeff();
      g = gn;
      if (d0 < 0.0) d0 = d;
      if (!std::isfinite(d) || d > 1e8 * std::max(1.0, d0))
        break;  // an amplified mode is growing; no point iterating on
      if (d <= tol * std::max(1.0, g.cwiseAbs().maxCoeff())) {
        if (fp_iters) *fp_iters = it + 1;
        return -eps * lam * ell_star(g);
      }
    }
    throw NoContraction("fixed point for g_inf did not converge: eps=" +
                        std::to_string(eps) + " |k|=" + std::to_string(std::abs(k)) +
                        " last step " + std::to_string(d));
  }

  BSRoot solve_k(double eps, int b) const {
    BSRoot out;
    out.eps = eps;
    out.b = b;
    cd k = -cd(0.0, b) * eps * kappa_star * K1w +
           eps * eps * kappa_star * kappa_star * K2w;
    for (int it = 0; it < opt.newton_maxit; ++it) {
      int fits = 0;
      cd Fv = F(eps, k, b, &fits);
      cd G = 2.0 * k - Fv;
      if (std::abs(G) <= opt.newton_tol * std::max(1.0, std::abs(k))) {
        out.k = k;
        out.lambda = lambda_of_k(k, kappa_star, b);
        out.residual = std::abs(G);
        out.newton_iters = it;
        out.fp_iters = fits;
        double re = k.real();
        if (std::fabs(re) > 1e-12 * std::abs(k))
          out.kind = re > 0.0 ? ModeKind::eigenvalue : ModeKind::resonance;
        return out;
      }
      double d = opt.fd_scale * std::max(1.0, std::abs(k));
      cd Gp = ((2.0 * (k + d) - F(eps, k + d, b)) -
               (2.0 * (k - d) - F(eps, k - d, b))) /
              (2.0 * d);
      if (!std::isfinite(Gp.real()) || !std::isfinite(Gp.imag()) ||
          std::abs(Gp) < 1e-8)
        throw NewtonDivergence("derivative of the scalar equation degenerated");
      out.ill_conditioned = std::abs(Gp - cd(2.0, 0.0)) > 1.0;
      k -= G / Gp;
      if (std::abs(k) > delta)
        throw NewtonDivergence("iterate left the root-localization disc");
    }
    throw NewtonDivergence("scalar-equation Newton did not converge");
  }

  // argument-principle count of roots of 2k - F on |k| = radius; only the
  // winding of arg G matters, so the g_inf iteration runs with a loose
  // tolerance (|G| on the contour is O(radius), far above 1e-8)
  int contour_count(double eps, int b, double radius, int npts) const {
    double total = 0.0;
    double prev = 0.0;
    bool first = true;
    for (int m = 0; m <= npts; ++m) {
      double th = 2.0 * M_PI * m / npts;
      cd k = radius * cd(std::cos(th), std::sin(th));
      cd G = 2.0 * k - F(eps, k, b, nullptr, 1e-8, 4 * opt.fp_maxit);
      double a = std::arg(G);
      if (!first) {
        double inc = a - prev;
        while (inc > M_PI) inc -= 2.0 * M_PI;
        while (inc < -M_PI) inc += 2.0 * M_PI;
        total += inc;
      }
      first = false;
      prev = a;
    }
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
  }

  // Cauchy-Riemann defect |dF/dkbar| / |dF/dk| near k0 (holomorphy check)
  double holomorphy_defect(double eps, int b, cd k0, double h) const {
    cd fpx = F(eps, k0 + h, b), fmx = F(eps, k0 - h, b);
    cd fpy = F(eps, k0 + cd(0.0, h), b), fmy = F(eps, k0 - cd(0.0, h), b);
    cd dk = ((fpx - fmx) - cd(0.0, 1.0) * (fpy - fmy)) / (4.0 * h);
    cd dkbar = ((fpx - fmx) + cd(0.0, 1.0) * (fpy - fmy)) / (4.0 * h);
    return std::abs(dkbar) / std::max(std::abs(dk), 1e-300);
  }
};

// Roots for every (eps, branch) pair; tasks are independent and each one is
// evaluated with sequential arithmetic, so results do not depend on the
// thread count.  The uniqueness guard runs once per branch at the largest
// eps (the widest contour excursion of the family).
inline std::vector<BSRoot> eps_sweep(const ReducedResolvent& rr,
                                     const std::vector<double>& eps_list,
                                     int threads = 1, bool winding = true) {
  struct Task {
    double eps;
    int b;
  };
  std::vector<Task> tasks;
  for (double e : eps_list)
    for (int b : {+1, -1}) tasks.push_back({e, b});
  std::vector<BSRoot> roots(tasks.size());
  if (threads <= 1) {
    for (size_t t = 0; t < tasks.size(); ++t)
      roots[t] = rr.solve_k(tasks[t].eps, tasks[t].b);
  } else {
    std::vector<std::future<BSRoot>> fut(tasks.size());
    size_t next = 0;
    while (next < tasks.size()) {
      size_t batch = std::min<size_t>(threads, tasks.size() - next);
      for (size_t m = 0; m < batch; ++m)
        fut[next + m] = std::async(std::launch::async, [&rr, &tasks, next, m] {
          return rr.solve_k(tasks[next + m].eps, tasks[next + m].b);
        });
      for (size_t m = 0; m < batch; ++m) roots[next + m] = fut[next + m].get();
      next += batch;
    }
  }
  if (winding && !eps_list.empty() && rr.opt.winding_points > 0) {
    // largest eps whose contour is computable: near the disc boundary the
    // g_inf iteration can lose contractivity at large eps even though the
    // root solve itself converges, so fall back down the eps list
    std::vector<double> desc = eps_list;
    std::sort(desc.rbegin(), desc.rend());
    for (int b : {+1, -1}) {
      for (double e : desc) {
        int count;
        try {
          count = rr.contour_count(e, b, rr.delta, rr.opt.winding_points);
        } catch (const NoContraction&) {
          continue;
        }
        if (count != 1)
          throw MultipleRoots("argument-principle count " +
                              std::to_string(count) + " != 1 on |k| = " +
                              std::to_string(rr.delta) + " (eps = " +
                              std::to_string(e) + ", branch " +
                              std::to_string(b) + ")");
        for (auto& r : roots)
          if (r.b == b && r.eps == e) r.winding_count = count;
        break;
      }
    }
  }
  return roots;
}

inline void write_bs_csv(const std::string& path,
                         const std::vector<BSRoot>& roots) {
  std::ofstream f(path);
  if (!f) throw KspecError("cannot open " + path + " for writing");
  f.precision(17);
  f << "eps,branch,re_k,im_k,re_lambda,im_lambda,kind,residual,newton_iters\n";
  for (const auto& r : roots)
    f << r.eps << ',' << r.b << ',' << r.k.real() << ',' << r.k.imag() << ','
      << r.lambda.real() << ',' << r.lambda.imag() << ',' << kind_name(r.kind)
      << ',' << r.residual << ',' << r.newton_iters << '\n';
}

}  // namespace kspec
