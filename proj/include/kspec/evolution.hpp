// Time-domain cross-check: damped 2D wave evolution around the kink,
//   u_tt - Lap u + V(x) u + c(x,y) u_t = 0,  c = eps gamma + sponge,
// leapfrog with the damping term treated semi-implicitly,
//   (1 + c dt/2) u^{n+1} = 2 u^n - u^{n-1} + dt^2 (Lap - V) u^n + (c dt/2) u^{n-1}.
// The scheme admits an exact discrete energy ledger:
//   E^{n+1/2} = 1/2 ||(u^{n+1}-u^n)/dt||^2 + 1/2 (u^{n+1})^T (-Lap + V) u^n
//   E^{n+1/2} - E^{n-1/2} = -dt v^T c v,  v = (u^{n+1}-u^{n-1})/(2 dt),
// which closes to roundoff and pins the implementation.  Growth rates are
// measured on the windowed norm of a quadrature pair of runs (cosine and
// sine phases of the seeded internal mode), whose composite removes the
// carrier oscillation.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "kspec/errors.hpp"
#include "kspec/grid.hpp"

namespace kspec {

struct EvolutionOptions {
  double T = 300.0;
  double cfl = 0.5;            // dt = cfl / sqrt(1/hx^2 + 1/hy^2)
  double seed_width = 6.0;     // transverse Gaussian envelope width
  double window = 15.0;        // measurement window |x|,|y| <= window
  double sponge_x0 = 15.0;     // sponge ramps start here ...
  double sponge_y0 = 20.0;
  double sponge_strength = 4.0;
  int sample_every = 20;
  double fit_lo = 0.5;         // fit on (fit_lo*T, fit_hi*T]
  double fit_hi = 1.0;
  double r2_min = 0.9;
  bool periodic = false;       // periodic boundaries (dispersion checks)
};

struct EvolutionSetup {
  Grid1D gx{20.0, 201}, gy{28.0, 281};
  Eigen::VectorXd Vx;       // potential samples on gx
  Eigen::MatrixXd damp;     // total damping coefficient on the grid
  double dt = 0.0;
  bool periodic = false;

  template <typename VFun>
  EvolutionSetup(const Grid1D& gx_, const Grid1D& gy_, VFun&& V,
                 const Eigen::MatrixXd& eps_gamma, const EvolutionOptions& opt)
      : gx(gx_), gy(gy_) {
    if (opt.cfl <= 0.0 || opt.cfl >= 1.0)
      throw CFLViolation("cfl factor " + std::to_string(opt.cfl) +
                         " outside (0, 1)");
    const double hx = gx.h(), hy = gy.h();
    dt = opt.cfl / std::sqrt(1.0 / (hx * hx) + 1.0 / (hy * hy));
    periodic = opt.periodic;
    Vx.resize(gx.N);
    for (int i = 0; i < gx.N; ++i) Vx(i) = V(gx.x(i));
    damp = eps_gamma;
    if (damp.rows() != gx.N || damp.cols() != gy.N)
      throw ValidationError("evolution.gamma", "damping grid shape mismatch");
    if (!periodic && opt.sponge_strength > 0.0) {
      for (int j = 0; j < gy.N; ++j) {
        double ry = std::max(0.0, (std::fabs(gy.x(j)) - opt.sponge_y0) /
                                      (gy.L - opt.sponge_y0));
        for (int i = 0; i < gx.N; ++i) {
          double rx = std::max(0.0, (std::fabs(gx.x(i)) - opt.sponge_x0) /
                                        (gx.L - opt.sponge_x0));
          damp(i, j) += opt.sponge_strength * (rx * rx + ry * ry);
        }
      }
    }
  }
};

struct WaveState {
  Eigen::MatrixXd u, uprev;  // u^n and u^{n-1}
  double t = 0.0;
  long n = 0;
};

namespace detail {

inline Eigen::MatrixXd laplacian(const Eigen::MatrixXd& u, double hx, double hy,
                                 bool periodic) {
  const auto nx = u.rows(), ny = u.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nx, ny);
  const double ax = 1.0 / (hx * hx), ay = 1.0 / (hy * hy);
  out -= 2.0 * (ax + ay) * u;
  out.topRows(nx - 1) += ax * u.bottomRows(nx - 1);
  out.bottomRows(nx - 1) += ax * u.topRows(nx - 1);
  out.leftCols(ny - 1) += ay * u.rightCols(ny - 1);
  out.rightCols(ny - 1) += ay * u.leftCols(ny - 1);
  if (periodic) {
    out.row(nx - 1) += ax * u.row(0);
    out.row(0) += ax * u.row(nx - 1);
    out.col(ny - 1) += ay * u.col(0);
    out.col(0) += ay * u.col(ny - 1);
  }
  return out;
}

}  // namespace detail

// Seed u = psi_*(x) * Gaussian(y; width) in the requested quadrature phase:
// cosine phase starts at peak displacement, sine phase at peak velocity.
enum class SeedPhase { cosine, sine };

inline WaveState seed_mode(const EvolutionSetup& s,
                           const Eigen::VectorXd& psi_star, double omega,
                           double width, SeedPhase phase) {
  if (psi_star.size() != s.gx.N)
    throw ValidationError("evolution.seed", "mode vector does not match grid");
  Eigen::VectorXd env(s.gy.N);
  for (int j = 0; j < s.gy.N; ++j) {
    double y = s.gy.x(j);
    env(j) = std::exp(-y * y / (2.0 * width * width));
  }
  Eigen::MatrixXd shape = psi_star * env.transpose();
  Eigen::MatrixXd u0 = phase == SeedPhase::cosine
                           ? shape
                           : Eigen::MatrixXd::Zero(s.gx.N, s.gy.N);
  Eigen::MatrixXd v0 = phase == SeedPhase::cosine
                           ? Eigen::MatrixXd::Zero(s.gx.N, s.gy.N)
                           : (omega * shape).eval();
  WaveState st;
  st.u = u0;
  // backward Taylor start: u^{-1} = u0 - dt v0 + dt^2/2 (Lap u0 - V u0 - c v0)
  Eigen::MatrixXd acc =
      detail::laplacian(u0, s.gx.h(), s.gy.h(), s.periodic) -
      (u0.array().colwise() * s.Vx.array()).matrix() -
      (s.damp.array() * v0.array()).matrix();
  st.uprev = u0 - s.dt * v0 + 0.5 * s.dt * s.dt * acc;
  return st;
}

inline void step(const EvolutionSetup& s, WaveState& st) {
  Eigen::MatrixXd lap = detail::laplacian(st.u, s.gx.h(), s.gy.h(), s.periodic);
  Eigen::MatrixXd rhs =
      2.0 * st.u - st.uprev +
      s.dt * s.dt * (lap - (st.u.array().colwise() * s.Vx.array()).matrix()) +
      (0.5 * s.dt) * (s.damp.array() * st.uprev.array()).matrix();
  Eigen::MatrixXd unew =
      rhs.array() / (1.0 + 0.5 * s.dt * s.damp.array());
  st.uprev.swap(st.u);
  st.u.swap(unew);
  st.t += s.dt;
  ++st.n;
}

// E^{n+1/2} evaluated from (u^n = prev, u^{n+1} = cur) with cell weight h^2
inline double energy_half(const EvolutionSetup& s, const Eigen::MatrixXd& cur,
                          const Eigen::MatrixXd& prev) {
  const double cell = s.gx.h() * s.gy.h();
  Eigen::MatrixXd dudt = (cur - prev) / s.dt;
  Eigen::MatrixXd Hprev =
      -detail::laplacian(prev, s.gx.h(), s.gy.h(), s.periodic) +
      (prev.array().colwise() * s.Vx.array()).matrix();
  double kin = 0.5 * dudt.array().square().sum();
  double pot = 0.5 * (cur.array() * Hprev.array()).sum();
  return cell * (kin + pot);
}

struct NormSample {
  double t;
  double norm;        // windowed L2 norm of u
  double energy;      // E^{n+1/2} at this step
  double dissipated;  // running sum of -dt v^T c v (exact ledger partner)
};

struct EvolveResult {
  std::vector<NormSample> samples;
  double ledger_defect = 0.0;  // max |dE - dissipation| over the run, relative
};

// March to time T, sampling the windowed norm and the energy ledger.
inline EvolveResult evolve(const EvolutionSetup& s, WaveState st,
                           const EvolutionOptions& opt) {
  const double cell = s.gx.h() * s.gy.h();
  Eigen::MatrixXd mask(s.gx.N, s.gy.N);
  for (int j = 0; j < s.gy.N; ++j)
    for (int i = 0; i < s.gx.N; ++i)
      mask(i, j) = (std::fabs(s.gx.x(i)) <= opt.window &&
                    std::fabs(s.gy.x(j)) <= opt.window)
                       ? 1.0
                       : 0.0;
  EvolveResult out;
  const long nsteps = static_cast<long>(opt.T / s.dt);
  double energy_prev = energy_half(s, st.u, st.uprev);
  double dissipated = 0.0;
  double scale = std::max(std::fabs(energy_prev), 1e-300);
  for (long n = 0; n < nsteps; ++n) {
    Eigen::MatrixXd uold = st.uprev;  // u^{n-1} before the step
    step(s, st);
    // exact dissipation increment: -dt v^T c v, v = (u^{n+1} - u^{n-1})/(2dt)
    Eigen::MatrixXd v = (st.u - uold) / (2.0 * s.dt);
    double dE = -s.dt * cell * (s.damp.array() * v.array().square()).sum();
    dissipated += dE;
    double energy_now = energy_half(s, st.u, st.uprev);
    out.ledger_defect = std::max(
        out.ledger_defect, std::fabs(energy_now - energy_prev - dE) / scale);
    energy_prev = energy_now;
    if (n % opt.sample_every == 0) {
      double nrm = std::sqrt((st.u.array() * mask.array()).square().sum() * cell);
      if (!std::isfinite(nrm))
        throw NonFinite("field norm became non-finite at t = " +
                        std::to_string(st.t));
      out.samples.push_back({st.t, nrm, energy_now, dissipated});
    }
  }
  return out;
}

struct RateFit {
  double rate = 0.0;
  double r2 = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// Least-squares slope of log(norm) over the listed samples.
inline RateFit measure_rate(const std::vector<std::array<double, 2>>& series,
                            double r2_min = 0.9) {
  const int n = static_cast<int>(series.size());
  if (n < 4) throw PoorFit("rate fit needs at least 4 samples");
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  for (const auto& p : series) {
    if (!(p[1] > 0.0) || !std::isfinite(p[1]))
      throw PoorFit("nonpositive norm sample in rate fit");
    double l = std::log(p[1]);
    st += p[0];
    sl += l;
    stt += p[0] * p[0];
    stl += p[0] * l;
  }
  double denom = n * stt - st * st;
  if (std::fabs(denom) < 1e-300) throw PoorFit("degenerate time samples");
  RateFit fit;
  fit.points = n;
  fit.rate = (n * stl - st * sl) / denom;
  fit.intercept = (sl - fit.rate * st) / n;
  double ssr = 0.0, stot = 0.0, mean = sl / n;
  for (const auto& p : series) {
    double l = std::log(p[1]);
    double pred = fit.intercept + fit.rate * p[0];
    ssr += (l - pred) * (l - pred);
    stot += (l - mean) * (l - mean);
  }
  fit.r2 = stot > 0.0 ? 1.0 - ssr / stot : 0.0;
  if (fit.r2 < r2_min)
    throw PoorFit("rate fit R^2 = " + std::to_string(fit.r2) + " below " +
                  std::to_string(r2_min));
  return fit;
}

struct GrowthResult {
  RateFit fit;
  std::vector<double> t;          // sample times
  std::vector<double> comp;       // composite quadrature-pair amplitude
  EvolveResult cosine, sine;      // the two underlying runs
};

// Quadrature-pair growth measurement: cosine and sine seedings evolve
// independently; the composite sqrt(na^2 + nb^2) strips the carrier.
inline GrowthResult measure_growth(const EvolutionSetup& s,
                                   const Eigen::VectorXd& psi_star,
                                   double omega, const EvolutionOptions& opt) {
  GrowthResult out;
  out.cosine = evolve(
      s, seed_mode(s, psi_star, omega, opt.seed_width, SeedPhase::cosine), opt);
  out.sine = evolve(
      s, seed_mode(s, psi_star, omega, opt.seed_width, SeedPhase::sine), opt);
  const size_t m = std::min(out.cosine.samples.size(), out.sine.samples.size());
  std::vector<std::array<double, 2>> window_series;
  for (size_t i = 0; i < m; ++i) {
    double t = out.cosine.samples[i].t;
    double c = std::hypot(out.cosine.samples[i].norm, out.sine.samples[i].norm);
    out.t.push_back(t);
    out.comp.push_back(c);
    if (t > opt.fit_lo * opt.T && t <= opt.fit_hi * opt.T)
      window_series.push_back({t, c});
  }
  out.fit = measure_rate(window_series, opt.r2_min);
  return out;
}

inline void write_evolution_csv(const std::string& path,
                                const GrowthResult& g) {
  std::ofstream f(path);
  if (!f) throw KspecError("cannot open " + path + " for writing");
  f.precision(17);
  f << "t,comp_norm,cos_norm,sin_norm,cos_energy,cos_dissipated\n";
  for (size_t i = 0; i < g.t.size(); ++i)
    f << g.t[i] << ',' << g.comp[i] << ',' << g.cosine.samples[i].norm << ','
      << g.sine.samples[i].norm << ',' << g.cosine.samples[i].energy << ','
      << g.cosine.samples[i].dissipated << '\n';
}

}  // namespace kspec
