// Time stepper: CFL and shape validation, discrete conservation and the
// exact dissipation ledger, rate fitting and its failure modes, and the
// quadrature-pair composite.
#include <catch2/catch_amalgamated.hpp>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "kspec/evolution.hpp"
#include "kspec/models.hpp"
#include "kspec/operator1d.hpp"

using namespace kspec;

namespace {

double sg_potential(double x) {
  double s = 1.0 / std::cosh(x);
  return 1.0 - 2.0 * s * s;
}

// small undamped arena: big enough that radiation does not re-enter the
// measurement window during the runs below
struct Arena {
  Grid1D gx{14.0, 141}, gy{14.0, 141};
  Eigen::MatrixXd no_damp = Eigen::MatrixXd::Zero(141, 141);
  EvolutionOptions opt;
  Arena() {
    opt.sponge_strength = 0.0;  // defaults assume the production box
    opt.window = 8.0;
    opt.sample_every = 10;
  }
};

}  // namespace

TEST_CASE("setup validation: CFL factor and damping shape") {
  Arena a;
  EvolutionOptions bad = a.opt;
  bad.cfl = 0.0;
  CHECK_THROWS_AS(
      EvolutionSetup(a.gx, a.gy, sg_potential, a.no_damp, bad), CFLViolation);
  bad.cfl = 1.0;
  CHECK_THROWS_AS(
      EvolutionSetup(a.gx, a.gy, sg_potential, a.no_damp, bad), CFLViolation);

  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(141, 140);
  CHECK_THROWS_AS(
      EvolutionSetup(a.gx, a.gy, sg_potential, wrong, a.opt), ValidationError);

  EvolutionSetup s(a.gx, a.gy, sg_potential, a.no_damp, a.opt);
  double hx = a.gx.h(), hy = a.gy.h();
  CHECK(s.dt == Catch::Approx(a.opt.cfl /
                              std::sqrt(1.0 / (hx * hx) + 1.0 / (hy * hy)))
                    .margin(1e-18));

  Eigen::VectorXd short_mode = Eigen::VectorXd::Zero(7);
  CHECK_THROWS_AS(seed_mode(s, short_mode, 1.0, 6.0, SeedPhase::cosine),
                  ValidationError);
}

TEST_CASE("five-point laplacian is exact on quadratics") {
  Grid1D gx{5.0, 11}, gy{4.0, 9};
  Eigen::MatrixXd u(gx.N, gy.N);
  for (int j = 0; j < gy.N; ++j)
    for (int i = 0; i < gx.N; ++i)
      u(i, j) = gx.x(i) * gx.x(i) + gy.x(j) * gy.x(j);
  Eigen::MatrixXd lap = kspec::detail::laplacian(u, gx.h(), gy.h(), false);
  for (int j = 1; j + 1 < gy.N; ++j)
    for (int i = 1; i + 1 < gx.N; ++i)
      CHECK(lap(i, j) == Catch::Approx(4.0).margin(1e-10));
}

TEST_CASE("cosine seed starts on the backward Taylor expansion") {
  Arena a;
  EvolutionSetup s(a.gx, a.gy, sg_potential, a.no_damp, a.opt);
  Spectrum spec = eigen_h0(assemble_h0(make_sine_gordon(), a.gx), a.gx);
  WaveState st = seed_mode(s, spec.psi.col(0), 1.0, 6.0, SeedPhase::cosine);

  // zero initial velocity: u^{-1} = u0 + dt^2/2 (Lap - V) u0
  Eigen::MatrixXd acc =
      kspec::detail::laplacian(st.u, a.gx.h(), a.gy.h(), false) -
      (st.u.array().colwise() * s.Vx.array()).matrix();
  Eigen::MatrixXd ref = st.u + 0.5 * s.dt * s.dt * acc;
  CHECK((st.uprev - ref).cwiseAbs().maxCoeff() <= 1e-14);

  WaveState sn = seed_mode(s, spec.psi.col(0), 1.0, 6.0, SeedPhase::sine);
  CHECK(sn.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sn.uprev.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("undamped evolution conserves the discrete energy") {
  Arena a;
  a.opt.T = 15.0;
  EvolutionSetup s(a.gx, a.gy, sg_potential, a.no_damp, a.opt);
  Spectrum spec = eigen_h0(assemble_h0(make_sine_gordon(), a.gx), a.gx);
  WaveState st = seed_mode(s, spec.psi.col(0), 1.0, 6.0, SeedPhase::cosine);
  EvolveResult r = evolve(s, st, a.opt);

  REQUIRE(r.samples.size() >= 4);
  CHECK(r.ledger_defect <= 1e-12);
  double e0 = r.samples.front().energy;
  for (const auto& smp : r.samples) {
    CHECK(std::fabs(smp.energy - e0) <= 1e-12 * std::fabs(e0));
    CHECK(smp.dissipated == 0.0);
  }
}

TEST_CASE("the dissipation ledger closes with damping on") {
  Arena a;
  a.opt.T = 10.0;
  Eigen::MatrixXd damp(a.gx.N, a.gy.N);
  for (int j = 0; j < a.gy.N; ++j)
    for (int i = 0; i < a.gx.N; ++i)
      damp(i, j) = 0.2 * std::exp(-a.gx.x(i) * a.gx.x(i) -
                                  0.25 * a.gy.x(j) * a.gy.x(j));
  EvolutionSetup s(a.gx, a.gy, sg_potential, damp, a.opt);
  Spectrum spec = eigen_h0(assemble_h0(make_sine_gordon(), a.gx), a.gx);
  WaveState st = seed_mode(s, spec.psi.col(0), 1.0, 6.0, SeedPhase::cosine);
  EvolveResult r = evolve(s, st, a.opt);

  CHECK(r.ledger_defect <= 1e-9);
  // the positive profile absorbs: energy falls and the ledger tracks it
  CHECK(r.samples.back().dissipated < 0.0);
  CHECK(r.samples.back().energy < r.samples.front().energy);
  CHECK(r.samples.back().energy - r.samples.front().energy ==
        Catch::Approx(r.samples.back().dissipated -
                      r.samples.front().dissipated)
            .margin(1e-9 * std::fabs(r.samples.front().energy)));
}

TEST_CASE("anti-damped runaway is reported as non-finite") {
  Arena a;
  a.opt.T = 80.0;
  Eigen::MatrixXd damp = Eigen::MatrixXd::Constant(a.gx.N, a.gy.N, -50.0);
  EvolutionSetup s(a.gx, a.gy, sg_potential, damp, a.opt);
  Spectrum spec = eigen_h0(assemble_h0(make_sine_gordon(), a.gx), a.gx);
  WaveState st = seed_mode(s, spec.psi.col(0), 1.0, 6.0, SeedPhase::cosine);
  CHECK_THROWS_AS(evolve(s, st, a.opt), NonFinite);
}

TEST_CASE("rate fitting and its rejection paths") {
  std::vector<std::array<double, 2>> series;
  for (int i = 0; i < 10; ++i)
    series.push_back({0.5 * i, std::exp(0.1 * 0.5 * i)});
  RateFit fit = measure_rate(series);
  CHECK(fit.rate == Catch::Approx(0.1).margin(1e-12));
  CHECK(fit.r2 >= 1.0 - 1e-12);
  CHECK(fit.points == 10);

  std::vector<std::array<double, 2>> tiny(series.begin(), series.begin() + 3);
  CHECK_THROWS_AS(measure_rate(tiny), PoorFit);

  auto bad = series;
  bad[4][1] = 0.0;
  CHECK_THROWS_AS(measure_rate(bad), PoorFit);

  std::vector<std::array<double, 2>> flat_t;
  for (int i = 0; i < 6; ++i) flat_t.push_back({1.0, std::exp(0.1 * i)});
  CHECK_THROWS_AS(measure_rate(flat_t), PoorFit);

  std::vector<std::array<double, 2>> zigzag;
  for (int i = 0; i < 8; ++i) zigzag.push_back({double(i), i % 2 ? 10.0 : 1.0});
  CHECK_THROWS_AS(measure_rate(zigzag), PoorFit);
}

TEST_CASE("quadrature pair strips the carrier of an undamped mode") {
  Arena a;
  a.opt.T = 10.0;
  a.opt.r2_min = 0.0;  // the composite is near-constant; R^2 is meaningless
  FieldModel m = make_phi4();
  auto pot = [&m](double x) { return m.potential(x); };
  EvolutionSetup s(a.gx, a.gy, pot, a.no_damp, a.opt);
  // internal mode: the discrete eigenvector separates exactly in 2D, so the
  // pair runs a 1D lattice packet in y on the sqrt(Lambda_1) carrier
  Spectrum spec = eigen_h0(assemble_h0(m, a.gx), a.gx);
  double omega = std::sqrt(spec.lambda[1]);
  GrowthResult g = measure_growth(s, spec.psi.col(1), omega, a.opt);

  REQUIRE(g.comp.size() >= 4);
  CHECK(g.comp.size() == g.cosine.samples.size());
  for (size_t i = 0; i < g.comp.size(); ++i)
    CHECK(g.comp[i] == std::hypot(g.cosine.samples[i].norm,
                                  g.sine.samples[i].norm));
  // individual phases oscillate at the carrier; the composite does not
  double cmin = g.comp.front(), cmax = cmin;
  for (double c : g.comp) {
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  CHECK(cmax / cmin <= 1.2);
  CHECK(std::fabs(g.fit.rate) <= 0.05);
}

TEST_CASE("evolution csv layout") {
  GrowthResult g;
  g.t = {0.0, 1.0};
  g.comp = {1.0, 2.0};
  g.cosine.samples = {{0.0, 1.0, 3.0, 0.0}, {1.0, 2.0, 3.0, -0.1}};
  g.sine.samples = {{0.0, 0.5, 3.0, 0.0}, {1.0, 0.5, 3.0, -0.2}};
  const std::string path = "evolution_test.csv";
  write_evolution_csv(path, g);
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string line;
  REQUIRE(std::getline(f, line));
  CHECK(line == "t,comp_norm,cos_norm,sin_norm,cos_energy,cos_dissipated");
  int rows = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  f.close();
  std::remove(path.c_str());
}
