// Field models for the 2D Klein-Gordon equation u_tt - Lap u + eps g u_t
// + f(u) = 0: the nonlinearity f, its derivative, the static kink phi(x),
// and the essential-spectrum edges Lambda_e(+/-) = lim f'(phi) at x -> +/-inf.
// Ships the sine-Gordon and phi4 kinks plus synthetic transverse wells used
// to reach spectral configurations the two built-ins cannot produce
// (negative discrete eigenvalues, a shallow single well).
#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <string>
#include <variant>

#include "kspec/errors.hpp"
#include "kspec/grid.hpp"

namespace kspec {

// Anything that provides the 1D transverse Schrodinger data.
template <class M>
concept PotentialModel = requires(const M& m, double x) {
  { m.potential(x) } -> std::convertible_to<double>;
  { m.lambda_e() } -> std::convertible_to<double>;
};

struct FieldModel {
  std::string name;
  std::function<double(double)> f;        // nonlinearity f(u)
  std::function<double(double)> f_prime;  // f'(u)
  std::function<double(double)> kink;     // static kink phi(x)
  double lambda_e_minus = 0.0;
  double lambda_e_plus = 0.0;

  double lambda_e() const { return std::min(lambda_e_minus, lambda_e_plus); }
  double potential(double x) const { return f_prime(kink(x)); }
};

// Synthetic transverse well: no field model behind it, just V(x) and the
// essential-spectrum edge.  Used for classification cases that need
// Lambda_* < 0 or a shallow well.
struct PotentialWell {
  std::string name;
  std::function<double(double)> V;
  double lambda_e_minus = 0.0;
  double lambda_e_plus = 0.0;

  double lambda_e() const { return std::min(lambda_e_minus, lambda_e_plus); }
  double potential(double x) const { return V(x); }
};

inline FieldModel make_sine_gordon() {
  FieldModel m;
  m.name = "sine-gordon";
  m.f = [](double u) { return std::sin(u); };
  m.f_prime = [](double u) { return std::cos(u); };
  m.kink = [](double x) { return 4.0 * std::atan(std::exp(x)); };
  m.lambda_e_minus = m.lambda_e_plus = 1.0;
  return m;
}

inline FieldModel make_phi4() {
  FieldModel m;
  m.name = "phi4";
  m.f = [](double u) { return 2.0 * (u * u * u - u); };
  m.f_prime = [](double u) { return 6.0 * u * u - 2.0; };
  m.kink = [](double x) { return std::tanh(x); };
  m.lambda_e_minus = m.lambda_e_plus = 4.0;
  return m;
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

// V = c - d sech^2(x) wells with known bound states at c - (s-n)^2,
// s(s+1) = d.  pt1/pt2 sit below zero so that Lambda_* < 0 is reachable;
// shallow keeps a single level close to the edge.
inline PotentialWell make_well(const std::string& name) {
  PotentialWell w;
  w.name = name;
  if (name == "pt1") {
    w.V = [](double x) { double s = sech(x); return -2.0 * s * s; };
    w.lambda_e_minus = w.lambda_e_plus = 0.0;
  } else if (name == "pt2") {
    w.V = [](double x) { double s = sech(x); return -6.0 * s * s; };
    w.lambda_e_minus = w.lambda_e_plus = 0.0;
  } else if (name == "shallow") {
    w.V = [](double x) { double s = sech(x); return 1.0 - 0.8 * s * s; };
    w.lambda_e_minus = w.lambda_e_plus = 1.0;
  } else {
    throw ValidationError("model", "unknown synthetic well '" + name + "'");
  }
  return w;
}

using AnyModel = std::variant<FieldModel, PotentialWell>;

inline AnyModel make_model(const std::string& name) {
  if (name == "sine-gordon") return make_sine_gordon();
  if (name == "phi4") return make_phi4();
  return make_well(name);
}

inline const std::string& model_name(const AnyModel& m) {
  return std::visit([](const auto& v) -> const std::string& { return v.name; }, m);
}

inline double model_potential(const AnyModel& m, double x) {
  return std::visit([&](const auto& v) { return v.potential(x); }, m);
}

inline double model_lambda_e(const AnyModel& m) {
  return std::visit([](const auto& v) { return v.lambda_e(); }, m);
}

struct ModelReport {
  double max_ode_residual = 0.0;
  double limit_error_minus = 0.0;
  double limit_error_plus = 0.0;
  bool ok = false;
};

// Checks that the kink actually solves -phi'' + f(phi) = 0 and that
// f'(phi(x)) approaches the declared edges.  The second derivative is
// evaluated with the 5-point fourth-order stencil so the check is far more
// accurate than the solver's own discretization and genuinely tests the
// model data, not the grid.
inline ModelReport validate_model(const FieldModel& m, const Grid1D& grid,
                                  double tol = 1e-6) {
  ModelReport rep;
  const int N = grid.N;
  const double h = grid.h();
  std::vector<double> phi(N);
  for (int i = 0; i < N; ++i) phi[i] = m.kink(grid.x(i));
  for (int i = 2; i < N - 2; ++i) {
    double d2 = (-phi[i - 2] + 16.0 * phi[i - 1] - 30.0 * phi[i] +
                 16.0 * phi[i + 1] - phi[i + 2]) / (12.0 * h * h);
    double r = std::fabs(-d2 + m.f(phi[i]));
    rep.max_ode_residual = std::max(rep.max_ode_residual, r);
  }
  // the edge values are reached exponentially, so sampling at x = +/-L is
  // already accurate to O(e^{-L}) scales
  double limit_tol = std::max(tol, 100.0 * std::exp(-grid.L));
  rep.limit_error_minus = std::fabs(m.f_prime(m.kink(-grid.L)) - m.lambda_e_minus);
  rep.limit_error_plus = std::fabs(m.f_prime(m.kink(grid.L)) - m.lambda_e_plus);
  rep.ok = rep.max_ode_residual <= tol && rep.limit_error_minus <= limit_tol &&
           rep.limit_error_plus <= limit_tol;
  if (!rep.ok)
    throw ValidationFailure("model '" + m.name + "' failed validation: ode residual " +
                            std::to_string(rep.max_ode_residual) + ", edge errors " +
                            std::to_string(rep.limit_error_minus) + "/" +
                            std::to_string(rep.limit_error_plus));
  return rep;
}

}  // namespace kspec
