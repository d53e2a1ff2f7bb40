// Gain/loss profiles gamma(x,y): exponentially decaying and, for admissible
// profiles, odd under one of the three sign flips (x,y)->(-x,-y), x->-x,
// y->-y.  Sign-broken test profiles (parity "none") are also supported so
// the classification cases that need K1 != 0 with a symmetric potential can
// be exercised; the pipeline records whether the profile is admissible.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "kspec/errors.hpp"
#include "kspec/grid.hpp"

namespace kspec {

enum class Parity { odd_in_both, odd_in_x, odd_in_y, none };

inline std::string parity_name(Parity p) {
  switch (p) {
    case Parity::odd_in_both: return "odd-in-both";
    case Parity::odd_in_x: return "odd-in-x";
    case Parity::odd_in_y: return "odd-in-y";
    default: return "none";
  }
}

struct GammaSpec {
  std::string family;
  std::function<double(double, double)> eval;
  double decay_C = 1.0;  // |gamma| <= C e^{-a r}
  double decay_a = 1.0;
  Parity parity = Parity::none;
  std::map<std::string, double> params;
};

inline double gamma_eval(const GammaSpec& g, double x, double y) {
  return g.eval(x, y);
}

namespace detail {
// numeric decay envelope: C = sup over sampled circles of |gamma| e^{a r}
inline double decay_envelope(const std::function<double(double, double)>& f,
                             double a, double rmax = 40.0) {
  double C = 0.0;
  for (int ir = 0; ir <= 400; ++ir) {
    double r = rmax * ir / 400.0;
    double ring = 0.0;
    for (int ia = 0; ia < 128; ++ia) {
      double th = 2.0 * M_PI * ia / 128.0;
      ring = std::max(ring, std::fabs(f(r * std::cos(th), r * std::sin(th))));
    }
    C = std::max(C, ring * std::exp(a * r));
  }
  return 1.05 * C;
}
}  // namespace detail

// Built-in families.  Admissible (PT class): x-gauss, y-gauss, xy-gauss,
// mixed-gauss.  Sign-broken test profiles: even-gauss, lobes,
// shifted-x-gauss.  Parameter names: amplitude, alpha, beta, y0, x0.
inline GammaSpec make_gamma(const std::string& family,
                            const std::map<std::string, double>& params = {}) {
  auto get = [&](const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
  };
  const double A = get("amplitude", 1.0);
  const double al = get("alpha", 1.0);
  GammaSpec g;
  g.family = family;
  g.params = params;
  g.params.try_emplace("amplitude", A);
  g.params.try_emplace("alpha", al);
  if (!(al > 0.0)) throw ValidationError("gamma.alpha", "must be positive");

  if (family == "x-gauss") {
    g.parity = Parity::odd_in_x;
    g.eval = [A, al](double x, double y) {
      return A * x * std::exp(-al * (x * x + y * y));
    };
  } else if (family == "y-gauss") {
    g.parity = Parity::odd_in_y;
    g.eval = [A, al](double x, double y) {
      return A * y * std::exp(-al * (x * x + y * y));
    };
  } else if (family == "xy-gauss") {
    // odd in each axis separately (hence even under full inversion); the
    // recorded tag is the y-flip, which kills K1 for any potential
    g.parity = Parity::odd_in_y;
    g.eval = [A, al](double x, double y) {
      return A * x * y * std::exp(-al * (x * x + y * y));
    };
  } else if (family == "mixed-gauss") {
    const double be = get("beta", 1.0);
    g.params.try_emplace("beta", be);
    g.parity = Parity::odd_in_both;
    g.eval = [A, al, be](double x, double y) {
      return A * (x + be * y) * std::exp(-al * (x * x + y * y));
    };
  } else if (family == "even-gauss") {
    const double be = get("beta", al);
    g.params.try_emplace("beta", be);
    if (!(be > 0.0)) throw ValidationError("gamma.beta", "must be positive");
    g.parity = Parity::none;
    g.eval = [A, al, be](double x, double y) {
      return A * std::exp(-al * x * x - be * y * y);
    };
  } else if (family == "lobes") {
    const double be = get("beta", 4.0);
    const double y0 = get("y0", 4.0);
    g.params.try_emplace("beta", be);
    g.params.try_emplace("y0", y0);
    if (!(be > 0.0)) throw ValidationError("gamma.beta", "must be positive");
    g.parity = Parity::none;
    g.eval = [A, al, be, y0](double x, double y) {
      return A * std::exp(-al * x * x) *
             (std::exp(-be * (y - y0) * (y - y0)) +
              std::exp(-be * (y + y0) * (y + y0)));
    };
  } else if (family == "shifted-x-gauss") {
    const double x0 = get("x0", 1.0);
    g.params.try_emplace("x0", x0);
    g.parity = Parity::none;
    g.eval = [A, al, x0](double x, double y) {
      return A * x * std::exp(-al * ((x - x0) * (x - x0) + y * y));
    };
  } else {
    throw ValidationError("gamma.family", "unknown family '" + family + "'");
  }
  g.decay_a = 1.0;
  g.decay_C = std::max(1e-300, detail::decay_envelope(g.eval, g.decay_a));
  return g;
}

// Confirms the declared parity by sampling symmetric point pairs on the
// grid; throws with the offending point otherwise.  Parity none is exempt
// by definition (documented test-profile escape hatch).
inline Parity check_parity(const GammaSpec& g, const Grid1D& gx,
                           const Grid1D& gy, double tol = 1e-12) {
  if (g.parity == Parity::none) return g.parity;
  double scale = 0.0;
  for (int i = 0; i < gx.N; i += 7)
    for (int j = 0; j < gy.N; j += 7)
      scale = std::max(scale, std::fabs(g.eval(gx.x(i), gy.x(j))));
  scale = std::max(scale, 1e-300);
  for (int i = 0; i < gx.N; ++i) {
    for (int j = 0; j < gy.N; ++j) {
      double x = gx.x(i), y = gy.x(j);
      double v = g.eval(x, y), m = 0.0;
      switch (g.parity) {
        case Parity::odd_in_both: m = g.eval(-x, -y); break;
        case Parity::odd_in_x: m = g.eval(-x, y); break;
        case Parity::odd_in_y: m = g.eval(x, -y); break;
        default: break;
      }
      if (std::fabs(v + m) > tol * scale) {
        std::ostringstream os;
        os << "declared parity " << parity_name(g.parity) << " violated at ("
           << x << ", " << y << "): gamma=" << v << ", mirror=" << m;
        throw ParityViolation(os.str());
      }
    }
  }
  return g.parity;
}

struct DecayReport {
  double worst_ratio = 0.0;  // max over circles of |gamma| e^{a r} / C
  bool ok = false;
};

inline DecayReport check_decay(const GammaSpec& g,
                               const std::vector<double>& radii) {
  DecayReport rep;
  for (double r : radii) {
    if (r < 0.0) throw ValidationError("radii", "must be nonnegative");
    for (int ia = 0; ia < 256; ++ia) {
      double th = 2.0 * M_PI * ia / 256.0;
      double v = std::fabs(g.eval(r * std::cos(th), r * std::sin(th)));
      rep.worst_ratio =
          std::max(rep.worst_ratio, v * std::exp(g.decay_a * r) / g.decay_C);
    }
  }
  rep.ok = rep.worst_ratio <= 1.0 + 1e-9;
  if (!rep.ok)
    throw DecayViolation("decay bound violated: ratio " +
                         std::to_string(rep.worst_ratio));
  return rep;
}

}  // namespace kspec
