// Run configuration: a small TOML-subset parser and the validated RunConfig.
// Grammar (documented in the README): `key = value` pairs, `[table]` and
// `[table.sub]` headers, inline tables `{ k = v, ... }`, arrays `[a, b]`,
// double-quoted strings, booleans, numbers (decimal or scientific), and
// `#` comments.  Unknown keys are rejected with a nearest-key suggestion.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "kspec/birman_schwinger.hpp"
#include "kspec/corrector.hpp"
#include "kspec/errors.hpp"
#include "kspec/evolution.hpp"
#include "kspec/grid.hpp"

namespace kspec {

struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigValue {
  std::variant<double, bool, std::string, ConfigArray, ConfigTable> v;
  int line = 0, col = 0;

  bool is_num() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_str() const { return std::holds_alternative<std::string>(v); }
  bool is_arr() const { return std::holds_alternative<ConfigArray>(v); }
  bool is_tab() const { return std::holds_alternative<ConfigTable>(v); }
};

namespace detail {

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : text_(text) {}

  ConfigTable parse() {
    ConfigTable root;
    ConfigTable* current = &root;
    while (!eof()) {
      skip_ws_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        current = open_table(root);
        continue;
      }
      auto [key, kline, kcol] = read_key();
      skip_spaces();
      if (eof() || peek() != '=')
        throw ParseError("expected '=' after key '" + key + "'", line_, col_);
      get();  // '='
      skip_spaces();
      ConfigValue val = read_value();
      if (current->count(key))
        throw ParseError("duplicate key '" + key + "'", kline, kcol);
      val.line = kline;
      val.col = kcol;
      (*current)[key] = std::move(val);
      expect_line_end();
    }
    return root;
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }
  void skip_ws_and_comments() {
    for (;;) {
      while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' ||
                        peek() == '\r'))
        get();
      if (!eof() && peek() == '#') {
        while (!eof() && peek() != '\n') get();
        continue;
      }
      return;
    }
  }
  void expect_line_end() {
    skip_spaces();
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') get();
    if (!eof() && peek() != '\n' && peek() != '\r')
      throw ParseError("unexpected trailing characters", line_, col_);
  }

  static bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::tuple<std::string, int, int> read_key() {
    int l = line_, c = col_;
    std::string k;
    while (!eof() && key_char(peek())) k.push_back(get());
    if (k.empty())
      throw ParseError("expected a key", line_, col_);
    return {k, l, c};
  }

  ConfigTable* open_table(ConfigTable& root) {
    int l = line_, c = col_;
    get();  // '['
    std::vector<std::string> path;
    for (;;) {
      skip_spaces();
      auto [k, kl, kc] = read_key();
      (void)kl;
      (void)kc;
      path.push_back(k);
      skip_spaces();
      if (!eof() && peek() == '.') {
        get();
        continue;
      }
      break;
    }
    if (eof() || peek() != ']')
      throw ParseError("expected ']' closing table header", line_, col_);
    get();
    expect_line_end();
    ConfigTable* t = &root;
    for (const auto& k : path) {
      auto it = t->find(k);
      if (it == t->end()) {
        ConfigValue v;
        v.v = ConfigTable{};
        v.line = l;
        v.col = c;
        it = t->emplace(k, std::move(v)).first;
      } else if (!it->second.is_tab()) {
        throw ParseError("'" + k + "' is not a table", l, c);
      }
      t = &std::get<ConfigTable>(it->second.v);
    }
    return t;
  }

  ConfigValue read_value() {
    if (eof()) throw ParseError("expected a value", line_, col_);
    int l = line_, c = col_;
    ConfigValue out;
    out.line = l;
    out.col = c;
    char ch = peek();
    if (ch == '"') {
      get();
      std::string s;
      while (!eof() && peek() != '"') {
        char d = get();
        if (d == '\n') throw ParseError("unterminated string", l, c);
        s.push_back(d);
      }
      if (eof()) throw ParseError("unterminated string", l, c);
      get();
      out.v = s;
      return out;
    }
    if (ch == '[') {
      get();
      ConfigArray arr;
      skip_ws_and_comments();
      if (!eof() && peek() == ']') {
        get();
        out.v = arr;
        return out;
      }
      for (;;) {
        skip_ws_and_comments();
        arr.push_back(read_value());
        skip_ws_and_comments();
        if (!eof() && peek() == ',') {
          get();
          continue;
        }
        if (!eof() && peek() == ']') {
          get();
          break;
        }
        throw ParseError("expected ',' or ']' in array", line_, col_);
      }
      out.v = arr;
      return out;
    }
    if (ch == '{') {
      get();
      ConfigTable tab;
      skip_spaces();
      if (!eof() && peek() == '}') {
        get();
        out.v = tab;
        return out;
      }
      for (;;) {
        skip_spaces();
        auto [k, kl, kc] = read_key();
        skip_spaces();
        if (eof() || peek() != '=')
          throw ParseError("expected '=' in inline table", line_, col_);
        get();
        skip_spaces();
        ConfigValue v = read_value();
        v.line = kl;
        v.col = kc;
        if (tab.count(k))
          throw ParseError("duplicate key '" + k + "'", kl, kc);
        tab[k] = std::move(v);
        skip_spaces();
        if (!eof() && peek() == ',') {
          get();
          continue;
        }
        if (!eof() && peek() == '}') {
          get();
          break;
        }
        throw ParseError("expected ',' or '}' in inline table", line_, col_);
      }
      out.v = tab;
      return out;
    }
    // bare token: bool or number
    std::string tok;
    while (!eof() && peek() != ' ' && peek() != '\t' && peek() != '\n' &&
           peek() != '\r' && peek() != ',' && peek() != ']' && peek() != '}' &&
           peek() != '#')
      tok.push_back(get());
    if (tok == "true") {
      out.v = true;
      return out;
    }
    if (tok == "false") {
      out.v = false;
      return out;
    }
    try {
      size_t used = 0;
      double d = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.v = d;
      return out;
    } catch (const std::exception&) {
      throw ParseError("cannot parse value '" + tok + "'", l, c);
    }
  }
};

inline int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline void reject_unknown(const ConfigTable& tab,
                           const std::vector<std::string>& known,
                           const std::string& scope) {
  for (const auto& [key, val] : tab) {
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    std::string best;
    int bd = 1 << 20;
    for (const auto& k : known) {
      int d = levenshtein(key, k);
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    std::string msg = "unknown key '" + (scope.empty() ? key : scope + "." + key) + "'";
    if (bd <= 3) msg += "; did you mean '" + best + "'?";
    throw ParseError(msg, val.line, val.col);
  }
}

inline double num_at(const ConfigTable& tab, const std::string& key,
                     const std::string& scope, double fallback) {
  auto it = tab.find(key);
  if (it == tab.end()) return fallback;
  if (!it->second.is_num())
    throw ValidationError(scope.empty() ? key : scope + "." + key,
                          "expected a number");
  return std::get<double>(it->second.v);
}

inline int int_at(const ConfigTable& tab, const std::string& key,
                  const std::string& scope, int fallback) {
  double d = num_at(tab, key, scope, static_cast<double>(fallback));
  double r = std::round(d);
  if (std::fabs(d - r) > 1e-9)
    throw ValidationError(scope.empty() ? key : scope + "." + key,
                          "expected an integer");
  return static_cast<int>(r);
}

inline bool bool_at(const ConfigTable& tab, const std::string& key,
                    const std::string& scope, bool fallback) {
  auto it = tab.find(key);
  if (it == tab.end()) return fallback;
  if (!it->second.is_bool())
    throw ValidationError(scope.empty() ? key : scope + "." + key,
                          "expected true or false");
  return std::get<bool>(it->second.v);
}

inline std::string str_at(const ConfigTable& tab, const std::string& key,
                          const std::string& scope,
                          const std::string& fallback) {
  auto it = tab.find(key);
  if (it == tab.end()) return fallback;
  if (!it->second.is_str())
    throw ValidationError(scope.empty() ? key : scope + "." + key,
                          "expected a string");
  return std::get<std::string>(it->second.v);
}

}  // namespace detail

struct Grid2DConfig {
  double Lx = 20.0;
  int Nx = 201;
  double Ly = 28.0;
  int Ny = 281;
};

struct RunConfig {
  std::string model;                        // required
  Grid1D grid1d{20.0, 2001};
  Grid2DConfig grid2d;
  std::string gamma_family;                 // required
  std::map<std::string, double> gamma_params;
  std::string modes = "all-discrete";       // or a specific index as string
  int mode_index = -1;                      // >= 0 when modes is an index
  std::vector<double> eps_list{0.0125, 0.025, 0.05, 0.1};
  bool run_bs = true;
  bool run_evolution = false;
  std::string out_dir = "out";
  double model_tol = 1e-6;
  CorrectorOptions corrector;
  BSOptions bs;
  EvolutionOptions evolution;
  double evolution_eps = 0.2;
};

inline RunConfig parse_config(const std::string& text) {
  ConfigTable root = detail::TomlParser(text).parse();
  detail::reject_unknown(
      root,
      {"model", "modes", "eps_list", "run_bs", "run_evolution", "out_dir",
       "model_tol", "grid1d", "grid2d", "gamma", "corrector",
       "birman_schwinger", "evolution"},
      "");

  RunConfig cfg;
  cfg.model = detail::str_at(root, "model", "", "");
  if (cfg.model.empty())
    throw ValidationError("model", "required key is missing");
  if (root.count("modes") && root.at("modes").is_num()) {
    cfg.mode_index = detail::int_at(root, "modes", "", 0);
    if (cfg.mode_index < 0)
      throw ValidationError("modes", "index must be >= 0");
    cfg.modes = std::to_string(cfg.mode_index);
  } else {
    cfg.modes = detail::str_at(root, "modes", "", "all-discrete");
    if (cfg.modes != "all-discrete") {
      try {
        cfg.mode_index = std::stoi(cfg.modes);
      } catch (const std::exception&) {
        throw ValidationError("modes", "expected \"all-discrete\" or an index");
      }
      if (cfg.mode_index < 0)
        throw ValidationError("modes", "index must be >= 0");
    }
  }
  if (root.count("eps_list")) {
    const auto& v = root.at("eps_list");
    if (!v.is_arr()) throw ValidationError("eps_list", "expected an array");
    cfg.eps_list.clear();
    for (const auto& e : std::get<ConfigArray>(v.v)) {
      if (!e.is_num()) throw ValidationError("eps_list", "expected numbers");
      double d = std::get<double>(e.v);
      if (!(d > 0.0)) throw ValidationError("eps_list", "entries must be > 0");
      cfg.eps_list.push_back(d);
    }
    if (cfg.eps_list.empty())
      throw ValidationError("eps_list", "must not be empty");
    if (!std::is_sorted(cfg.eps_list.begin(), cfg.eps_list.end()))
      throw ValidationError("eps_list", "must be sorted ascending");
  }
  cfg.run_bs = detail::bool_at(root, "run_bs", "", cfg.run_bs);
  cfg.run_evolution =
      detail::bool_at(root, "run_evolution", "", cfg.run_evolution);
  cfg.out_dir = detail::str_at(root, "out_dir", "", cfg.out_dir);
  cfg.model_tol = detail::num_at(root, "model_tol", "", cfg.model_tol);

  if (root.count("grid1d")) {
    const auto& v = root.at("grid1d");
    if (!v.is_tab()) throw ValidationError("grid1d", "expected a table");
    const auto& t = std::get<ConfigTable>(v.v);
    detail::reject_unknown(t, {"L", "N"}, "grid1d");
    double L = detail::num_at(t, "L", "grid1d", 20.0);
    int N = detail::int_at(t, "N", "grid1d", 2001);
    cfg.grid1d = Grid1D{L, N};  // validates L > 0, N odd >= 3
  }
  if (root.count("grid2d")) {
    const auto& v = root.at("grid2d");
    if (!v.is_tab()) throw ValidationError("grid2d", "expected a table");
    const auto& t = std::get<ConfigTable>(v.v);
    detail::reject_unknown(t, {"Lx", "Nx", "Ly", "Ny"}, "grid2d");
    cfg.grid2d.Lx = detail::num_at(t, "Lx", "grid2d", cfg.grid2d.Lx);
    cfg.grid2d.Nx = detail::int_at(t, "Nx", "grid2d", cfg.grid2d.Nx);
    cfg.grid2d.Ly = detail::num_at(t, "Ly", "grid2d", cfg.grid2d.Ly);
    cfg.grid2d.Ny = detail::int_at(t, "Ny", "grid2d", cfg.grid2d.Ny);
    if (cfg.grid2d.Lx <= 0.0) throw ValidationError("grid2d.Lx", "must be > 0");
    if (cfg.grid2d.Ly <= 0.0) throw ValidationError("grid2d.Ly", "must be > 0");
    if (cfg.grid2d.Nx < 3) throw ValidationError("grid2d.Nx", "must be >= 3");
    if (cfg.grid2d.Ny < 3) throw ValidationError("grid2d.Ny", "must be >= 3");
  }

  {
    auto it = root.find("gamma");
    if (it == root.end())
      throw ValidationError("gamma", "required table is missing");
    if (!it->second.is_tab())
      throw ValidationError("gamma", "expected a table");
    const auto& t = std::get<ConfigTable>(it->second.v);
    detail::reject_unknown(
        t, {"family", "amplitude", "alpha", "beta", "y0", "x0"}, "gamma");
    cfg.gamma_family = detail::str_at(t, "family", "gamma", "");
    if (cfg.gamma_family.empty())
      throw ValidationError("gamma.family", "required key is missing");
    for (const char* p : {"amplitude", "alpha", "beta", "y0", "x0"})
      if (t.count(p))
        cfg.gamma_params[p] = detail::num_at(t, p, "gamma", 0.0);
  }

  if (root.count("corrector")) {
    const auto& t = std::get<ConfigTable>(root.at("corrector").v);
    detail::reject_unknown(t, {"lam_cut_offset", "res_tol"}, "corrector");
    cfg.corrector.lam_cut_offset =
        detail::num_at(t, "lam_cut_offset", "corrector",
                       cfg.corrector.lam_cut_offset);
    cfg.corrector.res_tol =
        detail::num_at(t, "res_tol", "corrector", cfg.corrector.res_tol);
    if (cfg.corrector.lam_cut_offset <= 0.0)
      throw ValidationError("corrector.lam_cut_offset", "must be > 0");
  }
  if (root.count("birman_schwinger")) {
    const auto& v = root.at("birman_schwinger");
    if (!v.is_tab())
      throw ValidationError("birman_schwinger", "expected a table");
    const auto& t = std::get<ConfigTable>(v.v);
    detail::reject_unknown(t,
                           {"window", "stride", "lam_cut_offset", "fp_tol",
                            "fp_maxit", "newton_tol", "newton_maxit",
                            "fd_scale", "winding_points", "delta_factor"},
                           "birman_schwinger");
    auto& b = cfg.bs;
    b.window = detail::num_at(t, "window", "birman_schwinger", b.window);
    b.stride = detail::int_at(t, "stride", "birman_schwinger", b.stride);
    b.lam_cut_offset = detail::num_at(t, "lam_cut_offset", "birman_schwinger",
                                      b.lam_cut_offset);
    b.fp_tol = detail::num_at(t, "fp_tol", "birman_schwinger", b.fp_tol);
    b.fp_maxit = detail::int_at(t, "fp_maxit", "birman_schwinger", b.fp_maxit);
    b.newton_tol =
        detail::num_at(t, "newton_tol", "birman_schwinger", b.newton_tol);
    b.newton_maxit =
        detail::int_at(t, "newton_maxit", "birman_schwinger", b.newton_maxit);
    b.fd_scale = detail::num_at(t, "fd_scale", "birman_schwinger", b.fd_scale);
    b.winding_points =
        detail::int_at(t, "winding_points", "birman_schwinger", b.winding_points);
    b.delta_factor =
        detail::num_at(t, "delta_factor", "birman_schwinger", b.delta_factor);
    if (b.window <= 0.0)
      throw ValidationError("birman_schwinger.window", "must be > 0");
    if (b.stride < 1)
      throw ValidationError("birman_schwinger.stride", "must be >= 1");
  }
  if (root.count("evolution")) {
    const auto& v = root.at("evolution");
    if (!v.is_tab()) throw ValidationError("evolution", "expected a table");
    const auto& t = std::get<ConfigTable>(v.v);
    detail::reject_unknown(
        t,
        {"T", "cfl", "seed_width", "window", "sponge_x0", "sponge_y0",
         "sponge_strength", "sample_every", "fit_lo", "fit_hi", "r2_min",
         "eps"},
        "evolution");
    auto& e = cfg.evolution;
    e.T = detail::num_at(t, "T", "evolution", e.T);
    e.cfl = detail::num_at(t, "cfl", "evolution", e.cfl);
    e.seed_width = detail::num_at(t, "seed_width", "evolution", e.seed_width);
    e.window = detail::num_at(t, "window", "evolution", e.window);
    e.sponge_x0 = detail::num_at(t, "sponge_x0", "evolution", e.sponge_x0);
    e.sponge_y0 = detail::num_at(t, "sponge_y0", "evolution", e.sponge_y0);
    e.sponge_strength =
        detail::num_at(t, "sponge_strength", "evolution", e.sponge_strength);
    e.sample_every =
        detail::int_at(t, "sample_every", "evolution", e.sample_every);
    e.fit_lo = detail::num_at(t, "fit_lo", "evolution", e.fit_lo);
    e.fit_hi = detail::num_at(t, "fit_hi", "evolution", e.fit_hi);
    e.r2_min = detail::num_at(t, "r2_min", "evolution", e.r2_min);
    cfg.evolution_eps = detail::num_at(t, "eps", "evolution", cfg.evolution_eps);
    if (e.T <= 0.0) throw ValidationError("evolution.T", "must be > 0");
    if (e.sample_every < 1)
      throw ValidationError("evolution.sample_every", "must be >= 1");
    if (!(e.fit_lo >= 0.0 && e.fit_lo < e.fit_hi && e.fit_hi <= 1.0))
      throw ValidationError("evolution.fit_lo",
                            "fit window must satisfy 0 <= lo < hi <= 1");
  }
  return cfg;
}

}  // namespace kspec
