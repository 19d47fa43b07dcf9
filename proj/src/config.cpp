#include "rpmx/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rpmx/errors.hpp"

namespace rpmx {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Collects problems so one pass reports every bad key.
struct Checker {
  std::map<std::string, std::string> kv;
  std::vector<std::string> errors;

  std::optional<std::string> take(const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  }

  void fail(const std::string& key, const std::string& why) {
    errors.push_back("config key '" + key + "': " + why);
  }

  bool parse_double(const std::string& key, const std::string& v, double& out) {
    errno = 0;
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
      fail(key, "expected a number, got '" + v + "'");
      return false;
    }
    out = x;
    return true;
  }

  void get_double(const std::string& key, double& out) {
    if (auto v = take(key)) parse_double(key, *v, out);
  }

  void get_positive(const std::string& key, double& out) {
    if (auto v = take(key)) {
      double x;
      if (parse_double(key, *v, x)) {
        if (x > 0.0)
          out = x;
        else
          fail(key, "must be positive");
      }
    }
  }

  void get_optional_positive(const std::string& key, std::optional<double>& out) {
    if (auto v = take(key)) {
      double x;
      if (parse_double(key, *v, x)) {
        if (x > 0.0)
          out = x;
        else
          fail(key, "must be positive");
      }
    }
  }

  void get_long(const std::string& key, long& out, long lo) {
    if (auto v = take(key)) {
      try {
        std::size_t pos = 0;
        long x = std::stol(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        if (x < lo) {
          fail(key, "must be at least " + std::to_string(lo));
          return;
        }
        out = x;
      } catch (const std::exception&) {
        fail(key, "expected an integer, got '" + *v + "'");
      }
    }
  }

  void get_int(const std::string& key, int& out, int lo) {
    long tmp = out;
    get_long(key, tmp, lo);
    out = static_cast<int>(tmp);
  }

  void get_u64(const std::string& key, std::uint64_t& out) {
    if (auto v = take(key)) {
      try {
        std::size_t pos = 0;
        unsigned long long x = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        out = x;
      } catch (const std::exception&) {
        fail(key, "expected an unsigned integer, got '" + *v + "'");
      }
    }
  }

  void get_bool(const std::string& key, bool& out) {
    if (auto v = take(key)) {
      if (*v == "true")
        out = true;
      else if (*v == "false")
        out = false;
      else
        fail(key, "expected true or false, got '" + *v + "'");
    }
  }

  void get_string(const std::string& key, std::string& out) {
    if (auto v = take(key)) out = *v;
  }
};

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> errors;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("config line " + std::to_string(lineno) +
                       ": expected key=value, got '" + line + "'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("config line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (!kv.emplace(key, val).second)
      errors.push_back("config line " + std::to_string(lineno) +
                       ": duplicate key '" + key + "'");
  }
  if (!errors.empty()) throw config_error(errors);
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error({"cannot open config file " + path});
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig config_from_pairs(std::map<std::string, std::string> kv) {
  ExperimentConfig cfg;
  cfg.raw = kv;
  Checker c{std::move(kv), {}};

  c.get_string("model", cfg.model);
  if (!cfg.model.empty() && cfg.model != "ssm" && cfg.model != "rpms" &&
      cfg.model != "psbp" && cfg.model != "pr")
    c.fail("model", "must be one of ssm, rpms, psbp, pr");

  c.get_long("iterations", cfg.iterations, 1);
  c.get_long("burn_in", cfg.burn_in, 0);
  c.get_long("thinning", cfg.thinning, 1);
  c.get_u64("seed", cfg.seed);
  c.get_int("chains", cfg.chains, 1);
  c.get_string("response", cfg.response);
  c.get_bool("intercept", cfg.intercept);
  c.get_int("m_aux", cfg.m_aux, 1);
  c.get_bool("pi_spike_at_one", cfg.pi_spike_at_one);
  c.get_bool("two_step_inclusion", cfg.two_step_inclusion);

  c.get_positive("a_pi", cfg.a_pi);
  c.get_positive("b_pi", cfg.b_pi);
  c.get_positive("a_omega", cfg.a_omega);
  c.get_positive("b_omega", cfg.b_omega);
  c.get_optional_positive("a_tau", cfg.a_tau);
  c.get_optional_positive("b_tau", cfg.b_tau);
  c.get_positive("a_lambda", cfg.a_lambda);
  c.get_positive("b_lambda", cfg.b_lambda);
  c.get_positive("a_alpha", cfg.a_alpha);
  c.get_positive("b_alpha", cfg.b_alpha);
  c.get_positive("a_zeta", cfg.a_zeta);
  c.get_positive("b_zeta", cfg.b_zeta);
  c.get_double("mu0", cfg.mu0);
  c.get_double("x_mean0", cfg.x_mean0);
  c.get_positive("x_prec0", cfg.x_prec0);
  c.get_positive("x_noise_prec", cfg.x_noise_prec);

  c.get_int("psbp_k", cfg.psbp_k, 2);
  c.get_positive("a_kappa", cfg.a_kappa);
  c.get_positive("b_kappa", cfg.b_kappa);
  c.get_double("mu_xi", cfg.mu_xi);
  c.get_positive("tau_xi", cfg.tau_xi);

  c.get_positive("pr_theta_prec", cfg.pr_theta_prec);
  c.get_positive("pr_a_pi", cfg.pr_a_pi);
  c.get_positive("pr_b_pi", cfg.pr_b_pi);

  if (auto v = c.take("predict_profiles")) {
    std::size_t start = 0;
    const std::string& s = *v;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() || s[i] == ';') {
        std::string part = trim(s.substr(start, i - start));
        start = i + 1;
        if (part.empty()) continue;
        std::vector<double> profile;
        bool ok = true;
        for (const auto& tok : split_ws(part)) {
          double x;
          if (!c.parse_double("predict_profiles", tok, x)) {
            ok = false;
            break;
          }
          profile.push_back(x);
        }
        if (ok) cfg.predict_profiles.push_back(std::move(profile));
      }
    }
  }

  if (auto v = c.take("grid")) {
    auto c1 = v->find(':');
    auto c2 = v->rfind(':');
    if (c1 == std::string::npos || c2 == c1) {
      c.fail("grid", "expected lo:hi:points, got '" + *v + "'");
    } else {
      double lo, hi;
      long pts = 0;
      bool ok = c.parse_double("grid", v->substr(0, c1), lo) &&
                c.parse_double("grid", v->substr(c1 + 1, c2 - c1 - 1), hi);
      try {
        std::size_t pos = 0;
        std::string ptxt = v->substr(c2 + 1);
        pts = std::stol(ptxt, &pos);
        if (pos != ptxt.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        c.fail("grid", "point count must be an integer");
        ok = false;
      }
      if (ok) {
        if (hi <= lo)
          c.fail("grid", "upper bound must exceed lower bound");
        else if (pts < 2)
          c.fail("grid", "needs at least 2 points");
        else {
          cfg.grid_lo = lo;
          cfg.grid_hi = hi;
          cfg.grid_points = static_cast<int>(pts);
        }
      }
    }
  }

  if (auto v = c.take("binary_columns")) cfg.binary_columns = split_ws(*v);

  // discretize:<column> = ascending cutoffs; each produces a 1{x > c} dummy.
  for (auto it = c.kv.begin(); it != c.kv.end();) {
    if (it->first.rfind("discretize:", 0) == 0) {
      DiscretizeRule rule;
      rule.column = it->first.substr(std::string("discretize:").size());
      bool ok = !rule.column.empty();
      if (!ok) c.fail(it->first, "missing column name");
      for (const auto& tok : split_ws(it->second)) {
        double x;
        if (!c.parse_double(it->first, tok, x)) {
          ok = false;
          break;
        }
        rule.cutoffs.push_back(x);
      }
      if (ok && rule.cutoffs.empty()) {
        c.fail(it->first, "needs at least one cutoff");
        ok = false;
      }
      if (ok && !std::is_sorted(rule.cutoffs.begin(), rule.cutoffs.end())) {
        c.fail(it->first, "cutoffs must be ascending");
        ok = false;
      }
      if (ok) cfg.discretize.push_back(std::move(rule));
      it = c.kv.erase(it);
    } else {
      ++it;
    }
  }

  for (const auto& pair : c.kv)
    c.errors.push_back("unknown config key '" + pair.first + "'");

  if (cfg.burn_in >= cfg.iterations)
    c.errors.push_back("config: burn_in must be smaller than iterations");

  if (!c.errors.empty()) throw config_error(c.errors);
  return cfg;
}

RpmsPriors ExperimentConfig::rpms_priors() const {
  RpmsPriors p;
  p.a_pi = a_pi;
  p.b_pi = b_pi;
  p.a_omega = a_omega;
  p.b_omega = b_omega;
  p.a_tau = resolved_a_tau();
  p.b_tau = resolved_b_tau();
  p.a_lambda = a_lambda;
  p.b_lambda = b_lambda;
  p.a_zeta = a_zeta;
  p.b_zeta = b_zeta;
  p.alpha_prior = {a_alpha, b_alpha};
  p.mu0 = mu0;
  p.x_mean0 = x_mean0;
  p.x_prec0 = x_prec0;
  p.x_noise_prec = x_noise_prec;
  p.m_aux = m_aux;
  p.spike_at_one = pi_spike_at_one;
  p.intercept = intercept;
  return p;
}

PsbpPriors ExperimentConfig::psbp_priors() const {
  PsbpPriors p;
  p.K = psbp_k;
  p.a_kappa = a_kappa;
  p.b_kappa = b_kappa;
  p.a_tau = resolved_a_tau();
  p.b_tau = resolved_b_tau();
  p.a_lambda = a_lambda;
  p.b_lambda = b_lambda;
  p.mu_xi = mu_xi;
  p.tau_xi = tau_xi;
  return p;
}

PrPriors ExperimentConfig::pr_priors() const {
  PrPriors p;
  p.theta_prec = pr_theta_prec;
  p.a_pi = pr_a_pi;
  p.b_pi = pr_b_pi;
  p.a_zeta = a_zeta;
  p.b_zeta = b_zeta;
  p.a_lambda = a_lambda;
  p.b_lambda = b_lambda;
  p.alpha_prior = {a_alpha, b_alpha};
  p.x_mean0 = x_mean0;
  p.x_prec0 = x_prec0;
  p.x_noise_prec = x_noise_prec;
  p.m_aux = m_aux;
  return p;
}

std::vector<double> ExperimentConfig::grid() const {
  std::vector<double> g(static_cast<std::size_t>(grid_points));
  double step = (grid_hi - grid_lo) / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = grid_lo + step * static_cast<double>(i);
  return g;
}

}  // namespace rpmx
