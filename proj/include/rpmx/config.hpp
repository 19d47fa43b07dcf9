#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rpmx/profile_regression.hpp"
#include "rpmx/psbp.hpp"
#include "rpmx/rpms.hpp"

namespace rpmx {

struct DiscretizeRule {
  std::string column;
  std::vector<double> cutoffs;  // ascending; one dummy per cutoff
};

// Fully validated run settings.  Parsed from a flat key=value file; every
// key is typed and unknown keys are rejected so a misspelled hyperparameter
// can never fall back to a default silently.
struct ExperimentConfig {
  std::string model;  // ssm | rpms | psbp | pr
  long iterations = 15000;
  long burn_in = 5000;
  long thinning = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  std::string response = "y";
  bool intercept = false;
  int m_aux = 3;
  bool pi_spike_at_one = false;
  bool two_step_inclusion = true;

  double a_pi = 1.0, b_pi = 0.15;
  double a_omega = 1.0, b_omega = 0.15;
  std::optional<double> a_tau, b_tau;  // default depends on the model
  double a_lambda = 1.0, b_lambda = 1.0;
  double a_alpha = 1.0, b_alpha = 1.0;
  double a_zeta = 1.0, b_zeta = 1.0;
  double mu0 = 0.0;
  double x_mean0 = 0.0, x_prec0 = 1.0, x_noise_prec = 1.0;

  int psbp_k = 20;
  double a_kappa = 0.5, b_kappa = 0.5;
  double mu_xi = 0.0, tau_xi = 0.1;

  double pr_theta_prec = 0.01;
  double pr_a_pi = 1.0, pr_b_pi = 1.0;

  std::vector<std::vector<double>> predict_profiles;
  double grid_lo = -20.0, grid_hi = 20.0;
  int grid_points = 401;

  std::vector<std::string> binary_columns;
  std::vector<DiscretizeRule> discretize;

  // The exact pairs this config was built from, for the manifest.
  std::map<std::string, std::string> raw;

  double resolved_a_tau() const { return a_tau.value_or(1.0); }
  double resolved_b_tau() const {
    return b_tau.value_or(model == "psbp" ? 5.0 : 1.0);
  }

  RpmsPriors rpms_priors() const;
  PsbpPriors psbp_priors() const;
  PrPriors pr_priors() const;

  std::vector<double> grid() const;
};

// Reads one key=value pair per line; '#' starts a comment; blank lines are
// skipped.  Duplicate keys are an error.
std::map<std::string, std::string> read_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Builds a validated config, reporting every problem at once.
ExperimentConfig config_from_pairs(std::map<std::string, std::string> kv);

}  // namespace rpmx
