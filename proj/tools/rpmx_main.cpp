#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpmx/config.hpp"
#include "rpmx/dataset_io.hpp"
#include "rpmx/errors.hpp"
#include "rpmx/experiment.hpp"
#include "rpmx/simulate.hpp"
#include "rpmx/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_profile(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) throw rpmx::config_error({"profile must be numbers, got '" + text + "'"});
  if (out.empty()) throw rpmx::config_error({"profile is empty"});
  return out;
}

void parse_grid(const std::string& text, double& lo, double& hi, int& points) {
  auto c1 = text.find(':');
  auto c2 = text.rfind(':');
  if (c1 == std::string::npos || c2 == c1)
    throw rpmx::config_error({"grid must be lo:hi:points, got '" + text + "'"});
  try {
    lo = std::stod(text.substr(0, c1));
    hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    points = std::stoi(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw rpmx::config_error({"grid must be lo:hi:points, got '" + text + "'"});
  }
}

int cmd_simulate(const std::string& scenario, std::uint64_t seed,
                 const std::string& out_dir) {
  rpmx::SimulatedData sim;
  if (scenario == "scenario1")
    sim = rpmx::simulate_scenario1(seed);
  else if (scenario == "smoke")
    sim = rpmx::simulate_smoke(seed);
  else
    throw rpmx::config_error({"scenario must be scenario1 or smoke"});

  fs::create_directories(out_dir);
  std::string data_path = (fs::path(out_dir) / "data.csv").string();
  rpmx::save_dataset(data_path, sim.data);

  json truth;
  truth["scenario"] = scenario;
  truth["seed"] = seed;
  truth["assign"] = sim.true_assign;
  json rows = json::array();
  for (std::size_t j = 0; j < sim.true_theta.rows(); ++j)
    rows.push_back(std::vector<double>(sim.true_theta.row(j).begin(),
                                       sim.true_theta.row(j).end()));
  truth["theta"] = rows;
  std::string truth_path = (fs::path(out_dir) / "truth.json").string();
  std::ofstream os(truth_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + truth_path);
  os << truth.dump(2) << '\n';

  std::cout << "wrote " << data_path << " and " << truth_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariate-dependent DPM samplers with variable selection"};
  app.set_version_flag("--version", rpmx::kVersion);
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string sim_scenario = "scenario1";
  std::uint64_t sim_seed = 1;
  std::string sim_out = ".";
  sim->add_option("--scenario", sim_scenario, "scenario1 or smoke");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output directory")->required();

  auto* fit = app.add_subcommand("fit", "Run an MCMC experiment");
  std::string fit_model, fit_data, fit_config, fit_out, fit_manifest;
  std::uint64_t fit_seed = 0;
  int fit_chains = 0;
  fit->add_option("--model", fit_model, "ssm, rpms, psbp or pr");
  fit->add_option("--data", fit_data, "dataset CSV");
  fit->add_option("--config", fit_config, "key=value config file");
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed, "RNG seed override");
  auto* fit_chains_opt = fit->add_option("--chains", fit_chains, "chain count override");
  fit->add_option("--from-manifest", fit_manifest, "rerun a recorded experiment");
  fit->add_option("--out", fit_out, "output directory")->required();

  auto* summ = app.add_subcommand("summarize", "Recompute summaries for a fit directory");
  std::string summ_dir, summ_out;
  summ->add_option("--dir", summ_dir, "fit output directory")->required();
  summ->add_option("--out", summ_out, "summary JSON path (default <dir>/summary.json)");

  auto* pred = app.add_subcommand("predict", "Predictive density for one covariate profile");
  std::string pred_dir, pred_profile, pred_grid = "-20:20:401", pred_out;
  pred->add_option("--dir", pred_dir, "fit output directory")->required();
  pred->add_option("--profile", pred_profile, "space-separated covariate values")->required();
  pred->add_option("--grid", pred_grid, "lo:hi:points");
  pred->add_option("--out", pred_out, "density CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_seed, sim_out);

    if (fit->parsed()) {
      rpmx::ExperimentArtifacts artifacts;
      if (!fit_manifest.empty()) {
        artifacts = rpmx::run_from_manifest(fit_manifest, fit_out);
      } else {
        if (fit_data.empty())
          throw rpmx::config_error({"fit needs --data (or --from-manifest)"});
        std::map<std::string, std::string> kv;
        if (!fit_config.empty()) kv = rpmx::read_config_file(fit_config);
        if (!fit_model.empty()) kv["model"] = fit_model;
        if (*fit_seed_opt) kv["seed"] = std::to_string(fit_seed);
        if (*fit_chains_opt) kv["chains"] = std::to_string(fit_chains);
        rpmx::ExperimentConfig cfg = rpmx::config_from_pairs(std::move(kv));
        artifacts = rpmx::run_experiment(cfg, fit_data, fit_out);
      }
      if (artifacts.dropped_rows > 0)
        std::cout << "note: " << artifacts.dropped_rows
                  << " row(s) dropped for missing cells\n";
      std::cout << "wrote " << artifacts.chain_files.size() << " chain file(s), "
                << artifacts.summary_file << " and " << artifacts.manifest_file
                << "\n";
      return 0;
    }

    if (summ->parsed()) {
      if (summ_out.empty())
        summ_out = (fs::path(summ_dir) / "summary.json").string();
      rpmx::summarize_directory(summ_dir, summ_out);
      std::cout << "wrote " << summ_out << "\n";
      return 0;
    }

    if (pred->parsed()) {
      std::vector<double> profile = parse_profile(pred_profile);
      double lo, hi;
      int points;
      parse_grid(pred_grid, lo, hi, points);
      rpmx::predict_from_directory(pred_dir, profile, lo, hi, points, pred_out);
      std::cout << "wrote " << pred_out << "\n";
      return 0;
    }
  } catch (const rpmx::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const rpmx::config_error& e) {
    for (const auto& msg : e.messages()) std::cerr << "error: " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
