#include "rpmx/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rpmx/errors.hpp"
#include "rpmx/profile_regression.hpp"
#include "rpmx/psbp.hpp"
#include "rpmx/rpms.hpp"
#include "rpmx/summaries.hpp"
#include "rpmx/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rpmx {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int occupied_components(const std::vector<int>& assign) {
  std::vector<int> labels(assign);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return static_cast<int>(labels.size());
}

ArchiveMeta make_meta(const ExperimentConfig& cfg, const Dataset& data,
                      int chain, std::uint64_t stream, bool fixed) {
  ArchiveMeta meta;
  meta.model = cfg.model;
  meta.iterations = cfg.iterations;
  meta.burn_in = cfg.burn_in;
  meta.thinning = cfg.thinning;
  meta.n = data.n();
  meta.d = data.d();
  meta.chain = chain;
  meta.seed = cfg.seed;
  meta.stream = stream;
  meta.fixed_partition = fixed;
  return meta;
}

template <class State, class SweepFn, class RecordFn>
DrawArchive run_chain(Rng rng, State st, const ExperimentConfig& cfg,
                      ArchiveMeta meta, std::vector<FieldSpec> schema,
                      SweepFn&& sweep, RecordFn&& record,
                      const std::string& dump_path) {
  DrawArchive ar(std::move(meta), std::move(schema));
  long iter = 0;
  try {
    for (iter = 0; iter < cfg.iterations; ++iter) {
      sweep(rng, st);
      if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thinning == 0)
        ar.append(record(st, iter));
    }
  } catch (const numeric_error& e) {
    DrawArchive dump(ar.meta(), ar.schema());
    dump.append(record(st, iter));
    dump.save_file(dump_path);
    throw numeric_error(std::string(e.what()) + " at iteration " +
                        std::to_string(iter) + "; state dump written to " +
                        dump_path);
  }
  return ar;
}

DrawArchive run_model_chain(const ExperimentConfig& cfg, const Dataset& data,
                            int chain, std::uint64_t stream,
                            const std::vector<int>* fixed_assign,
                            const std::string& dump_path) {
  Rng rng(cfg.seed, stream);
  bool fixed = fixed_assign != nullptr;
  ArchiveMeta meta = make_meta(cfg, data, chain, stream, fixed);

  if (cfg.model == "rpms" || cfg.model == "ssm") {
    RpmsMode mode = cfg.model == "rpms" ? RpmsMode::Rpms : RpmsMode::Ssm;
    RpmsPriors priors = cfg.rpms_priors();
    RpmsState st = rpms_init(data, mode, priors);
    if (fixed) {
      st.partition = Partition::from_assign(*fixed_assign);
      st.clusters.assign(static_cast<std::size_t>(st.partition.k()),
                         st.clusters.front());
    }
    return run_chain(
        rng, std::move(st), cfg, std::move(meta),
        rpms_schema(mode, priors.intercept),
        [&](Rng& r, RpmsState& s) { rpms_sweep(r, s, data, priors, fixed); },
        [](const RpmsState& s, long it) { return rpms_record(s, it); },
        dump_path);
  }
  if (cfg.model == "psbp") {
    PsbpPriors priors = cfg.psbp_priors();
    PsbpState st = psbp_init(data, priors);
    return run_chain(
        rng, std::move(st), cfg, std::move(meta), psbp_schema(),
        [&](Rng& r, PsbpState& s) { psbp_sweep(r, s, data, priors); },
        [](const PsbpState& s, long it) { return psbp_record(s, it); },
        dump_path);
  }
  if (cfg.model == "pr") {
    PrPriors priors = cfg.pr_priors();
    PrEmpirical emp = pr_empirical_from_data(data);
    PrState st = pr_init(data, priors);
    return run_chain(
        rng, std::move(st), cfg, std::move(meta), pr_schema(),
        [&](Rng& r, PrState& s) { pr_sweep(r, s, data, emp, priors); },
        [](const PrState& s, long it) { return pr_record(s, it); }, dump_path);
  }
  throw config_error({"fit requires model to be one of ssm, rpms, psbp, pr"});
}

json autocorr_entry(const std::vector<double>& series) {
  json j = json::object();
  for (int lag : {1, 5, 10})
    if (static_cast<std::size_t>(lag) < series.size())
      j["lag" + std::to_string(lag)] = autocorrelation(series, lag);
  return j;
}

std::vector<double> per_covariate_inclusion(const DrawArchive& pooled) {
  const std::string& model = pooled.meta().model;
  auto d = static_cast<std::size_t>(pooled.meta().d);
  std::vector<double> incl(d, 0.0);
  if (model == "psbp") {
    for (std::size_t j = 0; j < d; ++j)
      incl[j] = psbp_inclusion_probability(pooled, static_cast<int>(j));
  } else if (model == "pr") {
    for (std::size_t j = 0; j < d; ++j)
      incl[j] = pr_relevance(pooled, static_cast<int>(j));
  } else {
    incl = rpms_inclusion_weighted(pooled);
  }
  return incl;
}

json build_summary_core(const DrawArchive& pooled,
                        const std::vector<DrawArchive>& chains,
                        const std::vector<std::string>& names) {
  json j;
  j["model"] = pooled.meta().model;
  j["n"] = pooled.meta().n;
  j["d"] = pooled.meta().d;
  j["chains"] = static_cast<int>(chains.size());
  j["retained_per_chain"] = chains.front().size();
  j["covariates"] = names;

  std::vector<double> incl = per_covariate_inclusion(pooled);
  json jincl = json::object();
  for (std::size_t d = 0; d < incl.size(); ++d) jincl[names[d]] = incl[d];
  j["inclusion"] = jincl;

  PointEstimate pe = binder_point_estimate(pooled);
  j["binder"] = {{"assign", pe.assign},
                 {"loss", pe.loss},
                 {"draw_index", pe.draw_index}};
  j["k_posterior"] = cluster_count_distribution(pooled);

  json acf = json::array();
  for (const auto& chain : chains) {
    std::vector<double> lam(chain.size()), k(chain.size());
    for (std::size_t t = 0; t < chain.size(); ++t) {
      lam[t] = chain.scalar(t, "lambda");
      k[t] = occupied_components(chain.assign(t));
    }
    acf.push_back({{"lambda", autocorr_entry(lam)}, {"k", autocorr_entry(k)}});
  }
  j["autocorrelation"] = acf;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error({"cannot open " + path});
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw config_error({path + ": " + e.what()});
  }
  return j;
}

void write_density_csv(const std::string& path, std::span<const double> grid,
                       std::span<const double> density) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "y,density\n";
  for (std::size_t g = 0; g < grid.size(); ++g)
    os << fmt(grid[g]) << ',' << fmt(density[g]) << '\n';
}

struct PredictiveOut {
  std::vector<double> density;
  double mean = 0.0;
};

PredictiveOut run_predictive(const DrawArchive& pooled, const Dataset& data,
                             const ExperimentConfig& cfg,
                             const std::vector<double>& profile,
                             std::span<const double> grid,
                             std::uint64_t stream) {
  PredictiveOut out;
  const std::string& model = pooled.meta().model;
  Rng rng(cfg.seed, stream);
  if (model == "psbp") {
    out.density = psbp_predictive_density(pooled, profile, grid);
    out.mean = psbp_predictive_mean(pooled, profile);
  } else if (model == "pr") {
    PrPriors priors = cfg.pr_priors();
    PrEmpirical emp = pr_empirical_from_data(data);
    out.density = pr_predictive_density(pooled, emp, profile, grid, rng, priors);
    Rng rng2(cfg.seed, stream);
    out.mean = pr_predictive_mean(pooled, emp, profile, rng2, priors);
  } else {
    RpmsMode mode = model == "rpms" ? RpmsMode::Rpms : RpmsMode::Ssm;
    RpmsPriors priors = cfg.rpms_priors();
    out.density = rpms_predictive_density(pooled, profile, grid, mode, rng,
                                          priors, data.types);
    Rng rng2(cfg.seed, stream);
    out.mean =
        rpms_predictive_mean(pooled, profile, mode, rng2, priors, data.types);
  }
  return out;
}

ExperimentConfig config_from_manifest(const json& manifest) {
  if (!manifest.contains("config") || !manifest["config"].is_object())
    throw config_error({"manifest has no config object"});
  std::map<std::string, std::string> kv;
  for (const auto& item : manifest["config"].items()) {
    if (!item.value().is_string())
      throw config_error({"manifest config values must be strings"});
    kv[item.key()] = item.value().get<std::string>();
  }
  return config_from_pairs(std::move(kv));
}

}  // namespace

std::uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error({"cannot open " + path + " for hashing"});
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 14];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

DrawArchive merge_archives(const std::vector<DrawArchive>& chains) {
  if (chains.empty()) throw std::invalid_argument("merge of zero archives");
  DrawArchive pooled(chains.front().meta(), chains.front().schema());
  for (const auto& chain : chains)
    for (std::size_t t = 0; t < chain.size(); ++t)
      pooled.append(chain.record(t));
  return pooled;
}

ExperimentArtifacts run_experiment(const ExperimentConfig& cfg,
                                   const std::string& dataset_path,
                                   const std::string& out_dir) {
  if (cfg.model.empty())
    throw config_error({"fit requires a model (set model= in the config)"});
  fs::create_directories(out_dir);
  auto at = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  DataSchema schema{cfg.response, cfg.binary_columns, cfg.discretize};
  LoadReport report;
  Dataset data = load_dataset(dataset_path, schema, &report);

  for (const auto& profile : cfg.predict_profiles)
    if (static_cast<int>(profile.size()) != data.d())
      throw config_error({"predict_profiles entries must have " +
                          std::to_string(data.d()) + " values"});

  ExperimentArtifacts artifacts;
  artifacts.dropped_rows = report.dropped_rows;

  // Chains are independent; one thread each.
  std::vector<DrawArchive> chains(static_cast<std::size_t>(cfg.chains));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(cfg.chains));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(cfg.chains));
  for (int c = 0; c < cfg.chains; ++c) {
    pool.emplace_back([&, c] {
      try {
        chains[static_cast<std::size_t>(c)] = run_model_chain(
            cfg, data, c, static_cast<std::uint64_t>(c), nullptr,
            at("state_dump_chain_" + std::to_string(c) + ".csv"));
      } catch (...) {
        failures[static_cast<std::size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  for (int c = 0; c < cfg.chains; ++c) {
    std::string path = at("chain_" + std::to_string(c) + ".csv");
    chains[static_cast<std::size_t>(c)].save_file(path);
    artifacts.chain_files.push_back(path);
  }

  DrawArchive pooled = merge_archives(chains);
  json summary = build_summary_core(pooled, chains, data.names);
  summary["dropped_rows"] = report.dropped_rows;

  // Predictive grids, one fresh stream per profile.
  std::vector<double> grid = cfg.grid();
  json jpred = json::array();
  for (std::size_t p = 0; p < cfg.predict_profiles.size(); ++p) {
    auto stream = static_cast<std::uint64_t>(cfg.chains) + 1 + p;
    PredictiveOut out =
        run_predictive(pooled, data, cfg, cfg.predict_profiles[p], grid, stream);
    std::string name = "predictive_" + std::to_string(p) + ".csv";
    write_density_csv(at(name), grid, out.density);
    artifacts.predictive_files.push_back(at(name));
    jpred.push_back({{"profile", cfg.predict_profiles[p]},
                     {"mean", out.mean},
                     {"file", name}});
  }
  if (!jpred.empty()) summary["predictive"] = jpred;

  // Two-step selection summary: freeze the Binder partition, rerun the
  // non-allocation conditionals, read inclusion off the archived spikes.
  if ((cfg.model == "rpms" || cfg.model == "ssm") && cfg.two_step_inclusion) {
    std::vector<int> fixed = summary["binder"]["assign"].get<std::vector<int>>();
    DrawArchive cond = run_model_chain(
        cfg, data, cfg.chains, static_cast<std::uint64_t>(cfg.chains), &fixed,
        at("state_dump_conditional.csv"));
    artifacts.conditional_file = at("conditional.csv");
    cond.save_file(artifacts.conditional_file);
    Matrix<double> incl = marginal_inclusion_by_cluster(cond);
    json rows = json::array();
    for (std::size_t jrow = 0; jrow < incl.rows(); ++jrow)
      rows.push_back(std::vector<double>(incl.row(jrow).begin(),
                                         incl.row(jrow).end()));
    summary["inclusion_by_cluster"] = rows;
  }

  artifacts.summary_file = at("summary.json");
  write_json(artifacts.summary_file, summary);

  json manifest;
  manifest["version"] = kVersion;
  manifest["dataset"] = dataset_path;
  manifest["dataset_hash"] = fmt_hash(file_hash(dataset_path));
  json jcfg = json::object();
  for (const auto& kvp : cfg.raw) jcfg[kvp.first] = kvp.second;
  manifest["config"] = jcfg;
  artifacts.manifest_file = at("manifest.json");
  write_json(artifacts.manifest_file, manifest);

  return artifacts;
}

ExperimentArtifacts run_from_manifest(const std::string& manifest_path,
                                      const std::string& out_dir) {
  json manifest = read_json(manifest_path);
  ExperimentConfig cfg = config_from_manifest(manifest);
  if (!manifest.contains("dataset"))
    throw config_error({"manifest has no dataset path"});
  std::string dataset = manifest["dataset"].get<std::string>();
  if (manifest.contains("dataset_hash")) {
    std::string want = manifest["dataset_hash"].get<std::string>();
    std::string got = fmt_hash(file_hash(dataset));
    if (want != got)
      throw config_error({"dataset " + dataset + " hash mismatch: manifest " +
                          want + ", file " + got});
  }
  return run_experiment(cfg, dataset, out_dir);
}

void summarize_directory(const std::string& dir, const std::string& out_file) {
  json manifest = read_json((fs::path(dir) / "manifest.json").string());
  ExperimentConfig cfg = config_from_manifest(manifest);
  std::string dataset = manifest["dataset"].get<std::string>();
  DataSchema schema{cfg.response, cfg.binary_columns, cfg.discretize};
  Dataset data = load_dataset(dataset, schema, nullptr);

  std::vector<DrawArchive> chains;
  for (int c = 0; c < cfg.chains; ++c) {
    std::string path = (fs::path(dir) / ("chain_" + std::to_string(c) + ".csv")).string();
    if (!fs::exists(path)) throw config_error({"missing archive " + path});
    chains.push_back(DrawArchive::load_file(path));
  }
  DrawArchive pooled = merge_archives(chains);
  json summary = build_summary_core(pooled, chains, data.names);

  std::string cond_path = (fs::path(dir) / "conditional.csv").string();
  if (fs::exists(cond_path)) {
    DrawArchive cond = DrawArchive::load_file(cond_path);
    Matrix<double> incl = marginal_inclusion_by_cluster(cond);
    json rows = json::array();
    for (std::size_t jrow = 0; jrow < incl.rows(); ++jrow)
      rows.push_back(std::vector<double>(incl.row(jrow).begin(),
                                         incl.row(jrow).end()));
    summary["inclusion_by_cluster"] = rows;
  }
  write_json(out_file, summary);
}

void predict_from_directory(const std::string& dir,
                            const std::vector<double>& profile, double lo,
                            double hi, int points, const std::string& out_file) {
  if (points < 2) throw config_error({"grid needs at least 2 points"});
  if (hi <= lo) throw config_error({"grid upper bound must exceed lower bound"});
  json manifest = read_json((fs::path(dir) / "manifest.json").string());
  ExperimentConfig cfg = config_from_manifest(manifest);
  std::string dataset = manifest["dataset"].get<std::string>();
  DataSchema schema{cfg.response, cfg.binary_columns, cfg.discretize};
  Dataset data = load_dataset(dataset, schema, nullptr);
  if (static_cast<int>(profile.size()) != data.d())
    throw config_error({"profile must have " + std::to_string(data.d()) +
                        " values"});

  std::vector<DrawArchive> chains;
  for (int c = 0; c < cfg.chains; ++c) {
    std::string path = (fs::path(dir) / ("chain_" + std::to_string(c) + ".csv")).string();
    if (!fs::exists(path)) throw config_error({"missing archive " + path});
    chains.push_back(DrawArchive::load_file(path));
  }
  DrawArchive pooled = merge_archives(chains);

  std::vector<double> grid(static_cast<std::size_t>(points));
  double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t g = 0; g < grid.size(); ++g)
    grid[g] = lo + step * static_cast<double>(g);

  PredictiveOut out = run_predictive(
      pooled, data, cfg, profile, grid,
      static_cast<std::uint64_t>(cfg.chains) + 1);
  write_density_csv(out_file, grid, out.density);
}

}  // namespace rpmx
