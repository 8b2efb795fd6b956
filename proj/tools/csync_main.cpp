// carriersync command-line front end: seeded experiments, scaling sweeps,
// search-space oracle runs, hierarchy planning and bound tables, all emitting
// CSV plus a short human summary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csync/analysis.hpp"
#include "csync/clustering.hpp"
#include "csync/csv.hpp"
#include "csync/experiment.hpp"
#include "csync/search_space.hpp"

namespace {

using namespace csync;

std::string resolve_out_dir(const std::string& cli_value) {
  if (const char* env = std::getenv(kOutDirEnvVar); env != nullptr && *env != '\0') return env;
  return cli_value;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) sizes.push_back(std::stoull(item));
  }
  return sizes;
}

int cmd_simulate(const std::string& config_path, ExperimentConfig cfg, bool gate_flag,
                 const std::string& out_dir) {
  (void)config_path;
  if (gate_flag) cfg.gate.enabled = true;
  const std::string dir = resolve_out_dir(out_dir.empty() ? cfg.out_dir : out_dir);
  const ResultBundle bundle = run_experiment(cfg);
  write_bundle(bundle, dir);

  std::cout << "scenario " << cfg.scenario << ": " << cfg.replication << " runs, "
            << cfg.optimizer.stop.max_iterations << " iterations, metric " << to_string(cfg.metric)
            << "\n";
  for (const RunSummary& s : bundle.summaries) {
    std::cout << "  run " << s.replicate << " [" << s.status << "] final "
              << format_double(s.final_feedback) << " aligned " << format_double(s.aligned_fraction)
              << " circ_var " << format_double(s.circular_variance) << "\n";
  }
  std::cout << "wrote " << dir << "/series.csv, summary.csv, config_echo.ini\n";
  if (bundle.gate.enabled) {
    std::cout << "gate: " << (bundle.gate.passed ? "PASS" : "FAIL") << " (" << bundle.gate.detail
              << ")\n";
    return bundle.gate.passed ? 0 : 1;
  }
  return 0;
}

int cmd_scaling(const std::string& sizes_csv, std::size_t k, std::size_t reps, double cap_factor,
                std::uint64_t seed, const std::string& out_dir, bool gate_flag) {
  const std::vector<std::size_t> sizes = parse_sizes(sizes_csv);
  if (sizes.size() < 3) throw std::runtime_error("scaling: need at least 3 sizes");

  std::vector<SyncTimeEntry> entries;
  std::ostringstream long_csv;
  long_csv << "n,replicate,hitting_iteration,censored\n";
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t n = sizes[si];
    OptimizerConfig cfg;
    cfg.grid_k = k;
    cfg.stop.max_iterations =
        static_cast<std::size_t>(bound_global_upper(n, k) * cap_factor);
    LoopOptions options;
    options.optimum_k = k;
    options.stop_on_optimum = true;

    std::vector<RunTrace> traces;
    traces.reserve(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::uint64_t rep_seed = derive_stream(seed, si * 10000 + rep);
      const NodeField field = place_nodes(n, FieldParams{}, derive_stream(rep_seed, 10));
      Rng init_rng(derive_stream(rep_seed, 11));
      PhaseState init = PhaseState::random(n, init_rng);
      const PhaseGrid grid(n, k);
      for (double& g : init.gamma) g = grid.interval_center(grid.snap_index(g));
      traces.push_back(run_feedback_loop(field, init, cfg, Metric::kSumAmplitude,
                                         NoiseModel::none(), derive_stream(rep_seed, 12), options));
    }
    SyncTimeEntry entry = measure_sync_time(traces, hit_by_optimum());
    entry.n = n;
    for (std::size_t rep = 0; rep < entry.hitting_times.size(); ++rep) {
      long_csv << n << ',' << rep << ',' << format_double(entry.hitting_times[rep]) << ','
               << (entry.censored[rep] ? 1 : 0) << "\n";
    }
    entries.push_back(std::move(entry));
  }

  const BoundSpec reference{BoundFamily::kGlobalTheta, sizes.front(), k, 1.0};
  const ScalingReport report = fit_scaling(entries, reference);

  std::ostringstream csv;
  csv << "n,median,q1,q3,censored_fraction,ratio\n";
  bool medians_bounded = true;
  for (const ScalingRow& row : report.rows) {
    csv << row.n << ',' << format_double(row.median) << ',' << format_double(row.q1) << ','
        << format_double(row.q3) << ',' << format_double(row.censored_fraction) << ','
        << format_double(row.ratio) << "\n";
    if (row.median > bound_global_upper(row.n, k)) medians_bounded = false;
    std::cout << "n=" << row.n << " median=" << format_double(row.median)
              << " ratio=" << format_double(row.ratio) << (row.excluded ? " (excluded)" : "")
              << "\n";
  }
  const std::string dir = resolve_out_dir(out_dir);
  write_file(dir, "scaling.csv", csv.str());
  write_file(dir, "scaling_long.csv", long_csv.str());
  for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
  std::cout << "ratio spread " << format_double(report.spread)
            << (report.consistent ? " (consistent with n*k*ln n)" : " (NOT consistent)") << "\n";
  std::cout << "medians within e*n*k*(ln n + 1): " << (medians_bounded ? "yes" : "no") << "\n";
  std::cout << "wrote " << dir << "/scaling.csv, scaling_long.csv\n";
  if (gate_flag) return report.consistent && medians_bounded ? 0 : 1;
  return 0;
}

int cmd_oracle(std::size_t n, std::size_t k, std::size_t seed_count, std::uint64_t seed,
               const std::string& out_dir, bool gate_flag) {
  std::ostringstream csv;
  csv << "seed,holds,configurations,optima\n";
  bool all_hold = true;
  for (std::size_t s = 0; s < seed_count; ++s) {
    const NodeField field = place_nodes(n, FieldParams{}, derive_stream(seed, s));
    const NoLocalOptimaReport report = verify_no_local_optima(field, k);
    csv << s << ',' << (report.holds ? 1 : 0) << ',' << report.configurations_checked << ','
        << report.optima_count << "\n";
    if (!report.holds) {
      all_hold = false;
      std::cout << "counterexample at seed " << s << ": intervals";
      for (std::size_t idx : *report.counterexample) std::cout << ' ' << idx;
      std::cout << "\n";
    }
  }
  const std::string dir = resolve_out_dir(out_dir);
  write_file(dir, "oracle.csv", csv.str());
  std::cout << "n=" << n << " k=" << k << " over " << seed_count << " fields: "
            << (all_hold ? "no local optima" : "LOCAL OPTIMA FOUND") << "\n";
  std::cout << "wrote " << dir << "/oracle.csv\n";
  if (gate_flag) return all_hold ? 0 : 1;
  return 0;
}

int cmd_cluster_plan(std::size_t n, std::size_t eta, double c, std::size_t k,
                     const std::string& objective_name, const std::string& variant_name,
                     const std::string& out_dir) {
  const Objective objective = objective_name == "energy" ? Objective::kEnergy : Objective::kTime;
  const CostVariant variant =
      variant_name == "verbatim" ? CostVariant::kVerbatim : CostVariant::kAdditive;
  CostModel model;
  model.c = c;
  model.k = k;
  const HierarchyResult result = optimal_hierarchy(n, eta, model, objective, variant);
  const double flat = model.flat(n, objective);

  std::ostringstream csv;
  csv << "n,eta,c,k,objective,variant,cost,flat_cost,plan\n";
  csv << n << ',' << eta << ',' << format_double(c) << ',' << k << ',' << objective_name << ','
      << variant_name << ',' << format_double(result.cost) << ',' << format_double(flat) << ",\""
      << serialize_plan(result.plan) << "\"\n";
  const std::string dir = resolve_out_dir(out_dir);
  write_file(dir, "cluster_plan.csv", csv.str());
  std::cout << "optimal plan: " << serialize_plan(result.plan) << "\n";
  std::cout << "cost " << format_double(result.cost) << " vs flat " << format_double(flat) << "\n";
  std::cout << "wrote " << dir << "/cluster_plan.csv\n";
  return 0;
}

int cmd_optimal_algo(std::size_t n, double threshold, std::size_t rounds_cap,
                     const std::string& noise_kind, double noise_power, std::uint64_t seed,
                     const std::string& out_dir, bool gate_flag) {
  const NodeField field = place_nodes(n, FieldParams{}, derive_stream(seed, 10));
  Rng init_rng(derive_stream(seed, 11));
  const PhaseState init = PhaseState::random(n, init_rng);
  const NoiseModel noise =
      noise_kind == "awgn" ? NoiseModel::awgn(noise_power) : NoiseModel::none();
  OptimalAlgoConfig cfg;
  cfg.deviation_threshold = threshold;
  cfg.max_rounds = rounds_cap;
  const OptimalRunResult result =
      run_optimal_algorithm(field, init, noise, cfg, derive_stream(seed, 12));

  std::ostringstream csv;
  csv << "round,node,fit_ok,deviation,committed,fixed_after\n";
  for (const RoundRecord& r : result.rounds) {
    for (const MoverOutcome& m : r.movers) {
      csv << r.round << ',' << m.node << ',' << (m.fit_ok ? 1 : 0) << ','
          << format_double(m.deviation) << ',' << (m.committed ? 1 : 0) << ','
          << r.fixed_count_after << "\n";
    }
  }
  const std::string dir = resolve_out_dir(out_dir);
  write_file(dir, "optimal_algo_rounds.csv", csv.str());

  const double amp = amplitude_feedback(field, result.trace.terminal_state).score;
  const double ratio = amp / field.rss_sum();
  std::cout << "slots " << result.slots << ", fixed " << result.fixed_count << "/" << n
            << ", amplitude ratio " << format_double(ratio) << "\n";
  std::cout << "wrote " << dir << "/optimal_algo_rounds.csv\n";
  if (gate_flag) return result.fixed_count == n ? 0 : 1;
  return 0;
}

int cmd_bounds(std::size_t n, std::size_t k, double neighbourhood, const std::string& out_dir) {
  std::ostringstream csv;
  csv << "n,k,neighbourhood,global_upper,global_theta,local_theta\n";
  const double upper = bound_global_upper(n, k);
  const double theta = bound_global_theta(n, k);
  const double local = bound_local_reference(n, neighbourhood, k);
  csv << n << ',' << k << ',' << format_double(neighbourhood) << ',' << format_double(upper) << ','
      << format_double(theta) << ',' << format_double(local) << "\n";
  const std::string dir = resolve_out_dir(out_dir);
  write_file(dir, "bounds.csv", csv.str());
  char line[256];
  std::snprintf(line, sizeof(line), "n=%zu k=%zu  e*n*k*(ln n + 1) = %.1f  n*k*ln n = %.1f  local(N=%g) = %.1f",
                n, k, upper, theta, neighbourhood, local);
  std::cout << line << "\n";
  std::cout << "wrote " << dir << "/bounds.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carriersync: feedback-based distributed carrier-phase synchronisation lab"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config;
  std::string sim_out;
  bool sim_gate = false;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  std::size_t sim_n = 0, sim_iters = 0, sim_reps = 0, sim_jobs = 0, sim_grid_k = 0;
  std::string sim_metric, sim_dist, sim_revert, sim_noise;
  double sim_pmut = -2.0, sim_nb = 0.0, sim_variance = 0.0, sim_noise_power = -1.0;
  bool sim_full_trace = false;
  auto* simulate = app.add_subcommand("simulate", "run a seeded batch experiment");
  simulate->add_option("--config", sim_config, "experiment config file (defaults when omitted)");
  simulate->add_option("--n", sim_n, "node count override");
  simulate->add_option("--iterations", sim_iters, "iteration cap override");
  simulate->add_option("--reps", sim_reps, "replication override");
  simulate->add_option("--metric", sim_metric, "rmse | amplitude | snr");
  simulate->add_option("--pmut", sim_pmut, "mutation probability (-1 = 1/n)");
  simulate->add_option("--neighbourhood", sim_nb, "neighbourhood size in radians");
  simulate->add_option("--dist", sim_dist, "uniform | normal");
  simulate->add_option("--variance", sim_variance, "normal mutation variance (rad^2)");
  simulate->add_option("--revert", sim_revert, "revert | complementary");
  simulate->add_option("--grid-k", sim_grid_k, "snap proposals to k interval centres");
  simulate->add_option("--noise", sim_noise, "none | awgn");
  simulate->add_option("--noise-power", sim_noise_power, "AWGN power in watts");
  simulate->add_option("--jobs", sim_jobs, "parallel replicates");
  simulate->add_flag("--full-trace", sim_full_trace, "emit every iteration in series.csv");
  simulate->add_option("--seed", sim_seed, "base seed")->each([&](const std::string&) {
    sim_seed_set = true;
  });
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_flag("--gate", sim_gate, "enable the alignment gate (exit code reflects it)");

  // scaling
  std::string sca_sizes = "8,16,32,64";
  std::size_t sca_k = 16, sca_reps = 20;
  double sca_cap = 3.0;
  std::uint64_t sca_seed = 1;
  std::string sca_out = "out";
  bool sca_gate = false;
  auto* scaling = app.add_subcommand("scaling", "measure discrete sync times across sizes");
  scaling->add_option("--sizes", sca_sizes, "comma-separated node counts");
  scaling->add_option("--k", sca_k, "phase intervals");
  scaling->add_option("--reps", sca_reps, "replicates per size");
  scaling->add_option("--cap-factor", sca_cap, "iteration cap as a multiple of the upper bound");
  scaling->add_option("--seed", sca_seed, "base seed");
  scaling->add_option("--out", sca_out, "output directory");
  scaling->add_flag("--gate", sca_gate, "exit nonzero unless spread <= 2 and medians <= bound");

  // oracle
  std::size_t ora_n = 3, ora_k = 8, ora_seeds = 50;
  std::uint64_t ora_seed = 1;
  std::string ora_out = "out";
  bool ora_gate = false;
  auto* oracle = app.add_subcommand("oracle", "exhaustive no-local-optima verification");
  oracle->add_option("--n", ora_n, "node count");
  oracle->add_option("--k", ora_k, "phase intervals");
  oracle->add_option("--seeds", ora_seeds, "number of random fields");
  oracle->add_option("--seed", ora_seed, "base seed");
  oracle->add_option("--out", ora_out, "output directory");
  oracle->add_flag("--gate", ora_gate, "exit nonzero if any field has a local optimum");

  // cluster-plan
  std::size_t clu_n = 64, clu_eta = 4, clu_k = 16;
  double clu_c = 1.0;
  std::string clu_objective = "time", clu_variant = "additive", clu_out = "out";
  auto* cluster = app.add_subcommand("cluster-plan", "optimal hierarchy via dynamic programming");
  cluster->add_option("--n", clu_n, "node count");
  cluster->add_option("--eta", clu_eta, "minimum cluster size");
  cluster->add_option("--c", clu_c, "cost constant");
  cluster->add_option("--k", clu_k, "phase intervals");
  cluster->add_option("--objective", clu_objective, "time | energy");
  cluster->add_option("--variant", clu_variant, "additive | verbatim");
  cluster->add_option("--out", clu_out, "output directory");

  // optimal-algo
  std::size_t opt_n = 100, opt_rounds = 0;
  double opt_threshold = 0.01, opt_noise_power = 5.011872336272715e-14;
  std::string opt_noise = "none", opt_out = "out";
  std::uint64_t opt_seed = 1;
  bool opt_gate = false;
  auto* optimal = app.add_subcommand("optimal-algo", "run the 4-slot sinusoid-fitting algorithm");
  optimal->add_option("--n", opt_n, "node count");
  optimal->add_option("--threshold", opt_threshold, "collision deviation threshold");
  optimal->add_option("--rounds-cap", opt_rounds, "maximum rounds (0 = 20n)");
  optimal->add_option("--noise", opt_noise, "none | awgn");
  optimal->add_option("--noise-power", opt_noise_power, "AWGN power in watts");
  optimal->add_option("--seed", opt_seed, "base seed");
  optimal->add_option("--out", opt_out, "output directory");
  optimal->add_flag("--gate", opt_gate, "exit nonzero unless every node fixes");

  // bounds
  std::size_t bnd_n = 100, bnd_k = 8;
  double bnd_nb = 1.0;
  std::string bnd_out = "out";
  auto* bounds = app.add_subcommand("bounds", "closed-form bound table");
  bounds->add_option("--n", bnd_n, "node count");
  bounds->add_option("--k", bnd_k, "phase intervals");
  bounds->add_option("--neighbourhood", bnd_nb, "local neighbourhood in interval units");
  bounds->add_option("--out", bnd_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      ExperimentConfig cfg = sim_config.empty() ? ExperimentConfig{} : load_config(sim_config);
      if (sim_n > 0) cfg.n = sim_n;
      if (sim_iters > 0) cfg.optimizer.stop.max_iterations = sim_iters;
      if (sim_reps > 0) cfg.replication = sim_reps;
      if (sim_jobs > 0) cfg.jobs = sim_jobs;
      if (!sim_metric.empty()) {
        const auto m = metric_from_string(sim_metric);
        if (!m) throw std::runtime_error("unknown metric: " + sim_metric);
        cfg.metric = *m;
      }
      if (sim_pmut >= -1.0) cfg.optimizer.p_mut = sim_pmut < 0 ? csync::kAutoPMut : sim_pmut;
      if (sim_nb > 0.0) cfg.optimizer.neighbourhood = sim_nb;
      if (!sim_dist.empty()) {
        const auto d = distribution_from_string(sim_dist);
        if (!d) throw std::runtime_error("unknown distribution: " + sim_dist);
        cfg.optimizer.dist = *d;
      }
      if (sim_variance > 0.0) cfg.optimizer.variance = sim_variance;
      if (!sim_revert.empty()) {
        const auto r = revert_policy_from_string(sim_revert);
        if (!r) throw std::runtime_error("unknown revert policy: " + sim_revert);
        cfg.optimizer.revert_policy = *r;
      }
      if (sim_grid_k > 0) cfg.optimizer.grid_k = sim_grid_k;
      if (!sim_noise.empty()) {
        if (sim_noise == "none") {
          cfg.noise = NoiseModel::none();
        } else if (sim_noise == "awgn") {
          cfg.noise = NoiseModel::awgn(sim_noise_power > 0 ? sim_noise_power
                                                           : 5.011872336272715e-14);
        } else {
          throw std::runtime_error("unknown noise kind: " + sim_noise);
        }
      }
      if (sim_full_trace) cfg.full_trace = true;
      if (sim_seed_set) cfg.base_seed = sim_seed;
      cfg.validate();
      return cmd_simulate(sim_config, cfg, sim_gate, sim_out);
    }
    if (scaling->parsed()) {
      return cmd_scaling(sca_sizes, sca_k, sca_reps, sca_cap, sca_seed, sca_out, sca_gate);
    }
    if (oracle->parsed()) {
      return cmd_oracle(ora_n, ora_k, ora_seeds, ora_seed, ora_out, ora_gate);
    }
    if (cluster->parsed()) {
      return cmd_cluster_plan(clu_n, clu_eta, clu_c, clu_k, clu_objective, clu_variant, clu_out);
    }
    if (optimal->parsed()) {
      return cmd_optimal_algo(opt_n, opt_threshold, opt_rounds, opt_noise, opt_noise_power,
                              opt_seed, opt_out, opt_gate);
    }
    if (bounds->parsed()) {
      return cmd_bounds(bnd_n, bnd_k, bnd_nb, bnd_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
