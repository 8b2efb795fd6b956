#include "csync/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "csync/config.hpp"
#include "csync/csv.hpp"
#include "csync/errors.hpp"

namespace csync {

void ExperimentConfig::validate() const {
  if (n < 1) throw validation_error("n must be >= 1");
  if (field.area_width <= 0.0 || field.area_depth <= 0.0) {
    throw validation_error("area_width and area_depth must be > 0");
  }
  if (field.carrier_frequency <= 0.0) throw validation_error("frequency must be > 0");
  if (field.tx_power <= 0.0) throw validation_error("tx_power must be > 0");
  if (field.tx_gain <= 0.0 || field.rx_gain <= 0.0) throw validation_error("antenna gains must be > 0");
  noise.validate();
  if (sampling.periods < 1 || sampling.samples_per_period < 3) {
    throw validation_error("sampling must cover >= 1 full period with >= 3 samples per period");
  }
  optimizer.validate(n);
  if (replication < 1) throw validation_error("replication must be >= 1");
  if (jobs < 1) throw validation_error("jobs must be >= 1");
  if (gate.min_aligned_fraction < 0.0 || gate.min_aligned_fraction > 1.0) {
    throw validation_error("gate.min_aligned_fraction must lie in [0, 1]");
  }
  if (gate.band <= 0.0 || gate.band > kPi) throw validation_error("gate.band must lie in (0, pi]");
  if (cluster_plan) {
    if (cluster_plan->size != n) throw validation_error("cluster plan must cover exactly n nodes");
    cluster_plan->validate(1);
  }
}

namespace {

struct SchemaReader {
  const IniFile& ini;

  double number(const std::string& section, const std::string& key, double fallback) const {
    const IniFile::Entry* e = ini.find(section, key);
    if (!e) return fallback;
    double out{};
    const char* begin = e->value.data();
    const char* end = begin + e->value.size();
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end) {
      throw validation_error(ini.source_name() + ":" + std::to_string(e->line) + ": [" + section +
                             "] " + key + " is not a number: '" + e->value + "'");
    }
    return out;
  }

  std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) const {
    const double v = number(section, key, static_cast<double>(fallback));
    if (v < 0.0 || v != std::floor(v)) {
      throw validation_error("[" + section + "] " + key + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    const IniFile::Entry* e = ini.find(section, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw validation_error(ini.source_name() + ":" + std::to_string(e->line) + ": [" + section +
                           "] " + key + " must be true or false");
  }

  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const {
    const IniFile::Entry* e = ini.find(section, key);
    return e ? e->value : fallback;
  }
};

const std::map<std::string, std::vector<std::string>>& schema_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"experiment",
       {"scenario", "replication", "base_seed", "out_dir", "metric", "jobs", "full_trace"}},
      {"field",
       {"n", "area_width", "area_depth", "rx_height", "frequency", "tx_power", "tx_gain", "rx_gain"}},
      {"noise", {"kind", "power", "frozen"}},
      {"sampling", {"samples_per_period", "periods"}},
      {"optimizer",
       {"p_mut", "dist", "variance", "neighbourhood", "revert", "max_iterations",
        "feedback_threshold", "grid_k", "p_mut_freq", "variance_freq"}},
      {"cluster", {"plan", "engine", "optimum_k"}},
      {"gate", {"enabled", "min_aligned_fraction", "band", "min_passing_runs"}},
  };
  return keys;
}

void reject_unknown(const IniFile& ini) {
  const auto& schema = schema_keys();
  for (const std::string& section : ini.section_names()) {
    if (!section.empty() && !schema.contains(section)) {
      std::vector<std::string> names;
      for (const auto& [name, _] : schema) names.push_back(name);
      const std::string hint = suggest(section, names);
      throw validation_error("unknown section [" + section + "]" +
                             (hint.empty() ? "" : "; did you mean [" + hint + "]?"));
    }
  }
  for (const auto& [section, key] : ini.unconsumed()) {
    std::string message = "unknown key '" + key + "'";
    if (!section.empty()) message += " in section [" + section + "]";
    const auto known = schema.find(section);
    if (known != schema.end()) {
      const std::string hint = suggest(key, known->second);
      if (!hint.empty()) message += "; did you mean '" + hint + "'?";
    }
    throw validation_error(message);
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
  const IniFile ini = IniFile::parse(text, source_name);
  const SchemaReader read{ini};
  ExperimentConfig cfg;

  cfg.scenario = read.text("experiment", "scenario", cfg.scenario);
  cfg.replication = read.count("experiment", "replication", cfg.replication);
  cfg.base_seed = static_cast<std::uint64_t>(read.number("experiment", "base_seed", 1.0));
  cfg.out_dir = read.text("experiment", "out_dir", cfg.out_dir);
  cfg.jobs = read.count("experiment", "jobs", cfg.jobs);
  cfg.full_trace = read.boolean("experiment", "full_trace", cfg.full_trace);
  const std::string metric = read.text("experiment", "metric", to_string(cfg.metric));
  if (const auto m = metric_from_string(metric)) {
    cfg.metric = *m;
  } else {
    throw validation_error("metric must be one of rmse, amplitude, snr");
  }

  cfg.n = read.count("field", "n", cfg.n);
  cfg.field.area_width = read.number("field", "area_width", cfg.field.area_width);
  cfg.field.area_depth = read.number("field", "area_depth", cfg.field.area_depth);
  cfg.field.rx_height = read.number("field", "rx_height", cfg.field.rx_height);
  cfg.field.carrier_frequency = read.number("field", "frequency", cfg.field.carrier_frequency);
  cfg.field.tx_power = read.number("field", "tx_power", cfg.field.tx_power);
  cfg.field.tx_gain = read.number("field", "tx_gain", cfg.field.tx_gain);
  cfg.field.rx_gain = read.number("field", "rx_gain", cfg.field.rx_gain);

  const std::string kind = read.text("noise", "kind", cfg.noise.kind == NoiseKind::kAwgn ? "awgn" : "none");
  if (kind == "awgn") {
    cfg.noise.kind = NoiseKind::kAwgn;
  } else if (kind == "none") {
    cfg.noise.kind = NoiseKind::kNone;
  } else {
    throw validation_error("noise kind must be none or awgn");
  }
  cfg.noise.power = read.number("noise", "power", cfg.noise.power);
  cfg.noise.frozen = read.boolean("noise", "frozen", cfg.noise.frozen);

  cfg.sampling.samples_per_period =
      static_cast<int>(read.count("sampling", "samples_per_period",
                                  static_cast<std::size_t>(cfg.sampling.samples_per_period)));
  cfg.sampling.periods =
      static_cast<int>(read.count("sampling", "periods", static_cast<std::size_t>(cfg.sampling.periods)));

  const std::string p_mut = read.text("optimizer", "p_mut", "auto");
  if (p_mut == "auto") {
    cfg.optimizer.p_mut = kAutoPMut;
  } else {
    double v{};
    const auto res = std::from_chars(p_mut.data(), p_mut.data() + p_mut.size(), v);
    if (res.ec != std::errc{} || res.ptr != p_mut.data() + p_mut.size()) {
      throw validation_error("p_mut must be a number in [0, 1] or 'auto'");
    }
    if (v < 0.0 || v > 1.0) throw validation_error("p_mut must lie in [0, 1]");
    cfg.optimizer.p_mut = v;
  }
  const std::string dist = read.text("optimizer", "dist", to_string(cfg.optimizer.dist));
  if (const auto d = distribution_from_string(dist)) {
    cfg.optimizer.dist = *d;
  } else {
    throw validation_error("dist must be uniform or normal");
  }
  cfg.optimizer.variance = read.number("optimizer", "variance", cfg.optimizer.variance);
  cfg.optimizer.neighbourhood = read.number("optimizer", "neighbourhood", cfg.optimizer.neighbourhood);
  const std::string revert = read.text("optimizer", "revert", to_string(cfg.optimizer.revert_policy));
  if (const auto r = revert_policy_from_string(revert)) {
    cfg.optimizer.revert_policy = *r;
  } else {
    throw validation_error("revert must be revert or complementary");
  }
  cfg.optimizer.stop.max_iterations =
      read.count("optimizer", "max_iterations", cfg.optimizer.stop.max_iterations);
  const std::string threshold = read.text("optimizer", "feedback_threshold", "none");
  if (threshold != "none") {
    double v{};
    const auto res = std::from_chars(threshold.data(), threshold.data() + threshold.size(), v);
    if (res.ec != std::errc{} || res.ptr != threshold.data() + threshold.size()) {
      throw validation_error("feedback_threshold must be a number or 'none'");
    }
    cfg.optimizer.stop.feedback_threshold = v;
  }
  cfg.optimizer.grid_k = read.count("optimizer", "grid_k", cfg.optimizer.grid_k);
  cfg.optimizer.p_mut_freq = read.number("optimizer", "p_mut_freq", 0.0);
  cfg.optimizer.variance_freq = read.number("optimizer", "variance_freq", 0.0);

  const std::string plan = read.text("cluster", "plan", "");
  if (!plan.empty()) {
    cfg.cluster_plan = parse_plan(plan);
    const std::string engine = read.text("cluster", "engine", "loop");
    if (engine == "loop") {
      cfg.cluster_engine = StageEngine::kLoop;
    } else if (engine == "optimal") {
      cfg.cluster_engine = StageEngine::kOptimal;
    } else {
      throw validation_error("cluster engine must be loop or optimal");
    }
    cfg.cluster_optimum_k = read.count("cluster", "optimum_k", cfg.cluster_optimum_k);
  }

  cfg.gate.enabled = read.boolean("gate", "enabled", cfg.gate.enabled);
  cfg.gate.min_aligned_fraction =
      read.number("gate", "min_aligned_fraction", cfg.gate.min_aligned_fraction);
  cfg.gate.band = read.number("gate", "band", cfg.gate.band);
  cfg.gate.min_passing_runs = read.count("gate", "min_passing_runs", cfg.gate.min_passing_runs);

  reject_unknown(ini);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "# " << kToolVersion << " configuration\n";
  out << "[experiment]\n";
  out << "scenario = " << cfg.scenario << "\n";
  out << "replication = " << cfg.replication << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "metric = " << to_string(cfg.metric) << "\n";
  out << "jobs = " << cfg.jobs << "\n";
  out << "full_trace = " << (cfg.full_trace ? "true" : "false") << "\n";
  out << "\n[field]\n";
  out << "n = " << cfg.n << "\n";
  out << "area_width = " << format_double(cfg.field.area_width) << "\n";
  out << "area_depth = " << format_double(cfg.field.area_depth) << "\n";
  out << "rx_height = " << format_double(cfg.field.rx_height) << "\n";
  out << "frequency = " << format_double(cfg.field.carrier_frequency) << "\n";
  out << "tx_power = " << format_double(cfg.field.tx_power) << "\n";
  out << "tx_gain = " << format_double(cfg.field.tx_gain) << "\n";
  out << "rx_gain = " << format_double(cfg.field.rx_gain) << "\n";
  out << "\n[noise]\n";
  out << "kind = " << (cfg.noise.kind == NoiseKind::kAwgn ? "awgn" : "none") << "\n";
  out << "power = " << format_double(cfg.noise.power) << "\n";
  out << "frozen = " << (cfg.noise.frozen ? "true" : "false") << "\n";
  out << "\n[sampling]\n";
  out << "samples_per_period = " << cfg.sampling.samples_per_period << "\n";
  out << "periods = " << cfg.sampling.periods << "\n";
  out << "\n[optimizer]\n";
  if (cfg.optimizer.p_mut < 0.0) {
    out << "p_mut = auto\n";
  } else {
    out << "p_mut = " << format_double(cfg.optimizer.p_mut) << "\n";
  }
  out << "dist = " << to_string(cfg.optimizer.dist) << "\n";
  out << "variance = " << format_double(cfg.optimizer.variance) << "\n";
  out << "neighbourhood = " << format_double(cfg.optimizer.neighbourhood) << "\n";
  out << "revert = " << to_string(cfg.optimizer.revert_policy) << "\n";
  out << "max_iterations = " << cfg.optimizer.stop.max_iterations << "\n";
  if (cfg.optimizer.stop.feedback_threshold) {
    out << "feedback_threshold = " << format_double(*cfg.optimizer.stop.feedback_threshold) << "\n";
  } else {
    out << "feedback_threshold = none\n";
  }
  out << "grid_k = " << cfg.optimizer.grid_k << "\n";
  out << "p_mut_freq = " << format_double(cfg.optimizer.p_mut_freq) << "\n";
  out << "variance_freq = " << format_double(cfg.optimizer.variance_freq) << "\n";
  if (cfg.cluster_plan) {
    out << "\n[cluster]\n";
    out << "plan = " << serialize_plan(*cfg.cluster_plan) << "\n";
    out << "engine = " << (cfg.cluster_engine == StageEngine::kLoop ? "loop" : "optimal") << "\n";
    out << "optimum_k = " << cfg.cluster_optimum_k << "\n";
  }
  out << "\n[gate]\n";
  out << "enabled = " << (cfg.gate.enabled ? "true" : "false") << "\n";
  out << "min_aligned_fraction = " << format_double(cfg.gate.min_aligned_fraction) << "\n";
  out << "band = " << format_double(cfg.gate.band) << "\n";
  out << "min_passing_runs = " << cfg.gate.min_passing_runs << "\n";
  return out.str();
}

namespace {

void execute_replicate(const ExperimentConfig& cfg, std::size_t rep, RunTrace& trace,
                       RunSummary& summary) {
  const std::uint64_t rep_seed = derive_stream(cfg.base_seed, rep);
  summary.replicate = rep;
  summary.seed = rep_seed;
  try {
    const NodeField field = place_nodes(cfg.n, cfg.field, derive_stream(rep_seed, 10));
    Rng init_rng(derive_stream(rep_seed, 11));
    const PhaseState init = PhaseState::random(cfg.n, init_rng);
    const std::uint64_t run_seed = derive_stream(rep_seed, 12);

    if (cfg.cluster_plan) {
      HierOptions options;
      options.engine = cfg.cluster_engine;
      options.optimum_k = cfg.cluster_optimum_k;
      trace = run_hierarchical_sync(field, *cfg.cluster_plan, cfg.optimizer, cfg.metric, cfg.noise,
                                    run_seed, options);
    } else {
      LoopOptions options;
      options.sampling = cfg.sampling;
      trace = run_feedback_loop(field, init, cfg.optimizer, cfg.metric, cfg.noise, run_seed, options);
    }

    summary.iterations = trace.total_iterations();
    summary.initial_feedback = trace.initial_feedback;
    summary.final_feedback =
        trace.records.empty() ? trace.initial_feedback : trace.records.back().accepted;
    summary.accepted_count = static_cast<std::size_t>(
        std::count_if(trace.records.begin(), trace.records.end(),
                      [](const TraceRecord& r) { return r.was_accepted; }));
    const Dispersion d = phase_dispersion(trace.terminal_state, field, cfg.gate.band);
    summary.aligned_fraction = d.within_band_fraction;
    summary.circular_variance = d.circular_variance;
    summary.status = "ok";
  } catch (const std::exception& e) {
    summary.status = std::string("failed: ") + e.what();
    trace = RunTrace{};
  }
}

}  // namespace

ResultBundle run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ResultBundle bundle;
  bundle.config = cfg;
  bundle.traces.resize(cfg.replication);
  bundle.summaries.resize(cfg.replication);
  bundle.seeds.resize(cfg.replication);
  for (std::size_t rep = 0; rep < cfg.replication; ++rep) {
    bundle.seeds[rep] = derive_stream(cfg.base_seed, rep);
  }

  const std::size_t workers = std::min(cfg.jobs, cfg.replication);
  if (workers <= 1) {
    for (std::size_t rep = 0; rep < cfg.replication; ++rep) {
      execute_replicate(cfg, rep, bundle.traces[rep], bundle.summaries[rep]);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t rep = w; rep < cfg.replication; rep += workers) {
          execute_replicate(cfg, rep, bundle.traces[rep], bundle.summaries[rep]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  bundle.gate.enabled = cfg.gate.enabled;
  if (cfg.gate.enabled) {
    std::size_t passing = 0;
    for (const RunSummary& s : bundle.summaries) {
      if (s.status == "ok" && s.aligned_fraction >= cfg.gate.min_aligned_fraction) ++passing;
    }
    bundle.gate.passing_runs = passing;
    bundle.gate.passed = passing >= cfg.gate.min_passing_runs;
    bundle.gate.detail = std::to_string(passing) + "/" + std::to_string(cfg.replication) +
                         " runs reached aligned fraction >= " +
                         format_double(cfg.gate.min_aligned_fraction);
  }
  return bundle;
}

std::string series_csv(const ResultBundle& bundle) {
  std::vector<std::size_t> ok;
  std::size_t max_iter = 0;
  for (std::size_t rep = 0; rep < bundle.summaries.size(); ++rep) {
    if (bundle.summaries[rep].status == "ok") {
      ok.push_back(rep);
      max_iter = std::max(max_iter, bundle.traces[rep].total_iterations());
    }
  }
  std::ostringstream out;
  out << "iteration";
  for (std::size_t rep : ok) out << ",run_" << rep;
  out << ",median\n";
  if (ok.empty()) return out.str();

  const std::size_t max_rows = bundle.config.full_trace ? max_iter + 1 : 1000;
  const std::size_t stride = std::max<std::size_t>(1, (max_iter + max_rows) / max_rows);
  std::vector<double> row(ok.size());
  for (std::size_t t = 0;; t += stride) {
    const std::size_t it = std::min(t, max_iter);
    out << it;
    for (std::size_t c = 0; c < ok.size(); ++c) {
      const RunTrace& trace = bundle.traces[ok[c]];
      double v = trace.initial_feedback;
      if (it > 0 && !trace.records.empty()) {
        const std::size_t idx = std::min<std::size_t>(it, trace.records.size()) - 1;
        v = trace.records[idx].accepted;
      }
      row[c] = v;
      out << ',' << format_double(v);
    }
    std::vector<double> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median =
        m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    out << ',' << format_double(median) << "\n";
    if (it >= max_iter) break;
  }
  return out.str();
}

std::string summary_csv(const ResultBundle& bundle) {
  std::ostringstream out;
  out << "replicate,seed,status,iterations,initial_feedback,final_feedback,accepted_count,"
         "aligned_fraction,circular_variance\n";
  for (const RunSummary& s : bundle.summaries) {
    std::string status = s.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << s.replicate << ',' << s.seed << ',' << status << ',' << s.iterations << ','
        << format_double(s.initial_feedback) << ',' << format_double(s.final_feedback) << ','
        << s.accepted_count << ',' << format_double(s.aligned_fraction) << ','
        << format_double(s.circular_variance) << "\n";
  }
  return out.str();
}

void write_bundle(const ResultBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  const auto write = [&](const std::string& name, const std::string& body) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
  };
  write("series.csv", series_csv(bundle));
  write("summary.csv", summary_csv(bundle));
  write("config_echo.ini", serialize_config(bundle.config));
}

}  // namespace csync
