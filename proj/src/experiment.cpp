// Copyright 2026 The swfqi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "swfqi/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "swfqi/errors.hpp"
#include "swfqi/features.hpp"
#include "swfqi/run_io.hpp"

namespace swfqi {

using nlohmann::json;

namespace {

constexpr const char* kConfigSchema = "swfqi.experiment";
constexpr const char* kSummarySchema = "swfqi.summary";

// Rejects keys outside `allowed` so that typos do not silently fall back to
// defaults.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError(where + ": unknown field '" + item.key() + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
  return get_or<std::string>(obj, key, fallback, where);
}

bool is_nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!is_nonnegative_integer(obj.at(key))) {
    throw ConfigError(where + "." + key + " must be a nonnegative integer");
  }
  return obj.at(key).get<std::size_t>();
}

long get_long(const json& obj, const char* key, long fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return obj.at(key).get<long>();
}

WeightingMode weighting_from_json(const json& obj) {
  const std::string where = "weighting";
  check_keys(obj, where, {"kind", "noise_scale", "refresh_period"});
  const std::string kind = get_string(obj, "kind", "behavior", where);
  const double noise = get_or<double>(obj, "noise_scale", 0.0, where);
  const long refresh = get_long(obj, "refresh_period", 1, where);
  if (kind == "behavior") return WeightingMode::behavior();
  if (kind == "stationary_exact") return WeightingMode::stationary_exact(refresh);
  if (kind == "stationary_noisy") return WeightingMode::stationary_noisy(noise, refresh);
  throw ConfigError("weighting.kind must be behavior, stationary_exact or stationary_noisy");
}

json weighting_to_json(const WeightingMode& w) {
  return {{"kind", w.label()}, {"noise_scale", w.noise_scale}, {"refresh_period", w.refresh_period}};
}

double final_error_sq(const FqiRunRecord& rec) { return rec.rows.back().error_sq; }

double max_error_sq(const FqiRunRecord& rec) {
  double m = 0.0;
  for (const auto& row : rec.rows) m = std::max(m, row.error_sq);
  return m;
}

}  // namespace

double path_max_error_sq(const FqiRunRecord& rec) {
  std::size_t start = rec.stage_starts.size() > 1 ? rec.stage_starts[1] : 1;
  if (start >= rec.rows.size()) start = 0;
  double m = 0.0;
  for (std::size_t i = start; i < rec.rows.size(); ++i) m = std::max(m, rec.rows[i].error_sq);
  return m;
}

void ExperimentConfig::validate() const {
  try {
    garnet.validate();
    Temperature check(tau_target);
    (void)check;
    weighting.validate();
    if (homotopy) homotopy->validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (weighting.kind == WeightingKind::kFixed) throw ConfigError("fixed weighting is not configurable");
  if (homotopy && homotopy->tau_target != tau_target) {
    throw ConfigError("homotopy must end at tau_target");
  }
  if (features.kind == FeatureSpec::Kind::kRealizable &&
      (features.p < 2 || features.p > garnet.n_states * garnet.n_actions)) {
    throw ConfigError("features.p must lie in [2, n_states*n_actions]");
  }
  if (mode == FitMode::kFitted && n_transitions == 0) throw ConfigError("mode.n_transitions must be positive");
  if (iters < 1) throw ConfigError("iters must be at least 1");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (init.kind == InitSpec::Kind::kBasin && !(init.delta >= 0.0)) {
    throw ConfigError("init.delta must be nonnegative");
  }
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  if (warm_start_iters < 0) throw ConfigError("warm_start_iters must be nonnegative");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name must be a nonempty plain file name");
  }
}

long ExperimentConfig::total_iterations() const {
  return homotopy ? homotopy->total_iterations() : iters;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  require_schema(doc, kConfigSchema);
  check_keys(doc, "config",
             {"schema", "version", "name", "garnet", "tau_target", "homotopy", "weighting",
              "features", "mode", "iters", "seeds", "init", "ridge", "warm_start_iters",
              "output_dir"});
  ExperimentConfig c;
  c.name = get_string(doc, "name", c.name, "config");
  if (doc.contains("garnet")) {
    const auto& g = doc.at("garnet");
    check_keys(g, "garnet", {"n_states", "n_actions", "branching", "reward_std", "discount"});
    c.garnet.n_states = get_size(g, "n_states", c.garnet.n_states, "garnet");
    c.garnet.n_actions = get_size(g, "n_actions", c.garnet.n_actions, "garnet");
    c.garnet.branching = get_size(g, "branching", c.garnet.branching, "garnet");
    c.garnet.reward_std = get_or<double>(g, "reward_std", c.garnet.reward_std, "garnet");
    c.garnet.discount = get_or<double>(g, "discount", c.garnet.discount, "garnet");
  }
  c.tau_target = get_or<double>(doc, "tau_target", c.tau_target, "config");
  if (doc.contains("homotopy") && !doc.at("homotopy").is_null()) {
    const auto& h = doc.at("homotopy");
    check_keys(h, "homotopy", {"tau_init", "stages", "iters_per_stage", "hold_iters", "decay"});
    HomotopySchedule s;
    s.tau_init = get_or<double>(h, "tau_init", s.tau_init, "homotopy");
    s.tau_target = c.tau_target;
    s.stages = get_long(h, "stages", s.stages, "homotopy");
    s.iters_per_stage = get_long(h, "iters_per_stage", s.iters_per_stage, "homotopy");
    s.hold_iters = get_long(h, "hold_iters", s.hold_iters, "homotopy");
    const std::string decay = get_string(h, "decay", "geometric", "homotopy");
    if (decay == "geometric") {
      s.decay = Decay::kGeometric;
    } else if (decay == "linear") {
      s.decay = Decay::kLinear;
    } else {
      throw ConfigError("homotopy.decay must be geometric or linear");
    }
    c.homotopy = s;
  }
  if (doc.contains("weighting")) c.weighting = weighting_from_json(doc.at("weighting"));
  if (doc.contains("features")) {
    const auto& f = doc.at("features");
    check_keys(f, "features", {"kind", "p", "orthonormalize"});
    const std::string kind = get_string(f, "kind", "realizable", "features");
    if (kind == "realizable") {
      c.features.kind = FeatureSpec::Kind::kRealizable;
    } else if (kind == "one_hot") {
      c.features.kind = FeatureSpec::Kind::kOneHot;
    } else {
      throw ConfigError("features.kind must be realizable or one_hot");
    }
    c.features.p = get_size(f, "p", c.features.p, "features");
    const std::string ortho = get_string(f, "orthonormalize", "mu_star", "features");
    if (ortho == "mu_star") {
      c.features.orthonormalize = OrthonormalizeIn::kMuStar;
    } else if (ortho == "uniform") {
      c.features.orthonormalize = OrthonormalizeIn::kUniform;
    } else {
      throw ConfigError("features.orthonormalize must be mu_star or uniform");
    }
  }
  if (doc.contains("mode")) {
    const auto& m = doc.at("mode");
    check_keys(m, "mode", {"kind", "n_transitions"});
    const std::string kind = get_string(m, "kind", "population", "mode");
    if (kind == "population") {
      c.mode = FitMode::kPopulation;
    } else if (kind == "fitted") {
      c.mode = FitMode::kFitted;
    } else {
      throw ConfigError("mode.kind must be population or fitted");
    }
    c.n_transitions = get_size(m, "n_transitions", c.n_transitions, "mode");
  }
  c.iters = get_long(doc, "iters", c.iters, "config");
  if (doc.contains("seeds")) {
    const auto& s = doc.at("seeds");
    if (s.is_array()) {
      for (const auto& v : s) {
        if (!is_nonnegative_integer(v)) throw ConfigError("seeds must be nonnegative integers");
        c.seeds.push_back(v.get<std::uint64_t>());
      }
    } else if (s.is_object()) {
      check_keys(s, "seeds", {"first", "count"});
      const std::uint64_t first = get_size(s, "first", 0, "seeds");
      const std::size_t count = get_size(s, "count", 0, "seeds");
      for (std::size_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
    } else {
      throw ConfigError("seeds must be a list or {first, count}");
    }
  }
  if (doc.contains("init")) {
    const auto& i = doc.at("init");
    check_keys(i, "init", {"kind", "delta"});
    const std::string kind = get_string(i, "kind", "zero", "init");
    if (kind == "zero") {
      c.init.kind = InitSpec::Kind::kZero;
    } else if (kind == "basin") {
      c.init.kind = InitSpec::Kind::kBasin;
    } else {
      throw ConfigError("init.kind must be zero or basin");
    }
    c.init.delta = get_or<double>(i, "delta", 0.0, "init");
  }
  c.ridge = get_or<double>(doc, "ridge", c.ridge, "config");
  c.warm_start_iters = get_long(doc, "warm_start_iters", c.warm_start_iters, "config");
  c.output_dir = get_string(doc, "output_dir", c.output_dir, "config");
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json doc = {{"schema", kConfigSchema},
              {"version", kFormatVersion},
              {"name", name},
              {"garnet",
               {{"n_states", garnet.n_states},
                {"n_actions", garnet.n_actions},
                {"branching", garnet.branching},
                {"reward_std", garnet.reward_std},
                {"discount", garnet.discount}}},
              {"tau_target", tau_target},
              {"weighting", weighting_to_json(weighting)},
              {"features",
               {{"kind", features.kind == FeatureSpec::Kind::kRealizable ? "realizable" : "one_hot"},
                {"p", features.p},
                {"orthonormalize",
                 features.orthonormalize == OrthonormalizeIn::kMuStar ? "mu_star" : "uniform"}}},
              {"mode",
               {{"kind", mode == FitMode::kPopulation ? "population" : "fitted"},
                {"n_transitions", n_transitions}}},
              {"iters", iters},
              {"seeds", seeds},
              {"init",
               {{"kind", init.kind == InitSpec::Kind::kZero ? "zero" : "basin"}, {"delta", init.delta}}},
              {"ridge", ridge},
              {"warm_start_iters", warm_start_iters},
              {"output_dir", output_dir}};
  if (homotopy) {
    doc["homotopy"] = {{"tau_init", homotopy->tau_init},
                       {"stages", homotopy->stages},
                       {"iters_per_stage", homotopy->iters_per_stage},
                       {"hold_iters", homotopy->hold_iters},
                       {"decay", homotopy->decay == Decay::kGeometric ? "geometric" : "linear"}};
  }
  return doc;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  auto config = ExperimentConfig::from_json(read_json_file(path));
  if (const char* dir = std::getenv("SWFQI_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    config.output_dir = dir;
  }
  return config;
}

unsigned default_jobs() {
  if (const char* env = std::getenv("SWFQI_JOBS"); env != nullptr) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidSpec("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

FqiRunRecord run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  GarnetSpec spec = config.garnet;
  spec.seed = seed;
  const TabularMdp mdp = generate_garnet(spec);
  const TabularPolicy behavior = dirichlet_behavior_policy(mdp, seed);
  const StateActionMeasure nu_b = behavior_measure(mdp, behavior);
  const Reference target = make_reference(mdp, Temperature(config.tau_target));

  FeatureMap features;
  if (config.features.kind == FeatureSpec::Kind::kRealizable) {
    const StateActionMeasure ortho = config.features.orthonormalize == OrthonormalizeIn::kMuStar
                                         ? target.mu_star
                                         : uniform_measure(mdp.n_states(), mdp.n_actions());
    features = build_realizable_features(target.q_star, config.features.p, seed, ortho);
  } else {
    features = one_hot_features(mdp);
  }

  std::optional<FittedDesign> design;
  if (config.mode == FitMode::kFitted) {
    design = FittedDesign::from_dataset(sample_reset_dataset(mdp, behavior, config.n_transitions, seed));
  }

  LinearQ q0{std::vector<double>(features.dim(), 0.0), features.id()};
  if (config.init.kind == InitSpec::Kind::kBasin) {
    q0 = basin_initialization(target, features, config.init.delta, seed);
  }

  FqiOptions options;
  options.mode = config.mode;
  options.weighting = config.weighting;
  options.iters = config.iters;
  options.ridge = config.ridge;
  options.seed = seed;
  options.warm_start_iters = config.warm_start_iters;

  const FqiContext ctx{mdp, features, nu_b, design ? &*design : nullptr};
  if (config.homotopy) return run_homotopy(ctx, q0, *config.homotopy, options);
  return run_fqi(ctx, q0, target, options);
}

AggregateSummary aggregate(const std::string& arm, const std::vector<SeedRun>& runs) {
  AggregateSummary out;
  out.arm = arm;
  std::size_t longest = 0;
  std::vector<double> finals;
  for (const auto& run : runs) {
    if (!run.ok) {
      ++out.failed;
      continue;
    }
    ++out.completed;
    if (run.record.diverged) ++out.divergences;
    longest = std::max(longest, run.record.rows.size());
    finals.push_back(final_error_sq(run.record));
  }
  if (out.completed == 0) throw Error("no run of arm '" + arm + "' completed");

  std::vector<double> column;
  for (std::size_t i = 0; i < longest; ++i) {
    column.clear();
    long k = 0;
    for (const auto& run : runs) {
      if (run.ok && i < run.record.rows.size()) {
        column.push_back(run.record.rows[i].error_sq);
        k = run.record.rows[i].k;
      }
    }
    IterationBand band;
    band.k = k;
    band.count = column.size();
    double sum = 0.0;
    for (double v : column) sum += v;
    band.mean = sum / static_cast<double>(column.size());
    std::sort(column.begin(), column.end());
    band.q25 = quantile_sorted(column, 0.25);
    band.q75 = quantile_sorted(column, 0.75);
    out.bands.push_back(band);
  }

  double sum = 0.0;
  for (double v : finals) sum += v;
  out.final_mean = sum / static_cast<double>(finals.size());
  std::sort(finals.begin(), finals.end());
  out.final_median = quantile_sorted(finals, 0.5);
  out.final_q25 = quantile_sorted(finals, 0.25);
  out.final_q75 = quantile_sorted(finals, 0.75);
  out.final_min = finals.front();
  out.final_max = finals.back();
  return out;
}

std::string run_id_for(std::uint64_t seed) { return "s" + std::to_string(seed); }

std::string run_csv_text(std::uint64_t seed, const FqiRunRecord& record) {
  std::ostringstream out;
  write_run_csv(out, run_id_for(seed), record);
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.runs.resize(config.seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < config.seeds.size(); i = next.fetch_add(1)) {
      SeedRun& slot = result.runs[i];
      slot.seed = config.seeds[i];
      try {
        slot.record = run_seed(config, slot.seed);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.ok = false;
        slot.error = e.what();
      }
    }
  };
  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(config.seeds.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.summary = aggregate(config.name, result.runs);

  if (!config.output_dir.empty()) {
    const std::filesystem::path root = std::filesystem::path(config.output_dir) / config.name;
    for (const auto& run : result.runs) {
      if (run.ok) {
        write_file(root / "runs" / ("run_" + std::to_string(run.seed) + ".csv"),
                   run_csv_text(run.seed, run.record));
      }
    }
    write_file(root / "summary.json", dump_json(summary_to_json(result)));
    write_file(root / "plot_data.csv", plot_csv_text({result.summary}));
  }
  return result;
}

json summary_to_json(const ExperimentResult& result) {
  const auto& s = result.summary;
  // Where the artifacts live is not part of the experiment.
  json config = result.config.to_json();
  config.erase("output_dir");
  json runs = json::array();
  for (const auto& run : result.runs) {
    json r = {{"seed", run.seed}, {"run_id", run_id_for(run.seed)}, {"status", run.ok ? "ok" : "failed"}};
    if (run.ok) {
      r["diverged"] = run.record.diverged;
      r["iterations"] = run.record.rows.back().k;
      r["final_error_sq"] = final_error_sq(run.record);
      r["max_error_sq"] = max_error_sq(run.record);
      r["path_max_error_sq"] = path_max_error_sq(run.record);
    } else {
      r["error"] = run.error;
    }
    runs.push_back(std::move(r));
  }
  json per_iter = {{"k", json::array()},
                   {"count", json::array()},
                   {"mean", json::array()},
                   {"q25", json::array()},
                   {"q75", json::array()}};
  for (const auto& b : s.bands) {
    per_iter["k"].push_back(b.k);
    per_iter["count"].push_back(b.count);
    per_iter["mean"].push_back(b.mean);
    per_iter["q25"].push_back(b.q25);
    per_iter["q75"].push_back(b.q75);
  }
  return {{"schema", kSummarySchema},
          {"version", kFormatVersion},
          {"arm", s.arm},
          {"config", config},
          {"completed", s.completed},
          {"failed", s.failed},
          {"divergences", s.divergences},
          {"final_error_sq",
           {{"mean", s.final_mean},
            {"median", s.final_median},
            {"q25", s.final_q25},
            {"q75", s.final_q75},
            {"min", s.final_min},
            {"max", s.final_max}}},
          {"runs", runs},
          {"per_iteration", per_iter}};
}

AggregateSummary summary_from_json(const json& doc) {
  require_schema(doc, kSummarySchema);
  try {
    AggregateSummary s;
    s.arm = doc.at("arm").get<std::string>();
    s.completed = doc.at("completed").get<std::size_t>();
    s.failed = doc.at("failed").get<std::size_t>();
    s.divergences = doc.at("divergences").get<std::size_t>();
    const auto& f = doc.at("final_error_sq");
    s.final_mean = f.at("mean").get<double>();
    s.final_median = f.at("median").get<double>();
    s.final_q25 = f.at("q25").get<double>();
    s.final_q75 = f.at("q75").get<double>();
    s.final_min = f.at("min").get<double>();
    s.final_max = f.at("max").get<double>();
    const auto& it = doc.at("per_iteration");
    const auto k = it.at("k").get<std::vector<long>>();
    const auto count = it.at("count").get<std::vector<std::size_t>>();
    const auto mean = it.at("mean").get<std::vector<double>>();
    const auto q25 = it.at("q25").get<std::vector<double>>();
    const auto q75 = it.at("q75").get<std::vector<double>>();
    if (count.size() != k.size() || mean.size() != k.size() || q25.size() != k.size() ||
        q75.size() != k.size()) {
      throw ConfigError("summary per_iteration arrays differ in length");
    }
    for (std::size_t i = 0; i < k.size(); ++i) s.bands.push_back({k[i], count[i], mean[i], q25[i], q75[i]});
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed summary: ") + e.what());
  }
}

std::string plot_csv_text(const std::vector<AggregateSummary>& arms) {
  std::ostringstream out;
  out << kPlotCsvHeader << '\n';
  for (const auto& arm : arms) {
    for (const auto& b : arm.bands) {
      out << arm.arm << ',' << b.k << ',' << format_double(b.mean) << ',' << format_double(b.q25)
          << ',' << format_double(b.q75) << '\n';
    }
  }
  return out.str();
}

double ArmComparison::fraction_a_final_lower() const {
  return seeds.empty() ? 0.0 : static_cast<double>(a_final_lower) / static_cast<double>(seeds.size());
}

double ArmComparison::fraction_b_max_higher() const {
  return seeds.empty() ? 0.0
                       : static_cast<double>(b_max_path_higher) / static_cast<double>(seeds.size());
}

double sign_test_p_value(std::size_t successes, std::size_t n) {
  if (n == 0) return 1.0;
  const std::size_t tail = std::min(successes, n - successes);
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  double p = 0.0;
  for (std::size_t i = 0; i <= tail; ++i) {
    const double log_binom = std::lgamma(static_cast<double>(n) + 1.0) -
                             std::lgamma(static_cast<double>(i) + 1.0) -
                             std::lgamma(static_cast<double>(n - i) + 1.0);
    p += std::exp(log_binom + log_half_n);
  }
  return std::min(1.0, 2.0 * p);
}

ArmComparison compare_arms(const ExperimentResult& a, const ExperimentResult& b, bool paired_seeds) {
  auto completed = [](const ExperimentResult& r) {
    std::vector<const SeedRun*> out;
    for (const auto& run : r.runs) {
      if (run.ok) out.push_back(&run);
    }
    return out;
  };
  const auto runs_a = completed(a);
  const auto runs_b = completed(b);
  if (paired_seeds) {
    std::vector<std::uint64_t> sa = a.config.seeds;
    std::vector<std::uint64_t> sb = b.config.seeds;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) throw ConfigError("paired comparison needs identical seed sets");
  }

  ArmComparison cmp;
  cmp.arm_a = a.config.name;
  cmp.arm_b = b.config.name;
  std::vector<std::pair<const SeedRun*, const SeedRun*>> pairs;
  for (const auto* ra : runs_a) {
    for (const auto* rb : runs_b) {
      if (ra->seed == rb->seed) pairs.emplace_back(ra, rb);
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& x, const auto& y) { return x.first->seed < y.first->seed; });

  std::size_t shared_len = std::numeric_limits<std::size_t>::max();
  for (const auto& [ra, rb] : pairs) {
    cmp.seeds.push_back(ra->seed);
    const double fa = final_error_sq(ra->record);
    const double fb = final_error_sq(rb->record);
    if (fa < fb) {
      ++cmp.a_final_lower;
    } else if (fa == fb) {
      ++cmp.final_ties;
    }
    if (path_max_error_sq(rb->record) > path_max_error_sq(ra->record)) ++cmp.b_max_path_higher;
    shared_len = std::min({shared_len, ra->record.rows.size(), rb->record.rows.size()});
  }
  cmp.sign_test_p = sign_test_p_value(cmp.a_final_lower, pairs.size() - cmp.final_ties);
  if (pairs.empty()) return cmp;

  std::vector<double> ratios;
  for (std::size_t i = 0; i < shared_len; ++i) {
    ratios.clear();
    for (const auto& [ra, rb] : pairs) {
      const double ea = ra->record.rows[i].error_sq;
      const double eb = rb->record.rows[i].error_sq;
      ratios.push_back(ea == eb ? 1.0 : ea / eb);
    }
    std::sort(ratios.begin(), ratios.end());
    cmp.median_ratio.push_back(quantile_sorted(ratios, 0.5));
  }
  return cmp;
}

json comparison_to_json(const ArmComparison& cmp) {
  return {{"schema", "swfqi.comparison"},
          {"version", kFormatVersion},
          {"arm_a", cmp.arm_a},
          {"arm_b", cmp.arm_b},
          {"seeds", cmp.seeds},
          {"a_final_lower", cmp.a_final_lower},
          {"final_ties", cmp.final_ties},
          {"fraction_a_final_lower", cmp.fraction_a_final_lower()},
          {"sign_test_p", cmp.sign_test_p},
          {"b_max_path_higher", cmp.b_max_path_higher},
          {"fraction_b_max_path_higher", cmp.fraction_b_max_higher()},
          {"median_error_ratio", cmp.median_ratio}};
}

}  // namespace swfqi
