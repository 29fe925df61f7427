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

// Command-line front end: generate, solve, run, compare, verify, plot.
//
// Exit status: 0 success, 1 configuration error, 2 failed check or numerical
// failure, 3 experiment finished with some seeds failed.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "swfqi/diagnostics.hpp"
#include "swfqi/errors.hpp"
#include "swfqi/experiment.hpp"
#include "swfqi/features.hpp"
#include "swfqi/fqi.hpp"
#include "swfqi/run_io.hpp"
#include "swfqi/svg_plot.hpp"
#include "swfqi/verify.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCheck = 2;
constexpr int kExitPartial = 3;

struct GenerateArgs {
  swfqi::GarnetSpec garnet;
  std::string out;
  std::string behavior_out;
  std::string dataset_out;
  std::size_t transitions = 100000;
};

struct SolveArgs {
  std::string mdp;
  double tau = 0.1;
  double tol = 1e-10;
  std::string out;
  std::string policy_out;
  std::string measure_out;
  std::string features_out;
  std::size_t features_p = 5;
  std::uint64_t features_seed = 0;
  std::string gap_out;
  std::string certificate_out;
  double radius_fraction = 0.5;
  std::size_t pairs = 200;
};

// Command-line overrides of experiment config fields.
struct RunOverrides {
  std::optional<std::string> name;
  std::optional<double> tau_target;
  std::optional<long> iters;
  std::optional<std::string> weighting;
  std::optional<double> noise_scale;
  std::optional<std::string> mode;
  std::optional<std::size_t> n_transitions;
  std::optional<std::uint64_t> seed_first;
  std::optional<std::size_t> seed_count;
  std::optional<double> ridge;
  std::optional<std::string> output_dir;
};

struct RunArgs {
  std::string config;
  RunOverrides overrides;
  unsigned jobs = 0;
};

struct CompareArgs {
  std::vector<std::string> configs;
  bool paired = false;
  std::string out;
  unsigned jobs = 0;
  std::optional<std::string> output_dir;
};

struct VerifyArgs {
  std::string config;
  std::string out;
};

struct PlotArgs {
  std::vector<std::string> summaries;
  std::string out;
  std::string svg;
  std::string title;
  bool linear = false;
  std::optional<long> marker;
};

void add_overrides(CLI::App* cmd, RunOverrides& o) {
  cmd->add_option("--name", o.name, "Arm name");
  cmd->add_option("--tau-target", o.tau_target, "Target temperature");
  cmd->add_option("--iters", o.iters, "Iterations without homotopy");
  cmd->add_option("--weighting", o.weighting, "behavior | stationary_exact | stationary_noisy");
  cmd->add_option("--noise-scale", o.noise_scale, "Log-normal weight noise scale");
  cmd->add_option("--mode", o.mode, "population | fitted");
  cmd->add_option("--n-transitions", o.n_transitions, "Dataset size in fitted mode");
  cmd->add_option("--seed-first", o.seed_first, "First seed of a contiguous block");
  cmd->add_option("--seed-count", o.seed_count, "Number of seeds in the block");
  cmd->add_option("--ridge", o.ridge, "Ridge penalty");
  cmd->add_option("--output-dir", o.output_dir, "Artifact directory");
}

swfqi::ExperimentConfig load_config(const std::string& path, const RunOverrides& o) {
  json doc = swfqi::read_json_file(path);
  if (o.name) doc["name"] = *o.name;
  if (o.tau_target) doc["tau_target"] = *o.tau_target;
  if (o.iters) doc["iters"] = *o.iters;
  if (o.weighting || o.noise_scale) {
    json w = doc.value("weighting", json::object());
    if (o.weighting) w["kind"] = *o.weighting;
    if (o.noise_scale) w["noise_scale"] = *o.noise_scale;
    doc["weighting"] = w;
  }
  if (o.mode || o.n_transitions) {
    json m = doc.value("mode", json::object());
    if (o.mode) m["kind"] = *o.mode;
    if (o.n_transitions) m["n_transitions"] = *o.n_transitions;
    doc["mode"] = m;
  }
  if (o.seed_first || o.seed_count) {
    doc["seeds"] = {{"first", o.seed_first.value_or(0)}, {"count", o.seed_count.value_or(1)}};
  }
  if (o.ridge) doc["ridge"] = *o.ridge;
  auto config = swfqi::ExperimentConfig::from_json(doc);
  if (const char* dir = std::getenv("SWFQI_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    config.output_dir = dir;
  }
  if (o.output_dir) config.output_dir = *o.output_dir;
  return config;
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty() || path == "-") {
    std::cout << swfqi::dump_json(doc);
  } else {
    swfqi::write_file(path, swfqi::dump_json(doc));
  }
}

json double_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_generate(const GenerateArgs& a) {
  const auto mdp = swfqi::generate_garnet(a.garnet);
  write_json(a.out, swfqi::mdp_to_json(mdp));
  if (!a.behavior_out.empty() || !a.dataset_out.empty()) {
    const auto behavior = swfqi::dirichlet_behavior_policy(mdp, a.garnet.seed);
    if (!a.behavior_out.empty()) write_json(a.behavior_out, swfqi::table_to_json(behavior, "policy"));
    if (!a.dataset_out.empty()) {
      const auto data = swfqi::sample_reset_dataset(mdp, behavior, a.transitions, a.garnet.seed);
      write_json(a.dataset_out, swfqi::dataset_to_json(data));
    }
  }
  return kExitOk;
}

int cmd_solve(const SolveArgs& a) {
  const auto mdp = swfqi::mdp_from_json(swfqi::read_json_file(a.mdp));
  const swfqi::Temperature tau(a.tau);
  const auto ref = swfqi::make_reference(mdp, tau, a.tol);
  json q = swfqi::table_to_json(ref.q_star, "qtable");
  q["tau"] = a.tau;
  q["residual"] = swfqi::sup_distance(swfqi::soft_bellman_apply(mdp, ref.q_star, tau), ref.q_star);
  write_json(a.out, q);
  if (!a.policy_out.empty()) write_json(a.policy_out, swfqi::table_to_json(ref.pi_star, "policy"));
  if (!a.measure_out.empty()) {
    json m = swfqi::table_to_json(ref.mu_star, "measure");
    m["residual"] = swfqi::stationarity_residual(mdp, ref.pi_star, ref.mu_star);
    write_json(a.measure_out, m);
  }
  std::optional<swfqi::FeatureMap> features;
  if (!a.features_out.empty() || !a.certificate_out.empty()) {
    features = swfqi::build_realizable_features(ref.q_star, a.features_p, a.features_seed, ref.mu_star);
  }
  if (!a.features_out.empty()) write_json(a.features_out, swfqi::features_to_json(*features));
  if (!a.gap_out.empty()) {
    const auto gap = swfqi::measure_action_gap(mdp);
    write_json(a.gap_out, {{"schema", "swfqi.gap"},
                           {"version", swfqi::kFormatVersion},
                           {"delta", double_or_null(gap.delta)},
                           {"argmax_actions", gap.argmax_actions},
                           {"margins", gap.margins},
                           {"margin_min", gap.margin_min},
                           {"margin_median", gap.margin_median},
                           {"margin_max", gap.margin_max},
                           {"ties", gap.ties}});
  }
  if (!a.certificate_out.empty()) {
    const auto profile = swfqi::contraction_profile(mdp, tau, ref.mu_star, ref.pi_star);
    const double radius = a.radius_fraction * profile.r0;
    const auto cert = swfqi::certify_contraction(mdp, tau, ref.q_star, *features, ref.mu_star,
                                                 radius, a.pairs, a.features_seed);
    write_json(a.certificate_out, {{"schema", "swfqi.certificate"},
                                   {"version", swfqi::kFormatVersion},
                                   {"tau", a.tau},
                                   {"radius", cert.radius_tested},
                                   {"r0", cert.r0},
                                   {"beta_loc", profile.beta_loc},
                                   {"pairs_tested", cert.pairs_tested},
                                   {"max_observed_ratio", cert.max_observed_ratio},
                                   {"max_projected_ratio", cert.max_projected_ratio},
                                   {"bound_rho", cert.bound_rho},
                                   {"slack", cert.slack},
                                   {"violations", cert.violations},
                                   {"projected_violations", cert.projected_violations}});
    if (cert.violations + cert.projected_violations > 0) {
      std::cerr << "contraction certificate has violations\n";
      return kExitCheck;
    }
  }
  return kExitOk;
}

unsigned resolve_jobs(unsigned requested) { return requested > 0 ? requested : swfqi::default_jobs(); }

void report_failures(const swfqi::ExperimentResult& r) {
  for (const auto& run : r.runs) {
    if (!run.ok) std::cerr << r.config.name << ": seed " << run.seed << " failed: " << run.error << '\n';
  }
}

int cmd_run(const RunArgs& a) {
  const auto config = load_config(a.config, a.overrides);
  const auto result = swfqi::run_experiment(config, resolve_jobs(a.jobs));
  const auto& s = result.summary;
  std::cout << config.name << ": " << s.completed << " completed, " << s.failed << " failed, "
            << s.divergences << " diverged; final error_sq median " << swfqi::format_double(s.final_median)
            << '\n';
  report_failures(result);
  return result.partial() ? kExitPartial : kExitOk;
}

int cmd_compare(const CompareArgs& a) {
  if (a.configs.size() != 2) throw swfqi::ConfigError("compare takes exactly two configs");
  RunOverrides o;
  o.output_dir = a.output_dir;
  const auto cfg_a = load_config(a.configs[0], o);
  const auto cfg_b = load_config(a.configs[1], o);
  const unsigned jobs = resolve_jobs(a.jobs);
  const auto res_a = swfqi::run_experiment(cfg_a, jobs);
  const auto res_b = swfqi::run_experiment(cfg_b, jobs);
  const auto cmp = swfqi::compare_arms(res_a, res_b, a.paired);
  write_json(a.out, swfqi::comparison_to_json(cmp));
  std::cerr << cmp.arm_a << " final error below " << cmp.arm_b << " on " << cmp.a_final_lower << "/"
            << cmp.seeds.size() << " seeds (sign test p=" << swfqi::format_double(cmp.sign_test_p)
            << ")\n";
  report_failures(res_a);
  report_failures(res_b);
  return res_a.partial() || res_b.partial() ? kExitPartial : kExitOk;
}

int cmd_verify(const VerifyArgs& a) {
  const auto config = swfqi::VerifyConfig::from_json(swfqi::read_json_file(a.config));
  const auto report = swfqi::run_verify(config);
  write_json(a.out, report.to_json());
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : report.failures()) std::cerr << "FAILED " << f << '\n';
  return report.passed() ? kExitOk : kExitCheck;
}

int cmd_plot(const PlotArgs& a) {
  std::vector<swfqi::AggregateSummary> arms;
  for (const auto& path : a.summaries) arms.push_back(swfqi::summary_from_json(swfqi::read_json_file(path)));
  const std::string csv = swfqi::plot_csv_text(arms);
  if (a.out.empty() || a.out == "-") {
    std::cout << csv;
  } else {
    swfqi::write_file(a.out, csv);
  }
  if (!a.svg.empty()) {
    swfqi::SvgOptions opt;
    opt.log_y = !a.linear;
    opt.title = a.title;
    opt.marker_k = a.marker;
    swfqi::write_file(a.svg, swfqi::render_svg(arms, opt));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary-weighted soft fitted Q-iteration on tabular MDPs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a Garnet MDP (and optionally behavior policy and dataset)");
  generate->add_option("--seed", gen.garnet.seed, "Garnet seed");
  generate->add_option("--states", gen.garnet.n_states, "Number of states");
  generate->add_option("--actions", gen.garnet.n_actions, "Number of actions");
  generate->add_option("--branching", gen.garnet.branching, "Successors per state-action pair");
  generate->add_option("--reward-std", gen.garnet.reward_std, "Reward standard deviation");
  generate->add_option("--discount", gen.garnet.discount, "Discount factor");
  generate->add_option("--out", gen.out, "MDP JSON path (- for stdout)")->required();
  generate->add_option("--behavior-out", gen.behavior_out, "Behavior policy JSON path");
  generate->add_option("--dataset-out", gen.dataset_out, "Reset-sampled dataset JSON path");
  generate->add_option("--transitions", gen.transitions, "Dataset size");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Solve the soft optimum and its stationary measure");
  solve->add_option("--mdp", sol.mdp, "MDP JSON")->required();
  solve->add_option("--tau", sol.tau, "Temperature");
  solve->add_option("--tol", sol.tol, "Sup-norm accuracy of Q*");
  solve->add_option("--out", sol.out, "Q* JSON path (- for stdout)")->required();
  solve->add_option("--policy-out", sol.policy_out, "Soft-optimal policy JSON path");
  solve->add_option("--measure-out", sol.measure_out, "Stationary measure JSON path");
  solve->add_option("--features-out", sol.features_out, "Realizable feature map JSON path");
  solve->add_option("--features-p", sol.features_p, "Feature dimension");
  solve->add_option("--features-seed", sol.features_seed, "Feature and certificate seed");
  solve->add_option("--gap-out", sol.gap_out, "Action gap report JSON path");
  solve->add_option("--certificate-out", sol.certificate_out, "Contraction certificate JSON path");
  solve->add_option("--radius-fraction", sol.radius_fraction, "Certified radius as a fraction of r0");
  solve->add_option("--pairs", sol.pairs, "Sampled pairs for the certificate");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment arm over its seeds");
  run_cmd->add_option("config", run.config, "Experiment config JSON")->required();
  run_cmd->add_option("--jobs", run.jobs, "Worker threads (default SWFQI_JOBS or all cores)");
  add_overrides(run_cmd, run.overrides);

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Run two arms and compare them seed by seed");
  compare->add_option("configs", cmp.configs, "Two experiment configs")->required()->expected(2);
  compare->add_flag("--paired", cmp.paired, "Require identical seed sets");
  compare->add_option("--out", cmp.out, "Comparison JSON path (- for stdout)");
  compare->add_option("--jobs", cmp.jobs, "Worker threads");
  compare->add_option("--output-dir", cmp.output_dir, "Artifact directory");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run the numerical checks of a verify config");
  verify->add_option("config", ver.config, "Verify config JSON")->required();
  verify->add_option("--out", ver.out, "Report JSON path (- for stdout)");

  PlotArgs plt;
  auto* plot = app.add_subcommand("plot", "Write plot data (and an SVG) from summaries");
  plot->add_option("summaries", plt.summaries, "summary.json files")->required();
  plot->add_option("--out", plt.out, "Plot CSV path (- for stdout)");
  plot->add_option("--svg", plt.svg, "SVG path");
  plot->add_option("--title", plt.title, "Plot title");
  plot->add_flag("--linear", plt.linear, "Linear instead of log y axis");
  plot->add_option("--marker", plt.marker, "Iteration of a dashed vertical marker");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*solve) return cmd_solve(sol);
    if (*run_cmd) return cmd_run(run);
    if (*compare) return cmd_compare(cmp);
    if (*verify) return cmd_verify(ver);
    if (*plot) return cmd_plot(plt);
  } catch (const swfqi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const swfqi::InvalidSpec& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheck;
  }
  return kExitConfig;
}
