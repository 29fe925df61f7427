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

#include "swfqi/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swfqi/diagnostics.hpp"
#include "swfqi/errors.hpp"
#include "swfqi/fqi.hpp"
#include "swfqi/run_io.hpp"

namespace swfqi {

using nlohmann::json;

std::vector<std::string> VerifyConfig::all_checks() {
  return {"soft_fixed_point", "stationarity", "first_derivative", "second_derivative",
          "contraction",      "remainder",    "projection_orthogonality"};
}

VerifyConfig VerifyConfig::from_json(const json& doc) {
  require_schema(doc, "swfqi.verify");
  VerifyConfig c;
  try {
    if (doc.contains("garnet")) {
      const auto& g = doc.at("garnet");
      c.garnet.n_states = g.value("n_states", c.garnet.n_states);
      c.garnet.n_actions = g.value("n_actions", c.garnet.n_actions);
      c.garnet.branching = g.value("branching", c.garnet.branching);
      c.garnet.reward_std = g.value("reward_std", c.garnet.reward_std);
      c.garnet.discount = g.value("discount", c.garnet.discount);
    }
    c.seeds = doc.value("seeds", c.seeds);
    c.taus = doc.value("taus", c.taus);
    c.checks = doc.value("checks", all_checks());
    c.directions = doc.value("directions", c.directions);
    c.pairs = doc.value("pairs", c.pairs);
    c.radius_fraction = doc.value("radius_fraction", c.radius_fraction);
    c.remainder_samples = doc.value("remainder_samples", c.remainder_samples);
    c.features_p = doc.value("features_p", c.features_p);
    if (doc.contains("tolerances")) {
      const auto& t = doc.at("tolerances");
      auto& tol = c.tolerances;
      tol.soft_residual = t.value("soft_residual", tol.soft_residual);
      tol.stationarity = t.value("stationarity", tol.stationarity);
      tol.first_derivative = t.value("first_derivative", tol.first_derivative);
      tol.second_derivative = t.value("second_derivative", tol.second_derivative);
      tol.remainder_slack = t.value("remainder_slack", tol.remainder_slack);
      tol.orthogonality = t.value("orthogonality", tol.orthogonality);
    }
    if (doc.contains("corrupt_transition")) {
      const auto& x = doc.at("corrupt_transition");
      CorruptTransition ct;
      ct.seed = x.value("seed", ct.seed);
      ct.state = x.value("state", ct.state);
      ct.action = x.value("action", ct.action);
      ct.scale = x.value("scale", ct.scale);
      c.corrupt = ct;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed verify config: ") + e.what());
  }
  const auto known = all_checks();
  for (const auto& name : c.checks) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown check '" + name + "'");
    }
  }
  try {
    c.garnet.validate();
    for (double tau : c.taus) Temperature check(tau);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(c.radius_fraction > 0.0 && c.radius_fraction < 1.0)) {
    throw ConfigError("radius_fraction must lie in (0,1)");
  }
  return c;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

std::vector<std::string> VerifyReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.pass) {
      out.push_back(c.name + "[seed=" + std::to_string(c.seed) + ", tau=" + format_double(c.tau) + "]");
    }
  }
  return out;
}

json VerifyReport::to_json() const {
  json list = json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"seed", c.seed},
                    {"tau", c.tau},
                    {"value", c.value},
                    {"tolerance", c.tolerance},
                    {"pass", c.pass},
                    {"skipped", c.skipped},
                    {"detail", c.detail}});
  }
  return {{"schema", "swfqi.verify_report"},
          {"version", kFormatVersion},
          {"passed", passed()},
          {"failures", failures()},
          {"warnings", warnings},
          {"checks", list},
          {"certificates", certificates}};
}

namespace {

bool wants(const VerifyConfig& c, const std::string& name) {
  return std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end();
}

double orthogonality_defect(const QTable& target, const FeatureMap& features,
                            const StateActionMeasure& mu) {
  const QTable fit = evaluate_linear(projection_weighted_ls(target, features, mu, 0.0), features);
  const QTable resid = target - fit;
  const double scale = weighted_l2_norm(target, mu);
  double worst = 0.0;
  for (std::size_t j = 0; j < features.dim(); ++j) {
    const SaTable col = features.column(j);
    double ip = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) ip += mu[i] * resid[i] * col[i];
    const double norm = weighted_l2_norm(col, mu);
    if (norm > 0.0 && scale > 0.0) worst = std::max(worst, std::abs(ip) / (norm * scale));
  }
  return worst;
}

void verify_instance(const VerifyConfig& config, std::uint64_t seed, double tau_value,
                     const TabularMdp& mdp, VerifyReport& report) {
  auto add = [&](const std::string& name, double value, double tol, bool pass, std::string detail = {}) {
    report.checks.push_back({name, seed, tau_value, value, tol, pass, false, std::move(detail)});
  };
  auto skip = [&](const std::string& name, std::string why) {
    report.checks.push_back({name, seed, tau_value, 0.0, 0.0, true, true, std::move(why)});
  };
  const auto& tol = config.tolerances;

  const auto violations = mdp.violations();
  if (!violations.empty()) {
    std::string detail = "invalid MDP: " + violations.front();
    if (wants(config, "stationarity")) {
      add("stationarity", std::numeric_limits<double>::infinity(), tol.stationarity, false, detail);
    }
    for (const auto& name : config.checks) {
      if (name != "stationarity") skip(name, detail);
    }
    return;
  }

  const Temperature tau(tau_value);
  Reference ref;
  try {
    ref = make_reference(mdp, tau, tol.soft_residual);
  } catch (const Error& e) {
    add("soft_fixed_point", std::numeric_limits<double>::infinity(), tol.soft_residual, false, e.what());
    return;
  }
  if (wants(config, "soft_fixed_point")) {
    const double r = sup_distance(soft_bellman_apply(mdp, ref.q_star, tau), ref.q_star);
    add("soft_fixed_point", r, tol.soft_residual, r <= tol.soft_residual);
  }
  if (wants(config, "stationarity")) {
    const double r = stationarity_residual(mdp, ref.pi_star, ref.mu_star);
    add("stationarity", r, tol.stationarity, r <= tol.stationarity,
        ref.mu_lazy ? "solved through the lazy chain" : "");
  }
  const bool fd_ok = tau_value >= kDerivativeTauFloor;
  if (wants(config, "first_derivative")) {
    if (!fd_ok) {
      skip("first_derivative", "tau below the finite-difference floor");
    } else {
      const double e = check_first_derivative(mdp, ref.q_star, tau, ref.mu_star, config.directions, 1e-5, seed);
      add("first_derivative", e, tol.first_derivative, e <= tol.first_derivative);
    }
  }
  if (wants(config, "second_derivative")) {
    if (!fd_ok) {
      skip("second_derivative", "tau below the finite-difference floor");
    } else {
      const double e = check_second_derivative(mdp, ref.q_star, tau, ref.mu_star, config.directions, 1e-3, seed);
      add("second_derivative", e, tol.second_derivative, e <= tol.second_derivative);
    }
  }

  const bool needs_features = wants(config, "contraction") || wants(config, "projection_orthogonality");
  FeatureMap features;
  if (needs_features) features = build_realizable_features(ref.q_star, config.features_p, seed, ref.mu_star);

  const bool needs_profile = wants(config, "contraction") || wants(config, "remainder");
  std::optional<ContractionProfile> profile;
  if (needs_profile) {
    try {
      profile = contraction_profile(mdp, tau, ref.mu_star, ref.pi_star);
    } catch (const DegenerateSupport& e) {
      if (wants(config, "contraction")) skip("contraction", e.what());
      if (wants(config, "remainder")) skip("remainder", e.what());
    }
  }
  if (profile && wants(config, "contraction")) {
    const double radius = config.radius_fraction * profile->r0;
    const auto cert = certify_contraction(mdp, tau, ref.q_star, features, ref.mu_star, radius, config.pairs, seed);
    const std::size_t bad = cert.violations + cert.projected_violations;
    add("contraction", static_cast<double>(bad), 0.0, bad == 0,
        "max ratio " + format_double(cert.max_observed_ratio) + ", projected " +
            format_double(cert.max_projected_ratio) + ", bound " + format_double(cert.bound_rho));
    report.certificates.push_back({{"seed", seed},
                                   {"tau", tau_value},
                                   {"radius", cert.radius_tested},
                                   {"r0", cert.r0},
                                   {"pairs_tested", cert.pairs_tested},
                                   {"max_observed_ratio", cert.max_observed_ratio},
                                   {"max_projected_ratio", cert.max_projected_ratio},
                                   {"bound_rho", cert.bound_rho},
                                   {"slack", cert.slack},
                                   {"violations", cert.violations},
                                   {"projected_violations", cert.projected_violations}});
  }
  if (profile && wants(config, "remainder")) {
    const auto rep = check_remainder_bound(mdp, tau, ref.q_star, ref.mu_star, config.remainder_samples,
                                           0.5 * profile->r0, seed);
    add("remainder", rep.worst_slack, tol.remainder_slack, rep.worst_slack <= tol.remainder_slack);
  }
  if (wants(config, "projection_orthogonality")) {
    CounterRng rng(seed, Stream::kPerturbation, 7);
    QTable target(mdp.n_states(), mdp.n_actions());
    for (double& v : target.flat()) v = rng.normal();
    const double d = orthogonality_defect(target, features, ref.mu_star);
    add("projection_orthogonality", d, tol.orthogonality, d <= tol.orthogonality);
  }
}

}  // namespace

VerifyReport run_verify(const VerifyConfig& config) {
  VerifyReport report;
  if (config.seeds.empty() || config.checks.empty() || config.taus.empty()) {
    report.warnings.push_back("empty check subset: nothing was verified");
    return report;
  }
  for (std::uint64_t seed : config.seeds) {
    GarnetSpec spec = config.garnet;
    spec.seed = seed;
    TabularMdp mdp = generate_garnet(spec);
    if (config.corrupt && config.corrupt->seed == seed) {
      const auto& ct = *config.corrupt;
      if (ct.state >= mdp.n_states() || ct.action >= mdp.n_actions()) {
        throw ConfigError("corrupt_transition names a pair outside the MDP");
      }
      std::vector<double> p(mdp.transitions().begin(), mdp.transitions().end());
      const std::size_t base = (ct.state * mdp.n_actions() + ct.action) * mdp.n_states();
      for (std::size_t j = 0; j < mdp.n_states(); ++j) p[base + j] *= ct.scale;
      mdp = TabularMdp::unchecked(mdp.n_states(), mdp.n_actions(), std::move(p), mdp.reward(),
                                  mdp.discount());
    }
    for (double tau : config.taus) verify_instance(config, seed, tau, mdp, report);
  }
  return report;
}

}  // namespace swfqi
