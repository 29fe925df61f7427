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

#include "swfqi/fqi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swfqi/errors.hpp"
#include "swfqi/kernels.hpp"
#include "swfqi/rng.hpp"

namespace swfqi {

WeightingMode WeightingMode::behavior() { return {}; }

WeightingMode WeightingMode::stationary_exact(long refresh_period) {
  WeightingMode m;
  m.kind = WeightingKind::kStationaryExact;
  m.refresh_period = refresh_period;
  return m;
}

WeightingMode WeightingMode::stationary_noisy(double noise_scale, long refresh_period) {
  WeightingMode m;
  m.kind = WeightingKind::kStationaryNoisy;
  m.noise_scale = noise_scale;
  m.refresh_period = refresh_period;
  return m;
}

WeightingMode WeightingMode::fixed(DensityRatio ratio) {
  WeightingMode m;
  m.kind = WeightingKind::kFixed;
  m.fixed_ratio = std::move(ratio);
  return m;
}

void WeightingMode::validate() const {
  if (!(noise_scale >= 0.0)) throw InvalidSpec("weighting noise_scale must be nonnegative");
  if (refresh_period < 1) throw InvalidSpec("weighting refresh_period must be at least 1");
  if (kind == WeightingKind::kFixed && !fixed_ratio) throw InvalidSpec("fixed weighting needs a ratio");
}

std::string WeightingMode::label() const {
  switch (kind) {
    case WeightingKind::kBehavior:
      return "behavior";
    case WeightingKind::kStationaryExact:
      return "stationary_exact";
    case WeightingKind::kStationaryNoisy:
      return "stationary_noisy";
    case WeightingKind::kFixed:
      return "fixed";
  }
  return "unknown";
}

void HomotopySchedule::validate() const {
  if (!(tau_target > 0.0) || !(tau_init >= tau_target)) {
    throw InvalidSpec("homotopy needs tau_init >= tau_target > 0");
  }
  if (stages < 1) throw InvalidSpec("homotopy needs at least one stage");
  if (iters_per_stage < 1 || hold_iters < 0) throw InvalidSpec("homotopy iteration counts invalid");
}

std::vector<double> HomotopySchedule::temperatures() const {
  validate();
  std::vector<double> taus(static_cast<std::size_t>(stages));
  if (stages == 1) {
    taus[0] = tau_target;
    return taus;
  }
  for (long j = 0; j < stages; ++j) {
    const double f = static_cast<double>(j) / static_cast<double>(stages - 1);
    taus[static_cast<std::size_t>(j)] =
        decay == Decay::kGeometric ? tau_init * std::pow(tau_target / tau_init, f)
                                   : tau_init + (tau_target - tau_init) * f;
  }
  taus.back() = tau_target;
  return taus;
}

namespace {

StationaryResult robust_stationary(const TabularMdp& mdp, const TabularPolicy& pi, double tol,
                                   const StateActionMeasure* warm) {
  StationaryOptions opts;
  opts.warm_start = warm;
  try {
    return stationary_solve(mdp, pi, tol, 5'000, opts);
  } catch (const NonConvergence&) {
    // Periodic chains never settle under plain power iteration.
    opts.lazy = true;
    return stationary_solve(mdp, pi, tol, 1'000'000, opts);
  }
}

DensityRatio ones_like(const SaTable& shape) {
  return DensityRatio(SaTable(shape.n_states(), shape.n_actions(), 1.0));
}

double weight_error(const DensityRatio& used, const DensityRatio& exact,
                    const StateActionMeasure& mu_star) {
  double acc = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (exact[i] > 0.0) {
      const double d = used[i] / exact[i] - 1.0;
      acc += mu_star[i] * d * d;
    }
  }
  return std::sqrt(acc);
}

struct RunOffsets {
  long k0 = 0;
  long stage = 0;
};

FqiRunRecord run_fqi_impl(const FqiContext& ctx, const LinearQ& q0, const Reference& ref,
                          const FqiOptions& options, RunOffsets offsets) {
  options.weighting.validate();
  if (options.iters < 1) throw InvalidSpec("run_fqi needs iters >= 1");
  if (options.mode == FitMode::kFitted && ctx.design == nullptr) {
    throw InvalidSpec("fitted mode needs a dataset");
  }
  const Temperature tau(ref.tau);
  const auto& mdp = ctx.mdp;
  const auto& weighting = options.weighting;

  FqiRunRecord rec;
  rec.final_q = q0;
  QTable q = evaluate_linear(q0, ctx.features);
  std::optional<StateActionMeasure> mu_k;
  DensityRatio held = ones_like(mdp.reward());
  double prev_error = -1.0;
  const double basin_radius = options.basin_radius
                                  ? *options.basin_radius
                                  : basin_radius_for(mdp, ref, ctx.features);

  for (long k = 0; k <= options.iters; ++k) {
    FqiIterate row;
    row.k = offsets.k0 + k;
    row.tau = ref.tau;
    row.stage = offsets.stage;
    row.error_mu_star = q.all_finite() ? weighted_l2_norm(q - ref.q_star, ref.mu_star)
                                       : std::numeric_limits<double>::infinity();
    row.error_sq = row.error_mu_star * row.error_mu_star;
    if (k > 0 && prev_error > 0.0) row.rho = row.error_mu_star / prev_error;
    row.in_basin = row.error_mu_star <= basin_radius;
    prev_error = row.error_mu_star;

    if (!std::isfinite(row.error_mu_star) || row.error_mu_star > options.divergence_threshold) {
      rec.diverged = true;
      rec.rows.push_back(row);
      break;
    }
    if (k == options.iters) {
      rec.rows.push_back(row);
      break;
    }

    const auto pi_k = softmax_policy(q, tau);
    auto stat = robust_stationary(mdp, pi_k, options.stationary_tol, mu_k ? &*mu_k : nullptr);
    mu_k = std::move(stat.measure);
    const DensityRatio exact = density_ratio(*mu_k, ctx.nu_b);

    DensityRatio used;
    const bool warm = k < options.warm_start_iters;
    const bool refresh = !warm && (k - options.warm_start_iters) % weighting.refresh_period == 0;
    if (warm || weighting.kind == WeightingKind::kBehavior) {
      used = ones_like(exact);
    } else if (weighting.kind == WeightingKind::kFixed) {
      used = *weighting.fixed_ratio;
    } else {
      if (refresh) {
        held = exact;
        if (weighting.kind == WeightingKind::kStationaryNoisy && weighting.noise_scale > 0.0) {
          CounterRng rng(options.seed, Stream::kWeightNoise, static_cast<std::uint64_t>(row.k));
          double z = 0.0;
          for (std::size_t i = 0; i < held.size(); ++i) {
            held[i] *= std::exp(weighting.noise_scale * rng.normal());
            z += held[i] * ctx.nu_b[i];
          }
          if (z > 0.0) {
            for (double& v : held.flat()) v /= z;
          }
        }
      }
      used = held;
    }
    for (const auto& pert : options.perturbations) {
      if (pert.at_iteration == row.k) {
        require_same_shape(pert.delta, used, "weight perturbation");
        for (std::size_t i = 0; i < used.size(); ++i) used[i] += pert.delta[i];
      }
    }
    row.weight_err = weight_error(used, exact, ref.mu_star);
    rec.rows.push_back(row);

    try {
      if (options.mode == FitMode::kPopulation) {
        const auto measure = reweight(used, ctx.nu_b);
        rec.final_q = population_step(mdp, q, tau, ctx.features, measure, options.ridge);
      } else {
        rec.final_q = fitted_step(*ctx.design, mdp.discount(), q, tau, ctx.features, used, options.ridge);
      }
    } catch (const DegenerateSupport&) {
      rec.diverged = true;
      break;
    }
    q = evaluate_linear(rec.final_q, ctx.features);
  }
  rec.final_error = rec.rows.back().error_mu_star;
  return rec;
}

}  // namespace

Reference make_reference(const TabularMdp& mdp, Temperature tau, double tol) {
  Reference ref;
  ref.tau = tau.value();
  ref.q_star = solve_soft_q_star(mdp, tau, tol).q_star;
  ref.pi_star = softmax_policy(ref.q_star, tau);
  auto stat = robust_stationary(mdp, ref.pi_star, 1e-12, nullptr);
  ref.mu_star = std::move(stat.measure);
  ref.mu_lazy = stat.lazy;
  return ref;
}

FittedDesign FittedDesign::from_dataset(const TransitionDataset& data) {
  data.validate();
  if (data.size() == 0) throw InvalidSpec("fitted design needs a nonempty dataset");
  FittedDesign d;
  d.n_states = data.n_states;
  d.n_actions = data.n_actions;
  d.n = static_cast<double>(data.size());
  const std::size_t pairs = data.n_states * data.n_actions;
  d.counts.assign(pairs, 0.0);
  d.reward_sums.assign(pairs, 0.0);
  d.successor_counts.assign(pairs * data.n_states, 0.0);
  for (const auto& t : data.records) {
    const std::size_t i = t.s * data.n_actions + t.a;
    d.counts[i] += 1.0;
    d.reward_sums[i] += t.r;
    d.successor_counts[i * data.n_states + t.s_next] += 1.0;
  }
  return d;
}

LinearQ population_step(const TabularMdp& mdp, const QTable& q, Temperature tau,
                        const FeatureMap& features, const StateActionMeasure& weight_measure,
                        double ridge) {
  return projection_weighted_ls(soft_bellman_apply(mdp, q, tau), features, weight_measure, ridge);
}

LinearQ fitted_step(const TransitionDataset& data, double discount, const QTable& q,
                    Temperature tau, const FeatureMap& features, const DensityRatio& ratio,
                    double ridge) {
  if (data.size() == 0) throw InvalidSpec("fitted_step needs a nonempty dataset");
  require_same_shape(q, ratio, "fitted_step");
  const std::size_t p = features.dim();
  std::vector<double> gram(p * p, 0.0);
  std::vector<double> rhs(p, 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (const auto& t : data.records) {
    const double y = t.r + discount * logsumexp_backup(q.row(t.s_next), tau);
    const double w = ratio(t.s, t.a) * inv_n;
    if (w == 0.0) continue;
    const auto phi = features.row(t.s, t.a);
    kernels::rank1_update(w, phi, gram);
    kernels::axpy(w * y, phi, rhs);
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram[i * p + j] = gram[j * p + i];
  }
  return {solve_normal_equations(std::move(gram), std::move(rhs), ridge), features.id()};
}

LinearQ fitted_step(const FittedDesign& design, double discount, const QTable& q, Temperature tau,
                    const FeatureMap& features, const DensityRatio& ratio, double ridge) {
  require_same_shape(q, ratio, "fitted_step");
  if (q.n_states() != design.n_states || q.n_actions() != design.n_actions) {
    throw DimensionError("fitted_step: design shape does not match Q");
  }
  const auto v = soft_state_values(q, tau);
  const std::size_t p = features.dim();
  std::vector<double> gram(p * p, 0.0);
  std::vector<double> rhs(p, 0.0);
  const double inv_n = 1.0 / design.n;
  for (std::size_t i = 0; i < design.counts.size(); ++i) {
    const double w = ratio[i] * inv_n;
    if (design.counts[i] == 0.0 || w == 0.0) continue;
    const std::span<const double> succ(design.successor_counts.data() + i * design.n_states,
                                       design.n_states);
    const double target_sum = design.reward_sums[i] + discount * kernels::dot(succ, v);
    const auto phi = features.row(i);
    kernels::rank1_update(w * design.counts[i], phi, gram);
    kernels::axpy(w * target_sum, phi, rhs);
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram[i * p + j] = gram[j * p + i];
  }
  return {solve_normal_equations(std::move(gram), std::move(rhs), ridge), features.id()};
}

FqiRunRecord run_fqi(const FqiContext& ctx, const LinearQ& q0, const Reference& ref,
                     const FqiOptions& options) {
  return run_fqi_impl(ctx, q0, ref, options, {});
}

FqiRunRecord run_homotopy(const FqiContext& ctx, const LinearQ& q0,
                          const HomotopySchedule& schedule, const FqiOptions& options) {
  const auto taus = schedule.temperatures();
  FqiRunRecord out;
  out.stage_starts.clear();
  LinearQ theta = q0;
  long k0 = 0;
  for (std::size_t j = 0; j < taus.size(); ++j) {
    const Reference ref = make_reference(ctx.mdp, Temperature(taus[j]));
    FqiOptions stage_opts = options;
    stage_opts.iters = schedule.iters_per_stage + (j + 1 == taus.size() ? schedule.hold_iters : 0);
    stage_opts.warm_start_iters = std::max(0L, options.warm_start_iters - k0);
    FqiRunRecord stage = run_fqi_impl(ctx, theta, ref, stage_opts, {k0, static_cast<long>(j)});
    // The first row of a later stage repeats the carried-over iterate.
    const std::size_t skip = j == 0 ? 0 : 1;
    if (stage.rows.size() > skip) out.stage_starts.push_back(out.rows.size());
    out.rows.insert(out.rows.end(), stage.rows.begin() + static_cast<std::ptrdiff_t>(skip),
                    stage.rows.end());
    theta = stage.final_q;
    k0 += stage_opts.iters;
    if (stage.diverged) {
      out.diverged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i].rho.reset();
    if (i > 0 && out.rows[i - 1].error_mu_star > 0.0) {
      out.rows[i].rho = out.rows[i].error_mu_star / out.rows[i - 1].error_mu_star;
    }
  }
  out.final_q = theta;
  out.final_error = out.rows.back().error_mu_star;
  return out;
}

InjectionResult inject_weight_error_once(const FqiContext& ctx, const LinearQ& q0,
                                         const Reference& ref, const FqiOptions& options,
                                         long at_iteration, const DensityRatio& perturbation) {
  if (at_iteration < 0 || at_iteration >= options.iters) {
    throw InvalidSpec("injection iteration must lie in [0, iters)");
  }
  FqiOptions clean_opts = options;
  clean_opts.mode = FitMode::kPopulation;
  clean_opts.weighting = WeightingMode::stationary_exact(1);
  clean_opts.perturbations.clear();
  FqiOptions pert_opts = clean_opts;
  pert_opts.perturbations.push_back({at_iteration, perturbation});

  InjectionResult out;
  out.clean = run_fqi(ctx, q0, ref, clean_opts);
  out.perturbed = run_fqi(ctx, q0, ref, pert_opts);
  const std::size_t n = std::min(out.clean.rows.size(), out.perturbed.rows.size());
  out.excess.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.excess[i] = out.perturbed.rows[i].error_mu_star - out.clean.rows[i].error_mu_star;
  }
  return out;
}

double basin_radius_for(const TabularMdp& mdp, const Reference& ref, const FeatureMap& features) {
  try {
    const double eps_f = misspecification_gap(ref.q_star, features, ref.mu_star);
    const auto profile = contraction_profile(mdp, Temperature(ref.tau), ref.mu_star, ref.pi_star, eps_f);
    return std::max(0.0, profile.r_max);
  } catch (const Error&) {
    return 0.0;
  }
}

LinearQ basin_initialization(const Reference& ref, const FeatureMap& features, double delta,
                             std::uint64_t seed) {
  CounterRng rng(seed, Stream::kInitialization);
  QTable u(ref.q_star.n_states(), ref.q_star.n_actions());
  for (double& v : u.flat()) v = rng.normal();
  const double norm = weighted_l2_norm(u, ref.mu_star);
  if (!(norm > 0.0)) throw DegenerateSupport("basin direction has zero stationary norm");
  const QTable start = add_scaled(ref.q_star, delta / norm, u);
  return projection_weighted_ls(start, features, ref.mu_star, 0.0);
}

}  // namespace swfqi
