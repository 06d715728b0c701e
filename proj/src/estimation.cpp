#include "osaom/estimation.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "osaom/errors.hpp"

namespace osaom {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static stride scheduling; results must be written to per-index slots so the
// outcome is independent of the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < count; i += threads) body(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Union of the imputation flags relevant to one period: a dyad or actor
// flagged at either end of the period is excluded from the targets.
struct PeriodMask {
    std::vector<std::uint8_t> dyad;   // n*n
    std::vector<std::uint8_t> actor;  // n
};

std::vector<PeriodMask> build_masks(const ImputedPanel& panel) {
    const int n = panel.n;
    std::vector<PeriodMask> masks(panel.waves.size() - 1);
    for (std::size_t m = 0; m + 1 < panel.waves.size(); ++m) {
        const ImputedWave& a = panel.waves[m];
        const ImputedWave& b = panel.waves[m + 1];
        PeriodMask& mask = masks[m];
        mask.dyad.assign(static_cast<std::size_t>(n) * n, 0);
        mask.actor.assign(n, 0);
        for (std::size_t e = 0; e < mask.dyad.size(); ++e)
            mask.dyad[e] = a.weak_imputed[e] | a.strong_imputed[e] | b.weak_imputed[e] |
                           b.strong_imputed[e];
        for (int i = 0; i < n; ++i)
            mask.actor[i] = a.behavior_imputed[i] | b.behavior_imputed[i];
    }
    return masks;
}

struct MaskedState {
    BinaryMatrix weak;
    BinaryMatrix strong;
    std::vector<int> behavior;
};

// Drops flagged entries from an end state: flagged dyads lose both tie
// levels, flagged actors keep the period's (imputed) starting value. Applied
// identically to the observed and the simulated side, so flagged entries
// cancel from the moment equations.
MaskedState apply_mask(const BinaryMatrix& weak, const BinaryMatrix& strong,
                       const std::vector<int>& z, const ImputedWave& start,
                       const PeriodMask& mask) {
    const int n = weak.n();
    MaskedState out{weak, strong, z};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (mask.dyad[static_cast<std::size_t>(i) * n + j]) {
                out.weak.set(i, j, false);
                out.strong.set(i, j, false);
            }
        }
        if (mask.actor[i]) out.behavior[i] = start.behavior[i];
    }
    return out;
}

void accumulate_effect_targets(const ModelSpec& model, const ParamLayout& layout,
                               const MaskedState& masked, Eigen::VectorXd& targets) {
    const StateView view{&masked.weak, &masked.strong, &masked.behavior};
    const int n = masked.weak.n();
    for (int d = 0; d < kDependents; ++d) {
        const auto& effects = model.effects(static_cast<Dependent>(d));
        for (std::size_t k = 0; k < effects.size(); ++k) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) total += effects[k].statistic(view, i);
            targets[layout.effect_index(static_cast<Dependent>(d), static_cast<int>(k))] += total;
        }
    }
}

int masked_hamming(const BinaryMatrix& a, const BinaryMatrix& b, const PeriodMask& mask) {
    const int n = a.n();
    int dist = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || mask.dyad[static_cast<std::size_t>(i) * n + j]) continue;
            if (a(i, j) != b(i, j)) ++dist;
        }
    return dist;
}

int masked_behavior_distance(const std::vector<int>& a, const std::vector<int>& b,
                             const PeriodMask& mask) {
    int dist = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!mask.actor[i]) dist += std::abs(a[i] - b[i]);
    return dist;
}

void add_rate_targets(const ParamLayout& layout, int period, const ImputedWave& start,
                      const BinaryMatrix& weak_end, const BinaryMatrix& strong_end,
                      const std::vector<int>& z_end, const PeriodMask& mask,
                      Eigen::VectorXd& targets) {
    targets[layout.rate_index(Dependent::Weak, period)] =
        masked_hamming(start.weak, weak_end, mask);
    targets[layout.rate_index(Dependent::Strong, period)] =
        masked_hamming(start.strong, strong_end, mask);
    targets[layout.rate_index(Dependent::Behavior, period)] =
        masked_behavior_distance(start.behavior, z_end, mask);
}

ChoiceEngine engine_for(const ModelSpec& model, const ParamLayout& layout,
                        const Eigen::VectorXd& params) {
    std::array<std::vector<double>, kDependents> theta;
    for (int d = 0; d < kDependents; ++d) {
        theta[d].resize(layout.effect_counts[d]);
        for (int k = 0; k < layout.effect_counts[d]; ++k)
            theta[d][k] = params[layout.effect_index(static_cast<Dependent>(d), k)];
    }
    return ChoiceEngine(model, std::move(theta));
}

Rates rates_for(const ParamLayout& layout, const Eigen::VectorXd& params, int period) {
    Rates r;
    for (int d = 0; d < kDependents; ++d)
        r[d] = params[layout.rate_index(static_cast<Dependent>(d), period)];
    return r;
}

// Symmetric PSD pseudo-inverse for covariance matrices that may be rank
// deficient (constant statistics).
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double tol = std::max(ev.cwiseAbs().maxCoeff() * 1e-10, 1e-12);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (int k = 0; k < ev.size(); ++k)
        if (ev[k] > tol) inv[k] = 1.0 / ev[k];
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd covariance(const std::vector<Eigen::VectorXd>& rows) {
    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(rows.front().size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& r : rows) mean += r;
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (const auto& r : rows) {
        Eigen::VectorXd c = r - mean;
        cov += c * c.transpose();
    }
    return cov / (n - 1);
}

Eigen::MatrixXd cross_covariance(const std::vector<Eigen::VectorXd>& a,
                                 const std::vector<Eigen::VectorXd>& b) {
    const int n = static_cast<int>(a.size());
    const int pa = static_cast<int>(a.front().size());
    const int pb = static_cast<int>(b.front().size());
    Eigen::VectorXd ma = Eigen::VectorXd::Zero(pa), mb = Eigen::VectorXd::Zero(pb);
    for (const auto& r : a) ma += r;
    for (const auto& r : b) mb += r;
    ma /= n;
    mb /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(pa, pb);
    for (int r = 0; r < n; ++r) cov += (a[r] - ma) * (b[r] - mb).transpose();
    return cov / (n - 1);
}

// Conditions an estimated derivative into a usable search preconditioner.
// A coordinate whose own-derivative is lost in statistic noise is decoupled
// from the others and given an sd-scaled diagonal; a coordinate whose
// statistic never varies at all is left with a unit diagonal (its deviation
// is constant, so the direction is harmless). The warning names the treated
// parameters once.
Eigen::MatrixXd condition_preconditioner(Eigen::MatrixXd deriv, const Eigen::MatrixXd& sigma,
                                         const std::vector<std::string>& names,
                                         std::vector<std::string>* warnings, bool* warned) {
    std::string treated;
    for (int k = 0; k < deriv.cols(); ++k) {
        const double sd = std::sqrt(std::max(sigma(k, k), 0.0));
        const double floor = 0.1 * sd;
        if (deriv(k, k) > floor && sd > 0.0) continue;
        if (!treated.empty()) treated += ", ";
        treated += names[k];
        for (int l = 0; l < deriv.cols(); ++l) {
            if (l == k) continue;
            deriv(k, l) = 0.0;
            deriv(l, k) = 0.0;
        }
        deriv(k, k) = sd > 0.0 ? std::max(std::abs(deriv(k, k)), floor) : 1.0;
    }
    if (!treated.empty() && warnings && warned && !*warned) {
        warnings->push_back("derivative signal is weak for: " + treated +
                            "; using a damped search direction for these parameters");
        *warned = true;
    }
    return deriv;
}

std::uint64_t stream_id(int attempt, int phase, int run) {
    return (static_cast<std::uint64_t>(attempt) << 40) |
           (static_cast<std::uint64_t>(phase) << 32) | static_cast<std::uint64_t>(run);
}

}  // namespace

Eigen::VectorXd observed_targets(const ImputedPanel& panel, const ModelSpec& model,
                                 const ParamLayout& layout) {
    const auto masks = build_masks(panel);
    Eigen::VectorXd targets = Eigen::VectorXd::Zero(layout.size());
    for (int m = 0; m < layout.periods; ++m) {
        const ImputedWave& start = panel.waves[m];
        const ImputedWave& end = panel.waves[m + 1];
        add_rate_targets(layout, m, start, end.weak, end.strong, end.behavior, masks[m], targets);
        MaskedState masked = apply_mask(end.weak, end.strong, end.behavior, start, masks[m]);
        accumulate_effect_targets(model, layout, masked, targets);
    }
    return targets;
}

Eigen::VectorXd simulate_targets(const ImputedPanel& panel, const ModelSpec& model,
                                 const ParamLayout& layout, const Eigen::VectorXd& params,
                                 Rng rng, Eigen::VectorXd* score_out) {
    const auto masks = build_masks(panel);
    ChoiceEngine engine = engine_for(model, layout, params);
    Eigen::VectorXd targets = Eigen::VectorXd::Zero(layout.size());
    ScoreAccumulator scores;
    if (score_out) {
        scores.layout = layout;
        scores.score.assign(layout.size(), 0.0);
    }
    for (int m = 0; m < layout.periods; ++m) {
        const ImputedWave& start = panel.waves[m];
        ModelState state{start.weak, start.strong, start.behavior, 0.0};
        scores.period = m;
        engine.simulate_period(state, rates_for(layout, params, m), rng, nullptr,
                               score_out ? &scores : nullptr);
        add_rate_targets(layout, m, start, state.weak, state.strong, state.behavior, masks[m],
                         targets);
        MaskedState masked = apply_mask(state.weak, state.strong, state.behavior, start, masks[m]);
        accumulate_effect_targets(model, layout, masked, targets);
    }
    if (score_out) {
        *score_out = Eigen::VectorXd::Zero(layout.size());
        for (int k = 0; k < layout.size(); ++k) (*score_out)[k] = scores.score[k];
    }
    return targets;
}

Eigen::VectorXd initial_parameters(const ImputedPanel& panel, const ModelSpec& model,
                                   const ParamLayout& layout,
                                   std::vector<std::string>* warnings) {
    const int n = panel.n;
    Eigen::VectorXd params = Eigen::VectorXd::Zero(layout.size());
    Eigen::VectorXd obs = observed_targets(panel, model, layout);

    for (int d = 0; d < kDependents; ++d) {
        for (int m = 0; m < layout.periods; ++m) {
            const int idx = layout.rate_index(static_cast<Dependent>(d), m);
            const double changes = obs[idx];
            if (changes == 0.0 && warnings)
                warnings->push_back("no observed change for " +
                                    std::string(to_string(static_cast<Dependent>(d))) +
                                    " in period " + std::to_string(m + 1) +
                                    "; the rate will sit at its lower bound");
            params[idx] = std::max(0.3, 1.5 * changes / n);
        }
    }

    // outdegree coefficients start at the pooled tie log-odds
    for (Dependent d : {Dependent::Weak, Dependent::Strong}) {
        const auto& effects = model.effects(d);
        for (std::size_t k = 0; k < effects.size(); ++k) {
            if (effects[k].spec().kind != EffectKind::Outdegree) continue;
            long ties = 0, dyads = 0;
            for (const auto& wave : panel.waves) {
                const BinaryMatrix& x = d == Dependent::Weak ? wave.weak : wave.strong;
                ties += x.tie_count();
                dyads += static_cast<long>(n) * (n - 1);
            }
            double density = dyads > 0 ? static_cast<double>(ties) / dyads : 0.0;
            density = std::clamp(density, 1e-4, 1.0 - 1e-4);
            params[layout.effect_index(d, static_cast<int>(k))] =
                std::clamp(std::log(density / (1.0 - density)), -4.0, 4.0);
        }
    }
    return params;
}

EstimationResult estimate(const Panel& panel, const ModelSpec& model,
                          const EstimationOptions& options) {
    if (panel.periods() < 1) throw DataError("estimation needs at least 2 waves");
    const ImputedPanel imputed = impute_for_simulation(panel);
    const ParamLayout layout = ParamLayout::of(model, panel.periods());
    const int P = layout.size();
    const std::vector<std::string> names = layout.names(model);
    const int threads = resolve_threads(options.threads);
    const Eigen::VectorXd s_obs = observed_targets(imputed, model, layout);

    EstimationResult result;
    result.param_names = names;
    result.layout = layout;
    result.observed = s_obs;
    result.zbar = panel.zbar;
    result.z_range = panel.z_range;
    result.z_sim_mean = panel.z_sim_mean;
    result.grid = panel.grid;

    Eigen::VectorXd theta = options.initial
                                ? *options.initial
                                : initial_parameters(imputed, model, layout, &result.warnings);
    if (theta.size() != P) throw ConfigError("initial parameter vector has the wrong length");

    // rates with no observed change have their moment solution at the
    // boundary; pin them there instead of chasing an unreachable target
    std::vector<bool> pinned(P, false);
    for (int k = 0; k < layout.rate_count(); ++k)
        if (s_obs[k] == 0.0) {
            pinned[k] = true;
            theta[k] = options.rate_floor;
        }

    auto box_clamp = [&](Eigen::VectorXd& v) {
        for (int k = 0; k < P; ++k) {
            if (layout.is_rate(k))
                v[k] = std::clamp(v[k], options.rate_floor, 60.0);
            else
                v[k] = std::clamp(v[k], -30.0, 30.0);
        }
    };
    box_clamp(theta);

    auto run_targets = [&](const Eigen::VectorXd& params, std::uint64_t stream,
                           Eigen::VectorXd* score) {
        return simulate_targets(imputed, model, layout, params,
                                Rng::derive(options.seed, stream), score);
    };

    struct Derivative {
        Eigen::MatrixXd precond;   // conditioned matrix used for the RM direction
        Eigen::VectorXd mean_dev;  // mean simulated deviation at theta
    };

    // Estimates D = dE[S]/dtheta at `theta` and conditions it into a usable
    // preconditioner: coordinates whose own-derivative signal is drowned by
    // statistic noise are decoupled and given an sd-scaled diagonal so the
    // search crawls in the right direction instead of exploding.
    bool warned_conditioning = false;
    auto estimate_derivative = [&](int runs, int attempt, int phase_tag) {
        const int n1 = std::max(runs, 8);
        std::vector<Eigen::VectorXd> sims(n1), scores(n1);
        Eigen::VectorXd dev = Eigen::VectorXd::Zero(P);
        if (options.fd_derivative) {
            // the spec's common-random-number centered differences
            Eigen::VectorXd delta(P);
            for (int k = 0; k < P; ++k)
                delta[k] = options.fd_step * std::max(std::abs(theta[k]), 1.0);
            std::vector<Eigen::MatrixXd> cols(n1);
            parallel_for(n1, threads, [&](int r) {
                const std::uint64_t stream = stream_id(attempt, phase_tag, r);
                sims[r] = run_targets(theta, stream, nullptr);
                Eigen::MatrixXd d_r(P, P);
                for (int k = 0; k < P; ++k) {
                    Eigen::VectorXd up = theta, down = theta;
                    up[k] += delta[k];
                    down[k] -= delta[k];
                    if (layout.is_rate(k)) {
                        up[k] = std::max(up[k], options.rate_floor);
                        down[k] = std::max(down[k], options.rate_floor);
                    }
                    const Eigen::VectorXd s_up = run_targets(up, stream, nullptr);
                    const Eigen::VectorXd s_down = run_targets(down, stream, nullptr);
                    d_r.col(k) = (s_up - s_down) / (up[k] - down[k]);
                }
                cols[r] = d_r;
            });
            Eigen::MatrixXd deriv = Eigen::MatrixXd::Zero(P, P);
            for (int r = 0; r < n1; ++r) {
                deriv += cols[r];
                dev += sims[r] - s_obs;
            }
            deriv /= n1;
            dev /= n1;
            const Eigen::MatrixXd sigma = covariance(sims);
            return Derivative{condition_preconditioner(deriv, sigma, names,
                                                       warned_conditioning
                                                           ? nullptr
                                                           : &result.warnings,
                                                       &warned_conditioning),
                              dev};
        }
        parallel_for(n1, threads, [&](int r) {
            Eigen::VectorXd score;
            sims[r] = run_targets(theta, stream_id(attempt, phase_tag, r), &score);
            scores[r] = score;
        });
        for (const auto& s : sims) dev += s - s_obs;
        dev /= n1;
        const Eigen::MatrixXd deriv = cross_covariance(sims, scores);
        const Eigen::MatrixXd sigma = covariance(sims);
        return Derivative{condition_preconditioner(deriv, sigma, names,
                                                   warned_conditioning ? nullptr
                                                                       : &result.warnings,
                                                   &warned_conditioning),
                          dev};
    };

    auto rm_step = [&](const Derivative& d, const Eigen::VectorXd& dev, double gain) {
        Eigen::VectorXd step = gain * Eigen::PartialPivLU<Eigen::MatrixXd>(d.precond).solve(dev);
        for (int k = 0; k < P; ++k) {
            step[k] = std::clamp(step[k], -0.5, 0.5);
            if (pinned[k]) step[k] = 0.0;
        }
        theta -= step;
        box_clamp(theta);
        if (!theta.allFinite()) throw NumericalError("parameters diverged during estimation");
    };

    for (int attempt = 0;; ++attempt) {
        // ---- Phase 1: derivative at the starting point plus one Newton step
        Derivative deriv = estimate_derivative(options.phase1_runs, attempt, 1);
        rm_step(deriv, deriv.mean_dev, 1.0);

        // ---- Phase 2: Robbins-Monro sub-phases, gain halving, averaged ends
        int iteration = 0;
        for (int sub = 0; sub < options.phase2_subphases; ++sub) {
            if (sub > 0)  // refresh the preconditioner where the search now is
                deriv = estimate_derivative(std::max(options.phase1_runs / 2, 40), attempt,
                                            10 + sub);
            const double gain = options.gain / static_cast<double>(1 << sub);
            const int iters = options.phase2_base_iterations * (1 << sub);
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(P);
            for (int it = 0; it < iters; ++it, ++iteration) {
                const Eigen::VectorXd sim =
                    run_targets(theta, stream_id(attempt, 2, iteration), nullptr);
                rm_step(deriv, sim - s_obs, gain);
                sum += theta;
            }
            theta = sum / iters;  // Polyak average stabilizes the sub-phase result
            box_clamp(theta);
        }

        // ---- Phase 3: simulation at the estimate
        const int n3 = std::max(options.phase3_runs, 8);
        std::vector<Eigen::VectorXd> sims(n3), scores(n3);
        parallel_for(n3, threads, [&](int r) {
            Eigen::VectorXd score;
            sims[r] = run_targets(theta, stream_id(attempt, 3, r), &score);
            scores[r] = score;
        });
        Eigen::VectorXd mean_dev = Eigen::VectorXd::Zero(P);
        for (const auto& s : sims) mean_dev += s - s_obs;
        mean_dev /= n3;
        const Eigen::MatrixXd sigma = covariance(sims);
        const Eigen::MatrixXd deriv3 = cross_covariance(sims, scores);

        Eigen::VectorXd tconv(P);
        for (int k = 0; k < P; ++k) {
            const double sd = std::sqrt(std::max(sigma(k, k), 0.0));
            tconv[k] = sd > 0.0 ? mean_dev[k] / sd : (mean_dev[k] == 0.0 ? 0.0 : INFINITY);
        }
        const double mcr =
            std::sqrt(std::max(0.0, mean_dev.dot(pseudo_inverse(sigma) * mean_dev)));

        const bool converged =
            tconv.cwiseAbs().maxCoeff() < options.tconv_limit && mcr < options.mcr_limit;

        if (converged || attempt >= options.max_retries) {
            bool warned = false;
            const Eigen::MatrixXd deriv_se =
                condition_preconditioner(deriv3, sigma, names, &result.warnings, &warned);
            result.deriv = deriv_se;
            const Eigen::MatrixXd deriv_inv =
                Eigen::FullPivLU<Eigen::MatrixXd>(deriv_se).inverse();
            result.cov_theta = deriv_inv * sigma * deriv_inv.transpose();
            result.se = result.cov_theta.diagonal().cwiseMax(0.0).cwiseSqrt();
            result.sigma = sigma;
            result.theta = theta;
            result.tconv = tconv;
            result.mcr = mcr;
            result.converged = converged;
            result.retries_used = attempt;
            result.sim_mean = s_obs + mean_dev;
            if (!converged)
                result.warnings.push_back("estimation did not meet the convergence criteria");
            return result;
        }
    }
}

double chi_squared_p_value(double statistic, int df) {
    if (df < 1) throw ConfigError("chi-square test needs at least 1 degree of freedom");
    if (statistic <= 0.0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

double two_sided_normal_p(double z) {
    boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

ScoreTestResult score_test(const Panel& panel, const ModelSpec& model,
                           const EstimationResult& fitted, const EffectSpec& extra, int runs,
                           std::uint64_t seed, int threads) {
    // rebuild the model with the extra effect appended to its dependent list
    std::array<std::vector<EffectSpec>, kDependents> specs;
    for (int d = 0; d < kDependents; ++d)
        for (const auto& eff : model.effects(static_cast<Dependent>(d))) {
            if (eff.spec().qualified() == extra.qualified())
                throw ConfigError("effect " + extra.qualified() +
                                  " is already part of the fitted model");
            specs[d].push_back(eff.spec());
        }
    const int extra_dep = static_cast<int>(extra.dependent);
    const int extra_pos = static_cast<int>(specs[extra_dep].size());
    specs[extra_dep].push_back(extra);
    ModelSpec extended(panel, specs[0], specs[1], specs[2]);

    const ImputedPanel imputed = impute_for_simulation(panel);
    const ParamLayout layout = ParamLayout::of(extended, panel.periods());
    const ParamLayout base_layout = fitted.layout;
    const int p_base = base_layout.size();

    // map fitted parameters into the extended layout; the extra coefficient
    // stays at zero so the simulated process is the fitted one
    Eigen::VectorXd params = Eigen::VectorXd::Zero(layout.size());
    std::vector<int> base_to_ext(p_base);
    for (int d = 0; d < kDependents; ++d)
        for (int m = 0; m < layout.periods; ++m)
            base_to_ext[base_layout.rate_index(static_cast<Dependent>(d), m)] =
                layout.rate_index(static_cast<Dependent>(d), m);
    for (int d = 0; d < kDependents; ++d)
        for (int k = 0; k < base_layout.effect_counts[d]; ++k)
            base_to_ext[base_layout.effect_index(static_cast<Dependent>(d), k)] =
                layout.effect_index(static_cast<Dependent>(d), k);
    for (int k = 0; k < p_base; ++k) params[base_to_ext[k]] = fitted.theta[k];
    const int extra_index = layout.effect_index(extra.dependent, extra_pos);

    const Eigen::VectorXd obs = observed_targets(imputed, extended, layout);
    const int nthreads = resolve_threads(threads);
    std::vector<Eigen::VectorXd> devs(runs);
    parallel_for(runs, nthreads, [&](int r) {
        devs[r] = simulate_targets(imputed, extended, layout, params,
                                   Rng::derive(seed, stream_id(0, 4, r)), nullptr) -
                  obs;
    });

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(layout.size());
    for (const auto& d : devs) mean += d;
    mean /= runs;
    const Eigen::MatrixXd gamma = covariance(devs);

    // partition into fitted block (b) and the extra statistic (c)
    Eigen::VectorXd b_mean(p_base);
    Eigen::MatrixXd gamma_bb(p_base, p_base);
    Eigen::VectorXd gamma_cb(p_base);
    for (int a = 0; a < p_base; ++a) {
        b_mean[a] = mean[base_to_ext[a]];
        gamma_cb[a] = gamma(extra_index, base_to_ext[a]);
        for (int b = 0; b < p_base; ++b) gamma_bb(a, b) = gamma(base_to_ext[a], base_to_ext[b]);
    }
    const double gamma_cc = gamma(extra_index, extra_index);
    if (gamma_cc <= 1e-300)
        throw NumericalError("extra statistic " + extra.qualified() +
                             " is constant across simulations; untestable");

    const Eigen::MatrixXd bb_inv = pseudo_inverse(gamma_bb);
    const double cond_var = gamma_cc - gamma_cb.dot(bb_inv * gamma_cb);
    if (cond_var <= 1e-8 * gamma_cc)
        throw NumericalError("extra statistic " + extra.qualified() +
                             " is collinear with the fitted statistics; untestable");
    const double cond_mean = mean[extra_index] - gamma_cb.dot(bb_inv * b_mean);

    ScoreTestResult out;
    out.statistic = cond_mean / std::sqrt(cond_var);
    out.p_value = two_sided_normal_p(out.statistic);
    out.runs = runs;
    return out;
}

WaldResult wald_test(const EstimationResult& fitted, const std::vector<int>& subset) {
    if (subset.empty()) throw ConfigError("Wald test needs a non-empty parameter subset");
    const int k = static_cast<int>(subset.size());
    Eigen::VectorXd theta_s(k);
    Eigen::MatrixXd cov_s(k, k);
    for (int a = 0; a < k; ++a) {
        if (subset[a] < 0 || subset[a] >= fitted.theta.size())
            throw ConfigError("Wald test: parameter index out of range");
        theta_s[a] = fitted.theta[subset[a]];
        for (int b = 0; b < k; ++b) cov_s(a, b) = fitted.cov_theta(subset[a], subset[b]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cov_s);
    if (!lu.isInvertible()) {
        std::string names;
        for (int a = 0; a < k; ++a) {
            if (a) names += ", ";
            names += fitted.param_names[subset[a]];
        }
        throw NumericalError("covariance sub-block is singular for parameters: " + names);
    }
    WaldResult out;
    out.statistic = theta_s.dot(lu.solve(theta_s));
    out.df = k;
    out.p_value = chi_squared_p_value(out.statistic, out.df);
    return out;
}

const char* to_string(AuxStatistic a) {
    switch (a) {
        case AuxStatistic::WeakIndegree: return "weak-indegree";
        case AuxStatistic::WeakOutdegree: return "weak-outdegree";
        case AuxStatistic::StrongIndegree: return "strong-indegree";
        case AuxStatistic::StrongOutdegree: return "strong-outdegree";
        case AuxStatistic::Behavior: return "behavior";
    }
    return "?";
}

AuxStatistic aux_from_string(const std::string& s) {
    for (AuxStatistic a :
         {AuxStatistic::WeakIndegree, AuxStatistic::WeakOutdegree, AuxStatistic::StrongIndegree,
          AuxStatistic::StrongOutdegree, AuxStatistic::Behavior})
        if (s == to_string(a)) return a;
    throw ConfigError("unknown auxiliary statistic '" + s + "'");
}

namespace {

// Cumulative degree counts over 0..7 / cumulative behavior counts over the
// grid; cumulative bins keep the vectors comparable across sparse draws.
Eigen::VectorXd aux_vector(AuxStatistic family, const MaskedState& state, int grid) {
    const int n = state.weak.n();
    const bool behavior = family == AuxStatistic::Behavior;
    const int bins = behavior ? grid : 8;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(bins);
    for (int i = 0; i < n; ++i) {
        int value = 0;
        switch (family) {
            case AuxStatistic::WeakIndegree: value = state.weak.in_degree(i); break;
            case AuxStatistic::WeakOutdegree: value = state.weak.out_degree(i); break;
            case AuxStatistic::StrongIndegree: value = state.strong.in_degree(i); break;
            case AuxStatistic::StrongOutdegree: value = state.strong.out_degree(i); break;
            case AuxStatistic::Behavior: value = state.behavior[i] - 1; break;
        }
        for (int b = value; b < bins; ++b) out[b] += 1.0;
    }
    return out;
}

}  // namespace

GofResult gof(const Panel& panel, const ModelSpec& model, const EstimationResult& fitted,
              const std::vector<AuxStatistic>& families, int runs, std::uint64_t seed,
              int threads) {
    if (panel.periods() < 1) throw DataError("goodness of fit needs at least 2 waves");
    const ImputedPanel imputed = impute_for_simulation(panel);
    const auto masks = build_masks(imputed);
    const ParamLayout layout = fitted.layout;
    const int periods = layout.periods;
    const int nthreads = resolve_threads(threads);

    // observed auxiliary vectors per (family, period)
    std::vector<std::vector<Eigen::VectorXd>> observed(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) {
        observed[f].resize(periods);
        for (int m = 0; m < periods; ++m) {
            const ImputedWave& end = imputed.waves[m + 1];
            MaskedState masked = apply_mask(end.weak, end.strong, end.behavior,
                                            imputed.waves[m], masks[m]);
            observed[f][m] = aux_vector(families[f], masked, panel.grid);
        }
    }

    // simulated vectors: sims[r][f][m]
    std::vector<std::vector<std::vector<Eigen::VectorXd>>> sims(runs);
    ChoiceEngine engine = engine_for(model, layout, fitted.theta);
    parallel_for(runs, nthreads, [&](int r) {
        sims[r].assign(families.size(), std::vector<Eigen::VectorXd>(periods));
        Rng rng = Rng::derive(seed, stream_id(0, 5, r));
        for (int m = 0; m < periods; ++m) {
            const ImputedWave& start = imputed.waves[m];
            ModelState state{start.weak, start.strong, start.behavior, 0.0};
            engine.simulate_period(state, rates_for(layout, fitted.theta, m), rng);
            MaskedState masked =
                apply_mask(state.weak, state.strong, state.behavior, start, masks[m]);
            for (std::size_t f = 0; f < families.size(); ++f)
                sims[r][f][m] = aux_vector(families[f], masked, panel.grid);
        }
    });

    GofResult out;
    out.runs = runs;
    for (std::size_t f = 0; f < families.size(); ++f) {
        for (int m = 0; m < periods; ++m) {
            std::vector<Eigen::VectorXd> draws(runs);
            for (int r = 0; r < runs; ++r) draws[r] = sims[r][f][m];
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(draws.front().size());
            for (const auto& d : draws) mean += d;
            mean /= runs;
            const Eigen::MatrixXd inv = pseudo_inverse(covariance(draws));
            auto mahalanobis = [&](const Eigen::VectorXd& v) {
                const Eigen::VectorXd c = v - mean;
                return c.dot(inv * c);
            };
            GofEntry entry;
            entry.family = families[f];
            entry.period = m;
            entry.distance = mahalanobis(observed[f][m]);
            int exceed = 0;
            for (const auto& d : draws)
                if (mahalanobis(d) >= entry.distance - 1e-12) ++exceed;
            entry.p_value = static_cast<double>(exceed + 1) / (runs + 1);
            out.entries.push_back(entry);
        }
    }
    return out;
}

}  // namespace osaom
