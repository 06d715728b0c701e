#include "osaom/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osaom/errors.hpp"

namespace osaom {

std::optional<StateViolation> validate_state(const ModelState& state, int grid) {
    const int n = state.weak.n();
    if (state.strong.n() != n || static_cast<int>(state.behavior.size()) != n)
        return StateViolation{"state dimensions disagree", -1, -1};
    for (int i = 0; i < n; ++i) {
        if (state.weak(i, i) || state.strong(i, i))
            return StateViolation{"self-tie on the diagonal", i, i};
        for (int j = 0; j < n; ++j)
            if (i != j && state.strong(i, j) && !state.weak(i, j))
                return StateViolation{"strong tie without weak tie", i, j};
        if (state.behavior[i] < 1 || state.behavior[i] > grid)
            return StateViolation{"behavior outside 1.." + std::to_string(grid), i, -1};
    }
    return std::nullopt;
}

ChoiceEngine::ChoiceEngine(const ModelSpec& model,
                           std::array<std::vector<double>, kDependents> theta)
    : model_(&model), theta_(std::move(theta)) {
    for (int d = 0; d < kDependents; ++d)
        if (theta_[d].size() != model.effects(static_cast<Dependent>(d)).size())
            throw ConfigError("coefficient count does not match effect count for " +
                              std::string(to_string(static_cast<Dependent>(d))));
}

std::vector<Candidate> ChoiceEngine::candidates(const ModelState& state, int actor,
                                                Dependent d) const {
    const StateView view = state.view();
    const auto& effects = model_->effects(d);
    const auto& theta = theta_[static_cast<int>(d)];
    std::vector<Candidate> out;
    out.push_back(Candidate{});  // keeping the current state is always permitted

    auto check_finite = [&](double gain, auto per_effect) {
        if (std::isfinite(gain)) return;
        for (std::size_t k = 0; k < effects.size(); ++k)
            if (!std::isfinite(theta[k] * per_effect(k)))
                throw NumericalError("non-finite objective contribution from effect " +
                                     effects[k].spec().qualified());
        throw NumericalError("non-finite objective for actor " + std::to_string(actor));
    };

    const int n = state.weak.n();
    if (d == Dependent::Behavior) {
        const int z = state.behavior[actor];
        for (int step : {-1, +1}) {
            if (z + step < 1 || z + step > model_->panel().grid) continue;
            double gain = 0.0;
            for (std::size_t k = 0; k < effects.size(); ++k)
                gain += theta[k] * effects[k].delta_behavior(view, actor, step);
            check_finite(gain,
                         [&](std::size_t k) { return effects[k].delta_behavior(view, actor, step); });
            out.push_back(Candidate{-1, step, gain});
        }
        return out;
    }

    const BinaryMatrix& net = d == Dependent::Weak ? state.weak : state.strong;
    for (int j = 0; j < n; ++j) {
        if (j == actor) continue;
        const bool present = net(actor, j);
        if (d == Dependent::Weak) {
            // a weak tie backing a strong tie cannot be dropped
            if (present && state.strong(actor, j)) continue;
        } else {
            // a strong tie can only appear where a weak tie exists
            if (!present && !state.weak(actor, j)) continue;
        }
        const int sign = present ? -1 : +1;
        double gain = 0.0;
        for (std::size_t k = 0; k < effects.size(); ++k)
            gain += theta[k] * effects[k].delta_tie(view, actor, j, sign);
        check_finite(gain, [&](std::size_t k) { return effects[k].delta_tie(view, actor, j, sign); });
        out.push_back(Candidate{j, 0, gain});
    }
    return out;
}

std::vector<double> ChoiceEngine::probabilities(const std::vector<Candidate>& candidates, int,
                                                Dependent) const {
    double max_gain = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) max_gain = std::max(max_gain, c.objective_gain);
    std::vector<double> probs(candidates.size());
    double total = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        probs[k] = std::exp(candidates[k].objective_gain - max_gain);
        total += probs[k];
    }
    for (auto& p : probs) p /= total;
    return probs;
}

MiniStepRecord ChoiceEngine::execute_mini_step(ModelState& state, int actor, Dependent d,
                                               Rng& rng, ScoreAccumulator* scores) const {
    auto cands = candidates(state, actor, d);
    auto probs = probabilities(cands, actor, d);
    const int pick = rng.categorical(probs);

    if (scores) {
        // d log p(chosen) / d theta_k = s_k(chosen) - E_p[s_k]; the shared
        // current-state statistic cancels, so gains stand in for statistics.
        const StateView view = state.view();
        const auto& effects = model_->effects(d);
        for (std::size_t k = 0; k < effects.size(); ++k) {
            double expected = 0.0, chosen = 0.0;
            for (std::size_t c = 0; c < cands.size(); ++c) {
                double ds = 0.0;
                if (cands[c].target >= 0) {
                    const BinaryMatrix& net = d == Dependent::Weak ? state.weak : state.strong;
                    const int sign = net(actor, cands[c].target) ? -1 : +1;
                    ds = effects[k].delta_tie(view, actor, cands[c].target, sign);
                } else if (cands[c].step != 0) {
                    ds = effects[k].delta_behavior(view, actor, cands[c].step);
                }
                expected += probs[c] * ds;
                if (static_cast<int>(c) == pick) chosen = ds;
            }
            const int param = scores->layout.effect_index(d, static_cast<int>(k));
            scores->score[param] += chosen - expected;
        }
    }

    MiniStepRecord rec;
    rec.dependent = d;
    rec.actor = actor;
    const Candidate& chosen = cands[pick];
    rec.target = chosen.target;
    rec.step = chosen.step;
    if (chosen.target >= 0) {
        if (d == Dependent::Weak)
            state.weak.toggle(actor, chosen.target);
        else
            state.strong.toggle(actor, chosen.target);
    } else if (chosen.step != 0) {
        state.behavior[actor] += chosen.step;
    }
    return rec;
}

SimulationStats ChoiceEngine::simulate_period(ModelState& state, const Rates& rates, Rng& rng,
                                              std::vector<MiniStepRecord>* log,
                                              ScoreAccumulator* scores) const {
    const int n = state.weak.n();
    double rate_sum = 0.0;
    for (double r : rates) {
        if (!(r > 0.0)) throw ConfigError("rate parameters must be positive");
        rate_sum += r;
    }

    SimulationStats stats;
    const double total_rate = n * rate_sum;
    while (true) {
        const double wait = rng.exponential(total_rate);
        if (state.elapsed + wait >= 1.0) {
            state.elapsed = 1.0;
            break;
        }
        state.elapsed += wait;
        const Dependent d = static_cast<Dependent>(
            rng.categorical(std::span<const double>(rates.data(), rates.size())));
        const int actor = rng.uniform_int(n);
        MiniStepRecord rec = execute_mini_step(state, actor, d, rng, scores);
        rec.time = state.elapsed;
        stats.steps[static_cast<int>(d)] += 1;
        if (scores)
            scores->score[scores->layout.rate_index(d, scores->period)] +=
                1.0 / rates[static_cast<int>(d)];
        if (log) log->push_back(rec);
    }
    if (scores)
        for (int d = 0; d < kDependents; ++d)
            scores->score[scores->layout.rate_index(static_cast<Dependent>(d), scores->period)] -=
                n;
    return stats;
}

}  // namespace osaom
