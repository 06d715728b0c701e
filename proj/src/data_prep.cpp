#include "osaom/data_prep.hpp"

#include <cmath>

#include "osaom/errors.hpp"

namespace osaom {

std::pair<ObservedMatrix, ObservedMatrix> dichotomize(const ObservedMatrix& ratings,
                                                      int weak_cutoff, int strong_cutoff) {
    if (weak_cutoff < 0 || weak_cutoff > strong_cutoff || strong_cutoff > 7)
        throw ConfigError("cutoffs must satisfy 0 <= weak <= strong <= 7, got weak=" +
                          std::to_string(weak_cutoff) + " strong=" +
                          std::to_string(strong_cutoff));
    const int n = ratings.n();
    ObservedMatrix weak(n), strong(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int r = ratings.at(i, j);
            if (r == ObservedMatrix::kMissing) {
                weak.set(i, j, ObservedMatrix::kMissing);
                strong.set(i, j, ObservedMatrix::kMissing);
                continue;
            }
            if (r < 0 || r > 7)
                throw DataError("rating " + std::to_string(r) + " at (" + std::to_string(i + 1) +
                                "," + std::to_string(j + 1) + ") outside 0..7");
            weak.set(i, j, r >= weak_cutoff ? 1 : 0);
            strong.set(i, j, r >= strong_cutoff ? 1 : 0);
        }
    }
    return {weak, strong};
}

std::vector<std::optional<double>> aggregate_behavior(const std::vector<DailyRating>& ratings,
                                                      int n_actors, int window_days,
                                                      long wave_day) {
    if (window_days <= 0) throw ConfigError("aggregation window must be positive");
    std::vector<double> sum(n_actors, 0.0);
    std::vector<int> count(n_actors, 0);
    for (const auto& r : ratings) {
        if (r.actor < 0 || r.actor >= n_actors) continue;
        if (r.day < wave_day - window_days || r.day >= wave_day) continue;
        sum[r.actor] += r.rating;
        count[r.actor] += 1;
    }
    std::vector<std::optional<double>> out(n_actors);
    for (int i = 0; i < n_actors; ++i)
        if (count[i] > 0) out[i] = sum[i] / count[i];
    return out;
}

int recode_behavior(double mean) {
    if (!(mean >= 1.0 && mean <= 7.0))
        throw DataError("behavior mean " + std::to_string(mean) + " outside [1, 7]");
    // nearest half point, quarter values away from zero; 1.0..7.0 -> 1..13
    return static_cast<int>(std::floor(2.0 * mean + 0.5)) - 1;
}

ImputedPanel impute_for_simulation(const Panel& panel) {
    const int n = panel.n;
    const int mid = (panel.grid + 1) / 2;
    ImputedPanel out;
    out.n = n;
    out.waves.resize(panel.waves.size());

    for (std::size_t m = 0; m < panel.waves.size(); ++m) {
        const ObservedWave& obs = panel.waves[m];
        ImputedWave& wave = out.waves[m];
        wave.weak = BinaryMatrix(n);
        wave.strong = BinaryMatrix(n);
        wave.behavior.assign(n, mid);
        wave.weak_imputed.assign(static_cast<std::size_t>(n) * n, 0);
        wave.strong_imputed.assign(static_cast<std::size_t>(n) * n, 0);
        wave.behavior_imputed.assign(n, 0);
        const ImputedWave* prev = m > 0 ? &out.waves[m - 1] : nullptr;

        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const std::size_t idx = static_cast<std::size_t>(i) * n + j;
                int w = obs.weak.at(i, j);
                int s = obs.strong.at(i, j);
                if (w == ObservedMatrix::kMissing) {
                    wave.weak_imputed[idx] = 1;
                    w = prev ? (prev->weak(i, j) ? 1 : 0) : 0;
                }
                if (s == ObservedMatrix::kMissing) {
                    wave.strong_imputed[idx] = 1;
                    s = prev ? (prev->strong(i, j) ? 1 : 0) : 0;
                }
                // imputed side yields when the fill would break nesting
                if (s == 1 && w == 0) {
                    if (wave.strong_imputed[idx])
                        s = 0;
                    else
                        w = 1;
                }
                wave.weak.set(i, j, w == 1);
                wave.strong.set(i, j, s == 1);
            }
            if (obs.behavior[i] == kMissingBehavior) {
                wave.behavior_imputed[i] = 1;
                wave.behavior[i] = prev ? prev->behavior[i] : mid;
            } else {
                wave.behavior[i] = obs.behavior[i];
            }
        }
    }
    return out;
}

}  // namespace osaom
