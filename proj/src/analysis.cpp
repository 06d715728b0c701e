#include "osaom/analysis.hpp"

#include <cmath>

#include "osaom/errors.hpp"

namespace osaom {

double SelectionTable::at(int zi, int zj) const {
    int row = -1, col = -1;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] == zi) row = static_cast<int>(k);
        if (levels[k] == zj) col = static_cast<int>(k);
    }
    if (row < 0 || col < 0) throw ConfigError("selection table: level not in the grid");
    return gain[row][col];
}

SelectionTable selection_table(double theta_ego, double theta_alter, double theta_sim,
                               double zbar, double range, double sim_mean,
                               const std::vector<int>& levels) {
    if (range <= 0.0) throw ConfigError("selection table needs a positive behavior range");
    if (levels.empty()) throw ConfigError("selection table needs at least one level");
    SelectionTable t;
    t.levels = levels;
    t.theta_ego = theta_ego;
    t.theta_alter = theta_alter;
    t.theta_sim = theta_sim;
    t.zbar = zbar;
    t.range = range;
    t.sim_mean = sim_mean;
    t.gain.assign(levels.size(), std::vector<double>(levels.size(), 0.0));
    for (std::size_t r = 0; r < levels.size(); ++r) {
        for (std::size_t c = 0; c < levels.size(); ++c) {
            const double zi = levels[r], zj = levels[c];
            t.gain[r][c] = theta_ego * (zi - zbar) + theta_alter * (zj - zbar) +
                           theta_sim * (1.0 - std::abs(zi - zj) / range - sim_mean);
        }
    }
    return t;
}

namespace {

// -1 when the dyad is unusable at this wave (any missing level).
int tie_level(const ObservedWave& w, int i, int j) {
    const int weak = w.weak.at(i, j);
    const int strong = w.strong.at(i, j);
    if (weak == ObservedMatrix::kMissing || strong == ObservedMatrix::kMissing) return -1;
    if (strong == 1) return static_cast<int>(TieLevel::Strong);
    if (weak == 1) return static_cast<int>(TieLevel::WeakOnly);
    return static_cast<int>(TieLevel::None);
}

}  // namespace

TransitionCounts transition_counts(const Panel& panel) {
    if (panel.periods() < 1) throw DataError("transition counts need at least 2 waves");
    TransitionCounts out;
    for (auto& row : out.pooled) row.fill(0);
    out.per_period.resize(panel.periods());
    for (int m = 0; m < panel.periods(); ++m) {
        auto& counts = out.per_period[m];
        for (auto& row : counts) row.fill(0);
        const ObservedWave& a = panel.waves[m];
        const ObservedWave& b = panel.waves[m + 1];
        for (int i = 0; i < panel.n; ++i) {
            for (int j = 0; j < panel.n; ++j) {
                if (i == j) continue;
                const int from = tie_level(a, i, j);
                const int to = tie_level(b, i, j);
                if (from < 0 || to < 0) continue;
                counts[from][to] += 1;
                out.pooled[from][to] += 1;
            }
        }
    }
    return out;
}

namespace {

struct LevelStats {
    double density = 0.0;
    double avg_degree = 0.0;
    double missing_fraction = 0.0;
};

LevelStats level_stats(const ObservedMatrix& x) {
    const int n = x.n();
    long ties = 0, observed = 0, missing = 0;
    double degree_sum = 0.0;
    int rows_with_data = 0;
    for (int i = 0; i < n; ++i) {
        int row_ties = 0;
        bool any = false;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (x.missing(i, j)) {
                ++missing;
                continue;
            }
            ++observed;
            any = true;
            if (x.at(i, j) == 1) {
                ++ties;
                ++row_ties;
            }
        }
        if (any) {
            ++rows_with_data;
            degree_sum += row_ties;
        }
    }
    LevelStats s;
    s.density = observed > 0 ? static_cast<double>(ties) / observed : 0.0;
    s.avg_degree = rows_with_data > 0 ? degree_sum / rows_with_data : 0.0;
    s.missing_fraction =
        static_cast<double>(missing) / (static_cast<double>(n) * (n - 1));
    return s;
}

double jaccard(const ObservedMatrix& a, const ObservedMatrix& b) {
    long both = 0, either = 0;
    for (int i = 0; i < a.n(); ++i)
        for (int j = 0; j < a.n(); ++j) {
            if (i == j || a.missing(i, j) || b.missing(i, j)) continue;
            const bool in_a = a.at(i, j) == 1, in_b = b.at(i, j) == 1;
            if (in_a && in_b) ++both;
            if (in_a || in_b) ++either;
        }
    return either > 0 ? static_cast<double>(both) / either : 1.0;
}

}  // namespace

Descriptives descriptives(const Panel& panel) {
    if (panel.periods() < 1) throw DataError("descriptives need at least 2 waves");
    Descriptives out;
    for (const auto& wave : panel.waves) {
        WaveDescriptives d;
        const LevelStats weak = level_stats(wave.weak);
        const LevelStats strong = level_stats(wave.strong);
        d.weak_density = weak.density;
        d.weak_avg_degree = weak.avg_degree;
        d.strong_density = strong.density;
        d.strong_avg_degree = strong.avg_degree;
        // a dyad counts as missing when either level is unobserved
        long missing = 0;
        for (int i = 0; i < panel.n; ++i)
            for (int j = 0; j < panel.n; ++j)
                if (i != j && (wave.weak.missing(i, j) || wave.strong.missing(i, j))) ++missing;
        d.tie_missing_fraction =
            static_cast<double>(missing) / (static_cast<double>(panel.n) * (panel.n - 1));
        double sum = 0.0;
        int observed = 0, absent = 0;
        for (int z : wave.behavior) {
            if (z == kMissingBehavior) {
                ++absent;
                continue;
            }
            sum += z;
            ++observed;
        }
        d.behavior_mean = observed > 0 ? sum / observed : 0.0;
        d.behavior_missing_fraction = static_cast<double>(absent) / panel.n;
        out.waves.push_back(d);
    }
    for (int m = 0; m < panel.periods(); ++m) {
        out.weak_jaccard.push_back(jaccard(panel.waves[m].weak, panel.waves[m + 1].weak));
        out.strong_jaccard.push_back(jaccard(panel.waves[m].strong, panel.waves[m + 1].strong));
    }
    return out;
}

}  // namespace osaom
