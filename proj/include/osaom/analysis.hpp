#pragma once

#include <array>
#include <vector>

#include "osaom/dataset.hpp"

namespace osaom {

// Ego-alter selection table: relative objective-function gain for ego at
// behavior level z_i nominating an alter at level z_j.
struct SelectionTable {
    std::vector<int> levels;
    std::vector<std::vector<double>> gain;  // gain[row over z_i][col over z_j]
    double theta_ego = 0.0, theta_alter = 0.0, theta_sim = 0.0;
    double zbar = 0.0, range = 1.0, sim_mean = 0.0;

    double at(int zi, int zj) const;  // lookup by level value
};

SelectionTable selection_table(double theta_ego, double theta_alter, double theta_sim,
                               double zbar, double range, double sim_mean,
                               const std::vector<int>& levels);

// Dyad states for tie-level transitions.
enum class TieLevel { None = 0, WeakOnly = 1, Strong = 2 };

using TransitionMatrix = std::array<std::array<long, 3>, 3>;

struct TransitionCounts {
    std::vector<TransitionMatrix> per_period;
    TransitionMatrix pooled{};
};

// 3x3 tie transition counts between consecutive waves; dyads missing at
// either wave are excluded.
TransitionCounts transition_counts(const Panel& panel);

struct WaveDescriptives {
    double weak_density = 0.0, strong_density = 0.0;
    double weak_avg_degree = 0.0, strong_avg_degree = 0.0;
    double tie_missing_fraction = 0.0;
    double behavior_mean = 0.0;
    double behavior_missing_fraction = 0.0;
};

struct Descriptives {
    std::vector<WaveDescriptives> waves;
    std::vector<double> weak_jaccard;    // between wave m and m+1
    std::vector<double> strong_jaccard;
};

Descriptives descriptives(const Panel& panel);

}  // namespace osaom
