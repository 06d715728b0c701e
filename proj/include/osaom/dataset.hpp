#pragma once

#include <optional>
#include <string>
#include <vector>

#include "osaom/matrix.hpp"

namespace osaom {

constexpr int kMissingBehavior = -1;

struct ActorCovariate {
    std::string name;
    bool categorical = false;
    std::vector<double> values;  // NaN = missing until the panel is finalized
    double mean = 0.0;           // over non-missing values
    double range = 1.0;          // observed max - min, >= 1 fallback
    double sim_mean = 0.0;       // mean of 1 - |v_i - v_j| / range over ordered pairs
};

struct DyadicCovariate {
    std::string name;
    RealMatrix w;
    bool symmetric = false;
    // partner[i] = j where w_ij > 0, or -1; only defined when every row sum is <= 1.
    std::vector<int> partner;
};

struct ObservedWave {
    ObservedMatrix weak;
    ObservedMatrix strong;
    std::vector<int> behavior;  // 1..grid, kMissingBehavior when unobserved
};

// Longitudinal panel: >= 2 waves over a fixed actor set, plus covariates.
// Immutable after finalize(); shared read access from parallel runs is safe.
class Panel {
  public:
    int n = 0;
    std::vector<std::string> labels;
    std::string behavior_name = "behavior";
    int grid = 13;  // behavior levels 1..grid
    std::vector<ObservedWave> waves;
    std::vector<ActorCovariate> actor_covariates;
    std::vector<DyadicCovariate> dyadic_covariates;

    // Pooled centering constants for the behavior variable. Computed over all
    // non-missing actor-wave observations; overridable from the run config so
    // published constants can be reproduced exactly.
    double zbar = 0.0;
    double z_range = 1.0;
    double z_sim_mean = 0.0;
    std::optional<double> zbar_override;
    std::optional<double> z_range_override;
    std::optional<double> z_sim_mean_override;

    int periods() const { return static_cast<int>(waves.size()) - 1; }

    const ActorCovariate* find_actor_covariate(const std::string& name) const;
    const DyadicCovariate* find_dyadic_covariate(const std::string& name) const;

    // Validates invariants (wave count, nesting on observed entries, grid
    // bounds, covariate shapes), derives partner indices, imputes covariate
    // missings (numeric -> mean, categorical -> per-actor non-matching code),
    // and computes the pooled constants. Throws DataError on violations.
    void finalize();
};

// Simulation-ready panel: every entry defined, with flags marking which
// entries were filled in (flagged entries are excluded from estimation
// targets).
struct ImputedWave {
    BinaryMatrix weak;
    BinaryMatrix strong;
    std::vector<int> behavior;
    std::vector<std::uint8_t> weak_imputed;    // n*n
    std::vector<std::uint8_t> strong_imputed;  // n*n
    std::vector<std::uint8_t> behavior_imputed;

    bool tie_imputed(int i, int j, int n) const {
        return weak_imputed[static_cast<std::size_t>(i) * n + j] != 0 ||
               strong_imputed[static_cast<std::size_t>(i) * n + j] != 0;
    }
};

struct ImputedPanel {
    int n = 0;
    std::vector<ImputedWave> waves;
};

}  // namespace osaom
