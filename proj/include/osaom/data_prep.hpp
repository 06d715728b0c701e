#pragma once

#include <utility>
#include <vector>

#include "osaom/dataset.hpp"

namespace osaom {

// Raw relationship ratings on the 0..7 scale, ObservedMatrix::kMissing for
// unanswered cells.
struct RatingMatrix {
    ObservedMatrix ratings;
};

// Splits ordinal ratings into the nested weak/strong pair:
// weak iff rating >= weak_cutoff, strong iff rating >= strong_cutoff.
// Missing ratings propagate to both levels. Requires
// 0 <= weak_cutoff <= strong_cutoff <= 7.
std::pair<ObservedMatrix, ObservedMatrix> dichotomize(const ObservedMatrix& ratings,
                                                      int weak_cutoff, int strong_cutoff);

// One time-stamped affect rating; day is a serial day number (see text_io).
struct DailyRating {
    int actor = 0;
    long day = 0;
    double rating = 0.0;
};

// Mean rating per actor over [wave_day - window_days, wave_day); actors with
// no rating in the window get an empty optional.
std::vector<std::optional<double>> aggregate_behavior(const std::vector<DailyRating>& ratings,
                                                      int n_actors, int window_days,
                                                      long wave_day);

// Rounds a mean affect score in [1, 7] to the nearest half point (ties away
// from zero) and maps the half grid {1.0, 1.5, ..., 7.0} onto 1..13.
int recode_behavior(double mean);

// Fills every missing entry so the panel can be simulated: wave-1 ties -> 0,
// wave-1 behavior -> grid midpoint, later waves -> last observed value.
// Observed entries are never changed; filled entries are flagged. Where a
// fill would break nesting, the imputed side yields to the observed side.
ImputedPanel impute_for_simulation(const Panel& panel);

}  // namespace osaom
