#include "osaom/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osaom/errors.hpp"

namespace osaom {

namespace {

bool is_missing(double v) { return std::isnan(v); }

// Mean / range / mean-similarity over the non-missing values.
void covariate_constants(ActorCovariate& cov) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int count = 0;
    for (double v : cov.values) {
        if (is_missing(v)) continue;
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++count;
    }
    cov.mean = count > 0 ? sum / count : 0.0;
    cov.range = (count > 0 && hi > lo) ? hi - lo : 1.0;

    double sim_sum = 0.0;
    long pairs = 0;
    const int n = static_cast<int>(cov.values.size());
    for (int i = 0; i < n; ++i) {
        if (is_missing(cov.values[i])) continue;
        for (int j = 0; j < n; ++j) {
            if (j == i || is_missing(cov.values[j])) continue;
            sim_sum += 1.0 - std::abs(cov.values[i] - cov.values[j]) / cov.range;
            ++pairs;
        }
    }
    cov.sim_mean = pairs > 0 ? sim_sum / pairs : 0.0;
}

// Missing numeric values become the mean (centered contribution 0); missing
// categorical values get a per-actor code that never matches anything.
void impute_covariate(ActorCovariate& cov) {
    const int n = static_cast<int>(cov.values.size());
    for (int i = 0; i < n; ++i) {
        if (!is_missing(cov.values[i])) continue;
        cov.values[i] = cov.categorical ? -(1000.0 + i) : cov.mean;
    }
}

}  // namespace

const ActorCovariate* Panel::find_actor_covariate(const std::string& name) const {
    for (const auto& c : actor_covariates)
        if (c.name == name) return &c;
    return nullptr;
}

const DyadicCovariate* Panel::find_dyadic_covariate(const std::string& name) const {
    for (const auto& c : dyadic_covariates)
        if (c.name == name) return &c;
    return nullptr;
}

void Panel::finalize() {
    if (n < 2) throw DataError("panel needs at least 2 actors");
    if (waves.empty()) throw DataError("panel has no waves");
    if (labels.empty()) {
        labels.resize(n);
        for (int i = 0; i < n; ++i) labels[i] = "a" + std::to_string(i + 1);
    }
    if (static_cast<int>(labels.size()) != n) throw DataError("actor label count mismatch");
    if (grid < 1) throw DataError("behavior grid must be at least 1");

    for (std::size_t m = 0; m < waves.size(); ++m) {
        const auto& w = waves[m];
        const std::string where = "wave " + std::to_string(m + 1);
        if (w.weak.n() != n || w.strong.n() != n)
            throw DataError(where + ": network size does not match actor count");
        if (static_cast<int>(w.behavior.size()) != n)
            throw DataError(where + ": behavior length does not match actor count");
        for (int i = 0; i < n; ++i) {
            int z = w.behavior[i];
            if (z != kMissingBehavior && (z < 1 || z > grid))
                throw DataError(where + ": behavior value " + std::to_string(z) + " for actor " +
                                labels[i] + " outside 1.." + std::to_string(grid));
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                // nesting must hold wherever both levels are observed
                if (w.strong.at(i, j) == 1 && w.weak.at(i, j) == 0)
                    throw DataError(where + ": strong tie without weak tie at (" + labels[i] +
                                    "," + labels[j] + ")");
            }
        }
    }

    for (auto& cov : actor_covariates) {
        if (static_cast<int>(cov.values.size()) != n)
            throw DataError("covariate " + cov.name + ": length does not match actor count");
        covariate_constants(cov);
        impute_covariate(cov);
    }

    for (auto& cov : dyadic_covariates) {
        if (cov.w.n() != n)
            throw DataError("dyadic covariate " + cov.name + ": size does not match actor count");
        cov.symmetric = true;
        bool one_per_row = true;
        for (int i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (cov.w(i, j) != cov.w(j, i)) cov.symmetric = false;
                if (i != j) row_sum += cov.w(i, j) > 0.0 ? 1.0 : 0.0;
            }
            if (row_sum > 1.0) one_per_row = false;
        }
        cov.partner.clear();
        if (cov.symmetric && one_per_row) {
            cov.partner.assign(n, -1);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j && cov.w(i, j) > 0.0) cov.partner[i] = j;
        }
    }

    // pooled behavior constants
    double sum = 0.0;
    int count = 0;
    int lo = grid, hi = 1;
    for (const auto& w : waves) {
        for (int z : w.behavior) {
            if (z == kMissingBehavior) continue;
            sum += z;
            lo = std::min(lo, z);
            hi = std::max(hi, z);
            ++count;
        }
    }
    zbar = count > 0 ? sum / count : 0.5 * (1 + grid);
    z_range = (count > 0 && hi > lo) ? hi - lo : std::max(1, grid - 1);
    if (z_range_override) z_range = *z_range_override;
    if (z_range <= 0.0) throw DataError("behavior range must be positive");

    double sim_sum = 0.0;
    long pairs = 0;
    for (const auto& w : waves) {
        for (int i = 0; i < n; ++i) {
            if (w.behavior[i] == kMissingBehavior) continue;
            for (int j = 0; j < n; ++j) {
                if (j == i || w.behavior[j] == kMissingBehavior) continue;
                sim_sum += 1.0 - std::abs(w.behavior[i] - w.behavior[j]) / z_range;
                ++pairs;
            }
        }
    }
    z_sim_mean = pairs > 0 ? sim_sum / pairs : 0.0;

    if (zbar_override) zbar = *zbar_override;
    if (z_sim_mean_override) z_sim_mean = *z_sim_mean_override;
}

}  // namespace osaom
