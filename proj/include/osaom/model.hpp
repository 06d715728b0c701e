#pragma once

#include <array>
#include <string>
#include <vector>

#include "osaom/effects.hpp"

namespace osaom {

// Effect lists for the three dependent variables, bound to one panel.
class ModelSpec {
  public:
    ModelSpec(const Panel& panel, std::vector<EffectSpec> weak_effects,
              std::vector<EffectSpec> strong_effects, std::vector<EffectSpec> behavior_effects);

    const Panel& panel() const { return *panel_; }
    const std::vector<BoundEffect>& effects(Dependent d) const {
        return effects_[static_cast<int>(d)];
    }
    int effect_count() const;

  private:
    const Panel* panel_;
    std::array<std::vector<BoundEffect>, kDependents> effects_;
};

// Flat parameter vector layout: rate parameters per dependent per period
// first, then effect coefficients grouped by dependent. Rates are period
// specific, effect coefficients are shared across periods.
struct ParamLayout {
    int periods = 0;
    std::array<int, kDependents> effect_counts{};

    int rate_count() const { return kDependents * periods; }
    int size() const {
        return rate_count() + effect_counts[0] + effect_counts[1] + effect_counts[2];
    }
    int rate_index(Dependent d, int period) const {
        return static_cast<int>(d) * periods + period;
    }
    int effect_index(Dependent d, int k) const {
        int base = rate_count();
        for (int q = 0; q < static_cast<int>(d); ++q) base += effect_counts[q];
        return base + k;
    }
    bool is_rate(int index) const { return index < rate_count(); }

    static ParamLayout of(const ModelSpec& model, int periods);
    std::vector<std::string> names(const ModelSpec& model) const;
};

}  // namespace osaom
