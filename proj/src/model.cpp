#include "osaom/model.hpp"

#include "osaom/errors.hpp"

namespace osaom {

ModelSpec::ModelSpec(const Panel& panel, std::vector<EffectSpec> weak_effects,
                     std::vector<EffectSpec> strong_effects,
                     std::vector<EffectSpec> behavior_effects)
    : panel_(&panel) {
    auto bind = [&](Dependent d, std::vector<EffectSpec>& specs) {
        for (auto& spec : specs) {
            if (spec.dependent != d)
                throw ConfigError("effect " + spec.id() + " declared under the wrong dependent");
            for (const auto& existing : effects_[static_cast<int>(d)])
                if (existing.spec().id() == spec.id())
                    throw ConfigError("effect " + spec.qualified() +
                                      " is declared twice; duplicated statistics make the "
                                      "moment equations collinear");
            effects_[static_cast<int>(d)].emplace_back(spec, panel);
        }
    };
    bind(Dependent::Weak, weak_effects);
    bind(Dependent::Strong, strong_effects);
    bind(Dependent::Behavior, behavior_effects);
}

int ModelSpec::effect_count() const {
    return static_cast<int>(effects_[0].size() + effects_[1].size() + effects_[2].size());
}

ParamLayout ParamLayout::of(const ModelSpec& model, int periods) {
    ParamLayout layout;
    layout.periods = periods;
    for (int d = 0; d < kDependents; ++d)
        layout.effect_counts[d] =
            static_cast<int>(model.effects(static_cast<Dependent>(d)).size());
    return layout;
}

std::vector<std::string> ParamLayout::names(const ModelSpec& model) const {
    std::vector<std::string> out;
    out.reserve(size());
    for (int d = 0; d < kDependents; ++d)
        for (int m = 0; m < periods; ++m)
            out.push_back(std::string(to_string(static_cast<Dependent>(d))) + ".rate." +
                          std::to_string(m + 1));
    for (int d = 0; d < kDependents; ++d)
        for (const auto& eff : model.effects(static_cast<Dependent>(d)))
            out.push_back(eff.spec().qualified());
    return out;
}

}  // namespace osaom
