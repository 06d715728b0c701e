#pragma once

#include <string>
#include <vector>

#include "osaom/dataset.hpp"

namespace osaom {

enum class Dependent { Weak = 0, Strong = 1, Behavior = 2 };

constexpr int kDependents = 3;

const char* to_string(Dependent d);
Dependent dependent_from_string(const std::string& s);

enum class EffectKind {
    // network evaluation
    Outdegree,
    Reciprocity,
    TransitiveTriples,
    TransitiveRecipTriples,
    IndegreePopularity,
    OutdegreePopularity,
    OutdegreeActivity,
    CovariateAlter,
    CovariateEgo,
    CovariateSame,
    CovariateSimilarity,
    DyadicCovariate,
    PartnerFriend,
    FriendPartner,
    CoupleFourCycle,
    CoupleFourCycleSameGender,
    MutualWithLower,
    // behavior evaluation
    LinearShape,
    QuadraticShape,
    ReciprocatedDegree,
    DenseTriads,
    AverageSimilarity,
    OutdegreeIsolate,
};

// Which structure a behavior effect reads its ties from.
enum class Basis { Weak, Strong, Dyadic };

// One declared effect. `covariate` names an actor covariate or the behavior
// variable; `dyadic` names a dyadic covariate; `basis` applies to behavior
// effects that read a network (recipDeg, denseTriads, avSim, outIsolate).
struct EffectSpec {
    Dependent dependent = Dependent::Weak;
    EffectKind kind = EffectKind::Outdegree;
    std::string covariate;
    std::string dyadic;
    Basis basis = Basis::Weak;

    // Canonical text form, e.g. "recip", "simX(gender)", "avSim(strong)".
    std::string id() const;
    // Fully qualified "weak.recip" form used in result files and tables.
    std::string qualified() const;
};

// Parses the catalogue syntax `kind` / `kind(arg)` / `kind(arg1,arg2)`.
// Accepts "density" and "outdegree" as aliases. Throws ConfigError for
// unknown kinds, wrong argument counts, or cross-network effects requested
// on the weak network.
EffectSpec parse_effect(Dependent dependent, const std::string& text);

// Immutable state slice the statistics are computed on.
struct StateView {
    const BinaryMatrix* weak = nullptr;
    const BinaryMatrix* strong = nullptr;
    const std::vector<int>* behavior = nullptr;

    const BinaryMatrix& net(Dependent d) const {
        return d == Dependent::Strong ? *strong : *weak;
    }
};

// Effect bound to a panel: covariate references resolved, centering
// constants captured. Pointers reference the panel; the panel outlives all
// bound effects.
class BoundEffect {
  public:
    BoundEffect(const EffectSpec& spec, const Panel& panel);

    const EffectSpec& spec() const { return spec_; }

    // Statistic s_ik evaluated for actor i on the full state.
    double statistic(const StateView& s, int i) const;

    // Change in s_ik when the tie i->j on network `dep` is toggled
    // (sign = +1 add, -1 remove). Only valid for network effects with
    // dep == spec().dependent.
    double delta_tie(const StateView& s, int i, int j, int sign) const;

    // Change in s_ik when actor i's behavior moves by step (+1/-1).
    // Only valid for behavior effects.
    double delta_behavior(const StateView& s, int i, int step) const;

  private:
    double cov_value(const StateView& s, int i) const;
    double cov_mean() const;
    double cov_similarity(const StateView& s, int i, int j) const;
    int partner_of(int i) const;
    Dependent basis_dependent() const {
        return spec_.basis == Basis::Strong ? Dependent::Strong : Dependent::Weak;
    }

    EffectSpec spec_;
    const ActorCovariate* acov_ = nullptr;  // null when the covariate is the behavior
    bool cov_is_behavior_ = false;
    const DyadicCovariate* dcov_ = nullptr;
    double zbar_ = 0.0;
    double z_range_ = 1.0;
    double z_sim_mean_ = 0.0;
};

// Number of dense triads around i: unordered actor triples {i,j,h} with at
// least 5 of the 6 possible directed ties present in x.
int dense_triad_count(const BinaryMatrix& x, int i);

}  // namespace osaom
