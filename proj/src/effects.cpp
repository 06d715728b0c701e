#include "osaom/effects.hpp"

#include <cmath>

#include "osaom/errors.hpp"

namespace osaom {

namespace {

struct KindInfo {
    EffectKind kind;
    const char* id;
    bool network;  // evaluated in a network objective (vs. behavior)
    int args;      // expected argument count; -1 = optional single basis arg
};

constexpr KindInfo kCatalogue[] = {
    {EffectKind::Outdegree, "density", true, 0},
    {EffectKind::Reciprocity, "recip", true, 0},
    {EffectKind::TransitiveTriples, "transTrip", true, 0},
    {EffectKind::TransitiveRecipTriples, "transRecTrip", true, 0},
    {EffectKind::IndegreePopularity, "inPop", true, 0},
    {EffectKind::OutdegreePopularity, "outPop", true, 0},
    {EffectKind::OutdegreeActivity, "outAct", true, 0},
    {EffectKind::CovariateAlter, "altX", true, 1},
    {EffectKind::CovariateEgo, "egoX", true, 1},
    {EffectKind::CovariateSame, "sameX", true, 1},
    {EffectKind::CovariateSimilarity, "simX", true, 1},
    {EffectKind::DyadicCovariate, "dyadX", true, 1},
    {EffectKind::PartnerFriend, "partnerFriend", true, 1},
    {EffectKind::FriendPartner, "friendPartner", true, 1},
    {EffectKind::CoupleFourCycle, "coupleFourCycle", true, 1},
    {EffectKind::CoupleFourCycleSameGender, "coupleFourCycleSameGender", true, 2},
    {EffectKind::MutualWithLower, "mutualWithLower", true, 0},
    {EffectKind::LinearShape, "linear", false, 0},
    {EffectKind::QuadraticShape, "quad", false, 0},
    {EffectKind::ReciprocatedDegree, "recipDeg", false, -1},
    {EffectKind::DenseTriads, "denseTriads", false, -1},
    {EffectKind::AverageSimilarity, "avSim", false, 1},
    {EffectKind::OutdegreeIsolate, "outIsolate", false, -1},
};

const KindInfo& info_for(EffectKind kind) {
    for (const auto& k : kCatalogue)
        if (k.kind == kind) return k;
    throw ConfigError("unknown effect kind");
}

bool takes_actor_covariate(EffectKind k) {
    return k == EffectKind::CovariateAlter || k == EffectKind::CovariateEgo ||
           k == EffectKind::CovariateSame || k == EffectKind::CovariateSimilarity;
}

bool takes_dyadic_covariate(EffectKind k) {
    return k == EffectKind::DyadicCovariate || k == EffectKind::PartnerFriend ||
           k == EffectKind::FriendPartner || k == EffectKind::CoupleFourCycle ||
           k == EffectKind::CoupleFourCycleSameGender;
}

bool needs_partner_index(EffectKind k) {
    return k == EffectKind::PartnerFriend || k == EffectKind::FriendPartner ||
           k == EffectKind::CoupleFourCycle || k == EffectKind::CoupleFourCycleSameGender;
}

int recip_count(const BinaryMatrix& x, int i) {
    int c = 0;
    for (int j = 0; j < x.n(); ++j)
        if (j != i && x(i, j) && x(j, i)) ++c;
    return c;
}

}  // namespace

const char* to_string(Dependent d) {
    switch (d) {
        case Dependent::Weak: return "weak";
        case Dependent::Strong: return "strong";
        case Dependent::Behavior: return "behavior";
    }
    return "?";
}

Dependent dependent_from_string(const std::string& s) {
    if (s == "weak") return Dependent::Weak;
    if (s == "strong") return Dependent::Strong;
    if (s == "behavior") return Dependent::Behavior;
    throw ConfigError("unknown dependent variable '" + s + "'");
}

std::string EffectSpec::id() const {
    std::string out = info_for(kind).id;
    std::vector<std::string> args;
    if (takes_dyadic_covariate(kind)) args.push_back(dyadic);
    if (takes_actor_covariate(kind) || kind == EffectKind::CoupleFourCycleSameGender)
        args.push_back(covariate);
    if (kind == EffectKind::ReciprocatedDegree || kind == EffectKind::DenseTriads ||
        kind == EffectKind::OutdegreeIsolate)
        args.push_back(basis == Basis::Strong ? "strong" : "weak");
    if (kind == EffectKind::AverageSimilarity)
        args.push_back(basis == Basis::Dyadic ? dyadic
                                              : (basis == Basis::Strong ? "strong" : "weak"));
    if (!args.empty()) {
        out += '(';
        for (std::size_t k = 0; k < args.size(); ++k) {
            if (k) out += ',';
            out += args[k];
        }
        out += ')';
    }
    return out;
}

std::string EffectSpec::qualified() const {
    return std::string(to_string(dependent)) + "." + id();
}

EffectSpec parse_effect(Dependent dependent, const std::string& text) {
    std::string name = text;
    std::vector<std::string> args;
    if (auto open = text.find('('); open != std::string::npos) {
        if (text.back() != ')')
            throw ConfigError("malformed effect '" + text + "' (missing ')')");
        name = text.substr(0, open);
        std::string inner = text.substr(open + 1, text.size() - open - 2);
        std::size_t start = 0;
        while (start <= inner.size()) {
            auto comma = inner.find(',', start);
            std::string arg = comma == std::string::npos ? inner.substr(start)
                                                         : inner.substr(start, comma - start);
            // trim spaces
            while (!arg.empty() && arg.front() == ' ') arg.erase(arg.begin());
            while (!arg.empty() && arg.back() == ' ') arg.pop_back();
            if (arg.empty()) throw ConfigError("malformed effect '" + text + "' (empty argument)");
            args.push_back(arg);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (name == "outdegree") name = "density";

    const KindInfo* match = nullptr;
    for (const auto& k : kCatalogue)
        if (name == k.id) match = &k;
    if (!match) throw ConfigError("unknown effect kind '" + name + "'");

    EffectSpec spec;
    spec.dependent = dependent;
    spec.kind = match->kind;

    const bool on_network = dependent != Dependent::Behavior;
    if (match->network != on_network)
        throw ConfigError("effect '" + name + "' cannot be used for the " +
                          to_string(dependent) + " variable");
    if (spec.kind == EffectKind::MutualWithLower && dependent != Dependent::Strong)
        throw ConfigError("mutualWithLower is a cross-network effect, valid only for the strong "
                          "network");

    const int expected = match->args;
    if (expected >= 0 && static_cast<int>(args.size()) != expected)
        throw ConfigError("effect '" + name + "' expects " + std::to_string(expected) +
                          " argument(s), got " + std::to_string(args.size()));
    if (expected == -1 && args.size() > 1)
        throw ConfigError("effect '" + name + "' expects at most one argument");

    switch (spec.kind) {
        case EffectKind::CovariateAlter:
        case EffectKind::CovariateEgo:
        case EffectKind::CovariateSame:
        case EffectKind::CovariateSimilarity:
            spec.covariate = args[0];
            break;
        case EffectKind::DyadicCovariate:
        case EffectKind::PartnerFriend:
        case EffectKind::FriendPartner:
        case EffectKind::CoupleFourCycle:
            spec.dyadic = args[0];
            break;
        case EffectKind::CoupleFourCycleSameGender:
            spec.dyadic = args[0];
            spec.covariate = args[1];
            break;
        case EffectKind::ReciprocatedDegree:
        case EffectKind::DenseTriads:
        case EffectKind::OutdegreeIsolate:
            if (args.empty() || args[0] == "weak")
                spec.basis = Basis::Weak;
            else if (args[0] == "strong")
                spec.basis = Basis::Strong;
            else
                throw ConfigError("effect '" + name + "': basis must be 'weak' or 'strong'");
            break;
        case EffectKind::AverageSimilarity:
            if (args[0] == "weak")
                spec.basis = Basis::Weak;
            else if (args[0] == "strong")
                spec.basis = Basis::Strong;
            else {
                spec.basis = Basis::Dyadic;
                spec.dyadic = args[0];
            }
            break;
        default:
            break;
    }
    return spec;
}

BoundEffect::BoundEffect(const EffectSpec& spec, const Panel& panel)
    : spec_(spec),
      zbar_(panel.zbar),
      z_range_(panel.z_range),
      z_sim_mean_(panel.z_sim_mean) {
    if (takes_actor_covariate(spec.kind) || spec.kind == EffectKind::CoupleFourCycleSameGender) {
        if (spec.covariate == "behavior" || spec.covariate == panel.behavior_name) {
            cov_is_behavior_ = true;
        } else {
            acov_ = panel.find_actor_covariate(spec.covariate);
            if (!acov_)
                throw ConfigError("effect " + spec.id() + ": unknown covariate '" +
                                  spec.covariate + "'");
        }
    }
    if (takes_dyadic_covariate(spec.kind) || spec.basis == Basis::Dyadic) {
        dcov_ = panel.find_dyadic_covariate(spec.dyadic);
        if (!dcov_)
            throw ConfigError("effect " + spec.id() + ": unknown dyadic covariate '" +
                              spec.dyadic + "'");
        if (needs_partner_index(spec.kind) && dcov_->partner.empty())
            throw ConfigError("effect " + spec.id() + ": covariate '" + spec.dyadic +
                              "' is not a partnership matrix (symmetric, at most one partner "
                              "per actor)");
    }
}

double BoundEffect::cov_value(const StateView& s, int i) const {
    return cov_is_behavior_ ? static_cast<double>((*s.behavior)[i]) : acov_->values[i];
}

double BoundEffect::cov_mean() const { return cov_is_behavior_ ? zbar_ : acov_->mean; }

double BoundEffect::cov_similarity(const StateView& s, int i, int j) const {
    const double range = cov_is_behavior_ ? z_range_ : acov_->range;
    return 1.0 - std::abs(cov_value(s, i) - cov_value(s, j)) / range;
}

int BoundEffect::partner_of(int i) const { return dcov_->partner[i]; }

int dense_triad_count(const BinaryMatrix& x, int i) {
    const int n = x.n();
    int count = 0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int h = j + 1; h < n; ++h) {
            if (h == i) continue;
            int ties = (x(i, j) ? 1 : 0) + (x(j, i) ? 1 : 0) + (x(i, h) ? 1 : 0) +
                       (x(h, i) ? 1 : 0) + (x(j, h) ? 1 : 0) + (x(h, j) ? 1 : 0);
            if (ties >= 5) ++count;
        }
    }
    return count;
}

double BoundEffect::statistic(const StateView& s, int i) const {
    const BinaryMatrix& x = s.net(spec_.dependent);
    const int n = x.n();
    switch (spec_.kind) {
        case EffectKind::Outdegree:
            return x.out_degree(i);
        case EffectKind::Reciprocity:
            return recip_count(x, i);
        case EffectKind::TransitiveTriples: {
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i || !x(i, j)) continue;
                for (int h = 0; h < n; ++h)
                    if (h != i && h != j && x(i, h) && x(h, j)) total += 1.0;
            }
            return total;
        }
        case EffectKind::TransitiveRecipTriples: {
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i || !x(i, j) || !x(j, i)) continue;
                for (int h = 0; h < n; ++h)
                    if (h != i && h != j && x(i, h) && x(h, j)) total += 1.0;
            }
            return total;
        }
        case EffectKind::IndegreePopularity: {
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j)) total += x.in_degree(j);
            return total;
        }
        case EffectKind::OutdegreePopularity: {
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j)) total += x.out_degree(j);
            return total;
        }
        case EffectKind::OutdegreeActivity: {
            const double d = x.out_degree(i);
            return d * d;
        }
        case EffectKind::CovariateAlter: {
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j)) total += cov_value(s, j) - cov_mean();
            return total;
        }
        case EffectKind::CovariateEgo:
            return (cov_value(s, i) - cov_mean()) * x.out_degree(i);
        case EffectKind::CovariateSame: {
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j) && cov_value(s, i) == cov_value(s, j)) total += 1.0;
            return total;
        }
        case EffectKind::CovariateSimilarity: {
            const double center = cov_is_behavior_ ? z_sim_mean_ : acov_->sim_mean;
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j)) total += cov_similarity(s, i, j) - center;
            return total;
        }
        case EffectKind::DyadicCovariate: {
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j)) total += dcov_->w(i, j);
            return total;
        }
        case EffectKind::PartnerFriend: {
            const int p = partner_of(i);
            if (p < 0) return 0.0;
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && x(i, j) && j != p && x(p, j)) total += 1.0;
            return total;
        }
        case EffectKind::FriendPartner: {
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i || !x(i, j)) continue;
                const int pj = partner_of(j);
                if (pj >= 0 && pj != i && x(i, pj)) total += 1.0;
            }
            return total;
        }
        case EffectKind::CoupleFourCycle:
        case EffectKind::CoupleFourCycleSameGender: {
            const int p = partner_of(i);
            if (p < 0) return 0.0;
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i || !x(i, j)) continue;
                if (spec_.kind == EffectKind::CoupleFourCycleSameGender &&
                    cov_value(s, i) != cov_value(s, j))
                    continue;
                const int pj = partner_of(j);
                if (pj >= 0 && pj != p && x(p, pj)) total += 1.0;
            }
            return total;
        }
        case EffectKind::MutualWithLower: {
            double total = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i && (*s.strong)(i, j) && (*s.weak)(j, i)) total += 1.0;
            return total;
        }
        case EffectKind::LinearShape:
            return (*s.behavior)[i] - zbar_;
        case EffectKind::QuadraticShape: {
            const double zt = (*s.behavior)[i] - zbar_;
            return zt * zt;
        }
        case EffectKind::ReciprocatedDegree:
            return ((*s.behavior)[i] - zbar_) * recip_count(s.net(basis_dependent()), i);
        case EffectKind::DenseTriads:
            return ((*s.behavior)[i] - zbar_) * dense_triad_count(s.net(basis_dependent()), i);
        case EffectKind::AverageSimilarity: {
            const std::vector<int>& z = *s.behavior;
            double weight = 0.0, total = 0.0;
            for (int j = 0; j < x.n(); ++j) {
                if (j == i) continue;
                double w = 0.0;
                if (spec_.basis == Basis::Dyadic)
                    w = dcov_->w(i, j);
                else
                    w = s.net(basis_dependent())(i, j) ? 1.0 : 0.0;
                if (w <= 0.0) continue;
                weight += w;
                total += w * (1.0 - std::abs(z[i] - z[j]) / z_range_ - z_sim_mean_);
            }
            return weight > 0.0 ? total / weight : 0.0;
        }
        case EffectKind::OutdegreeIsolate:
            return s.net(basis_dependent()).out_degree(i) == 0
                       ? static_cast<double>((*s.behavior)[i])
                       : 0.0;
    }
    throw NumericalError("unreachable effect kind");
}

double BoundEffect::delta_tie(const StateView& s, int i, int t, int sign) const {
    const BinaryMatrix& x = s.net(spec_.dependent);
    const int n = x.n();
    const double d = sign;
    switch (spec_.kind) {
        case EffectKind::Outdegree:
            return d;
        case EffectKind::Reciprocity:
            return x(t, i) ? d : 0.0;
        case EffectKind::TransitiveTriples: {
            int closing = 0, middle = 0;
            for (int h = 0; h < n; ++h) {
                if (h == i || h == t) continue;
                if (x(i, h) && x(h, t)) ++closing;  // i->t closes the two-path i->h->t
                if (x(i, h) && x(t, h)) ++middle;   // i->t->h closed by the existing i->h
            }
            return d * (closing + middle);
        }
        case EffectKind::TransitiveRecipTriples: {
            double total = 0.0;
            if (x(t, i)) {
                for (int h = 0; h < n; ++h)
                    if (h != i && h != t && x(i, h) && x(h, t)) total += 1.0;
            }
            for (int j = 0; j < n; ++j)
                if (j != i && j != t && x(i, j) && x(j, i) && x(t, j)) total += 1.0;
            return d * total;
        }
        case EffectKind::IndegreePopularity:
            return d * x.in_degree(t) + d * (x(i, t) ? 1.0 : 0.0) + 1.0;
        case EffectKind::OutdegreePopularity:
            return d * x.out_degree(t);
        case EffectKind::OutdegreeActivity: {
            const double k = x.out_degree(i);
            return d * (2.0 * k + d);
        }
        case EffectKind::CovariateAlter:
            return d * (cov_value(s, t) - cov_mean());
        case EffectKind::CovariateEgo:
            return d * (cov_value(s, i) - cov_mean());
        case EffectKind::CovariateSame:
            return cov_value(s, i) == cov_value(s, t) ? d : 0.0;
        case EffectKind::CovariateSimilarity: {
            const double center = cov_is_behavior_ ? z_sim_mean_ : acov_->sim_mean;
            return d * (cov_similarity(s, i, t) - center);
        }
        case EffectKind::DyadicCovariate:
            return d * dcov_->w(i, t);
        case EffectKind::PartnerFriend: {
            const int p = partner_of(i);
            return (p >= 0 && p != t && x(p, t)) ? d : 0.0;
        }
        case EffectKind::FriendPartner: {
            const int pt = partner_of(t);
            return (pt >= 0 && pt != i && x(i, pt)) ? 2.0 * d : 0.0;
        }
        case EffectKind::CoupleFourCycle:
        case EffectKind::CoupleFourCycleSameGender: {
            if (spec_.kind == EffectKind::CoupleFourCycleSameGender &&
                cov_value(s, i) != cov_value(s, t))
                return 0.0;
            const int p = partner_of(i);
            const int pt = partner_of(t);
            return (p >= 0 && pt >= 0 && p != pt && x(p, pt)) ? d : 0.0;
        }
        case EffectKind::MutualWithLower:
            return (*s.weak)(t, i) ? d : 0.0;
        default:
            throw NumericalError("delta_tie called for a behavior effect");
    }
}

double BoundEffect::delta_behavior(const StateView& s, int i, int step) const {
    const std::vector<int>& z = *s.behavior;
    const double zt = z[i] - zbar_;
    const double e = step;
    switch (spec_.kind) {
        case EffectKind::LinearShape:
            return e;
        case EffectKind::QuadraticShape:
            return e * (2.0 * zt + e);
        case EffectKind::ReciprocatedDegree:
            return e * recip_count(s.net(basis_dependent()), i);
        case EffectKind::DenseTriads:
            return e * dense_triad_count(s.net(basis_dependent()), i);
        case EffectKind::AverageSimilarity: {
            double weight = 0.0, delta = 0.0;
            const int n = s.net(Dependent::Weak).n();
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                double w = 0.0;
                if (spec_.basis == Basis::Dyadic)
                    w = dcov_->w(i, j);
                else
                    w = s.net(basis_dependent())(i, j) ? 1.0 : 0.0;
                if (w <= 0.0) continue;
                weight += w;
                delta += w * (std::abs(z[i] - z[j]) - std::abs(z[i] + step - z[j])) / z_range_;
            }
            return weight > 0.0 ? delta / weight : 0.0;
        }
        case EffectKind::OutdegreeIsolate:
            return s.net(basis_dependent()).out_degree(i) == 0 ? e : 0.0;
        default:
            throw NumericalError("delta_behavior called for a network effect");
    }
}

}  // namespace osaom
