#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "oracle_map.hpp"
#include "osaom/effects.hpp"
#include "osaom/errors.hpp"
#include "testutil.hpp"

using namespace osaom;
using testutil::Instance;

using oracle_map::behavior_specs;
using oracle_map::integer_valued;
using oracle_map::network_specs;
using oracle_map::oracle_statistic;

TEST_CASE("engine statistics equal the enumeration oracle on 1000 random instances") {
    Rng rng(2024);
    int checked = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = 3 + rng.uniform_int(4);
        Instance inst = testutil::random_instance(rng, n);
        std::vector<BoundEffect> all;
        for (Dependent d : {Dependent::Weak, Dependent::Strong})
            for (const auto& spec : network_specs(d)) all.emplace_back(spec, inst.panel);
        for (const auto& spec : behavior_specs()) all.emplace_back(spec, inst.panel);

        const StateView view = inst.view();
        for (const auto& eff : all) {
            for (int i = 0; i < n; ++i) {
                const double engine = eff.statistic(view, i);
                const double expected = oracle_statistic(inst, eff, i);
                ++checked;
                if (integer_valued(eff.spec().kind)) {
                    if (engine != expected) {
                        CAPTURE(eff.spec().qualified());
                        CAPTURE(i);
                        REQUIRE(engine == expected);
                    }
                } else if (std::abs(engine - expected) > 1e-12) {
                    CAPTURE(eff.spec().qualified());
                    CAPTURE(i);
                    REQUIRE(engine == doctest::Approx(expected).epsilon(1e-12));
                }
            }
        }
    }
    CHECK(checked > 100000);
}

TEST_CASE("tie deltas equal full statistic differences") {
    Rng rng(555);
    for (int rep = 0; rep < 300; ++rep) {
        const int n = 3 + rng.uniform_int(4);
        Instance inst = testutil::random_instance(rng, n);
        for (Dependent d : {Dependent::Weak, Dependent::Strong}) {
            BinaryMatrix& net = d == Dependent::Weak ? inst.weak : inst.strong;
            for (const auto& spec : network_specs(d)) {
                BoundEffect eff(spec, inst.panel);
                const int i = rng.uniform_int(n);
                int t = rng.uniform_int(n - 1);
                if (t >= i) ++t;
                // keep nesting intact while toggling
                if (d == Dependent::Weak && inst.weak(i, t) && inst.strong(i, t)) continue;
                if (d == Dependent::Strong && !inst.strong(i, t) && !inst.weak(i, t)) continue;
                const int sign = net(i, t) ? -1 : +1;
                const double before = eff.statistic(inst.view(), i);
                const double delta = eff.delta_tie(inst.view(), i, t, sign);
                net.toggle(i, t);
                const double after = eff.statistic(inst.view(), i);
                net.toggle(i, t);
                CAPTURE(spec.qualified());
                CHECK(delta == doctest::Approx(after - before).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("behavior deltas equal full statistic differences") {
    Rng rng(777);
    for (int rep = 0; rep < 300; ++rep) {
        const int n = 3 + rng.uniform_int(4);
        Instance inst = testutil::random_instance(rng, n);
        for (const auto& spec : behavior_specs()) {
            BoundEffect eff(spec, inst.panel);
            const int i = rng.uniform_int(n);
            const int step = inst.behavior[i] <= 1    ? +1
                             : inst.behavior[i] >= 13 ? -1
                                                      : (rng.uniform() < 0.5 ? -1 : +1);
            const double before = eff.statistic(inst.view(), i);
            const double delta = eff.delta_behavior(inst.view(), i, step);
            inst.behavior[i] += step;
            const double after = eff.statistic(inst.view(), i);
            inst.behavior[i] -= step;
            CAPTURE(spec.qualified());
            CHECK(delta == doctest::Approx(after - before).epsilon(1e-12));
        }
    }
}

TEST_CASE("statistics are invariant under actor relabeling") {
    Rng rng(901);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 4 + rng.uniform_int(3);
        Instance inst = testutil::random_instance(rng, n);

        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);

        Instance mapped = inst;  // copy then remap every structure
        mapped.weak = BinaryMatrix(n);
        mapped.strong = BinaryMatrix(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                mapped.weak.set(perm[i], perm[j], inst.weak(i, j));
                mapped.strong.set(perm[i], perm[j], inst.strong(i, j));
            }
        for (int i = 0; i < n; ++i) mapped.behavior[perm[i]] = inst.behavior[i];
        Panel& mp = mapped.panel;
        mp.waves[0] = testutil::to_observed_wave(mapped.weak, mapped.strong, mapped.behavior);
        for (auto& cov : mp.actor_covariates) {
            const ActorCovariate* orig = inst.panel.find_actor_covariate(cov.name);
            for (int i = 0; i < n; ++i) cov.values[perm[i]] = orig->values[i];
        }
        for (auto& cov : mp.dyadic_covariates) {
            const RealMatrix& orig = inst.panel.find_dyadic_covariate(cov.name)->w;
            cov.w = RealMatrix(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) cov.w.set(perm[i], perm[j], orig(i, j));
        }
        mp.finalize();

        for (Dependent d : {Dependent::Weak, Dependent::Strong}) {
            for (const auto& spec : network_specs(d)) {
                BoundEffect orig_eff(spec, inst.panel);
                BoundEffect perm_eff(spec, mapped.panel);
                for (int i = 0; i < n; ++i) {
                    CAPTURE(spec.qualified());
                    CHECK(orig_eff.statistic(inst.view(), i) ==
                          doctest::Approx(perm_eff.statistic(mapped.view(), perm[i]))
                              .epsilon(1e-12));
                }
            }
        }
        for (const auto& spec : behavior_specs()) {
            BoundEffect orig_eff(spec, inst.panel);
            BoundEffect perm_eff(spec, mapped.panel);
            for (int i = 0; i < n; ++i) {
                CAPTURE(spec.qualified());
                CHECK(orig_eff.statistic(inst.view(), i) ==
                      doctest::Approx(perm_eff.statistic(mapped.view(), perm[i])).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("empty network gives zero for every network statistic") {
    Rng rng(13);
    Instance inst = testutil::random_instance(rng, 5);
    inst.weak = BinaryMatrix(5);
    inst.strong = BinaryMatrix(5);
    for (Dependent d : {Dependent::Weak, Dependent::Strong})
        for (const auto& spec : network_specs(d)) {
            BoundEffect eff(spec, inst.panel);
            for (int i = 0; i < 5; ++i) CHECK(eff.statistic(inst.view(), i) == 0.0);
        }
}

TEST_CASE("single transitive triple fixture") {
    // ties 1->2, 1->3, 3->2 close exactly one triple for actor 1
    Rng rng(17);
    Instance inst = testutil::random_instance(rng, 3);
    inst.weak = BinaryMatrix(3);
    inst.weak.set(0, 1, true);
    inst.weak.set(0, 2, true);
    inst.weak.set(2, 1, true);
    BoundEffect eff(parse_effect(Dependent::Weak, "transTrip"), inst.panel);
    CHECK(eff.statistic(inst.view(), 0) == 1.0);
    CHECK(eff.statistic(inst.view(), 1) == 0.0);
    CHECK(eff.statistic(inst.view(), 2) == 0.0);
}

TEST_CASE("couple four-cycle fixture") {
    // couples (1,2) and (3,4); tie 2->4 supports the candidate 1->3
    Rng rng(19);
    Instance inst = testutil::random_instance(rng, 4);
    inst.weak = BinaryMatrix(4);
    inst.strong = BinaryMatrix(4);
    Panel& panel = inst.panel;
    for (auto& cov : panel.dyadic_covariates) {
        if (cov.name != "partnership") continue;
        cov.w = RealMatrix(4);
        cov.w.set(0, 1, 1.0);
        cov.w.set(1, 0, 1.0);
        cov.w.set(2, 3, 1.0);
        cov.w.set(3, 2, 1.0);
    }
    panel.waves[0] = testutil::to_observed_wave(inst.weak, inst.strong, inst.behavior);
    panel.finalize();

    inst.weak.set(1, 3, true);  // partner's tie to the candidate's partner
    inst.weak.set(0, 2, true);  // the candidate tie itself
    BoundEffect eff(parse_effect(Dependent::Weak, "coupleFourCycle(partnership)"), inst.panel);
    CHECK(eff.statistic(inst.view(), 0) == 1.0);
}

TEST_CASE("outdegree isolate follows the indicator") {
    Rng rng(23);
    Instance inst = testutil::random_instance(rng, 4);
    inst.weak = BinaryMatrix(4);
    inst.behavior = {4, 4, 4, 4};
    BoundEffect eff(parse_effect(Dependent::Behavior, "outIsolate(weak)"), inst.panel);
    CHECK(eff.statistic(inst.view(), 0) == 4.0);
    inst.weak.set(0, 1, true);
    CHECK(eff.statistic(inst.view(), 0) == 0.0);
}

TEST_CASE("dense triads on a complete 3-actor digraph") {
    Rng rng(29);
    Instance inst = testutil::random_instance(rng, 3);
    inst.weak = BinaryMatrix(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) inst.weak.set(i, j, true);
    for (int i = 0; i < 3; ++i) CHECK(dense_triad_count(inst.weak, i) == 1);
    // dropping one directed tie keeps the triad dense (5 ties)...
    inst.weak.set(0, 1, false);
    for (int i = 0; i < 3; ++i) CHECK(dense_triad_count(inst.weak, i) == 1);
    // ...dropping a second does not (4 ties)
    inst.weak.set(1, 0, false);
    for (int i = 0; i < 3; ++i) CHECK(dense_triad_count(inst.weak, i) == 0);
}

TEST_CASE("actor with no reciprocated ties has zero reciprocated degree") {
    Rng rng(31);
    Instance inst = testutil::random_instance(rng, 4);
    inst.weak = BinaryMatrix(4);
    inst.weak.set(0, 1, true);
    inst.weak.set(0, 2, true);
    BoundEffect eff(parse_effect(Dependent::Behavior, "recipDeg(weak)"), inst.panel);
    CHECK(eff.statistic(inst.view(), 0) == 0.0);
}

TEST_CASE("unknown and misplaced effects are rejected") {
    CHECK_THROWS_AS(parse_effect(Dependent::Weak, "noSuchEffect"), ConfigError);
    CHECK_THROWS_AS(parse_effect(Dependent::Weak, "mutualWithLower"), ConfigError);
    CHECK_THROWS_AS(parse_effect(Dependent::Behavior, "recip"), ConfigError);
    CHECK_THROWS_AS(parse_effect(Dependent::Weak, "linear"), ConfigError);
    CHECK_THROWS_AS(parse_effect(Dependent::Weak, "simX"), ConfigError);
    CHECK_THROWS_AS(parse_effect(Dependent::Weak, "recip(x)"), ConfigError);
    CHECK_NOTHROW(parse_effect(Dependent::Strong, "mutualWithLower"));
    CHECK(parse_effect(Dependent::Weak, "outdegree").kind == EffectKind::Outdegree);
}

TEST_CASE("binding validates covariate references") {
    Rng rng(37);
    Instance inst = testutil::random_instance(rng, 4);
    CHECK_THROWS_AS(BoundEffect(parse_effect(Dependent::Weak, "simX(height)"), inst.panel),
                    ConfigError);
    CHECK_THROWS_AS(BoundEffect(parse_effect(Dependent::Weak, "dyadX(nowhere)"), inst.panel),
                    ConfigError);
    // a matrix with two partners in one row cannot back the partner effects
    for (auto& cov : inst.panel.dyadic_covariates) {
        if (cov.name != "prox") continue;
        cov.w = RealMatrix(4);
        cov.w.set(0, 1, 1.0);
        cov.w.set(1, 0, 1.0);
        cov.w.set(0, 2, 1.0);
        cov.w.set(2, 0, 1.0);
    }
    inst.panel.finalize();
    CHECK_THROWS_AS(BoundEffect(parse_effect(Dependent::Weak, "partnerFriend(prox)"), inst.panel),
                    ConfigError);
}
