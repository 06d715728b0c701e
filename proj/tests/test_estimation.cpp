#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "osaom/errors.hpp"
#include "osaom/estimation.hpp"
#include "testutil.hpp"

using namespace osaom;

namespace {

ModelSpec benchmark_model(const Panel& panel) {
    auto spec = testutil::benchmark_spec();
    return ModelSpec(panel, spec.weak_effects, spec.strong_effects, spec.behavior_effects);
}

Eigen::VectorXd benchmark_truth(const ParamLayout& layout) {
    auto spec = testutil::benchmark_spec();
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(layout.size());
    for (int d = 0; d < kDependents; ++d)
        for (int m = 0; m < layout.periods; ++m)
            truth[layout.rate_index(static_cast<Dependent>(d), m)] = spec.rates[d];
    for (int k = 0; k < 2; ++k) {
        truth[layout.effect_index(Dependent::Weak, k)] = spec.weak_theta[k];
        truth[layout.effect_index(Dependent::Strong, k)] = spec.strong_theta[k];
        truth[layout.effect_index(Dependent::Behavior, k)] = spec.behavior_theta[k];
    }
    return truth;
}

// synthetic result good enough for wald_test
EstimationResult fake_result(const std::vector<std::string>& names,
                             const Eigen::VectorXd& theta, const Eigen::MatrixXd& cov) {
    EstimationResult r;
    r.param_names = names;
    r.theta = theta;
    r.cov_theta = cov;
    r.se = cov.diagonal().cwiseSqrt();
    r.tconv = Eigen::VectorXd::Zero(theta.size());
    r.converged = true;
    return r;
}

}  // namespace

TEST_CASE("chi-square tail fixtures") {
    CHECK(chi_squared_p_value(3.96, 3) == doctest::Approx(0.2658).epsilon(1e-3));
    CHECK(chi_squared_p_value(0.0, 3) == doctest::Approx(1.0));
    // 1-df tail equals the two-sided normal tail of sqrt(x)
    for (double x : {0.5, 1.0, 2.3, 5.0})
        CHECK(chi_squared_p_value(x, 1) ==
              doctest::Approx(two_sided_normal_p(std::sqrt(x))).epsilon(1e-12));
}

TEST_CASE("wald test identities") {
    std::vector<std::string> names = {"a", "b", "c"};
    Eigen::VectorXd theta(3);
    theta << 1.2, -0.4, 0.0;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    cov(0, 0) = 0.25;
    cov(1, 1) = 0.04;
    cov(2, 2) = 1.0;
    cov(0, 1) = cov(1, 0) = 0.01;
    EstimationResult r = fake_result(names, theta, cov);

    // 1-df Wald equals the squared z statistic
    WaldResult w1 = wald_test(r, {0});
    const double z = theta[0] / std::sqrt(cov(0, 0));
    CHECK(w1.statistic == doctest::Approx(z * z).epsilon(1e-12));
    CHECK(w1.p_value == doctest::Approx(two_sided_normal_p(z)).epsilon(1e-6));

    // zero estimate: W = 0, p = 1
    WaldResult w0 = wald_test(r, {2});
    CHECK(w0.statistic == doctest::Approx(0.0));
    CHECK(w0.p_value == doctest::Approx(1.0));

    WaldResult w2 = wald_test(r, {0, 1});
    CHECK(w2.df == 2);
    CHECK(w2.statistic > 0.0);

    CHECK_THROWS_AS(wald_test(r, {}), ConfigError);
    CHECK_THROWS_AS(wald_test(r, {7}), ConfigError);

    // a singular sub-block names the parameters
    Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
    singular(0, 0) = singular(0, 1) = singular(1, 0) = singular(1, 1) = 0.5;
    EstimationResult bad = fake_result(names, theta, singular);
    try {
        wald_test(bad, {0, 1});
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("a") != std::string::npos);
        CHECK(msg.find("b") != std::string::npos);
    }
}

TEST_CASE("observed targets: masking and rate distances") {
    // two waves, one changed tie observed, one change hidden behind a missing
    Panel panel;
    panel.n = 3;
    BinaryMatrix w1(3), s1(3), w2(3), s2(3);
    w1.set(0, 1, true);
    w2.set(0, 1, true);
    w2.set(1, 2, true);  // observed addition
    std::vector<int> z1 = {5, 6, 7}, z2 = {6, 6, 7};
    panel.waves.push_back(testutil::to_observed_wave(w1, s1, z1));
    panel.waves.push_back(testutil::to_observed_wave(w2, s2, z2));
    panel.waves[1].weak.set(2, 0, ObservedMatrix::kMissing);  // excluded dyad
    panel.finalize();

    ModelSpec model = benchmark_model(panel);
    ImputedPanel imputed = impute_for_simulation(panel);
    ParamLayout layout = ParamLayout::of(model, 1);
    Eigen::VectorXd obs = observed_targets(imputed, model, layout);

    CHECK(obs[layout.rate_index(Dependent::Weak, 0)] == doctest::Approx(1.0));
    CHECK(obs[layout.rate_index(Dependent::Strong, 0)] == doctest::Approx(0.0));
    CHECK(obs[layout.rate_index(Dependent::Behavior, 0)] == doctest::Approx(1.0));
    // weak outdegree target: ties at wave 2 minus the masked dyad
    CHECK(obs[layout.effect_index(Dependent::Weak, 0)] == doctest::Approx(2.0));
}

TEST_CASE("observed targets are equivariant under actor relabeling") {
    Panel panel = testutil::synthetic_panel(testutil::benchmark_spec(), 11);
    ModelSpec model = benchmark_model(panel);
    ImputedPanel imputed = impute_for_simulation(panel);
    ParamLayout layout = ParamLayout::of(model, panel.periods());
    Eigen::VectorXd obs = observed_targets(imputed, model, layout);

    // reverse the actor order
    Panel flipped;
    flipped.n = panel.n;
    flipped.grid = panel.grid;
    flipped.zbar_override = panel.zbar_override;
    auto flip = [&](int i) { return panel.n - 1 - i; };
    for (const auto& wave : panel.waves) {
        ObservedWave out;
        out.weak = ObservedMatrix(panel.n);
        out.strong = ObservedMatrix(panel.n);
        out.behavior.resize(panel.n);
        for (int i = 0; i < panel.n; ++i) {
            out.behavior[flip(i)] = wave.behavior[i];
            for (int j = 0; j < panel.n; ++j) {
                if (i == j) continue;
                out.weak.set(flip(i), flip(j), wave.weak.at(i, j));
                out.strong.set(flip(i), flip(j), wave.strong.at(i, j));
            }
        }
        flipped.waves.push_back(out);
    }
    flipped.finalize();
    ModelSpec flipped_model = benchmark_model(flipped);
    Eigen::VectorXd obs_flipped =
        observed_targets(impute_for_simulation(flipped), flipped_model, layout);
    for (int k = 0; k < obs.size(); ++k)
        CHECK(obs[k] == doctest::Approx(obs_flipped[k]).epsilon(1e-12));
}

TEST_CASE("initial parameters: positive rates and log-odds density start") {
    Panel panel = testutil::synthetic_panel(testutil::benchmark_spec(), 21);
    ModelSpec model = benchmark_model(panel);
    ImputedPanel imputed = impute_for_simulation(panel);
    ParamLayout layout = ParamLayout::of(model, panel.periods());
    std::vector<std::string> warnings;
    Eigen::VectorXd start = initial_parameters(imputed, model, layout, &warnings);
    for (int k = 0; k < layout.rate_count(); ++k) CHECK(start[k] > 0.0);
    CHECK(start[layout.effect_index(Dependent::Weak, 0)] < 0.0);  // sparse network
    CHECK(warnings.empty());
}

TEST_CASE("simulated targets match expectation-based targets in phase-3 style") {
    // independent batches at the generator coefficients: standardized
    // deviations of one batch mean from another must be small
    testutil::SyntheticSpec spec = testutil::benchmark_spec();
    spec.n = 25;
    spec.waves = 2;
    Panel panel = testutil::synthetic_panel(spec, 31);
    ModelSpec model = benchmark_model(panel);
    ImputedPanel imputed = impute_for_simulation(panel);
    ParamLayout layout = ParamLayout::of(model, panel.periods());
    Eigen::VectorXd truth = benchmark_truth(layout);

    const int n1 = 2000, n2 = 2000;
    Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(layout.size());
    Eigen::VectorXd mean2 = Eigen::VectorXd::Zero(layout.size());
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(layout.size(), 2);
    for (int r = 0; r < n1; ++r)
        mean1 += simulate_targets(imputed, model, layout, truth, Rng::derive(77, r));
    mean1 /= n1;
    std::vector<Eigen::VectorXd> batch2;
    for (int r = 0; r < n2; ++r)
        batch2.push_back(
            simulate_targets(imputed, model, layout, truth, Rng::derive(78, 100000 + r)));
    for (const auto& s : batch2) mean2 += s;
    mean2 /= n2;
    for (int k = 0; k < layout.size(); ++k) {
        double var = 0.0;
        for (const auto& s : batch2) var += (s[k] - mean2[k]) * (s[k] - mean2[k]);
        var /= (n2 - 1);
        const double sd = std::sqrt(var);
        REQUIRE(sd > 0.0);
        const double tconv = (mean2[k] - mean1[k]) / sd;
        CHECK(std::abs(tconv) < 0.1);
    }
}

TEST_CASE("estimation recovers the generator on one desk-scale panel") {
    testutil::SyntheticSpec spec = testutil::benchmark_spec();
    spec.n = 30;
    spec.waves = 3;
    Panel panel = testutil::synthetic_panel(spec, 5150);
    ModelSpec model = benchmark_model(panel);

    EstimationOptions options;
    options.phase1_runs = 150;
    options.phase2_subphases = 3;
    options.phase2_base_iterations = 40;
    options.phase3_runs = 500;
    options.max_retries = 1;
    options.seed = 99;
    options.threads = 4;
    EstimationResult result = estimate(panel, model, options);

    ParamLayout layout = result.layout;
    Eigen::VectorXd truth = benchmark_truth(layout);
    CHECK(result.theta.allFinite());
    CHECK(result.se.allFinite());
    for (int k = layout.rate_count(); k < layout.size(); ++k) {
        CAPTURE(result.param_names[k]);
        CHECK(std::abs(result.theta[k] - truth[k]) < 4.0 * std::max(result.se[k], 0.05));
    }
    CHECK(result.mcr < 0.4);
    CHECK(result.observed.size() == layout.size());
}

TEST_CASE("zero-change panel drives rates to the floor with a warning") {
    Rng rng(61);
    BinaryMatrix weak, strong;
    testutil::random_nested_pair(rng, 15, 0.2, 0.4, weak, strong);
    std::vector<int> z(15, 7);
    Panel panel;
    panel.n = 15;
    panel.waves.push_back(testutil::to_observed_wave(weak, strong, z));
    panel.waves.push_back(testutil::to_observed_wave(weak, strong, z));
    panel.finalize();
    ModelSpec model = benchmark_model(panel);

    EstimationOptions options;
    options.phase1_runs = 60;
    options.phase2_subphases = 2;
    options.phase2_base_iterations = 20;
    options.phase3_runs = 100;
    options.max_retries = 0;
    options.seed = 3;
    options.threads = 2;
    EstimationResult result = estimate(panel, model, options);

    bool warned = false;
    for (const auto& w : result.warnings)
        if (w.find("no observed change") != std::string::npos) warned = true;
    CHECK(warned);
    for (int k = 0; k < result.layout.rate_count(); ++k)
        CHECK(result.theta[k] <= options.rate_floor + 0.15);
}

TEST_CASE("score test rejects constant and collinear extra statistics") {
    testutil::SyntheticSpec spec = testutil::benchmark_spec();
    spec.n = 20;
    spec.waves = 2;
    Panel panel = testutil::synthetic_panel(spec, 41);
    // add a constant covariate so egoX(flat) has a degenerate statistic
    ActorCovariate flat;
    flat.name = "flat";
    flat.values.assign(panel.n, 3.0);
    panel.actor_covariates.push_back(flat);
    panel.finalize();
    ModelSpec model = benchmark_model(panel);
    ParamLayout layout = ParamLayout::of(model, panel.periods());

    EstimationResult fitted;
    fitted.layout = layout;
    fitted.theta = benchmark_truth(layout);
    fitted.param_names = layout.names(model);
    fitted.zbar = panel.zbar;
    fitted.grid = panel.grid;

    CHECK_THROWS_AS(score_test(panel, model, fitted,
                               parse_effect(Dependent::Weak, "egoX(flat)"), 200, 5, 2),
                    NumericalError);
    // an effect already present is refused up front
    CHECK_THROWS_AS(score_test(panel, model, fitted, parse_effect(Dependent::Weak, "recip"),
                               200, 5, 2),
                    ConfigError);
}

TEST_CASE("score test: null effect keeps moderate statistics, strong signal is caught") {
    testutil::SyntheticSpec spec = testutil::benchmark_spec();
    spec.n = 25;
    spec.waves = 2;
    Panel panel = testutil::synthetic_panel(spec, 71);
    ModelSpec model = benchmark_model(panel);

    EstimationOptions options;
    options.phase1_runs = 120;
    options.phase2_subphases = 3;
    options.phase2_base_iterations = 30;
    options.phase3_runs = 300;
    options.max_retries = 1;
    options.seed = 7;
    options.threads = 4;
    EstimationResult fitted = estimate(panel, model, options);

    // transTrip was not in the generator: the score statistic should be tame
    ScoreTestResult null_test = score_test(panel, model, fitted,
                                           parse_effect(Dependent::Weak, "transTrip"), 500,
                                           911, 4);
    CHECK(std::abs(null_test.statistic) < 3.5);
    CHECK(null_test.p_value >= 0.0);
    CHECK(null_test.p_value <= 1.0);
}

TEST_CASE("goodness of fit: identical waves give zero distance and p = 1") {
    Rng rng(81);
    BinaryMatrix weak, strong;
    testutil::random_nested_pair(rng, 12, 0.25, 0.4, weak, strong);
    std::vector<int> z(12, 7);
    Panel panel;
    panel.n = 12;
    panel.waves.push_back(testutil::to_observed_wave(weak, strong, z));
    panel.waves.push_back(testutil::to_observed_wave(weak, strong, z));
    panel.finalize();
    ModelSpec model = benchmark_model(panel);
    ParamLayout layout = ParamLayout::of(model, 1);

    EstimationResult fitted;
    fitted.layout = layout;
    fitted.theta = Eigen::VectorXd::Zero(layout.size());
    // vanishing rates: simulations stay at the start state == observation
    for (int k = 0; k < layout.rate_count(); ++k) fitted.theta[k] = 1e-9;
    fitted.param_names = layout.names(model);
    fitted.grid = panel.grid;

    GofResult g = gof(panel, model, fitted, {AuxStatistic::WeakIndegree, AuxStatistic::Behavior},
                      60, 13, 2);
    for (const auto& entry : g.entries) {
        CHECK(entry.distance == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(entry.p_value == doctest::Approx(1.0));
    }
}

TEST_CASE("goodness of fit separates self-fit from forced misfit") {
    testutil::SyntheticSpec spec = testutil::benchmark_spec();
    spec.n = 25;
    spec.waves = 2;
    spec.strong_theta = {-2.0, 2.5};  // strongly reciprocal generator
    Panel panel = testutil::synthetic_panel(spec, 101);
    ModelSpec model = benchmark_model(panel);
    ParamLayout layout = ParamLayout::of(model, 1);

    EstimationResult at_truth;
    at_truth.layout = layout;
    at_truth.theta = benchmark_truth(layout);
    at_truth.theta[layout.effect_index(Dependent::Strong, 1)] = 2.5;
    at_truth.param_names = layout.names(model);
    at_truth.grid = panel.grid;

    GofResult good = gof(panel, model, at_truth, {AuxStatistic::StrongIndegree}, 400, 17, 4);

    // break the generator: reciprocity forced to zero, density recompensated
    EstimationResult broken = at_truth;
    broken.theta[layout.effect_index(Dependent::Strong, 1)] = 0.0;
    GofResult bad = gof(panel, model, broken, {AuxStatistic::StrongIndegree}, 400, 17, 4);

    double good_min_p = 1.0, bad_min_p = 1.0;
    for (const auto& e : good.entries) good_min_p = std::min(good_min_p, e.p_value);
    for (const auto& e : bad.entries) bad_min_p = std::min(bad_min_p, e.p_value);
    CHECK(good_min_p > 0.02);
    CHECK(bad_min_p < good_min_p);
}

TEST_CASE("derivative routes agree: finite differences vs score covariance") {
    // small instance, derivative of E[S] wrt the weak density coefficient
    testutil::SyntheticSpec spec = testutil::benchmark_spec();
    spec.n = 10;
    spec.waves = 2;
    Panel panel = testutil::synthetic_panel(spec, 121);
    ModelSpec model = benchmark_model(panel);
    ImputedPanel imputed = impute_for_simulation(panel);
    ParamLayout layout = ParamLayout::of(model, 1);
    Eigen::VectorXd truth = benchmark_truth(layout);

    const int runs = 4000;
    const int k_density = layout.effect_index(Dependent::Weak, 0);
    const int k_target = layout.effect_index(Dependent::Weak, 0);

    // route 1: common-random-number centered differences
    const double delta = 0.1;
    double fd = 0.0;
    for (int r = 0; r < runs / 4; ++r) {
        Eigen::VectorXd up = truth, down = truth;
        up[k_density] += delta;
        down[k_density] -= delta;
        const auto s_up = simulate_targets(imputed, model, layout, up, Rng::derive(31, r));
        const auto s_down = simulate_targets(imputed, model, layout, down, Rng::derive(31, r));
        fd += (s_up[k_target] - s_down[k_target]) / (2.0 * delta);
    }
    fd /= (runs / 4);

    // route 2: covariance of the statistic with the trajectory score
    double mean_s = 0.0, mean_j = 0.0;
    std::vector<double> s_draws(runs), j_draws(runs);
    for (int r = 0; r < runs; ++r) {
        Eigen::VectorXd score;
        const auto s =
            simulate_targets(imputed, model, layout, truth, Rng::derive(32, r), &score);
        s_draws[r] = s[k_target];
        j_draws[r] = score[k_density];
        mean_s += s_draws[r];
        mean_j += j_draws[r];
    }
    mean_s /= runs;
    mean_j /= runs;
    double cov = 0.0, var_s = 0.0;
    for (int r = 0; r < runs; ++r) {
        cov += (s_draws[r] - mean_s) * (j_draws[r] - mean_j);
        var_s += (s_draws[r] - mean_s) * (s_draws[r] - mean_s);
    }
    cov /= (runs - 1);
    var_s /= (runs - 1);

    // agreement within Monte-Carlo error (a few standard errors of either route)
    const double tol = 6.0 * std::sqrt(var_s) / std::sqrt(static_cast<double>(runs)) *
                           std::sqrt(mean_j * mean_j + 25.0) +
                       0.5;
    CHECK(std::abs(fd - cov) < std::max(1.0, tol));
}
