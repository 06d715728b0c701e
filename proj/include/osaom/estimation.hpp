#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osaom/data_prep.hpp"
#include "osaom/dynamics.hpp"

namespace osaom {

struct EstimationOptions {
    int phase1_runs = 200;
    int phase2_subphases = 4;
    int phase2_base_iterations = 50;  // doubles each sub-phase
    double gain = 0.2;                // halves each sub-phase
    int phase3_runs = 4000;
    int max_retries = 2;
    // Phase-1 derivative estimator. The default uses the trajectory-score
    // covariance, which stays well conditioned on discrete simulations;
    // common-random-number centered finite differences are available for
    // cross-checks but degenerate when a small coefficient shift rarely
    // alters a sampled trajectory.
    bool fd_derivative = false;
    double fd_step = 0.1;  // perturbation 0.1 * max(|theta_k|, 1)
    double rate_floor = 0.05;
    double tconv_limit = 0.1;
    double mcr_limit = 0.25;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    std::optional<Eigen::VectorXd> initial;
};

struct EstimationResult {
    std::vector<std::string> param_names;
    ParamLayout layout;
    Eigen::VectorXd theta;
    Eigen::VectorXd se;
    Eigen::VectorXd tconv;
    double mcr = 0.0;
    bool converged = false;
    int retries_used = 0;
    Eigen::MatrixXd deriv;      // D = dE[S]/dtheta at the estimate
    Eigen::MatrixXd sigma;      // covariance of simulated statistics
    Eigen::MatrixXd cov_theta;  // D^-1 Sigma D^-T
    Eigen::VectorXd observed;   // target statistics
    Eigen::VectorXd sim_mean;   // mean simulated statistics at the estimate
    std::vector<std::string> warnings;
    // behavior constants echoed for downstream commands
    double zbar = 0.0;
    double z_range = 1.0;
    double z_sim_mean = 0.0;
    int grid = 13;
};

// Cross-lagged method-of-moments targets. Entries flagged as imputed are
// removed from both the observed and the simulated side: tie entries are
// zeroed in the end states, behavior entries are pinned to the period's
// start value, and rate distances skip flagged entries.
Eigen::VectorXd observed_targets(const ImputedPanel& panel, const ModelSpec& model,
                                 const ParamLayout& layout);

// Simulates all periods once from the observed starting waves and returns
// the target-aligned statistic vector (optionally accumulating scores).
Eigen::VectorXd simulate_targets(const ImputedPanel& panel, const ModelSpec& model,
                                 const ParamLayout& layout, const Eigen::VectorXd& params,
                                 Rng rng, Eigen::VectorXd* score_out = nullptr);

// Warm start: rates from observed change counts, outdegree coefficients from
// observed tie log-odds, everything else 0.
Eigen::VectorXd initial_parameters(const ImputedPanel& panel, const ModelSpec& model,
                                   const ParamLayout& layout,
                                   std::vector<std::string>* warnings = nullptr);

// Three-phase Robbins-Monro method-of-moments estimator.
EstimationResult estimate(const Panel& panel, const ModelSpec& model,
                          const EstimationOptions& options);

struct ScoreTestResult {
    double statistic = 0.0;  // standardized, approximately N(0,1) under H0
    double p_value = 1.0;
    int runs = 0;
};

// One-parameter score-type test for an effect omitted from the fitted model.
// Simulates at the estimate with the extra coefficient fixed at 0 and
// standardizes the extra statistic's deviation, orthogonalized against the
// fitted statistics. Throws NumericalError when the extra statistic has no
// conditional variance (constant or collinear with fitted effects).
ScoreTestResult score_test(const Panel& panel, const ModelSpec& model,
                           const EstimationResult& fitted, const EffectSpec& extra,
                           int runs = 1000, std::uint64_t seed = 99, int threads = 0);

struct WaldResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

// W = theta_s' cov(theta_s)^-1 theta_s against chi-square(|s|).
WaldResult wald_test(const EstimationResult& fitted, const std::vector<int>& subset);

// Upper-tail chi-square probability, exposed for the CLI calculator mode.
double chi_squared_p_value(double statistic, int df);
// Two-sided standard normal p-value.
double two_sided_normal_p(double z);

enum class AuxStatistic { WeakIndegree, WeakOutdegree, StrongIndegree, StrongOutdegree, Behavior };

const char* to_string(AuxStatistic a);
AuxStatistic aux_from_string(const std::string& s);

struct GofEntry {
    AuxStatistic family = AuxStatistic::WeakIndegree;
    int period = 0;          // compared at wave period+2 (end of the period)
    double distance = 0.0;   // Mahalanobis distance of the observation
    double p_value = 1.0;    // Monte-Carlo tail probability
};

struct GofResult {
    std::vector<GofEntry> entries;
    int runs = 0;
};

// Simulates at the fitted estimate and compares observed auxiliary statistic
// vectors (cumulative degree / behavior distributions) against the simulated
// distribution with a generalized-inverse Mahalanobis distance.
GofResult gof(const Panel& panel, const ModelSpec& model, const EstimationResult& fitted,
              const std::vector<AuxStatistic>& families, int runs = 1000,
              std::uint64_t seed = 7, int threads = 0);

}  // namespace osaom
