#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcomp/data_model.hpp"
#include "gcomp/design.hpp"
#include "gcomp/rng.hpp"

namespace gcomp {

/// Generating equations for the synthetic trial. One scalar z confounder and
/// one scalar x confounder; z coefficients multiply the transformed value
/// (cfg.ztrans), matching the designs fitted downstream. Structure per time
/// point j >= 1, in generation order:
///   c ~ Bernoulli(expit(c_int[j-1] + c_x x + c_z_lag t(z') + c_y_lag y'))
///   z ~ 0 with prob zero_inflation, else Poisson(softplus(eta_z))
///   y ~ Normal(eta_y, y_sigma2)
///   b ~ Normal(eta_b, b_sigma2)
///   d = 1 if c = 1, else Bernoulli(dishonesty_prob)
/// where primes denote the previous time point and t() the z transform.
struct ScenarioConfig {
    int n = 1000;
    int time_points = 6;
    double r2_target = 0.5;
    ZTransform ztrans = ZTransform::sqrt;
    double dishonesty_prob = 2.0 / 3.0;

    std::vector<double> compliance_intercepts;  // length time_points - 1
    double c_x = 0.0, c_z_lag = 0.0, c_y_lag = 0.0;

    double z_intercept = 0.0, z_baseline_intercept = 0.0;
    double z_x = 0.0, z_z_lag = 0.0, z_y_lag = 0.0, z_c = 0.0;
    double zero_inflation = 0.08;

    double y_intercept = 0.0, y_x = 0.0, y_z_cur = 0.0, y_z_lag = 0.0, y_y_lag = 0.0,
           y_c = 0.0, y_sigma2 = 1.0;

    double b_intercept = 0.0, b_x = 0.0, b_y_cur = 0.0, b_z_cur = 0.0, b_z_lag = 0.0,
           b_y_lag = 0.0, b_c = 0.0, b_sigma2 = 1.0;

    std::uint64_t seed = 20260810;

    // Ground truth cached by calibration so every estimator evaluation of a
    // scenario shares the same oracle value.
    double oracle_mean = kAbsent;
    double oracle_se = kAbsent;
};

/// Structural coefficients shared by all scenarios; calibration only moves
/// the intercepts, the outcome noise, and the biomarker separation.
ScenarioConfig default_scenario();

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

/// Synthetic trial with true compliance recorded; arm label "sim",
/// z bounds [0, inf).
LongitudinalDataset generate_dataset(const ScenarioConfig& cfg, int n, std::uint64_t seed,
                                     int threads = 1);

/// Exact P(C=1 | current state, lag state, x, b, d=1) under the generating
/// law, for every view row. The benchmark the fitted posterior chases.
Eigen::VectorXd true_posterior(const ScenarioConfig& cfg, const LongitudinalDataset& ds,
                               const std::vector<ViewRow>& view);

/// Generating compliance probability (before outcome/biomarker information).
double true_rho(const ScenarioConfig& cfg, double x, double z_lag, double y_lag, int time);

struct OracleResult {
    double mean = 0.0;
    double se = 0.0;
    long long samples = 0;
};

/// Ground-truth causal mean: simulate the generating process forcing
/// compliance on at every time point and average the terminal outcome.
OracleResult oracle_causal_mean(const ScenarioConfig& cfg, long long n_mc = 1000000,
                                std::uint64_t seed = 99, int threads = 1);

/// Operating characteristics measured on a generated pilot.
struct PilotStats {
    double compliance_rate = 0.0;               // all post-baseline observations
    std::vector<double> compliance_by_time;     // per post-baseline time point
    double view_share = 0.0;                    // estimation view / post-baseline obs
    double zero_share = 0.0;                    // z == 0 over all time points
    double poisson_mean = 0.0;                  // mean Poisson component over all time points
    double r2 = 0.0;                            // 1 - y_sigma2 / Var(y | view)
    double auc = 0.0;                           // true posterior vs true compliance
    double mean_y = 0.0;
    std::size_t n_obs = 0;
};

PilotStats pilot_stats(const ScenarioConfig& cfg, int pilot_size, std::uint64_t seed,
                       int threads = 1);

/// Area under the ROC curve (Mann-Whitney with tie correction).
double auc_score(const std::vector<double>& scores, const std::vector<int>& labels);

struct CalibrationTargets {
    double r2 = 0.5;
    double auc = 0.952;
    std::vector<double> compliance_by_time = {0.36, 0.38, 0.40, 0.42, 0.44};
    double zero_share = 0.08;
    double poisson_mean = 33.0;
    int pilot_size = 50000;
    std::uint64_t pilot_seed = 7;
    int n = 1000;
    long long oracle_samples = 1000000;

    double tol_compliance = 0.01;
    double tol_r2 = 0.02;
    double tol_zero = 0.01;
    double tol_poisson = 1.0;
    double tol_auc = 0.02;
    int max_rounds = 6;
};

CalibrationTargets load_calibration_targets(const std::string& path);

struct CalibrationResult {
    ScenarioConfig config;
    std::string report;  // search trajectory, one line per probe
};

/// Deterministic coordinate search over (z intercepts, compliance
/// intercepts, outcome noise, biomarker separation) against pilot
/// simulations until every target is inside its tolerance. Throws with the
/// worst miss when the budget runs out.
CalibrationResult calibrate(const CalibrationTargets& targets, int threads = 1);

struct MetricsRow {
    std::string estimator;
    double bias = 0.0;
    double mc_sd = 0.0;
    double mse = 0.0;
    int n_replicates = 0;
    int failures = 0;
};

struct ScenarioRunOptions {
    int n_replicates = 500;
    long long R = 10000;
    std::uint64_t seed = 1;
    int threads = 1;
    double max_failure_share = 0.05;
};

/// Replicate loop: generate, fit, run every requested estimator, reduce to
/// bias / MC SD / MSE rows against the scenario's cached oracle mean.
std::vector<MetricsRow> run_scenario(const ScenarioConfig& cfg,
                                     const std::vector<std::string>& estimators,
                                     const ScenarioRunOptions& opts);

}  // namespace gcomp
