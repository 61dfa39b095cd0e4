#pragma once

#include <string>
#include <vector>

#include "gcomp/data_model.hpp"
#include "gcomp/design.hpp"
#include "gcomp/glm.hpp"
#include "gcomp/rng.hpp"

namespace gcomp {

/// Two-component conditional mixture for the biomarker: a logistic
/// compliance-probability model (alpha) and Gaussian biomarker components
/// for the compliant (xi_c1) and noncompliant (xi_c0) states, all sharing
/// one covariate recipe. Labels are fixed by convention: the component with
/// the lower fitted intercept is the compliant one.
struct MixtureModel {
    Eigen::VectorXd alpha;
    LinearFit xi_c1;
    LinearFit xi_c0;
    DesignSpec rho_spec;  // g_spec plus optional per-time intercepts
    DesignSpec g_spec;
    int time_points = 0;
    std::vector<std::string> rho_labels;
    std::vector<std::string> g_labels;
};

struct EmTrace {
    std::vector<double> loglik;  // observed-data log-likelihood per iteration
    int iterations = 0;
    bool converged = false;
};

struct EmOptions {
    double tol = 1e-6;          // relative observed log-likelihood change
    int max_iter = 500;
    bool rho_time_dummies = false;
    ZTransform ztrans = ZTransform::identity;
    double sigma2_floor = 1e-8;
};

enum class InitMode { biomarker_split, threshold, random };

struct InitSpec {
    InitMode mode = InitMode::biomarker_split;
    double threshold = 0.0;     // threshold mode
    std::uint64_t seed = 0;     // random mode
};

/// Parse "biomarker_split", "threshold:6.41", or "random:42".
InitSpec parse_init_spec(const std::string& text);

/// Initial soft labels for fit_em.
Eigen::VectorXd initial_weights(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                                const InitSpec& init);

double observed_loglik(const MixtureModel& m, const LongitudinalDataset& ds,
                       const std::vector<ViewRow>& view);

/// Posterior compliance probabilities rho*g1 / (rho*g1 + (1-rho)*g0),
/// evaluated in log space.
Eigen::VectorXd e_step(const MixtureModel& m, const LongitudinalDataset& ds,
                       const std::vector<ViewRow>& view);

/// Weighted refits: logistic with fractional response w for alpha, linear
/// with weights w / 1-w for the two components. A component whose effective
/// weight falls below (#coefficients + 1) is frozen at its previous value;
/// freezing without a previous model is an error.
MixtureModel m_step(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                    const Eigen::VectorXd& w, const EmOptions& opts,
                    const MixtureModel* prev = nullptr);

struct EmFitResult {
    MixtureModel model;
    EmTrace trace;
};

EmFitResult fit_em(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                   const InitSpec& init, const EmOptions& opts = {});

EmFitResult fit_em(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                   const Eigen::VectorXd& init_weights, const EmOptions& opts = {});

/// Restart EM from a previously fitted model (bootstrap replicates start
/// from the full-data fit).
EmFitResult fit_em_warm(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                        const MixtureModel& start, const EmOptions& opts = {});

/// Bayes posterior for a single observation; d = 0 returns 0 without
/// consulting the model.
double posterior_compliance(const MixtureModel& m, const LongitudinalDataset& ds,
                            int participant_index, int time);

/// Key-value text export/import for reproducibility.
std::string export_mixture_model(const MixtureModel& m);
MixtureModel import_mixture_model(const std::string& text);

}  // namespace gcomp
