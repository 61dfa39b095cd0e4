#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcomp/compliance_em.hpp"
#include "gcomp/data_model.hpp"
#include "gcomp/estimators.hpp"
#include "gcomp/gcomp_engine.hpp"

namespace gcomp {

enum class EstimatorKind {
    itt,
    pp,
    emreg,
    gcomp_parametric,
    gcomp_selfreport,
    gcomp_true,
    gcomp_full,
};

EstimatorKind parse_estimator(const std::string& name);
std::string estimator_name(EstimatorKind kind);

/// Estimators runnable on this dataset: gcomp-true needs a true-compliance
/// column, itt needs a second arm.
std::vector<EstimatorKind> applicable_estimators(const LongitudinalDataset& ds,
                                                 const std::string& arm);

struct AnalysisOptions {
    std::string arm;
    std::string ref_arm;  // itt only
    ZTransform ztrans = ZTransform::identity;
    bool rho_time_dummies = false;
    InitSpec init;
    double em_tol = 1e-6;
    int em_max_iter = 500;
    int donors_k = 5;
    bool pmm_outcome = false;
    long long R = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
    // Bootstrap replicates restart EM from the full-data fit.
    const MixtureModel* em_warm_start = nullptr;
    const EmRegModel* emreg_warm_start = nullptr;
};

/// One dataset's estimation pipeline with shared lazily-computed pieces:
/// the estimation view, the mixture fit, and the per-weight-source model
/// fits. Throws NumericError when a required EM fit does not converge.
class AnalysisSession {
public:
    AnalysisSession(const LongitudinalDataset& ds, AnalysisOptions opts);

    double run(EstimatorKind kind);

    const std::vector<ViewRow>& view();
    const EmFitResult& mixture_fit();
    const EmRegFitResult& emreg_fit();
    const FittedGcompModels& models(WeightSource source);
    const AnalysisOptions& options() const { return opts_; }

private:
    EmOptions em_options() const;
    GcompOptions gcomp_options() const;

    const LongitudinalDataset& ds_;
    AnalysisOptions opts_;
    std::optional<std::vector<ViewRow>> view_;
    std::optional<EmFitResult> em_;
    std::optional<EmRegFitResult> emreg_;
    std::optional<FittedGcompModels> models_posterior_;
    std::optional<FittedGcompModels> models_selfreport_;
    std::optional<FittedGcompModels> models_true_;
};

}  // namespace gcomp
