#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcomp/compliance_em.hpp"
#include "gcomp/data_model.hpp"
#include "gcomp/design.hpp"
#include "gcomp/glm.hpp"
#include "gcomp/pmm.hpp"
#include "gcomp/rng.hpp"

namespace gcomp {

/// What stands in for the compliance indicator in the weighted estimating
/// equations.
enum class WeightSource {
    posterior,        // fitted mixture posterior (full method)
    self_report,      // w = d (all ones within the view)
    true_compliance,  // w = c, simulation only
    threshold_indicator,
};

enum class SamplingMode { pmm, parametric };

Eigen::VectorXd compute_weights(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                                WeightSource source, const MixtureModel* mixture = nullptr,
                                double threshold = 0.0);

struct GcompOptions {
    ZTransform ztrans = ZTransform::identity;
    int donors_k = 5;
    bool build_pools = true;
    bool pmm_outcome = false;  // hot-deck the outcome draw as well
};

/// Weighted conditional-mean fits shared across time points: one linear fit
/// per z confounder given (lag state, x), one outcome fit given
/// (current z, lag state, x), plus donor pools for PMM sampling.
struct FittedGcompModels {
    std::vector<LinearFit> z_fits;
    LinearFit y_fit;
    std::vector<DonorPool> donor_pools;       // per z confounder when built
    std::optional<DonorPool> outcome_pool;
    WeightSource weight_source = WeightSource::posterior;
    DesignSpec z_spec;
    DesignSpec y_spec;
    int time_points = 0;
    std::size_t n_z = 0;
    std::vector<Bounds> z_bounds;  // copied from the dataset; used by parametric draws
    bool shared_beta = true;
};

FittedGcompModels fit_models(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                             const Eigen::VectorXd& weights, WeightSource source,
                             const GcompOptions& opts = {});

/// One counterfactual trajectory from a baseline record; returns the outcome
/// at the final time point (time_points - 1). K = 1 degenerates to the
/// baseline outcome.
double simulate_trajectory(const FittedGcompModels& models, double baseline_y,
                           const std::vector<double>& baseline_z, const std::vector<double>& x,
                           int time_points, SamplingMode mode, Rng& rng);

struct CausalEstimate {
    double mean = 0.0;
    long long samples = 0;       // R
    double outcome_variance = 0.0;
    std::uint64_t seed = 0;
};

/// Monte Carlo g-formula integration: R trajectories, each from a baseline
/// record drawn jointly (participant-level) from the arm's empirical
/// distribution. Trajectory r uses its own RNG stream keyed by r, so the
/// estimate is bit-identical for any thread count.
CausalEstimate estimate(const FittedGcompModels& models, const LongitudinalDataset& ds,
                        const std::string& arm, long long R, SamplingMode mode,
                        std::uint64_t seed, int threads = 1);

/// Plain-loop reference implementation used by tests and the benchmark.
CausalEstimate estimate_serial(const FittedGcompModels& models, const LongitudinalDataset& ds,
                               const std::string& arm, long long R, SamplingMode mode,
                               std::uint64_t seed);

}  // namespace gcomp
