#include "gcomp/gcomp_engine.hpp"

#include <algorithm>
#include <cmath>

#include "gcomp/parallel.hpp"

namespace gcomp {

Eigen::VectorXd compute_weights(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                                WeightSource source, const MixtureModel* mixture,
                                double threshold) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(view.size()));
    switch (source) {
        case WeightSource::posterior:
            if (mixture == nullptr)
                throw InputError("posterior weights need a fitted mixture model");
            return e_step(*mixture, ds, view);
        case WeightSource::self_report:
            w.setOnes();  // the view already keeps d = 1 only
            return w;
        case WeightSource::true_compliance:
            for (std::size_t i = 0; i < view.size(); ++i) {
                int c = view[i].cur->c;
                if (c < 0)
                    throw InputError(
                        "true-compliance weights need a c column (simulated data only)");
                w[static_cast<Eigen::Index>(i)] = static_cast<double>(c);
            }
            return w;
        case WeightSource::threshold_indicator:
            for (std::size_t i = 0; i < view.size(); ++i)
                w[static_cast<Eigen::Index>(i)] = view[i].cur->b < threshold ? 1.0 : 0.0;
            return w;
    }
    throw InputError("unknown weight source");
}

FittedGcompModels fit_models(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                             const Eigen::VectorXd& weights, WeightSource source,
                             const GcompOptions& opts) {
    if (weights.size() != static_cast<Eigen::Index>(view.size()))
        throw InputError("weights do not match view size");
    if ((weights.array() < 0.0).any() || (weights.array() > 1.0).any())
        throw InputError("estimating-equation weights must lie in [0,1]");

    FittedGcompModels models;
    models.weight_source = source;
    models.time_points = ds.time_points;
    models.n_z = ds.z_names.size();
    models.z_bounds = ds.z_bounds;

    models.z_spec = DesignSpec{};
    models.z_spec.ztrans = opts.ztrans;
    models.y_spec = DesignSpec{};
    models.y_spec.current_z = true;
    models.y_spec.ztrans = opts.ztrans;

    DesignMatrix z_design = build_design(ds, view, models.z_spec);
    DesignMatrix y_design = build_design(ds, view, models.y_spec);

    for (std::size_t m = 0; m < models.n_z; ++m) {
        Eigen::VectorXd zresp(static_cast<Eigen::Index>(view.size()));
        for (std::size_t i = 0; i < view.size(); ++i)
            zresp[static_cast<Eigen::Index>(i)] = view[i].cur->z[m];
        models.z_fits.push_back(fit_weighted_linear(z_design, zresp, weights));
    }
    Eigen::VectorXd yresp(static_cast<Eigen::Index>(view.size()));
    for (std::size_t i = 0; i < view.size(); ++i)
        yresp[static_cast<Eigen::Index>(i)] = view[i].cur->y;
    models.y_fit = fit_weighted_linear(y_design, yresp, weights);

    if (opts.build_pools) {
        for (std::size_t m = 0; m < models.n_z; ++m) {
            std::vector<double> observed(view.size());
            for (std::size_t i = 0; i < view.size(); ++i) observed[i] = view[i].cur->z[m];
            const Bounds* bounds = m < ds.z_bounds.size() ? &ds.z_bounds[m] : nullptr;
            models.donor_pools.push_back(
                build_pool(models.z_fits[m], z_design, observed, weights, opts.donors_k, bounds));
        }
        if (opts.pmm_outcome) {
            std::vector<double> observed(view.size());
            for (std::size_t i = 0; i < view.size(); ++i) observed[i] = view[i].cur->y;
            models.outcome_pool =
                build_pool(models.y_fit, y_design, observed, weights, opts.donors_k, nullptr);
        }
    }
    return models;
}

double simulate_trajectory(const FittedGcompModels& models, double baseline_y,
                           const std::vector<double>& baseline_z, const std::vector<double>& x,
                           int time_points, SamplingMode mode, Rng& rng) {
    if (baseline_z.size() != models.n_z)
        throw InputError("baseline z record does not match model dimension");
    if (mode == SamplingMode::pmm && models.donor_pools.size() != models.n_z)
        throw InputError("PMM sampling requested but donor pools were not built");

    double y = baseline_y;
    std::vector<double> z = baseline_z;
    std::vector<double> z_next(models.n_z);

    Eigen::VectorXd z_row(static_cast<Eigen::Index>(
        design_width(models.z_spec, time_points, models.n_z, x.size())));
    Eigen::VectorXd y_row(static_cast<Eigen::Index>(
        design_width(models.y_spec, time_points, models.n_z, x.size())));

    const double y_sd = std::sqrt(models.y_fit.sigma2);
    for (int j = 1; j < time_points; ++j) {
        fill_state_row(z_row, models.z_spec, time_points, models.n_z, x, y, z, nullptr, 0.0, -1);
        for (std::size_t m = 0; m < models.n_z; ++m) {
            double z_hat = models.z_fits[m].coef.dot(z_row);
            if (mode == SamplingMode::pmm) {
                z_next[m] = draw(models.donor_pools[m], z_hat, rng);
            } else {
                double sd = std::sqrt(models.z_fits[m].sigma2);
                double value = sd > 0.0 ? rng.normal(z_hat, sd) : z_hat;
                if (m < models.z_bounds.size())
                    value = std::clamp(value, models.z_bounds[m].lo, models.z_bounds[m].hi);
                z_next[m] = value;
            }
        }
        fill_state_row(y_row, models.y_spec, time_points, models.n_z, x, y, z, &z_next, 0.0, -1);
        double y_hat = models.y_fit.coef.dot(y_row);
        if (models.outcome_pool.has_value())
            y = draw(*models.outcome_pool, y_hat, rng);
        else
            y = y_sd > 0.0 ? rng.normal(y_hat, y_sd) : y_hat;
        z = z_next;
    }
    return y;
}

namespace {

struct BaselineRecord {
    double y;
    const std::vector<double>* z;
    const std::vector<double>* x;
};

std::vector<BaselineRecord> eligible_baselines(const FittedGcompModels& models,
                                               const LongitudinalDataset& ds,
                                               const std::string& arm) {
    std::vector<BaselineRecord> base;
    for (const auto& p : ds.participants) {
        if (p.arm != arm) continue;
        const Observation* o = p.at_time(0);
        if (o == nullptr || o->missing) continue;
        if (o->z.size() != models.n_z) continue;
        base.push_back({o->y, &o->z, &p.x});
    }
    if (base.empty()) throw InputError("no eligible baseline records in arm '" + arm + "'");
    return base;
}

}  // namespace

CausalEstimate estimate(const FittedGcompModels& models, const LongitudinalDataset& ds,
                        const std::string& arm, long long R, SamplingMode mode,
                        std::uint64_t seed, int threads) {
    if (R < 1) throw InputError("Monte Carlo sample count must be >= 1");
    std::vector<BaselineRecord> base = eligible_baselines(models, ds, arm);
    std::vector<double> outcomes(static_cast<std::size_t>(R));
    parallel_for(R, threads, [&](std::int64_t r) {
        Rng rng = Rng::stream(seed, {stream_tag::trajectory, static_cast<std::uint64_t>(r)});
        const BaselineRecord& rec = base[rng.uniform_int(base.size())];
        outcomes[static_cast<std::size_t>(r)] = simulate_trajectory(
            models, rec.y, *rec.z, *rec.x, models.time_points, mode, rng);
    });
    CausalEstimate est;
    est.samples = R;
    est.seed = seed;
    est.mean = stable_sum(outcomes) / static_cast<double>(R);
    double ss = 0.0;
    for (double v : outcomes) ss += (v - est.mean) * (v - est.mean);
    est.outcome_variance = R > 1 ? ss / static_cast<double>(R - 1) : 0.0;
    return est;
}

CausalEstimate estimate_serial(const FittedGcompModels& models, const LongitudinalDataset& ds,
                               const std::string& arm, long long R, SamplingMode mode,
                               std::uint64_t seed) {
    return estimate(models, ds, arm, R, mode, seed, 1);
}

}  // namespace gcomp
