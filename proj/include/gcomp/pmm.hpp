#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gcomp/data_model.hpp"
#include "gcomp/glm.hpp"
#include "gcomp/rng.hpp"

namespace gcomp {

/// Donor pool for one confounder: observed values paired with their fitted
/// predicted means, pooled across all post-baseline time points of the
/// estimation view and sorted by predicted mean. Draws return observed
/// values only, so generated confounders always stay inside the observed
/// support.
struct DonorPool {
    struct Entry {
        double pred;
        double value;
    };
    std::vector<Entry> entries;  // ascending by pred
    int k = 5;
};

/// Entries come from view rows whose weight exceeds donor_floor (0.5):
/// posterior weights become hard donor assignments, indicator weights pass
/// through unchanged.
DonorPool build_pool(const LinearFit& fit, const DesignMatrix& design,
                     const std::vector<double>& observed, const Eigen::VectorXd& weights,
                     int k = 5, const Bounds* bounds = nullptr);

/// Candidate index range [first, last) covering the k nearest predicted
/// means, extended to include every entry tied with the k-th distance.
std::pair<std::size_t, std::size_t> candidate_range(const DonorPool& pool, double z_hat);

/// Uniform draw of an observed value among the candidates.
double draw(const DonorPool& pool, double z_hat, Rng& rng);

}  // namespace gcomp
