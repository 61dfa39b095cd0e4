#include "gcomp/pmm.hpp"

#include <algorithm>
#include <cmath>

namespace gcomp {

namespace {
constexpr double kDonorFloor = 0.5;
}

DonorPool build_pool(const LinearFit& fit, const DesignMatrix& design,
                     const std::vector<double>& observed, const Eigen::VectorXd& weights,
                     int k, const Bounds* bounds) {
    if (design.rows() != static_cast<Eigen::Index>(observed.size()) ||
        design.rows() != weights.size())
        throw InputError("donor pool inputs are misaligned");
    if (k < 1) throw InputError("donor candidate count must be >= 1");
    Eigen::VectorXd pred = predict(fit, design);
    DonorPool pool;
    pool.k = k;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        if (!(weights[i] > kDonorFloor)) continue;
        double value = observed[static_cast<std::size_t>(i)];
        if (bounds != nullptr && (value < bounds->lo || value > bounds->hi))
            throw InputError("observed donor value " + std::to_string(value) +
                             " outside declared bounds");
        pool.entries.push_back({pred[i], value});
    }
    if (pool.entries.empty()) throw InputError("donor pool is empty after weight filtering");
    std::sort(pool.entries.begin(), pool.entries.end(),
              [](const DonorPool::Entry& a, const DonorPool::Entry& b) {
                  return a.pred != b.pred ? a.pred < b.pred : a.value < b.value;
              });
    return pool;
}

std::pair<std::size_t, std::size_t> candidate_range(const DonorPool& pool, double z_hat) {
    const auto& e = pool.entries;
    if (e.empty()) throw InputError("draw from empty donor pool");
    const std::size_t n = e.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(pool.k), n);

    // Binary search for the insertion point, then grow a window outward,
    // always absorbing the closer side first.
    std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(e.begin(), e.end(), z_hat,
                         [](const DonorPool::Entry& a, double v) { return a.pred < v; }) -
        e.begin());
    std::size_t lo = hi;
    auto dist = [&](std::size_t i) { return std::abs(e[i].pred - z_hat); };
    while (hi - lo < k) {
        if (lo == 0) {
            ++hi;
        } else if (hi == n) {
            --lo;
        } else if (dist(lo - 1) <= dist(hi)) {
            --lo;
        } else {
            ++hi;
        }
    }
    // Extend across ties with the k-th smallest distance.
    double kth = 0.0;
    for (std::size_t i = lo; i < hi; ++i) kth = std::max(kth, dist(i));
    while (lo > 0 && dist(lo - 1) == kth) --lo;
    while (hi < n && dist(hi) == kth) ++hi;
    return {lo, hi};
}

double draw(const DonorPool& pool, double z_hat, Rng& rng) {
    auto [lo, hi] = candidate_range(pool, z_hat);
    std::size_t pick = lo + static_cast<std::size_t>(rng.uniform_int(hi - lo));
    return pool.entries[pick].value;
}

}  // namespace gcomp
