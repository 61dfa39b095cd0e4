#include "gcomp/glm.hpp"

#include <algorithm>
#include <cmath>

namespace gcomp {

namespace {

constexpr double kSeparationThreshold = 30.0;
constexpr double kIrlsWeightFloor = 1e-10;

void check_inputs(const DesignMatrix& design, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& w) {
    if (y.size() != design.rows() || w.size() != design.rows())
        throw InputError("response/weight length does not match design rows");
    if ((w.array() < 0.0).any()) throw InputError("negative weights are not allowed");
    if (!design.X.allFinite()) throw InputError("design matrix has non-finite entries");
    if (!y.allFinite()) throw InputError("response has non-finite entries");
}

std::string collinear_column_message(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                                     const std::vector<std::string>& labels) {
    const Eigen::Index rank = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    std::string msg = "rank-deficient design; dependent columns:";
    for (Eigen::Index k = rank; k < perm.size(); ++k) {
        Eigen::Index col = perm[k];
        msg += " ";
        msg += (col < static_cast<Eigen::Index>(labels.size())) ? labels[col]
                                                                : ("#" + std::to_string(col));
    }
    return msg;
}

/// Weighted least squares via QR of the sqrt(w)-scaled system.
Eigen::VectorXd wls_solve(const DesignMatrix& design, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w) {
    Eigen::VectorXd sw = w.array().sqrt();
    Eigen::MatrixXd Xs = sw.asDiagonal() * design.X;
    Eigen::VectorXd ys = sw.array() * y.array();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    if (qr.rank() < design.cols())
        throw NumericError(collinear_column_message(qr, design.labels));
    return qr.solve(ys);
}

}  // namespace

LinearFit fit_weighted_linear(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& w) {
    check_inputs(design, y, w);
    const double wsum = w.sum();
    if (!(wsum > static_cast<double>(design.cols())))
        throw InsufficientWeightError("effective sample " + std::to_string(wsum) +
                                      " too small for " + std::to_string(design.cols()) +
                                      " coefficients");
    LinearFit fit;
    fit.coef = wls_solve(design, y, w);
    Eigen::VectorXd resid = y - design.X * fit.coef;
    fit.sigma2 = (w.array() * resid.array().square()).sum() / wsum;
    fit.n_effective = wsum;
    fit.labels = design.labels;
    return fit;
}

double logistic_loglik(const DesignMatrix& design, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = design.X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += w[i] * (y[i] * eta[i] - softplus(eta[i]));
    return ll;
}

LogisticFit fit_weighted_logistic(const DesignMatrix& design, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, const LogisticOptions& opts) {
    check_inputs(design, y, w);
    if ((y.array() < 0.0).any() || (y.array() > 1.0).any())
        throw InputError("logistic responses must lie in [0,1]");
    const double wsum = w.sum();
    if (!(wsum > static_cast<double>(design.cols())))
        throw InsufficientWeightError("effective sample " + std::to_string(wsum) +
                                      " too small for " + std::to_string(design.cols()) +
                                      " coefficients");

    // Column scales for the separation check; constant columns get scale 1.
    Eigen::VectorXd scale(design.cols());
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        double mean = design.X.col(j).mean();
        double var = (design.X.col(j).array() - mean).square().sum() /
                     std::max<double>(1.0, static_cast<double>(design.rows()));
        scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    LogisticFit fit;
    fit.labels = design.labels;
    fit.coef = (opts.warm_start != nullptr && opts.warm_start->size() == design.cols())
                   ? *opts.warm_start
                   : Eigen::VectorXd::Zero(design.cols());

    double ll = logistic_loglik(design, y, w, fit.coef);
    DesignMatrix work{design.X, design.labels};
    for (fit.iterations = 0; fit.iterations < opts.max_iter; ++fit.iterations) {
        Eigen::VectorXd eta = design.X * fit.coef;
        Eigen::VectorXd p(eta.size()), v(eta.size()), zresp(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            p[i] = expit(eta[i]);
            double pq = std::max(p[i] * (1.0 - p[i]), kIrlsWeightFloor);
            v[i] = w[i] * pq;
            zresp[i] = eta[i] + (y[i] - p[i]) / pq;
        }
        Eigen::VectorXd next = wls_solve(work, zresp, v);

        // Step-halving: the Newton step can overshoot on fractional responses.
        Eigen::VectorXd direction = next - fit.coef;
        double step = 1.0;
        Eigen::VectorXd cand = next;
        double ll_new = logistic_loglik(design, y, w, cand);
        int halvings = 0;
        while (ll_new < ll - 1e-12 && halvings < 50) {
            step *= 0.5;
            cand = fit.coef + step * direction;
            ll_new = logistic_loglik(design, y, w, cand);
            ++halvings;
        }
        double delta = (cand - fit.coef).cwiseAbs().maxCoeff();
        fit.coef = cand;
        ll = ll_new;

        double max_std_coef = (fit.coef.array() * scale.array()).abs().maxCoeff();
        if (max_std_coef > kSeparationThreshold) {
            fit.separation = true;
            fit.converged = false;
            ++fit.iterations;
            return fit;
        }
        if (delta < opts.tol) {
            fit.converged = true;
            ++fit.iterations;
            return fit;
        }
    }
    fit.converged = false;
    return fit;
}

Eigen::VectorXd predict(const LinearFit& fit, const DesignMatrix& design) {
    if (design.cols() != fit.coef.size())
        throw InputError("predict: design has " + std::to_string(design.cols()) +
                         " columns, fit has " + std::to_string(fit.coef.size()));
    return design.X * fit.coef;
}

Eigen::VectorXd predict(const LogisticFit& fit, const DesignMatrix& design) {
    if (design.cols() != fit.coef.size())
        throw InputError("predict: design has " + std::to_string(design.cols()) +
                         " columns, fit has " + std::to_string(fit.coef.size()));
    Eigen::VectorXd eta = design.X * fit.coef;
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = expit(eta[i]);
    return eta;
}

double predict_row(const LinearFit& fit, const Eigen::VectorXd& row) {
    if (row.size() != fit.coef.size()) throw InputError("predict_row: dimension mismatch");
    return fit.coef.dot(row);
}

double gaussian_density(double y, double mean, double sigma2) {
    return std::exp(log_gaussian_density(y, mean, sigma2));
}

double log_gaussian_density(double y, double mean, double sigma2) {
    if (!(sigma2 > 0.0)) throw NumericError("gaussian density needs sigma2 > 0");
    const double r = y - mean;
    return -0.5 * (std::log(2.0 * M_PI * sigma2) + r * r / sigma2);
}

}  // namespace gcomp
