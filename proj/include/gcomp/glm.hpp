#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gcomp/errors.hpp"

namespace gcomp {

struct DesignMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> labels;

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index cols() const { return X.cols(); }
};

/// Weighted Gaussian ML fit. sigma2 is the weight-normalized MLE
/// sum(w r^2) / sum(w), not the degrees-of-freedom-corrected estimator:
/// the EM M-step maximizes the complete-data likelihood, and downstream
/// density evaluations need exactly that value.
struct LinearFit {
    Eigen::VectorXd coef;
    double sigma2 = 0.0;
    double n_effective = 0.0;
    std::vector<std::string> labels;
};

struct LogisticFit {
    Eigen::VectorXd coef;
    bool converged = false;
    bool separation = false;
    int iterations = 0;
    std::vector<std::string> labels;
};

struct LogisticOptions {
    double tol = 1e-8;    // max absolute coefficient change
    int max_iter = 100;
    const Eigen::VectorXd* warm_start = nullptr;
};

/// Solves the weighted normal equations by column-pivoted QR. Throws
/// NumericError naming the collinear columns on rank deficiency, and
/// InsufficientWeightError when sum(w) <= #columns.
LinearFit fit_weighted_linear(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& w);

/// IRLS for the weighted Bernoulli likelihood with responses in [0,1]
/// (fractional responses carry EM soft labels). Step-halving keeps the
/// objective non-decreasing. Complete separation (any standardized
/// coefficient beyond 30) stops the fit with converged = false.
LogisticFit fit_weighted_logistic(const DesignMatrix& design, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, const LogisticOptions& opts = {});

Eigen::VectorXd predict(const LinearFit& fit, const DesignMatrix& design);
Eigen::VectorXd predict(const LogisticFit& fit, const DesignMatrix& design);
double predict_row(const LinearFit& fit, const Eigen::VectorXd& row);

/// Weighted Bernoulli log-likelihood at coefficients beta (stable form).
double logistic_loglik(const DesignMatrix& design, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, const Eigen::VectorXd& beta);

double gaussian_density(double y, double mean, double sigma2);
double log_gaussian_density(double y, double mean, double sigma2);

inline double expit(double eta) {
    return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

/// log(1 + exp(eta)) without overflow.
inline double softplus(double eta) {
    return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

inline double log_expit(double eta) { return -softplus(-eta); }

}  // namespace gcomp
