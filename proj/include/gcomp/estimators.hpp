#pragma once

#include <string>
#include <vector>

#include "gcomp/compliance_em.hpp"
#include "gcomp/data_model.hpp"
#include "gcomp/design.hpp"
#include "gcomp/glm.hpp"

namespace gcomp {

struct IttResult {
    double mean_a = 0.0;   // complete-case terminal mean, arm a
    double mean_ref = 0.0; // arm a'
    double difference = 0.0;
    std::size_t n_a = 0;
    std::size_t n_ref = 0;
};

/// Complete-case difference of terminal outcome means by randomized arm.
IttResult itt(const LongitudinalDataset& ds, const std::string& arm,
              const std::string& ref_arm);

/// Terminal outcome mean among participants who self-reported compliance at
/// every post-baseline time point and have a non-missing terminal outcome.
double per_protocol(const LongitudinalDataset& ds, const std::string& arm);

/// Joint biomarker-outcome mixture: logistic compliance model omega (current
/// outcome excluded from its design), Gaussian biomarker components (g) and
/// outcome components (h) for the compliant/noncompliant states.
struct EmRegModel {
    Eigen::VectorXd delta;
    LinearFit g_c1, g_c0;
    LinearFit h_c1, h_c0;
    DesignSpec omega_spec;
    DesignSpec g_spec;
    DesignSpec h_spec;
    int time_points = 0;
};

struct EmRegFitResult {
    EmRegModel model;
    EmTrace trace;
};

double em_reg_observed_loglik(const EmRegModel& m, const LongitudinalDataset& ds,
                              const std::vector<ViewRow>& view);

Eigen::VectorXd em_reg_e_step(const EmRegModel& m, const LongitudinalDataset& ds,
                              const std::vector<ViewRow>& view);

EmRegFitResult fit_em_reg(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                          const InitSpec& init, const EmOptions& opts = {});

EmRegFitResult fit_em_reg(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                          const Eigen::VectorXd& init_weights, const EmOptions& opts = {});

/// Average of the fitted compliant-component outcome mean over participants
/// contributing a final-time-point view element.
double em_reg_estimate(const EmRegModel& m, const LongitudinalDataset& ds,
                       const std::string& arm);

}  // namespace gcomp
