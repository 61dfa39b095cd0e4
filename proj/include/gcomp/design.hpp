#pragma once

#include <string>
#include <vector>

#include "gcomp/data_model.hpp"
#include "gcomp/glm.hpp"

namespace gcomp {

/// Transform applied to a z confounder wherever it enters a design as a
/// covariate (responses stay on the raw scale).
enum class ZTransform { identity, sqrt, log1p };

ZTransform parse_ztransform(const std::string& name);
std::string ztransform_name(ZTransform t);
double apply_ztransform(ZTransform t, double z);

/// Which blocks a conditional-model design uses. Column order is fixed:
/// intercept, time dummies (t = 2..K-1), current y, current z..., lag y,
/// lag z..., x... so fits and single-row predictions always line up.
struct DesignSpec {
    bool time_dummies = false;
    bool current_y = false;
    bool current_z = false;
    bool lag_y = true;
    bool lag_z = true;
    bool x = true;
    ZTransform ztrans = ZTransform::identity;
};

DesignMatrix build_design(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                          const DesignSpec& spec);

/// Single design row from simulated trajectory state. z_cur may be null when
/// the spec omits current z; time < 0 suppresses time dummies (they must be
/// disabled in the spec in that case).
Eigen::VectorXd build_state_row(const DesignSpec& spec, int time_points, std::size_t n_z,
                                const std::vector<double>& x, double y_lag,
                                const std::vector<double>& z_lag,
                                const std::vector<double>* z_cur, double y_cur, int time);

/// In-place variant for hot loops; row must already have the right size.
void fill_state_row(Eigen::VectorXd& row, const DesignSpec& spec, int time_points,
                    std::size_t n_z, const std::vector<double>& x, double y_lag,
                    const std::vector<double>& z_lag, const std::vector<double>* z_cur,
                    double y_cur, int time);

std::size_t design_width(const DesignSpec& spec, int time_points, std::size_t n_z,
                         std::size_t n_x);

/// Extract the vector a fit needs for one view row (used by single-row
/// posterior evaluation).
Eigen::VectorXd build_view_row(const LongitudinalDataset& ds, const ViewRow& row,
                               const DesignSpec& spec);

std::vector<std::string> design_labels(const LongitudinalDataset& ds, const DesignSpec& spec);

}  // namespace gcomp
