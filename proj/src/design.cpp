#include "gcomp/design.hpp"

#include <cmath>

namespace gcomp {

ZTransform parse_ztransform(const std::string& name) {
    if (name == "identity") return ZTransform::identity;
    if (name == "sqrt") return ZTransform::sqrt;
    if (name == "log1p") return ZTransform::log1p;
    throw InputError("unknown z transform: " + name);
}

std::string ztransform_name(ZTransform t) {
    switch (t) {
        case ZTransform::identity: return "identity";
        case ZTransform::sqrt: return "sqrt";
        case ZTransform::log1p: return "log1p";
    }
    return "identity";
}

double apply_ztransform(ZTransform t, double z) {
    switch (t) {
        case ZTransform::identity: return z;
        case ZTransform::sqrt:
            if (z < 0.0) throw NumericError("sqrt transform applied to negative value");
            return std::sqrt(z);
        case ZTransform::log1p:
            if (z <= -1.0) throw NumericError("log1p transform applied to value <= -1");
            return std::log1p(z);
    }
    return z;
}

namespace {

template <class Emit>
void for_each_column(const LongitudinalDataset& ds, const DesignSpec& spec, Emit&& emit) {
    emit("(intercept)");
    if (spec.time_dummies)
        for (int t = 2; t < ds.time_points; ++t) emit("t=" + std::to_string(t));
    if (spec.current_y) emit("y");
    if (spec.current_z)
        for (const auto& zn : ds.z_names) emit("z:" + zn);
    if (spec.lag_y) emit("y_lag");
    if (spec.lag_z)
        for (const auto& zn : ds.z_names) emit("z_lag:" + zn);
    if (spec.x)
        for (const auto& xn : ds.x_names) emit("x:" + xn);
}

}  // namespace

std::vector<std::string> design_labels(const LongitudinalDataset& ds, const DesignSpec& spec) {
    std::vector<std::string> labels;
    for_each_column(ds, spec, [&](const std::string& name) { labels.push_back(name); });
    return labels;
}

DesignMatrix build_design(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                          const DesignSpec& spec) {
    DesignMatrix dm;
    dm.labels = design_labels(ds, spec);
    dm.X.resize(static_cast<Eigen::Index>(view.size()), static_cast<Eigen::Index>(dm.labels.size()));
    for (std::size_t i = 0; i < view.size(); ++i) {
        Eigen::VectorXd row = build_view_row(ds, view[i], spec);
        dm.X.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return dm;
}

Eigen::VectorXd build_view_row(const LongitudinalDataset& ds, const ViewRow& row,
                               const DesignSpec& spec) {
    const Participant& p = ds.participants[row.participant];
    std::vector<double> z_cur(row.cur->z);
    return build_state_row(spec, ds.time_points, ds.z_names.size(), p.x, row.prev->y,
                           row.prev->z, spec.current_z ? &z_cur : nullptr, row.cur->y, row.time);
}

std::size_t design_width(const DesignSpec& spec, int time_points, std::size_t n_z,
                         std::size_t n_x) {
    std::size_t cols = 1;
    if (spec.time_dummies) cols += static_cast<std::size_t>(std::max(0, time_points - 2));
    if (spec.current_y) cols += 1;
    if (spec.current_z) cols += n_z;
    if (spec.lag_y) cols += 1;
    if (spec.lag_z) cols += n_z;
    if (spec.x) cols += n_x;
    return cols;
}

Eigen::VectorXd build_state_row(const DesignSpec& spec, int time_points, std::size_t n_z,
                                const std::vector<double>& x, double y_lag,
                                const std::vector<double>& z_lag,
                                const std::vector<double>* z_cur, double y_cur, int time) {
    Eigen::VectorXd row(
        static_cast<Eigen::Index>(design_width(spec, time_points, n_z, x.size())));
    fill_state_row(row, spec, time_points, n_z, x, y_lag, z_lag, z_cur, y_cur, time);
    return row;
}

void fill_state_row(Eigen::VectorXd& row, const DesignSpec& spec, int time_points,
                    std::size_t n_z, const std::vector<double>& x, double y_lag,
                    const std::vector<double>& z_lag, const std::vector<double>* z_cur,
                    double y_cur, int time) {
    if (row.size() != static_cast<Eigen::Index>(design_width(spec, time_points, n_z, x.size())))
        throw InputError("design row buffer has the wrong size");
    Eigen::Index k = 0;
    row[k++] = 1.0;
    if (spec.time_dummies) {
        if (time < 0) throw InputError("time dummies requested without a time index");
        for (int t = 2; t < time_points; ++t) row[k++] = (time == t) ? 1.0 : 0.0;
    }
    if (spec.current_y) row[k++] = y_cur;
    if (spec.current_z) {
        if (z_cur == nullptr || z_cur->size() != n_z)
            throw InputError("design row needs current z values");
        for (double zv : *z_cur) row[k++] = apply_ztransform(spec.ztrans, zv);
    }
    if (spec.lag_y) row[k++] = y_lag;
    if (spec.lag_z) {
        if (z_lag.size() != n_z) throw InputError("design row needs lagged z values");
        for (double zv : z_lag) row[k++] = apply_ztransform(spec.ztrans, zv);
    }
    if (spec.x)
        for (double xv : x) row[k++] = xv;
}

}  // namespace gcomp
