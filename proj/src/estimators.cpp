#include "gcomp/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace gcomp {

namespace {

double logsumexp2(double a, double b) {
    double m = std::max(a, b);
    if (!std::isfinite(m)) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double terminal_mean(const LongitudinalDataset& ds, const std::string& arm, bool pp_only,
                     std::size_t* count_out) {
    double sum = 0.0;
    std::size_t n = 0;
    const int last = ds.time_points - 1;
    for (const auto& p : ds.participants) {
        if (p.arm != arm) continue;
        const Observation* terminal = p.at_time(last);
        if (terminal == nullptr || terminal->missing || is_absent(terminal->y)) continue;
        if (pp_only) {
            bool full = true;
            for (int t = 1; t <= last; ++t) {
                const Observation* o = p.at_time(t);
                if (o == nullptr || o->d != 1) full = false;
            }
            if (!full) continue;
        }
        sum += terminal->y;
        ++n;
    }
    if (count_out != nullptr) *count_out = n;
    if (n == 0)
        throw InputError(pp_only ? "no fully self-reported-compliant participants in arm '" + arm + "'"
                                 : "no complete cases in arm '" + arm + "'");
    return sum / static_cast<double>(n);
}

}  // namespace

IttResult itt(const LongitudinalDataset& ds, const std::string& arm, const std::string& ref_arm) {
    if (arm == ref_arm) throw InputError("itt needs two distinct arms");
    IttResult r;
    r.mean_a = terminal_mean(ds, arm, false, &r.n_a);
    r.mean_ref = terminal_mean(ds, ref_arm, false, &r.n_ref);
    r.difference = r.mean_a - r.mean_ref;
    return r;
}

double per_protocol(const LongitudinalDataset& ds, const std::string& arm) {
    return terminal_mean(ds, arm, true, nullptr);
}

namespace {

struct EmRegWorkspace {
    DesignMatrix omega_design;
    DesignMatrix g_design;
    DesignMatrix h_design;
    Eigen::VectorXd b;
    Eigen::VectorXd y;
};

DesignSpec emreg_g_spec(const EmOptions& opts) {
    DesignSpec s;
    s.current_y = true;
    s.current_z = true;
    s.ztrans = opts.ztrans;
    return s;
}

DesignSpec emreg_h_spec(const EmOptions& opts) {
    DesignSpec s;
    s.current_z = true;
    s.ztrans = opts.ztrans;
    return s;
}

DesignSpec emreg_omega_spec(const EmOptions& opts) {
    DesignSpec s = emreg_h_spec(opts);  // current z, lag state, x; no current y
    s.time_dummies = opts.rho_time_dummies;
    return s;
}

EmRegWorkspace make_workspace(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                              const EmOptions& opts) {
    EmRegWorkspace ws;
    ws.omega_design = build_design(ds, view, emreg_omega_spec(opts));
    ws.g_design = build_design(ds, view, emreg_g_spec(opts));
    ws.h_design = build_design(ds, view, emreg_h_spec(opts));
    ws.b.resize(static_cast<Eigen::Index>(view.size()));
    ws.y.resize(static_cast<Eigen::Index>(view.size()));
    for (std::size_t i = 0; i < view.size(); ++i) {
        ws.b[static_cast<Eigen::Index>(i)] = view[i].cur->b;
        ws.y[static_cast<Eigen::Index>(i)] = view[i].cur->y;
    }
    return ws;
}

void component_logliks(const EmRegModel& m, const EmRegWorkspace& ws, Eigen::Index i,
                       double eta, double& l1, double& l0) {
    l1 = log_expit(eta) +
         log_gaussian_density(ws.b[i], m.g_c1.coef.dot(ws.g_design.X.row(i)), m.g_c1.sigma2) +
         log_gaussian_density(ws.y[i], m.h_c1.coef.dot(ws.h_design.X.row(i)), m.h_c1.sigma2);
    l0 = log_expit(-eta) +
         log_gaussian_density(ws.b[i], m.g_c0.coef.dot(ws.g_design.X.row(i)), m.g_c0.sigma2) +
         log_gaussian_density(ws.y[i], m.h_c0.coef.dot(ws.h_design.X.row(i)), m.h_c0.sigma2);
}

double loglik_with(const EmRegModel& m, const EmRegWorkspace& ws) {
    Eigen::VectorXd eta = ws.omega_design.X * m.delta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < ws.b.size(); ++i) {
        double l1, l0;
        component_logliks(m, ws, i, eta[i], l1, l0);
        double term = logsumexp2(l1, l0);
        if (!std::isfinite(term)) throw NumericError("non-finite joint mixture term");
        ll += term;
    }
    return ll;
}

Eigen::VectorXd e_step_with(const EmRegModel& m, const EmRegWorkspace& ws) {
    Eigen::VectorXd eta = ws.omega_design.X * m.delta;
    Eigen::VectorXd w(ws.b.size());
    for (Eigen::Index i = 0; i < ws.b.size(); ++i) {
        double l1, l0;
        component_logliks(m, ws, i, eta[i], l1, l0);
        w[i] = std::exp(l1 - logsumexp2(l1, l0));
    }
    return w;
}

struct MStepOutcome {
    EmRegModel model;
    bool frozen = false;
    bool delta_trouble = false;
};

MStepOutcome m_step_with(const LongitudinalDataset& ds, const EmRegWorkspace& ws,
                         const Eigen::VectorXd& w, const EmOptions& opts,
                         const EmRegModel* prev) {
    MStepOutcome out;
    EmRegModel& m = out.model;
    m.omega_spec = emreg_omega_spec(opts);
    m.g_spec = emreg_g_spec(opts);
    m.h_spec = emreg_h_spec(opts);
    m.time_points = ds.time_points;

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(w.size());
    LogisticOptions lopts;
    if (prev != nullptr) lopts.warm_start = &prev->delta;
    LogisticFit delta_fit = fit_weighted_logistic(ws.omega_design, w, ones, lopts);
    m.delta = delta_fit.coef;
    out.delta_trouble = !delta_fit.converged;

    auto fit_component = [&](const DesignMatrix& design, const Eigen::VectorXd& resp,
                             const Eigen::VectorXd& cw, const LinearFit* prev_fit) -> LinearFit {
        if (cw.sum() < static_cast<double>(design.cols()) + 1.0) {
            if (prev_fit == nullptr)
                throw InputError("joint mixture component has too little effective weight");
            out.frozen = true;
            return *prev_fit;
        }
        LinearFit f = fit_weighted_linear(design, resp, cw);
        f.sigma2 = std::max(f.sigma2, opts.sigma2_floor);
        return f;
    };
    Eigen::VectorXd w0 = ones - w;
    m.g_c1 = fit_component(ws.g_design, ws.b, w, prev != nullptr ? &prev->g_c1 : nullptr);
    m.g_c0 = fit_component(ws.g_design, ws.b, w0, prev != nullptr ? &prev->g_c0 : nullptr);
    m.h_c1 = fit_component(ws.h_design, ws.y, w, prev != nullptr ? &prev->h_c1 : nullptr);
    m.h_c0 = fit_component(ws.h_design, ws.y, w0, prev != nullptr ? &prev->h_c0 : nullptr);
    return out;
}

void apply_label_convention(EmRegModel& m) {
    if (m.g_c1.coef[0] > m.g_c0.coef[0]) {
        std::swap(m.g_c1, m.g_c0);
        std::swap(m.h_c1, m.h_c0);
        m.delta = -m.delta;
    }
}

}  // namespace

double em_reg_observed_loglik(const EmRegModel& m, const LongitudinalDataset& ds,
                              const std::vector<ViewRow>& view) {
    EmOptions opts;
    opts.ztrans = m.g_spec.ztrans;
    opts.rho_time_dummies = m.omega_spec.time_dummies;
    return loglik_with(m, make_workspace(ds, view, opts));
}

Eigen::VectorXd em_reg_e_step(const EmRegModel& m, const LongitudinalDataset& ds,
                              const std::vector<ViewRow>& view) {
    EmOptions opts;
    opts.ztrans = m.g_spec.ztrans;
    opts.rho_time_dummies = m.omega_spec.time_dummies;
    return e_step_with(m, make_workspace(ds, view, opts));
}

EmRegFitResult fit_em_reg(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                          const Eigen::VectorXd& init_weights, const EmOptions& opts) {
    if (view.empty()) throw InputError("estimation view is empty");
    EmRegWorkspace ws = make_workspace(ds, view, opts);
    MStepOutcome step = m_step_with(ds, ws, init_weights, opts, nullptr);
    EmRegFitResult out;
    EmRegModel model = std::move(step.model);
    double ll = loglik_with(model, ws);
    out.trace.loglik.push_back(ll);
    bool last_frozen = step.frozen;
    bool last_trouble = step.delta_trouble;
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd w = e_step_with(model, ws);
        MStepOutcome next = m_step_with(ds, ws, w, opts, &model);
        model = std::move(next.model);
        double ll_new = loglik_with(model, ws);
        out.trace.loglik.push_back(ll_new);
        last_frozen = next.frozen;
        last_trouble = next.delta_trouble;
        double rel = std::abs(ll_new - ll) / std::max(1.0, std::abs(ll));
        ll = ll_new;
        if (rel < opts.tol) {
            out.trace.converged = !last_frozen && !last_trouble;
            break;
        }
    }
    out.trace.iterations = static_cast<int>(out.trace.loglik.size()) - 1;
    apply_label_convention(model);
    out.model = std::move(model);
    return out;
}

EmRegFitResult fit_em_reg(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                          const InitSpec& init, const EmOptions& opts) {
    return fit_em_reg(ds, view, initial_weights(ds, view, init), opts);
}

double em_reg_estimate(const EmRegModel& m, const LongitudinalDataset& ds,
                       const std::string& arm) {
    const int last = ds.time_points - 1;
    std::vector<ViewRow> final_rows;
    for (const auto& row : estimation_view(ds, arm))
        if (row.time == last) final_rows.push_back(row);
    if (final_rows.empty())
        throw InputError("no final-time-point view elements in arm '" + arm + "'");
    DesignMatrix h_design = build_design(ds, final_rows, m.h_spec);
    Eigen::VectorXd mean = h_design.X * m.h_c1.coef;
    return mean.mean();
}

}  // namespace gcomp
