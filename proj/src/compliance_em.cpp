#include "gcomp/compliance_em.hpp"

#include <algorithm>
#include <cmath>

#include "gcomp/kv.hpp"

namespace gcomp {

namespace {

double logsumexp2(double a, double b) {
    double m = std::max(a, b);
    if (!std::isfinite(m)) return m;  // both -inf
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct EmWorkspace {
    DesignMatrix rho_design;
    DesignMatrix g_design;
    Eigen::VectorXd b;
};

DesignSpec make_g_spec(const EmOptions& opts) {
    DesignSpec s;
    s.current_y = true;
    s.current_z = true;
    s.lag_y = true;
    s.lag_z = true;
    s.x = true;
    s.ztrans = opts.ztrans;
    return s;
}

DesignSpec make_rho_spec(const EmOptions& opts) {
    DesignSpec s = make_g_spec(opts);
    s.time_dummies = opts.rho_time_dummies;
    return s;
}

EmWorkspace make_workspace(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                           const EmOptions& opts) {
    EmWorkspace ws;
    ws.g_design = build_design(ds, view, make_g_spec(opts));
    DesignSpec rho = make_rho_spec(opts);
    ws.rho_design = rho.time_dummies ? build_design(ds, view, rho) : ws.g_design;
    ws.b.resize(static_cast<Eigen::Index>(view.size()));
    for (std::size_t i = 0; i < view.size(); ++i) ws.b[static_cast<Eigen::Index>(i)] = view[i].cur->b;
    return ws;
}

double loglik_with(const MixtureModel& m, const EmWorkspace& ws) {
    Eigen::VectorXd eta = ws.rho_design.X * m.alpha;
    Eigen::VectorXd mu1 = ws.g_design.X * m.xi_c1.coef;
    Eigen::VectorXd mu0 = ws.g_design.X * m.xi_c0.coef;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < ws.b.size(); ++i) {
        double l1 = log_expit(eta[i]) + log_gaussian_density(ws.b[i], mu1[i], m.xi_c1.sigma2);
        double l0 = log_expit(-eta[i]) + log_gaussian_density(ws.b[i], mu0[i], m.xi_c0.sigma2);
        double term = logsumexp2(l1, l0);
        if (!std::isfinite(term)) throw NumericError("non-finite mixture density term");
        ll += term;
    }
    return ll;
}

Eigen::VectorXd e_step_with(const MixtureModel& m, const EmWorkspace& ws) {
    Eigen::VectorXd eta = ws.rho_design.X * m.alpha;
    Eigen::VectorXd mu1 = ws.g_design.X * m.xi_c1.coef;
    Eigen::VectorXd mu0 = ws.g_design.X * m.xi_c0.coef;
    Eigen::VectorXd w(ws.b.size());
    for (Eigen::Index i = 0; i < ws.b.size(); ++i) {
        double l1 = log_expit(eta[i]) + log_gaussian_density(ws.b[i], mu1[i], m.xi_c1.sigma2);
        double l0 = log_expit(-eta[i]) + log_gaussian_density(ws.b[i], mu0[i], m.xi_c0.sigma2);
        w[i] = std::exp(l1 - logsumexp2(l1, l0));
    }
    return w;
}

struct MStepOutcome {
    MixtureModel model;
    bool frozen = false;
    bool alpha_trouble = false;  // separation or non-convergence in IRLS
};

MStepOutcome m_step_with(const LongitudinalDataset& ds, const EmWorkspace& ws,
                         const Eigen::VectorXd& w, const EmOptions& opts,
                         const MixtureModel* prev) {
    MStepOutcome out;
    MixtureModel& m = out.model;
    m.g_spec = make_g_spec(opts);
    m.rho_spec = make_rho_spec(opts);
    m.time_points = ds.time_points;
    m.rho_labels = ws.rho_design.labels;
    m.g_labels = ws.g_design.labels;

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(w.size());
    LogisticOptions lopts;
    if (prev != nullptr) lopts.warm_start = &prev->alpha;
    LogisticFit rho_fit = fit_weighted_logistic(ws.rho_design, w, ones, lopts);
    m.alpha = rho_fit.coef;
    out.alpha_trouble = !rho_fit.converged;

    const double min_eff = static_cast<double>(ws.g_design.cols()) + 1.0;
    auto fit_component = [&](const Eigen::VectorXd& cw, const LinearFit* prev_fit) -> LinearFit {
        if (cw.sum() < min_eff) {
            if (prev_fit == nullptr)
                throw InputError("mixture component has effective weight " +
                                 std::to_string(cw.sum()) + ", too small to initialize");
            out.frozen = true;
            return *prev_fit;
        }
        LinearFit f = fit_weighted_linear(ws.g_design, ws.b, cw);
        f.sigma2 = std::max(f.sigma2, opts.sigma2_floor);
        return f;
    };
    m.xi_c1 = fit_component(w, prev != nullptr ? &prev->xi_c1 : nullptr);
    Eigen::VectorXd w0 = ones - w;
    m.xi_c0 = fit_component(w0, prev != nullptr ? &prev->xi_c0 : nullptr);
    return out;
}

/// Deterministic label convention: the compliant component carries the
/// lower biomarker intercept. Swapping components mirrors alpha.
void apply_label_convention(MixtureModel& m) {
    if (m.xi_c1.coef[0] > m.xi_c0.coef[0]) {
        std::swap(m.xi_c1, m.xi_c0);
        m.alpha = -m.alpha;
    }
}

}  // namespace

InitSpec parse_init_spec(const std::string& text) {
    InitSpec spec;
    if (text == "biomarker_split") {
        spec.mode = InitMode::biomarker_split;
        return spec;
    }
    const std::string thr = "threshold:";
    const std::string rnd = "random:";
    if (text.rfind(thr, 0) == 0) {
        spec.mode = InitMode::threshold;
        spec.threshold = parse_double(text.substr(thr.size()), "init threshold");
        return spec;
    }
    if (text.rfind(rnd, 0) == 0) {
        spec.mode = InitMode::random;
        spec.seed = static_cast<std::uint64_t>(
            parse_double(text.substr(rnd.size()), "init seed"));
        return spec;
    }
    throw InputError("unknown init strategy: " + text);
}

Eigen::VectorXd initial_weights(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                                const InitSpec& init) {
    (void)ds;
    if (view.empty()) throw InputError("estimation view is empty");
    Eigen::VectorXd w(static_cast<Eigen::Index>(view.size()));
    switch (init.mode) {
        case InitMode::biomarker_split: {
            std::vector<double> b;
            b.reserve(view.size());
            for (const auto& row : view) b.push_back(row.cur->b);
            std::vector<double> sorted(b);
            std::sort(sorted.begin(), sorted.end());
            std::size_t n = sorted.size();
            double median = (n % 2 == 1) ? sorted[n / 2]
                                         : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
            for (std::size_t i = 0; i < b.size(); ++i)
                w[static_cast<Eigen::Index>(i)] = b[i] < median ? 1.0 : 0.0;
            return w;
        }
        case InitMode::threshold: {
            for (std::size_t i = 0; i < view.size(); ++i)
                w[static_cast<Eigen::Index>(i)] = view[i].cur->b < init.threshold ? 1.0 : 0.0;
            return w;
        }
        case InitMode::random: {
            Rng rng = Rng::stream(init.seed, {stream_tag::init});
            for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 0.25 + 0.5 * rng.uniform01();
            return w;
        }
    }
    throw InputError("unknown init mode");
}

double observed_loglik(const MixtureModel& m, const LongitudinalDataset& ds,
                       const std::vector<ViewRow>& view) {
    EmOptions opts;
    opts.rho_time_dummies = m.rho_spec.time_dummies;
    opts.ztrans = m.g_spec.ztrans;
    return loglik_with(m, make_workspace(ds, view, opts));
}

Eigen::VectorXd e_step(const MixtureModel& m, const LongitudinalDataset& ds,
                       const std::vector<ViewRow>& view) {
    EmOptions opts;
    opts.rho_time_dummies = m.rho_spec.time_dummies;
    opts.ztrans = m.g_spec.ztrans;
    return e_step_with(m, make_workspace(ds, view, opts));
}

MixtureModel m_step(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                    const Eigen::VectorXd& w, const EmOptions& opts, const MixtureModel* prev) {
    if (w.size() != static_cast<Eigen::Index>(view.size()))
        throw InputError("weight vector does not match view size");
    if ((w.array() < 0.0).any() || (w.array() > 1.0).any())
        throw InputError("EM weights must lie in [0,1]");
    return m_step_with(ds, make_workspace(ds, view, opts), w, opts, prev).model;
}

namespace {

EmFitResult run_em(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                   MixtureModel model, bool init_frozen, bool init_alpha_trouble,
                   const EmOptions& opts) {
    EmWorkspace ws = make_workspace(ds, view, opts);
    EmFitResult out;
    EmTrace& trace = out.trace;
    double ll = loglik_with(model, ws);
    trace.loglik.push_back(ll);
    bool last_frozen = init_frozen;
    bool last_alpha_trouble = init_alpha_trouble;
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd w = e_step_with(model, ws);
        MStepOutcome step = m_step_with(ds, ws, w, opts, &model);
        model = std::move(step.model);
        double ll_new = loglik_with(model, ws);
        trace.loglik.push_back(ll_new);
        last_frozen = step.frozen;
        last_alpha_trouble = step.alpha_trouble;
        double rel = std::abs(ll_new - ll) / std::max(1.0, std::abs(ll));
        ll = ll_new;
        if (rel < opts.tol) {
            trace.converged = !last_frozen && !last_alpha_trouble;
            break;
        }
    }
    trace.iterations = static_cast<int>(trace.loglik.size()) - 1;
    apply_label_convention(model);
    out.model = std::move(model);
    return out;
}

}  // namespace

EmFitResult fit_em(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                   const Eigen::VectorXd& init_weights, const EmOptions& opts) {
    if (view.empty()) throw InputError("estimation view is empty");
    EmWorkspace ws = make_workspace(ds, view, opts);
    MStepOutcome first = m_step_with(ds, ws, init_weights, opts, nullptr);
    return run_em(ds, view, std::move(first.model), first.frozen, first.alpha_trouble, opts);
}

EmFitResult fit_em(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                   const InitSpec& init, const EmOptions& opts) {
    return fit_em(ds, view, initial_weights(ds, view, init), opts);
}

EmFitResult fit_em_warm(const LongitudinalDataset& ds, const std::vector<ViewRow>& view,
                        const MixtureModel& start, const EmOptions& opts) {
    if (view.empty()) throw InputError("estimation view is empty");
    return run_em(ds, view, start, false, false, opts);
}

double posterior_compliance(const MixtureModel& m, const LongitudinalDataset& ds,
                            int participant_index, int time) {
    const Participant& p = ds.participants.at(static_cast<std::size_t>(participant_index));
    const Observation* cur = p.at_time(time);
    if (cur == nullptr || time < 1) throw InputError("no post-baseline observation at that time");
    if (cur->d == 0) return 0.0;  // honest self-reported noncompliance
    if (cur->missing || cur->d < 0) throw InputError("posterior needs a non-missing self-report");
    const Observation* prev = p.at_time(time - 1);
    if (prev == nullptr || prev->missing) throw InputError("posterior needs a non-missing lag");

    ViewRow row{participant_index, time, cur, prev};
    Eigen::VectorXd rho_row = build_view_row(ds, row, m.rho_spec);
    Eigen::VectorXd g_row = build_view_row(ds, row, m.g_spec);
    double eta = m.alpha.dot(rho_row);
    double l1 = log_expit(eta) + log_gaussian_density(cur->b, m.xi_c1.coef.dot(g_row), m.xi_c1.sigma2);
    double l0 = log_expit(-eta) + log_gaussian_density(cur->b, m.xi_c0.coef.dot(g_row), m.xi_c0.sigma2);
    return std::exp(l1 - logsumexp2(l1, l0));
}

std::string export_mixture_model(const MixtureModel& m) {
    KvFile kv;
    kv.comment(" fitted compliance mixture model");
    kv.set("format", std::string("gcomp-mixture-v1"));
    kv.set("time_points", static_cast<std::int64_t>(m.time_points));
    kv.set("ztrans", ztransform_name(m.g_spec.ztrans));
    kv.set("rho_time_dummies", std::string(m.rho_spec.time_dummies ? "true" : "false"));
    kv.set("n_rho", static_cast<std::int64_t>(m.alpha.size()));
    kv.set("n_g", static_cast<std::int64_t>(m.xi_c1.coef.size()));
    for (Eigen::Index i = 0; i < m.alpha.size(); ++i) {
        kv.set("rho.label." + std::to_string(i), m.rho_labels.at(static_cast<std::size_t>(i)));
        kv.set("alpha." + std::to_string(i), m.alpha[i]);
    }
    for (Eigen::Index i = 0; i < m.xi_c1.coef.size(); ++i) {
        kv.set("g.label." + std::to_string(i), m.g_labels.at(static_cast<std::size_t>(i)));
        kv.set("xi1.coef." + std::to_string(i), m.xi_c1.coef[i]);
        kv.set("xi0.coef." + std::to_string(i), m.xi_c0.coef[i]);
    }
    kv.set("xi1.sigma2", m.xi_c1.sigma2);
    kv.set("xi0.sigma2", m.xi_c0.sigma2);
    kv.set("xi1.n_effective", m.xi_c1.n_effective);
    kv.set("xi0.n_effective", m.xi_c0.n_effective);
    return kv.to_text();
}

MixtureModel import_mixture_model(const std::string& text) {
    KvFile kv = KvFile::parse(text);
    if (kv.get("format") != "gcomp-mixture-v1")
        throw InputError("unsupported mixture model format: " + kv.get("format"));
    MixtureModel m;
    m.time_points = static_cast<int>(kv.get_int("time_points"));
    EmOptions opts;
    opts.ztrans = parse_ztransform(kv.get("ztrans"));
    opts.rho_time_dummies = kv.get_bool_or("rho_time_dummies", false);
    m.g_spec = make_g_spec(opts);
    m.rho_spec = make_rho_spec(opts);
    const auto n_rho = kv.get_int("n_rho");
    const auto n_g = kv.get_int("n_g");
    m.alpha.resize(n_rho);
    m.xi_c1.coef.resize(n_g);
    m.xi_c0.coef.resize(n_g);
    for (std::int64_t i = 0; i < n_rho; ++i) {
        m.rho_labels.push_back(kv.get("rho.label." + std::to_string(i)));
        m.alpha[i] = kv.get_double("alpha." + std::to_string(i));
    }
    for (std::int64_t i = 0; i < n_g; ++i) {
        m.g_labels.push_back(kv.get("g.label." + std::to_string(i)));
        m.xi_c1.coef[i] = kv.get_double("xi1.coef." + std::to_string(i));
        m.xi_c0.coef[i] = kv.get_double("xi0.coef." + std::to_string(i));
    }
    m.xi_c1.sigma2 = kv.get_double("xi1.sigma2");
    m.xi_c0.sigma2 = kv.get_double("xi0.sigma2");
    m.xi_c1.n_effective = kv.get_double("xi1.n_effective");
    m.xi_c0.n_effective = kv.get_double("xi0.n_effective");
    m.xi_c1.labels = m.g_labels;
    m.xi_c0.labels = m.g_labels;
    if (!(m.xi_c1.sigma2 > 0.0) || !(m.xi_c0.sigma2 > 0.0))
        throw InputError("imported mixture model has non-positive component variance");
    return m;
}

}  // namespace gcomp
