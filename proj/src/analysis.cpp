#include "alertlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Cholesky>

namespace alertlab {

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete beta: shape parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // Continued fraction (modified Lentz), applied on the side where it converges fast.
    auto fraction = [](double a, double b, double x) {
        constexpr double tiny = 1e-300;
        double c = 1.0;
        double d = 1.0 - (a + b) * x / (a + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 10000; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < 1e-16) break;
        }
        return h;
    };
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * fraction(a, b, x) / a;
    return 1.0 - front * fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw ValidationError("student t: degrees of freedom must be positive");
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    return std::clamp(regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)), 0.0, 1.0);
}

double student_t_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("student t quantile: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    const double upper = p > 0.5 ? 1.0 - p : p;  // one-sided tail mass
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_two_sided_p(hi, dof) / 2.0 > upper) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_two_sided_p(mid, dof) / 2.0 > upper) lo = mid;
        else hi = mid;
    }
    const double q = 0.5 * (lo + hi);
    return p > 0.5 ? q : -q;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    constexpr double pi = std::numbers::pi;
    if (lambda < 1.18) {
        // Theta-function form, accurate for small arguments.
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi * pi / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_gof(std::span<const double> fitted, std::span<const double> observed) {
    if (fitted.empty() || observed.empty()) throw ValidationError("ks_gof: both samples must be non-empty");
    std::vector<double> a(fitted.begin(), fitted.end());
    std::vector<double> b(observed.begin(), observed.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.stat = d;
    r.p = kolmogorov_survival(std::sqrt(na * nb / (na + nb)) * d);
    return r;
}

std::vector<double> variance_inflation(const Eigen::MatrixXd& x) {
    const Eigen::Index p = x.cols();
    std::vector<double> vif(static_cast<std::size_t>(p), 1.0);
    if (p < 2) return vif;
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::MatrixXd others(x.rows(), p - 1);
        others << x.leftCols(j), x.rightCols(p - j - 1);
        Eigen::MatrixXd a(x.rows(), p);
        a.col(0).setOnes();
        a.rightCols(p - 1) = others;
        const Eigen::VectorXd target = x.col(j);
        const Eigen::VectorXd resid = target - a * a.colPivHouseholderQr().solve(target);
        const double ss_tot = (target.array() - target.mean()).square().sum();
        const double ss_res = resid.squaredNorm();
        if (ss_tot <= 0.0) {
            vif[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double unexplained = ss_res / ss_tot;
        vif[static_cast<std::size_t>(j)] =
            unexplained <= 1e-14 ? std::numeric_limits<double>::infinity() : 1.0 / unexplained;
    }
    return vif;
}

VifPruneResult vif_prune(const DesignMatrix& m, double threshold) {
    m.validate();
    VifPruneResult r{m, {}};
    while (r.matrix.cols() >= 2) {
        const auto vif = variance_inflation(r.matrix.x);
        std::size_t worst = 0;
        for (std::size_t j = 1; j < vif.size(); ++j) {
            if (vif[j] >= vif[worst]) worst = j;
        }
        if (!(vif[worst] > threshold)) break;
        r.dropped.emplace_back(r.matrix.names[worst], vif[worst]);
        const Eigen::Index w = static_cast<Eigen::Index>(worst);
        const Eigen::Index p = r.matrix.cols();
        Eigen::MatrixXd kept(r.matrix.rows(), p - 1);
        kept << r.matrix.x.leftCols(w), r.matrix.x.rightCols(p - w - 1);
        r.matrix.x = std::move(kept);
        r.matrix.names.erase(r.matrix.names.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    return r;
}

const Coefficient& RegressionResult::term(const std::string& name) const {
    for (const auto& c : terms) {
        if (c.term == name) return c;
    }
    throw ValidationError("regression has no term '" + name + "'");
}

namespace {

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd aw = sw.asDiagonal() * a;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aw);
    if (qr.rank() < a.cols()) throw ComputeError("robust_fit: weighted normal equations are singular");
    return qr.solve(sw.asDiagonal() * y);
}

}  // namespace

RegressionResult robust_fit(const DesignMatrix& m, const RobustOptions& opt) {
    m.validate();
    const Eigen::Index n = m.rows();
    const Eigen::Index p = m.cols() + 1;
    if (n <= p) throw ValidationError("robust_fit: need more rows than predictors + 1");
    if (!(opt.huber_c > 0.0) || !(opt.ci_level > 0.0 && opt.ci_level < 1.0)) throw ConfigError("robust_fit: invalid options");

    Eigen::MatrixXd a(n, p);
    a.col(0).setOnes();
    a.rightCols(p - 1) = m.x;

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd beta = weighted_solve(a, m.y, w);
    RegressionResult r;
    r.options = opt;
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        const Eigen::VectorXd resid = m.y - a * beta;
        std::vector<double> abs_r(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) abs_r[static_cast<std::size_t>(i)] = std::abs(resid(i));
        const double scale = median(abs_r) / 0.6745;
        r.iterations = it;
        if (!(scale > 1e-12 * (1.0 + m.y.cwiseAbs().maxCoeff()))) {
            // Residuals vanish at the median: the fit is exact and every weight is 1.
            w.setOnes();
            const Eigen::VectorXd next = weighted_solve(a, m.y, w);
            r.last_change = (next - beta).cwiseAbs().maxCoeff();
            beta = next;
            break;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = std::abs(resid(i)) / scale;
            w(i) = u <= opt.huber_c ? 1.0 : opt.huber_c / u;
        }
        const Eigen::VectorXd next = weighted_solve(a, m.y, w);
        r.last_change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (r.last_change < opt.tolerance) break;
    }

    const Eigen::VectorXd resid = m.y - a * beta;
    const double dof = static_cast<double>(n - p);
    const double sigma2 = (w.array() * resid.array().square()).sum() / dof;
    const Eigen::MatrixXd xtwx = a.transpose() * w.asDiagonal() * a;
    const Eigen::MatrixXd cov = sigma2 * xtwx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    const double tq = student_t_quantile(0.5 + opt.ci_level / 2.0, dof);

    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient c;
        c.term = j == 0 ? "intercept" : m.names[static_cast<std::size_t>(j - 1)];
        c.coef = beta(j);
        c.se = std::sqrt(std::max(cov(j, j), 0.0));
        if (c.se > 0.0) {
            c.t = c.coef / c.se;
            c.p = student_t_two_sided_p(c.t, dof);
        } else {
            c.t = c.coef == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.coef);
            c.p = c.coef == 0.0 ? 1.0 : 0.0;
        }
        c.ci_lo = c.coef - tq * c.se;
        c.ci_hi = c.coef + tq * c.se;
        r.terms.push_back(c);
    }
    r.n_obs = static_cast<std::size_t>(n);
    r.fitted = a * beta;
    return r;
}

RegressionResult regress(const DesignMatrix& m, double vif_threshold, const RobustOptions& opt) {
    auto pruned = vif_prune(m, vif_threshold);
    const DesignMatrix z = standardize(pruned.matrix);
    RegressionResult r = robust_fit(z, opt);
    r.dropped = std::move(pruned.dropped);
    const auto ks = ks_gof(std::span<const double>(r.fitted.data(), static_cast<std::size_t>(r.fitted.size())),
                           std::span<const double>(z.y.data(), static_cast<std::size_t>(z.y.size())));
    r.ks_stat = ks.stat;
    r.ks_p = ks.p;
    return r;
}

void write_regression_report(std::ostream& out, const RegressionResult& r) {
    char buf[256];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    out << "# schema: alertlab.regression/1\n";
    out << "# estimator: huber_irls c=" << num(r.options.huber_c) << " ci_level=" << num(r.options.ci_level)
        << " iterations=" << r.iterations << '\n';
    for (const auto& [name, vif] : r.dropped) out << "# dropped: " << name << " vif=" << num(vif) << '\n';
    out << "term,coef,ci_lo,ci_hi,p\n";
    for (const auto& c : r.terms) {
        out << c.term << ',' << num(c.coef) << ',' << num(c.ci_lo) << ',' << num(c.ci_hi) << ',' << num(c.p) << '\n';
    }
    out << "ks_stat,ks_p,n_obs\n";
    out << num(r.ks_stat) << ',' << num(r.ks_p) << ',' << r.n_obs << '\n';
}

}  // namespace alertlab
