#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "alertlab/common.hpp"

namespace alertlab {

// Predictors in columns, one row per observation.
template <typename Scalar>
struct BasicDesignMatrix {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<std::string> names;
    Matrix x;
    Vector y;
    std::string response = "relaxed_f1";

    Eigen::Index rows() const { return x.rows(); }
    Eigen::Index cols() const { return x.cols(); }

    void validate() const {
        if (static_cast<std::size_t>(x.cols()) != names.size()) throw ValidationError("design matrix: one name per column required");
        if (y.size() != x.rows()) throw ValidationError("design matrix: response length differs from row count");
        if (!x.allFinite() || !y.allFinite()) throw ValidationError("design matrix: missing or non-finite values");
    }
};

using DesignMatrix = BasicDesignMatrix<double>;

// Column mean 0 and population standard deviation 1 for every predictor and the response.
template <typename Scalar>
BasicDesignMatrix<Scalar> standardize(const BasicDesignMatrix<Scalar>& m) {
    m.validate();
    auto scale = [](auto col, const std::string& name) {
        const auto n = static_cast<Scalar>(col.size());
        const Scalar mean = col.sum() / n;
        col.array() -= mean;
        const Scalar sd = std::sqrt(col.squaredNorm() / n);
        if (!(sd > Scalar(0))) throw ValidationError("standardize: column '" + name + "' has zero variance");
        col /= sd;
        // One correction pass pulls the mean and spread to within rounding of 0 and 1.
        col.array() -= col.sum() / n;
        col /= std::sqrt(col.squaredNorm() / n);
    };
    BasicDesignMatrix<Scalar> out = m;
    for (Eigen::Index j = 0; j < out.x.cols(); ++j) scale(out.x.col(j), out.names[static_cast<std::size_t>(j)]);
    scale(out.y.col(0), out.response);
    return out;
}

// Least squares coefficients of y on [1, x]; intercept first.
template <typename DerivedX, typename DerivedY>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> ols(const Eigen::MatrixBase<DerivedX>& x,
                                                                const Eigen::MatrixBase<DerivedY>& y) {
    using Scalar = typename DerivedX::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    const Eigen::ColPivHouseholderQR<decltype(a)> qr(a);
    if (qr.rank() < a.cols()) throw ComputeError("ols: design is rank deficient");
    return qr.solve(y.derived());
}

// VIF_j = 1 / (1 - R_j^2) from regressing column j on the other columns.
std::vector<double> variance_inflation(const Eigen::MatrixXd& x);

struct VifPruneResult {
    DesignMatrix matrix;
    std::vector<std::pair<std::string, double>> dropped;  // in removal order
};

// Drops the column with the largest VIF above `threshold` until none remains
// (equal VIFs: the later column goes first).
VifPruneResult vif_prune(const DesignMatrix& m, double threshold = 10.0);

struct RobustOptions {
    double huber_c = 1.345;
    double tolerance = 1e-8;
    std::size_t max_iterations = 100;
    double ci_level = 0.95;
};

struct Coefficient {
    std::string term;
    double coef = 0.0;
    double se = 0.0;
    double t = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double p = 1.0;
};

struct RegressionResult {
    std::vector<Coefficient> terms;  // "intercept" first
    std::vector<std::pair<std::string, double>> dropped;
    double ks_stat = 0.0;
    double ks_p = 1.0;
    std::size_t n_obs = 0;
    std::size_t iterations = 0;
    double last_change = 0.0;  // max coefficient change in the final iteration
    RobustOptions options;
    Eigen::VectorXd fitted;

    const Coefficient& term(const std::string& name) const;
};

// Huber IRLS with MAD scale; standard errors from the final weighted fit.
RegressionResult robust_fit(const DesignMatrix& m, const RobustOptions& opt = {});

struct KsResult {
    double stat = 0.0;
    double p = 1.0;
};

KsResult ks_gof(std::span<const double> fitted, std::span<const double> observed);

// Full attribution protocol: VIF pruning, standardization, robust fit, and KS
// of fitted against observed responses.
RegressionResult regress(const DesignMatrix& m, double vif_threshold = 10.0, const RobustOptions& opt = {});

void write_regression_report(std::ostream& out, const RegressionResult& r);

// Distribution helpers.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double dof);
double student_t_quantile(double p, double dof);  // p in (0, 1)
double kolmogorov_survival(double lambda);        // P(K > lambda)

}  // namespace alertlab
