#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "alertlab/analysis.hpp"

using namespace alertlab;

namespace {

// Normal-equations least squares, intercept first.
Eigen::VectorXd ols_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    return (a.transpose() * a).ldlt().solve(a.transpose() * y);
}

double normal(Rng& rng) {
    // Box-Muller on the portable uniform source.
    const double u = 1.0 - rng.uniform();
    const double v = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

DesignMatrix random_design(std::uint64_t seed, Eigen::Index n, const Eigen::VectorXd& beta, double noise,
                           double intercept = 0.5) {
    Rng rng(seed);
    DesignMatrix m;
    m.x.resize(n, beta.size());
    m.y.resize(n);
    for (Eigen::Index j = 0; j < beta.size(); ++j) m.names.push_back("x" + std::to_string(j));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < beta.size(); ++j) m.x(i, j) = normal(rng) * static_cast<double>(j + 1) + static_cast<double>(j);
        m.y(i) = intercept + m.x.row(i).dot(beta) + noise * normal(rng);
    }
    return m;
}

}  // namespace

TEST_CASE("standardize") {
    DesignMatrix m;
    m.names = {"a"};
    m.x = (Eigen::MatrixXd(3, 1) << 1, 2, 3).finished();
    m.y = (Eigen::VectorXd(3) << 2, 4, 9).finished();
    const auto z = standardize(m);
    CHECK(z.x(0, 0) == doctest::Approx(-std::sqrt(1.5)));
    CHECK(z.x(1, 0) == doctest::Approx(0.0));
    CHECK(z.x(2, 0) == doctest::Approx(std::sqrt(1.5)));

    const auto zz = standardize(z);
    CHECK((zz.x - z.x).cwiseAbs().maxCoeff() < 1e-12);

    auto c = m;
    c.x.setConstant(4.0);
    CHECK_THROWS_AS(standardize(c), ValidationError);

    for (std::uint64_t s = 1; s <= 10; ++s) {
        Rng rng(s);
        DesignMatrix big;
        big.names = {"u", "v"};
        big.x.resize(97, 2);
        big.y.resize(97);
        for (Eigen::Index i = 0; i < 97; ++i) {
            big.x(i, 0) = 1e6 + 1e3 * normal(rng);
            big.x(i, 1) = 1e-6 * normal(rng);
            big.y(i) = -3e4 + normal(rng);
        }
        const auto zs = standardize(big);
        for (Eigen::Index j = 0; j < 2; ++j) {
            const auto col = zs.x.col(j);
            CHECK(std::abs(col.mean()) < 1e-12);
            CHECK(std::abs(std::sqrt(col.squaredNorm() / 97.0) - 1.0) < 1e-12);
        }
        CHECK(std::abs(zs.y.mean()) < 1e-12);
    }
}

TEST_CASE("variance inflation and pruning") {
    SUBCASE("orthogonal predictors keep VIF 1") {
        DesignMatrix m;
        m.names = {"a", "b"};
        m.x = (Eigen::MatrixXd(4, 2) << 1, 1, -1, 1, 1, -1, -1, -1).finished();
        m.y = Eigen::VectorXd::LinSpaced(4, 0, 3);
        for (double v : variance_inflation(m.x)) CHECK(v == doctest::Approx(1.0));
        CHECK(vif_prune(m).dropped.empty());
    }
    SUBCASE("a perfectly collinear predictor is dropped") {
        auto m = random_design(4, 50, Eigen::Vector3d(1, -2, 0.5), 0.1);
        m.names.push_back("copy");
        m.x.conservativeResize(Eigen::NoChange, 4);
        m.x.col(3) = 3.0 * m.x.col(0).array() - 2.0;
        const auto r = vif_prune(m);
        REQUIRE(r.dropped.size() == 1);
        CHECK(r.dropped[0].first == "copy");
        CHECK(r.dropped[0].second > 10.0);
        CHECK(r.matrix.names == std::vector<std::string>{"x0", "x1", "x2"});
    }
    SUBCASE("VIF matches 1 / (1 - r^2) for two predictors") {
        auto m = random_design(8, 200, Eigen::Vector2d(1, 1), 0.1);
        m.x.col(1) = m.x.col(0) + 0.5 * m.x.col(1);
        const double r = (m.x.col(0).array() - m.x.col(0).mean()).matrix().normalized().dot(
            (m.x.col(1).array() - m.x.col(1).mean()).matrix().normalized());
        const auto vif = variance_inflation(m.x);
        CHECK(vif[0] == doctest::Approx(1.0 / (1.0 - r * r)));
        CHECK(vif[1] == doctest::Approx(1.0 / (1.0 - r * r)));
    }
}

TEST_CASE("robust fit on noise-free data equals least squares") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const Eigen::Vector3d beta(1.5, -0.25, 2.0);
        const auto m = random_design(s, 60, beta, 0.0);
        const auto r = robust_fit(m);
        const auto oracle = ols_oracle(m.x, m.y);
        REQUIRE(r.terms.size() == 4);
        CHECK(std::abs(r.terms[0].coef - 0.5) < 1e-8);
        for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(r.terms[j].coef - oracle(static_cast<Eigen::Index>(j))) < 1e-8);
        for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(r.terms[j].coef - beta(static_cast<Eigen::Index>(j - 1))) < 1e-8);
        const auto q = ols(m.x, m.y);
        CHECK((q - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("robust fit resists gross outliers") {
    std::size_t better = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const Eigen::Vector2d beta(1.0, -1.0);
        auto m = random_design(100 + s, 100, beta, 0.2);
        Rng rng(s);
        for (int k = 0; k < 10; ++k) m.y(static_cast<Eigen::Index>(rng.below(100))) += 50.0;
        const auto r = robust_fit(m);
        const auto q = ols_oracle(m.x, m.y);
        const double robust_err = std::abs(r.terms[1].coef - 1.0) + std::abs(r.terms[2].coef + 1.0);
        const double ols_err = std::abs(q(1) - 1.0) + std::abs(q(2) + 1.0);
        better += robust_err < ols_err;
        CHECK(r.last_change < r.options.tolerance);
        CHECK(r.iterations <= r.options.max_iterations);
    }
    CHECK(better == 20);
}

TEST_CASE("planted null predictor is not significant") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto m = random_design(200 + s, 2000, Eigen::Vector3d(2.0, -1.0, 0.0), 0.5);
        const auto r = regress(m);
        CHECK(r.term("x0").coef > 0.0);
        CHECK(r.term("x1").coef < 0.0);
        CHECK(r.term("x0").p < 0.05);
        CHECK(std::abs(r.term("x2").coef) < 0.05);
        CHECK(r.term("x2").p > 0.05);
    }
}

TEST_CASE("t statistics are invariant under standardization") {
    const auto m = random_design(77, 120, Eigen::Vector3d(0.7, -0.3, 0.1), 1.0);
    const auto raw = robust_fit(m);
    const auto std_fit = robust_fit(standardize(m));
    for (std::size_t j = 1; j < raw.terms.size(); ++j) {
        CHECK(std_fit.terms[j].t == doctest::Approx(raw.terms[j].t).epsilon(1e-6));
        CHECK(std_fit.terms[j].p == doctest::Approx(raw.terms[j].p).epsilon(1e-6));
    }
}

TEST_CASE("confidence intervals bracket the coefficient") {
    const auto r = regress(random_design(5, 80, Eigen::Vector2d(1, 2), 0.3));
    for (const auto& c : r.terms) {
        CHECK(c.ci_lo <= c.coef);
        CHECK(c.coef <= c.ci_hi);
    }
    CHECK(r.n_obs == 80);
    CHECK_THROWS_AS(r.term("nope"), ValidationError);
}

TEST_CASE("robust fit preconditions") {
    auto m = random_design(1, 3, Eigen::Vector2d(1, 1), 0.1);
    CHECK_THROWS_AS(robust_fit(m), ValidationError);
    m = random_design(1, 30, Eigen::Vector2d(1, 1), 0.1);
    m.y(3) = std::nan("");
    CHECK_THROWS_AS(robust_fit(m), ValidationError);
    RobustOptions bad;
    bad.huber_c = 0.0;
    CHECK_THROWS_AS(robust_fit(random_design(1, 30, Eigen::Vector2d(1, 1), 0.1), bad), ConfigError);
}

TEST_CASE("two-sample KS") {
    const std::vector<double> a{0.1, 0.4, 0.4, 0.9, 1.3};
    const auto same = ks_gof(a, a);
    CHECK(same.stat == 0.0);
    CHECK(same.p == 1.0);
    const std::vector<double> b{5.0, 6.0, 7.0};
    CHECK(ks_gof(a, b).stat == 1.0);
    CHECK(ks_gof(a, b).p < 0.05);
    // Hand count: the largest ECDF gap of {1,2,3,4} vs {3,4,5,6} is 0.5.
    CHECK(ks_gof(std::vector<double>{1, 2, 3, 4}, std::vector<double>{3, 4, 5, 6}).stat == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_gof(std::vector<double>{}, b), ValidationError);
}

TEST_CASE("distribution helpers") {
    CHECK(student_t_two_sided_p(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(student_t_quantile(0.975, 10) == doctest::Approx(2.228138851986).epsilon(1e-8));
    CHECK(student_t_quantile(0.975, 1e6) == doctest::Approx(1.959963984540).epsilon(1e-5));
    CHECK(student_t_two_sided_p(0.0, 5) == doctest::Approx(1.0));
    CHECK(kolmogorov_survival(1.3580986393) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(regularized_incomplete_beta(2, 3, 0.4) == doctest::Approx(0.5248));
    CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3));
}

TEST_CASE("regression report declares its schema") {
    const auto r = regress(random_design(5, 40, Eigen::Vector2d(1, 2), 0.3));
    std::ostringstream out;
    write_regression_report(out, r);
    const auto text = out.str();
    CHECK(text.rfind("# schema: alertlab.regression/1\n", 0) == 0);
    CHECK(text.find("term,coef,ci_lo,ci_hi,p\n") != std::string::npos);
    CHECK(text.find("\nx0,") != std::string::npos);
}
