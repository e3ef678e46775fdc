#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "demandcast/metrics.hpp"

using namespace demandcast;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("point_metrics examples") {
    const auto m = point_metrics(vec({100, 200}), vec({110, 180}));
    CHECK(m.mape == doctest::Approx(0.10).epsilon(1e-15));
    CHECK(m.mae == 15.0);
    CHECK(m.rmse == doctest::Approx(std::sqrt(250.0)).epsilon(1e-15));
    CHECK(m.rmse == doctest::Approx(15.811).epsilon(1e-4));

    const auto same = point_metrics(vec({3, 4, 5}), vec({3, 4, 5}));
    CHECK(same.mape == 0.0);
    CHECK(same.rmse == 0.0);
    CHECK(same.mae == 0.0);

    const auto zero = point_metrics(vec({0, 100}), vec({5, 100}));
    CHECK(zero.mape == 0.0);
    CHECK(zero.mape_included == 1);
    CHECK(zero.mape_excluded == 1);
    CHECK(zero.mae == 2.5);

    const auto all_zero = point_metrics(vec({0, 0}), vec({1, 3}));
    CHECK(std::isnan(all_zero.mape));
    CHECK_FALSE(all_zero.mape_defined());
    CHECK(all_zero.mae == 2.0);

    CHECK_THROWS_AS(point_metrics(vec({1, 2}), vec({1})), ContractViolation);
    CHECK_THROWS_AS(point_metrics(Eigen::VectorXd(0), Eigen::VectorXd(0)), ContractViolation);
}

TEST_CASE("directional_accuracy examples") {
    CHECK(directional_accuracy(vec({1, 2, 3}), vec({10, 20, 30})) == 1.0);
    CHECK(directional_accuracy(vec({1, 2, 1}), vec({1, 2, 3})) == 0.5);
    CHECK(directional_accuracy(vec({5, 5}), vec({5, 5})) == 1.0);
    CHECK(directional_accuracy(vec({5, 5}), vec({5, 6})) == 0.0);
    CHECK_THROWS_AS(directional_accuracy(vec({1}), vec({1})), ContractViolation);
    CHECK_THROWS_AS(directional_accuracy(vec({1, 2}), vec({1, 2, 3})), ContractViolation);
}

TEST_CASE("metric properties on random inputs") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 100.0), c(0.1, 10.0);
    std::uniform_int_distribution<int> len(2, 30);
    for (int rep = 0; rep < 300; ++rep) {
        const int n = len(rng);
        Eigen::VectorXd a(n), p(n);
        for (int i = 0; i < n; ++i) {
            a[i] = std::round(u(rng));
            p[i] = std::round(u(rng));
        }
        const auto m = point_metrics(a, p);
        CHECK(m.rmse >= m.mae - 1e-12);

        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::VectorXd ap(n), pp(n);
        for (int i = 0; i < n; ++i) {
            ap[i] = a[perm[static_cast<std::size_t>(i)]];
            pp[i] = p[perm[static_cast<std::size_t>(i)]];
        }
        const auto mp = point_metrics(ap, pp);
        CHECK(mp.mae == doctest::Approx(m.mae).epsilon(1e-12));
        CHECK(mp.rmse == doctest::Approx(m.rmse).epsilon(1e-12));
        if (m.mape_defined()) CHECK(mp.mape == doctest::Approx(m.mape).epsilon(1e-12));

        const double k = c(rng);
        const auto ms = point_metrics(k * a, k * p);
        CHECK(ms.mae == doctest::Approx(k * m.mae).epsilon(1e-12));
        CHECK(ms.rmse == doctest::Approx(k * m.rmse).epsilon(1e-12));
        if (m.mape_defined()) CHECK(ms.mape == doctest::Approx(m.mape).epsilon(1e-12));
        CHECK(directional_accuracy(k * a, k * p) == directional_accuracy(a, p));
    }
}

TEST_CASE("metrics report layout") {
    EvalReport r{SkuId("10-inch"), 1, 0.1, 2.0, 1.5, 0.5, 30, 0};
    const auto text = write_metrics_report({r});
    CHECK(text.rfind("sku,horizon_months,mape,rmse,mae,directional_accuracy,n_points,mape_excluded\n", 0) == 0);
    CHECK(text.find("10-inch,1,0.1,2,1.5,0.5,30,0\n") != std::string::npos);
}
