#include <doctest.h>

#include <random>

#include "demandcast/model.hpp"
#include "demandcast/synth.hpp"

using namespace demandcast;

namespace {

DesignMatrix design_from(const std::vector<double>& y, DateStamp start = DateStamp(2020, 1, 1)) {
    DesignMatrix d;
    d.start = start;
    d.columns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), kRegressorCount);
    d.target = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return d;
}

void add_calendar(DesignMatrix& d) {
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        const auto f = calendar_flags(d.date(i));
        d.column(RegressorName::is_weekend)[i] = f.is_weekend;
        d.column(RegressorName::is_holiday_season)[i] = f.is_holiday_season;
        d.column(RegressorName::quarter)[i] = f.quarter;
    }
}

/// Multiplicative-truth synthetic design without y-derived columns.
DesignMatrix synthetic_design(SeasonalityMode mode, double yearly_amp, std::uint64_t seed, int span = 730) {
    synth::SynthSpec s;
    s.start = DateStamp(2019, 1, 1);
    s.span_days = span;
    s.trend_k = 0.1;
    s.trend_m = 50;
    s.weekly = {0.05, 0.02};
    s.yearly = {yearly_amp, 0.0};
    s.mode = mode;
    s.noise_sigma = 1.0;
    s.seed = seed;
    const auto out = synth::generate(s);
    auto d = design_from(out.series.values(), out.series.start());
    add_calendar(d);
    return d;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("place_changepoints examples") {
    const auto one = place_changepoints(1, 1.0, 100);
    REQUIRE(one.locations.size() == 1);
    CHECK(one.locations[0] == doctest::Approx(0.5));

    const auto three = place_changepoints(3, 0.8, 100);
    REQUIRE(three.locations.size() == 3);
    CHECK(three.locations[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(three.locations[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(three.locations[2] == doctest::Approx(0.6).epsilon(1e-15));

    const auto many = place_changepoints(55, 0.97, 1000);
    CHECK(many.locations.size() == 55);
    CHECK(many.locations.back() < 0.97);
    CHECK(std::is_sorted(many.locations.begin(), many.locations.end()));
    CHECK(many.locations.front() > 0.0);

    CHECK_THROWS_AS(place_changepoints(0, 0.8, 100), ContractViolation);
    CHECK_THROWS_AS(place_changepoints(3, 0.0, 100), ContractViolation);
    CHECK_THROWS_AS(place_changepoints(3, 0.8, 1), ContractViolation);
}

TEST_CASE("trend_value examples and continuity") {
    ChangepointGrid none;
    const Eigen::VectorXd empty(0);
    CHECK(trend_value(0.3, 1.0, 0.0, none, empty) == 0.3);

    ChangepointGrid g{{0.5}};
    const Eigen::VectorXd d = (Eigen::VectorXd(1) << 0.5).finished();
    CHECK(trend_value(1.0, 1.0, 0.0, g, d) == doctest::Approx(1.25));
    CHECK(trend_value(0.5, 1.0, 0.0, g, d) == doctest::Approx(0.5));
    CHECK(trend_value(std::nextafter(0.5, 0.0), 1.0, 0.0, g, d) == doctest::Approx(0.5));

    std::mt19937 rng(2);
    std::normal_distribution<double> n01;
    const auto grid = place_changepoints(25, 0.8, 500);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd deltas(25);
        for (auto& x : deltas) x = n01(rng);
        const double k = n01(rng), m = n01(rng);
        for (double s : grid.locations) {
            const double eps = 1e-9;
            CHECK(std::abs(trend_value(s - eps, k, m, grid, deltas) - trend_value(s + eps, k, m, grid, deltas)) < 1e-7);
        }
    }
}

TEST_CASE("fourier_basis examples") {
    const auto zero = fourier_basis(0.0, 7.0, 3);
    CHECK(zero.size() == 6);
    for (int i = 0; i < 3; ++i) {
        CHECK(zero[2 * i] == 0.0);
        CHECK(zero[2 * i + 1] == 1.0);
    }
    CHECK((fourier_basis(365.25, 365.25, 1) - fourier_basis(0.0, 365.25, 1)).cwiseAbs().maxCoeff() < 1e-12);
    const auto q = fourier_basis(7.0 / 4.0, 7.0, 1);
    CHECK(std::abs(q[0] - 1.0) < 1e-12);
    CHECK(std::abs(q[1]) < 1e-12);
}

TEST_CASE("holiday_matrix windows and grouping") {
    const DateStamp start(2022, 12, 1);
    const HolidaySpec xmas22{"xmas", DateStamp(2022, 12, 25), 0, 0};
    const HolidaySpec xmas23{"xmas", DateStamp(2023, 12, 25), 0, 0};
    const HolidaySpec bf{"bf", DateStamp(2023, 11, 24), -1, 3};

    const auto one = holiday_matrix(start, 60, {xmas22});
    REQUIRE(one.names == std::vector<std::string>{"xmas"});
    CHECK(one.indicators.sum() == 1.0);
    CHECK(one.indicators(24, 0) == 1.0);

    const auto all = holiday_matrix(start, 400, {xmas22, bf, xmas23});
    REQUIRE(all.names == std::vector<std::string>{"bf", "xmas"});
    CHECK(all.indicators.col(0).sum() == 5.0);
    const auto first = DateStamp(2023, 11, 23) - start;
    for (int i = 0; i < 5; ++i) CHECK(all.indicators(first + i, 0) == 1.0);
    CHECK(all.indicators.col(1).sum() == 2.0);
}

TEST_CASE("fit recovers an exactly linear target") {
    std::vector<double> y(200);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 2.0 * static_cast<double>(i) + 3.0;
    ModelConfig cfg;
    cfg.seasonalities.clear();
    const auto m = fit(design_from(y), Hyperparameters{}, {}, cfg);
    const double slope = m.k * m.y_scale / static_cast<double>(y.size() - 1);
    CHECK(slope == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(m.m * m.y_scale == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(m.deltas.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.residual_sigma > 0.0);
    CHECK(m.deltas.size() == 25);
    CHECK((m.gammas() + Eigen::Map<const Eigen::VectorXd>(m.changepoints.locations.data(), 25).cwiseProduct(m.deltas))
              .isZero());
}

TEST_CASE("fit recovers a known regressor coefficient under weak penalties") {
    std::mt19937 rng(4);
    std::normal_distribution<double> noise(0.0, 0.5);
    const int n = 400;
    std::vector<double> y(n);
    DesignMatrix d = design_from(y);
    for (int i = 0; i < n; ++i) {
        const double cases = 100.0 * std::exp(-std::pow((i - 200.0) / 40.0, 2));
        d.column(RegressorName::cases_7day_avg)[i] = cases;
        (*d.target)[i] = 20.0 + 0.05 * i + 0.3 * cases + noise(rng);
    }
    ModelConfig cfg;
    cfg.seasonalities.clear();
    Hyperparameters hp;
    hp.changepoint_prior_scale = 0.001;
    const auto m = fit(d, hp, {}, cfg);
    CHECK(m.regressor_coeff(RegressorName::cases_7day_avg) * m.y_scale == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("multiplicative truth favours the multiplicative objective") {
    const auto d = synthetic_design(SeasonalityMode::multiplicative, 0.2, 1);
    Hyperparameters add, mul;
    mul.seasonality_mode = SeasonalityMode::multiplicative;
    const auto fa = fit(d, add, {});
    const auto fm = fit(d, mul, {});
    CHECK(fm.objective < fa.objective);
    CHECK(fm.mode == SeasonalityMode::multiplicative);
}

TEST_CASE("multiplicative alternation never increases the objective") {
    const auto d = synthetic_design(SeasonalityMode::multiplicative, 0.3, 2);
    Hyperparameters hp;
    hp.seasonality_mode = SeasonalityMode::multiplicative;
    double previous = std::numeric_limits<double>::infinity();
    for (int iters = 1; iters <= 15; ++iters) {
        ModelConfig cfg;
        cfg.max_iterations = iters;
        double obj = 0.0;
        try {
            obj = fit(d, hp, {}, cfg).objective;
        } catch (const ConvergenceError& e) {
            obj = e.last_objective();
            CHECK(std::string(e.what()).size() > 0);
        }
        CHECK(obj <= previous * (1.0 + 1e-12));
        previous = obj;
    }
}

TEST_CASE("smaller changepoint_prior_scale never grows the L1 norm of deltas") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        synth::SynthSpec s;
        s.span_days = 500;
        s.trend_k = 0.1;
        s.trend_m = 40;
        s.changepoints = {{150, 0.2}, {320, -0.3}};
        s.weekly = {2.0, 1.0};
        s.noise_sigma = 2.0;
        s.seed = seed;
        const auto out = synth::generate(s);
        const auto d = design_from(out.series.values(), out.series.start());
        double prev = std::numeric_limits<double>::infinity();
        for (double tau : {0.5, 0.05, 0.005}) {
            Hyperparameters hp;
            hp.changepoint_prior_scale = tau;
            const double l1 = fit(d, hp, {}).deltas.lpNorm<1>();
            CHECK(l1 <= prev * (1.0 + 1e-9) + 1e-12);
            prev = l1;
        }
    }
}

TEST_CASE("analytic gradient agrees with central differences") {
    for (auto mode : {SeasonalityMode::additive, SeasonalityMode::multiplicative}) {
        const auto d = synthetic_design(SeasonalityMode::multiplicative, 0.2, 3, 300);
        Hyperparameters hp;
        hp.seasonality_mode = mode;
        const std::vector<HolidaySpec> hol{{"h", DateStamp(2019, 7, 4), -1, 1}};
        const PenalizedObjective obj(d, hp, hol, ModelConfig{});
        std::mt19937 rng(17);
        std::normal_distribution<double> n01(0.0, 0.3);
        for (int rep = 0; rep < 3; ++rep) {
            Eigen::VectorXd theta(obj.layout().size());
            for (auto& x : theta) x = n01(rng);
            const Eigen::VectorXd g = obj.smooth_gradient(theta);
            Eigen::VectorXd fd(theta.size());
            for (Eigen::Index i = 0; i < theta.size(); ++i) {
                const double h = 1e-6 * std::max(1.0, std::abs(theta[i]));
                Eigen::VectorXd a = theta, b = theta;
                a[i] += h;
                b[i] -= h;
                fd[i] = (obj.smooth_value(a) - obj.smooth_value(b)) / (2 * h);
            }
            CHECK((g - fd).norm() / std::max(g.norm(), 1e-12) < 1e-5);
        }
    }
}

TEST_CASE("scale equivariance with non-target regressors") {
    auto d = synthetic_design(SeasonalityMode::additive, 3.0, 5, 500);
    auto scaled = d;
    *scaled.target *= 7.5;
    const auto a = fit(d, Hyperparameters{}, {});
    const auto b = fit(scaled, Hyperparameters{}, {});
    const auto pa = predict(a, d);
    const auto pb = predict(b, d);
    CHECK(((pb.yhat - 7.5 * pa.yhat).cwiseAbs().maxCoeff()) < 1e-7 * pb.yhat.cwiseAbs().maxCoeff());
}

TEST_CASE("predict decomposition identity") {
    for (auto mode : {SeasonalityMode::additive, SeasonalityMode::multiplicative}) {
        auto d = synthetic_design(SeasonalityMode::multiplicative, 0.2, 6, 400);
        Hyperparameters hp;
        hp.seasonality_mode = mode;
        const std::vector<HolidaySpec> hol{{"h", DateStamp(2019, 7, 4), -1, 1}, {"h", DateStamp(2020, 7, 4), -1, 1}};
        const auto m = fit(d, hp, hol);
        auto future = project_future(d, 60);
        const auto p = predict(m, future);
        REQUIRE(p.size() == 60);
        Eigen::VectorXd combined = mode == SeasonalityMode::additive
                                       ? Eigen::VectorXd(p.trend + p.seasonal + p.holidays + p.regressors)
                                       : Eigen::VectorXd(p.trend.cwiseProduct(Eigen::VectorXd::Ones(60) + p.seasonal) +
                                                         p.holidays + p.regressors);
        for (Eigen::Index i = 0; i < 60; ++i) CHECK(relative_error(p.yhat[i], combined[i]) < 1e-9);
        Eigen::VectorXd seasonal_sum = Eigen::VectorXd::Zero(60);
        for (const auto& [name, values] : p.seasonal_components) seasonal_sum += values;
        CHECK((seasonal_sum - p.seasonal).cwiseAbs().maxCoeff() < 1e-12);

        future.column(RegressorName::lag_7)[3] = std::numeric_limits<double>::quiet_NaN();
        try {
            predict(m, future);
            FAIL("expected a contract violation");
        } catch (const ContractViolation& e) {
            CHECK(std::string(e.what()).find("lag_7") != std::string::npos);
        }
    }
}

TEST_CASE("all-zero model predicts zero") {
    FittedModel m;
    m.deltas = Eigen::VectorXd::Zero(2);
    m.changepoints = place_changepoints(2, 0.8, 100);
    m.train_start = DateStamp(2020, 1, 1);
    m.train_end = DateStamp(2020, 4, 9);
    m.holiday_coeffs = Eigen::VectorXd(0);
    m.seasonalities = {{{"weekly", 7.0, 3}, Eigen::VectorXd::Zero(6)}};
    DesignMatrix f = design_from(std::vector<double>(10, 0.0), DateStamp(2020, 4, 10));
    f.target.reset();
    CHECK(predict(m, f).yhat.isZero());
}

TEST_CASE("sample_intervals is seeded and collapses without uncertainty") {
    const auto d = synthetic_design(SeasonalityMode::additive, 3.0, 8, 400);
    const auto m = fit(d, Hyperparameters{}, {});
    const auto future = project_future(d, 30);
    const auto a = sample_intervals(m, future, 200, 0.8, 42);
    const auto b = sample_intervals(m, future, 200, 0.8, 42);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    const auto yhat = predict(m, future).yhat;
    CHECK((a.upper - a.lower).minCoeff() > 0.0);
    CHECK((a.lower.array() <= yhat.array() + 1e-9).all());
    CHECK_THROWS_AS(sample_intervals(m, future, 50, 0.8, 1), ContractViolation);

    auto quiet = m;
    quiet.residual_sigma = 1e-12;
    quiet.deltas.setZero();
    const auto q = sample_intervals(quiet, future, 200, 0.8, 1);
    CHECK((q.upper[0] - q.lower[0]) < 1e-9 * quiet.y_scale);
}

TEST_CASE("hyperparameter validation and soft threshold") {
    Hyperparameters hp;
    CHECK_NOTHROW(hp.validate());
    hp.changepoint_prior_scale = 0.0;
    CHECK_THROWS(hp.validate());
    Hyperparameters out;
    out.n_changepoints = 70;
    CHECK_NOTHROW(out.validate());
    CHECK_THROWS(out.validate_search_bounds());

    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(seasonality_mode_from_string(to_string(SeasonalityMode::multiplicative)) == SeasonalityMode::multiplicative);
}
