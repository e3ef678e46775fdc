// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "demandcast/aggregate.hpp"
#include "demandcast/cli.hpp"
#include "demandcast/features.hpp"
#include "demandcast/metrics.hpp"
#include "demandcast/model.hpp"
#include "demandcast/synth.hpp"
#include "demandcast/tuning.hpp"

using namespace demandcast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::vector<CovidDaily> covid_through(const std::vector<CovidDaily>& covid, DateStamp cutoff) {
    std::vector<CovidDaily> out;
    for (const auto& c : covid)
        if (c.date <= cutoff) out.push_back(c);
    return out;
}

DesignMatrix design_of(const synth::SynthOutput& data) {
    return assemble_design(data.series, merge_covid(data.series, data.covid));
}

// Civil calendar from a day count (days since 1970-01-01), independent of the library.
struct Civil {
    int y;
    int m;
    int d;
};

Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    const auto y = static_cast<int>(yoe + era * 400 + (m <= 2));
    return {y, static_cast<int>(m), static_cast<int>(d)};
}

// 0 = Sunday; 1970-01-01 was a Thursday.
int weekday_of(std::int64_t z) { return static_cast<int>(((z % 7) + 7 + 4) % 7); }

// ---------------------------------------------------------------------------------------

Outcome decomposition_identity() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int fitted = 0, skipped = 0, compared = 0;
    double worst = 0.0;
    bool exact_mult = true;
    for (int attempt = 0; fitted < 50 && attempt < 200; ++attempt) {
        const bool mult = attempt % 2 == 1;
        synth::SynthSpec s;
        s.start = DateStamp(2018, 1, 1) + static_cast<std::int64_t>(u(rng) * 700);
        s.span_days = 200 + static_cast<int>(u(rng) * 500);
        s.trend_k = u(rng) * 0.2 - 0.05;
        s.trend_m = 40 + u(rng) * 60;
        s.changepoints = {{s.span_days / 2, (u(rng) - 0.5) * 0.1}};
        s.mode = mult ? SeasonalityMode::multiplicative : SeasonalityMode::additive;
        const double amp = mult ? 0.1 : 5.0;
        s.weekly = {amp * u(rng), amp * u(rng)};
        s.yearly = {amp * u(rng), amp * u(rng)};
        const DateStamp hol = s.start + static_cast<std::int64_t>(u(rng) * s.span_days);
        s.holidays = {{{"promo", hol, -1, 2}, 10 * u(rng)}};
        s.covid_beta_deaths = u(rng);
        s.waves = {{60 + 100 * u(rng), 0.3, 2000, 30}};
        s.noise_sigma = 1 + 2 * u(rng);
        s.seed = rng();
        const auto data = synth::generate(s);
        const auto design = design_of(data);

        Hyperparameters hp = sample_trial(SearchSpace{}, rng(), 1 + attempt);
        hp.seasonality_mode = s.mode;
        ModelConfig config;
        if (u(rng) < 0.3) config.seasonalities.push_back({"monthly", 30.5, 2});
        FittedModel model;
        try {
            model = fit(design, hp, data.holidays, config);
        } catch (const ConvergenceError&) {
            ++skipped;
            continue;
        }
        ++fitted;

        const int horizon = 1 + static_cast<int>(u(rng) * 120);
        for (const DesignMatrix& axis : {design, project_future(design, horizon)}) {
            const Prediction p = predict(model, axis);
            const double span = static_cast<double>(model.train_end - model.train_start);
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                const DateStamp d = axis.date(i);
                // Trend from the piecewise-linear definition.
                const double t = static_cast<double>(d - model.train_start) / span;
                double rate = model.k, offset = model.m;
                for (std::size_t j = 0; j < model.changepoints.locations.size(); ++j) {
                    const double loc = model.changepoints.locations[j];
                    if (loc <= t) {
                        rate += model.deltas[static_cast<Eigen::Index>(j)];
                        offset -= loc * model.deltas[static_cast<Eigen::Index>(j)];
                    }
                }
                const double trend = model.y_scale * (rate * t + offset);
                // Fourier sums on the absolute day number.
                double seasonal = 0.0;
                for (const auto& fs : model.seasonalities)
                    for (int n = 1; n <= fs.spec.order; ++n) {
                        const double arg = 2.0 * std::numbers::pi * n * static_cast<double>(d.serial()) / fs.spec.period;
                        seasonal += fs.coeffs[2 * (n - 1)] * std::sin(arg) + fs.coeffs[2 * (n - 1) + 1] * std::cos(arg);
                    }
                if (!mult) seasonal *= model.y_scale;
                double holidays = 0.0;
                for (std::size_t j = 0; j < model.holiday_names.size(); ++j) {
                    bool active = false;
                    for (const auto& h : model.holidays)
                        active |= h.name == model.holiday_names[j] && d >= h.date + h.lower_window &&
                                  d <= h.date + h.upper_window;
                    if (active) holidays += model.y_scale * model.holiday_coeffs[static_cast<Eigen::Index>(j)];
                }
                double regressors = 0.0;
                for (int r = 0; r < kRegressorCount; ++r)
                    regressors += model.y_scale * model.regressor_coeffs[r] * axis.columns(i, r);
                const double oracle =
                    mult ? trend * (1.0 + seasonal) + holidays + regressors : trend + seasonal + holidays + regressors;
                const double combo = mult ? p.trend[i] * (1.0 + p.seasonal[i]) + p.holidays[i] + p.regressors[i]
                                          : p.trend[i] + p.seasonal[i] + p.holidays[i] + p.regressors[i];
                const double scale = std::max(1.0, std::abs(p.yhat[i]));
                worst = std::max({worst, std::abs(p.yhat[i] - oracle) / scale, std::abs(p.yhat[i] - combo) / scale});
                if (mult && p.yhat[i] != combo) exact_mult = false;
                ++compared;
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = fitted == 50 && worst <= 1e-9 && exact_mult && secs < 30;
    return {pass, std::to_string(fitted) + " models (" + std::to_string(skipped) + " non-converged skipped), " +
                      std::to_string(compared) + " dates, worst rel err " + fmt(worst) +
                      (exact_mult ? ", multiplicative form exact" : ", multiplicative form inexact") + ", " +
                      fmt(secs, 3) + " s"};
}

Outcome coefficient_recovery() {
    const auto t0 = Clock::now();
    int ok = 0;
    std::string values;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        synth::SynthSpec s;
        s.span_days = 900;
        s.start = DateStamp(2019, 6, 1);
        s.trend_k = 0.05;
        s.trend_m = 60;
        s.weekly = {3, 1, 0.5, 0.2};
        s.covid_beta_deaths = 0.2;
        s.waves = {{80, 0.05, 0, 400}, {330, 0.05, 0, 280}};
        const auto probe = synth::generate(s);
        s.noise_sigma = 0.02 * probe.components.noiseless.mean();
        s.seed = seed;
        const auto data = synth::generate(s);
        const auto design = design_of(data);
        ModelConfig config;
        config.seasonalities = {{"weekly", 7.0, 3}};
        const auto m = fit(design, Hyperparameters{}, {}, config);
        const double beta = m.regressor_coeff(RegressorName::deaths_7day_avg) * m.y_scale;
        const double slope =
            (trend_value(1.0, m.k, m.m, m.changepoints, m.deltas) - trend_value(0.0, m.k, m.m, m.changepoints, m.deltas)) *
            m.y_scale / static_cast<double>(design.rows() - 1);
        const bool hit = std::abs(beta / s.covid_beta_deaths - 1) <= 0.10 && std::abs(slope / s.trend_k - 1) <= 0.05;
        ok += hit;
        values += (seed ? " " : "") + fmt(beta, 3) + "/" + fmt(slope, 3);
    }
    const double secs = seconds_since(t0);
    return {ok >= 8 && secs < 120,
            std::to_string(ok) + "/10 seeds within tolerance (beta/slope: " + values + "), " + fmt(secs, 3) + " s"};
}

Outcome covid_value() {
    const auto t0 = Clock::now();
    int wins = 0;
    std::string rels;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        synth::SynthSpec s;
        s.span_days = 900;
        s.start = DateStamp(2019, 6, 1);
        s.trend_k = 0.05;
        s.trend_m = 60;
        s.weekly = {3, 1, 0.5, 0.2};
        s.yearly = {6, 3};
        s.covid_beta_deaths = 0.4;
        s.waves = {{80, 0.5, 0, 300}, {330, 0.5, 0, 210}};
        s.noise_sigma = 2;
        s.seed = seed;
        const auto data = synth::generate(s);
        const auto splits = make_cv_splits(data.series.start(), s.span_days, CvGeometry::defaults_for(s.span_days));
        const auto full = cross_validate(data.series, data.covid, {}, Hyperparameters{}, splits);
        const auto zeroed = cross_validate(data.series, {}, {}, Hyperparameters{}, splits);
        const double rel = 1 - full.mean_mape / zeroed.mean_mape;
        wins += rel >= 0.15;
        rels += (seed > 1 ? " " : "") + fmt(100 * rel, 3);
    }
    const double secs = seconds_since(t0);
    return {wins >= 8 && secs < 300,
            std::to_string(wins) + "/10 seeds with >=15% lower CV MAPE (relative %: " + rels + "), " + fmt(secs, 3) + " s"};
}

// Criteria 4 and 5 share one batch of searches.
struct SearchBatch {
    std::vector<SearchResult> results;
    double seconds = 0.0;
};

const SearchBatch& multiplicative_batch() {
    static const SearchBatch batch = [] {
        SearchBatch b;
        const auto t0 = Clock::now();
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            synth::SynthSpec s;
            s.span_days = 1600;
            s.start = DateStamp(2019, 6, 1);
            s.trend_k = 0.15;
            s.trend_m = 30;
            s.weekly = {0.08, 0.04};
            s.yearly = {0.3, 0.15};
            s.mode = SeasonalityMode::multiplicative;
            s.noise_sigma = 2;
            s.seed = seed;
            const auto data = synth::generate(s);
            auto geo = CvGeometry::defaults_for(s.span_days);
            geo.period_days = 120;
            const auto splits = make_cv_splits(data.series.start(), s.span_days, geo);
            SearchOptions opt;
            opt.budget = 40;
            opt.seed = seed;
            b.results.push_back(search(data.series, data.covid, {}, SearchSpace{}, splits, CvOptions{}, opt));
        }
        b.seconds = seconds_since(t0);
        return b;
    }();
    return batch;
}

Outcome tuned_vs_default() {
    // Exact property over many seeds and small budgets.
    int violations = 0, runs = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        synth::SynthSpec s;
        s.span_days = 520;
        s.trend_k = 0.05;
        s.trend_m = 40;
        s.weekly = {3, 1};
        s.noise_sigma = 1.5;
        s.seed = seed;
        const auto data = synth::generate(s);
        const auto splits = make_cv_splits(data.series.start(), s.span_days, {365, 30, 60});
        for (int budget : {1, 2, 4}) {
            SearchOptions opt;
            opt.budget = budget;
            opt.seed = seed * 31 + static_cast<std::uint64_t>(budget);
            const auto r = search(data.series, data.covid, {}, SearchSpace{}, splits, CvOptions{}, opt);
            violations += !(r.best.mape <= r.trials.front().mape);
            ++runs;
        }
    }
    const auto& batch = multiplicative_batch();
    int improved = 0;
    std::string rels;
    for (const auto& r : batch.results) {
        violations += !(r.best.mape <= r.trials.front().mape);
        ++runs;
        const double rel = 1 - r.best.mape / r.trials.front().mape;
        improved += rel >= 0.05;
        rels += (rels.empty() ? "" : " ") + fmt(100 * rel, 3);
    }
    return {violations == 0 && improved >= 7 && batch.seconds < 600,
            std::to_string(violations) + " tuned>default violations in " + std::to_string(runs) + " searches; " +
                std::to_string(improved) + "/10 improved >=5% (relative %: " + rels + "), batch " +
                fmt(batch.seconds, 4) + " s"};
}

Outcome mode_selection() {
    const auto& batch = multiplicative_batch();
    int mult = 0;
    for (const auto& r : batch.results) mult += r.best.hp.seasonality_mode == SeasonalityMode::multiplicative;
    return {mult >= 8 && batch.seconds < 600, std::to_string(mult) + "/10 searches selected multiplicative"};
}

Outcome projection() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0, checked = 0;
    for (int h = 0; h < 20; ++h) {
        const int n = 70 + static_cast<int>(u(rng) * 600);
        const DateStamp start = DateStamp(2017, 1, 1) + static_cast<std::int64_t>(u(rng) * 3000);
        std::vector<double> values(static_cast<std::size_t>(n));
        for (auto& v : values) v = std::floor(u(rng) * 200);
        const SkuSeries series(SkuId("H" + std::to_string(h)), start, values);
        CovidAligned covid;
        for (int i = 0; i < n; ++i) {
            covid.cases.push_back(std::floor(u(rng) * 5000));
            covid.deaths.push_back(std::floor(u(rng) * 80));
        }
        const auto design = assemble_design(series, covid);
        const int horizon = 1 + static_cast<int>(u(rng) * 120);
        const auto future = project_future(design, horizon);
        const Eigen::Index last = design.rows() - 1;
        for (auto r : all_regressors()) {
            const auto c = static_cast<Eigen::Index>(r);
            for (Eigen::Index i = 0; i < future.rows(); ++i) {
                double expected;
                if (is_recursive(r)) {
                    expected = (design.columns(last, c) + design.columns(last - 1, c) + design.columns(last - 2, c)) / 3.0;
                } else {
                    const std::int64_t z = future.date(i).serial();
                    const Civil cd = civil_from_days(z);
                    const int md = cd.m * 100 + cd.d;
                    // Fourth Thursday of November.
                    std::int64_t nov1 = z - (cd.d - 1);
                    while (civil_from_days(nov1).m != 11) nov1 += civil_from_days(nov1).m < 11 ? 28 : -28;
                    nov1 -= civil_from_days(nov1).d - 1;
                    const std::int64_t thanks = nov1 + ((4 - weekday_of(nov1) + 7) % 7) + 21;
                    switch (r) {
                        case RegressorName::is_weekend: expected = weekday_of(z) == 0 || weekday_of(z) == 6; break;
                        case RegressorName::is_summer_peak: expected = md >= 515 && md <= 715; break;
                        case RegressorName::is_back_to_school: expected = md >= 801 && md <= 915; break;
                        case RegressorName::is_holiday_season: expected = md >= 1115 && md <= 1231; break;
                        case RegressorName::is_black_friday: expected = z - thanks >= 1 && z - thanks <= 4; break;
                        case RegressorName::quarter: expected = (cd.m - 1) / 3 + 1; break;
                        default: expected = std::numeric_limits<double>::quiet_NaN();
                    }
                }
                mismatches += !(future.columns(i, c) == expected);
                ++checked;
            }
        }
    }
    return {mismatches == 0,
            "20 histories, " + std::to_string(checked) + " projected cells, " + std::to_string(mismatches) + " mismatches"};
}

Outcome month_aggregation() {
    std::mt19937_64 rng(88);
    const std::int64_t lo = DateStamp(2018, 1, 1).serial(), hi = DateStamp(2026, 12, 31).serial();
    std::uniform_int_distribution<std::int64_t> day(lo, hi);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::int64_t a = day(rng), b = day(rng);
        // Walk day by day, counting first-of-month crossings.
        int months = 0;
        for (std::int64_t z = std::min(a, b) + 1; z <= std::max(a, b); ++z) months += civil_from_days(z).d == 1;
        const int expected = b >= a ? months : -months;
        mismatches += month_diff(DateStamp::from_serial(b), DateStamp::from_serial(a)) != expected;
    }
    double worst = 0.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const DateStamp start = DateStamp::from_serial(day(rng));
        const auto n = static_cast<Eigen::Index>(1 + u(rng) * 400);
        Eigen::VectorXd y(n);
        for (auto& v : y) v = u(rng) * 1000 - 100;
        const auto rows = monthly_totals(start, y, SkuId("A"), start - 1);
        double total = 0.0;
        for (const auto& r : rows) total += r.sales;
        worst = std::max(worst, std::abs(total - y.sum()) / std::max(1.0, y.cwiseAbs().sum()));
    }
    return {mismatches == 0 && worst <= 1e-9, "10000 pairs, " + std::to_string(mismatches) +
                                                  " month_diff mismatches; 200 conservation checks, worst rel err " +
                                                  fmt(worst)};
}

Outcome leakage_audit() {
    synth::SynthSpec s;
    s.span_days = 700;
    s.trend_k = 0.05;
    s.trend_m = 50;
    s.weekly = {3, 1};
    s.yearly = {5, 2};
    s.covid_beta_deaths = 0.3;
    s.waves = {{100, 0.4, 3000, 80}};
    s.noise_sigma = 2;
    s.seed = 4;
    const auto data = synth::generate(s);
    const auto splits = make_cv_splits(data.series.start(), s.span_days, {400, 60, 90});
    if (splits.size() < 3) return {false, "fewer than 3 splits"};
    const std::vector<CvSplit> three(splits.begin(), splits.begin() + 3);

    int violations = 0, audited = 0;
    std::map<std::int64_t, std::pair<DesignMatrix, DesignMatrix>> seen;
    const auto r = cross_validate(data.series, data.covid, {}, Hyperparameters{}, three, {}, [&](const FitInputs& in) {
        ++audited;
        const DateStamp cut = in.split.cutoff;
        violations += in.train_series.end() > cut;
        for (const auto& c : in.train_covid) violations += c.date > cut;
        violations += in.train_design.last_date() > cut;
        violations += in.future_design.start != cut + 1;
        seen.emplace(cut.serial(), std::make_pair(in.train_design, in.future_design));
    });

    // Scrambling everything after each cutoff must leave that split's fit inputs unchanged.
    int changed = 0;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 500.0);
    for (const auto& split : three) {
        std::vector<double> values = data.series.values();
        for (std::size_t i = static_cast<std::size_t>(split.cutoff - data.series.start()) + 1; i < values.size(); ++i)
            values[i] = std::floor(u(rng));
        const SkuSeries scrambled(data.series.sku(), data.series.start(), values);
        auto covid = data.covid;
        for (auto& c : covid)
            if (c.date > split.cutoff) {
                c.new_cases = std::floor(u(rng) * 10);
                c.new_deaths = std::floor(u(rng));
            }
        cross_validate(scrambled, covid, {}, Hyperparameters{}, {split}, {}, [&](const FitInputs& in) {
            const auto& [train, future] = seen.at(split.cutoff.serial());
            changed += !(in.train_design.columns == train.columns) || !(*in.train_design.target == *train.target) ||
                       !(in.future_design.columns == future.columns);
        });
    }
    bool all_ok = true;
    for (const auto& o : r.splits) all_ok &= o.ok;
    return {audited == 3 && violations == 0 && changed == 0 && all_ok,
            std::to_string(audited) + " splits audited, " + std::to_string(violations) + " post-cutoff reads, " +
                std::to_string(changed) + " splits sensitive to post-cutoff scrambling"};
}

Outcome gradient_check() {
    const auto t0 = Clock::now();
    synth::SynthSpec s;
    s.span_days = 500;
    s.trend_k = 0.08;
    s.trend_m = 40;
    s.weekly = {0.06, 0.02};
    s.yearly = {0.2, 0.05};
    s.mode = SeasonalityMode::multiplicative;
    s.covid_beta_cases = 0.002;
    s.waves = {{60, 0.4, 4000, 50}};
    s.noise_sigma = 2;
    s.seed = 12;
    const auto data = synth::generate(s);
    const auto design = design_of(data);
    const std::vector<HolidaySpec> hol{{"promo", DateStamp(2019, 7, 4), -1, 1}, {"promo", DateStamp(2020, 7, 4), -1, 1}};
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n01(0.0, 0.3);
    double worst = 0.0;
    for (int point = 0; point < 10; ++point) {
        Hyperparameters hp = sample_trial(SearchSpace{}, 3, point + 1);
        hp.seasonality_mode = point % 2 ? SeasonalityMode::multiplicative : SeasonalityMode::additive;
        const PenalizedObjective obj(design, hp, hol, ModelConfig{});
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
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-12));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-5 && secs < 10, "10 points, worst relative error " + fmt(worst) + ", " + fmt(secs, 3) + " s"};
}

Outcome interval_coverage() {
    const auto t0 = Clock::now();
    constexpr int kHorizons = 1000, kTrain = 2000, kDays = 30;
    long inside = 0, total = 0;
    for (int h = 0; h < kHorizons; ++h) {
        synth::SynthSpec s;
        s.span_days = kTrain + kDays;
        s.start = DateStamp(2016, 1, 1) + h % 365;
        s.trend_k = 0.03;
        s.trend_m = 50;
        s.weekly = {4, 1.5};
        s.yearly = {8, 3};
        s.noise_sigma = 3;
        s.seed = 1000 + static_cast<std::uint64_t>(h);
        const auto data = synth::generate(s);
        const DateStamp cutoff = data.series.start() + (kTrain - 1);
        const auto train = data.series.truncated(cutoff);
        const auto design = assemble_design(train, merge_covid(train, covid_through(data.covid, cutoff)));
        const auto model = fit(design, Hyperparameters{}, {});
        const auto future = project_future(design, kDays);
        const auto iv = sample_intervals(model, future, 500, 0.8, static_cast<std::uint64_t>(h));
        for (int i = 0; i < kDays; ++i) {
            const double y = data.series.values()[static_cast<std::size_t>(kTrain + i)];
            inside += y >= iv.lower[i] && y <= iv.upper[i];
            ++total;
        }
    }
    const double coverage = static_cast<double>(inside) / static_cast<double>(total);
    const double secs = seconds_since(t0);
    return {std::abs(coverage - 0.8) <= 0.05 && secs < 180,
            "empirical coverage " + fmt(100 * coverage, 4) + "% over " + std::to_string(kHorizons) + " horizons x " +
                std::to_string(kDays) + " days, " + fmt(secs, 3) + " s"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome checkpoint_resume() {
    struct Killed {};
    const fs::path dir = fs::temp_directory_path() / ("demandcast-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    int identical = 0;
    std::string kills;
    std::mt19937_64 rng(2024);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synth::SynthSpec s;
        s.span_days = 560;
        s.trend_k = 0.04;
        s.trend_m = 30;
        s.weekly = {2, 1};
        s.noise_sigma = 1.5;
        s.seed = seed;
        const auto data = synth::generate(s);
        const auto splits = make_cv_splits(data.series.start(), s.span_days, {365, 45, 60});
        SearchOptions opt;
        opt.budget = 8;
        opt.seed = seed;
        opt.checkpoint_path = (dir / ("full" + std::to_string(seed))).string();
        const auto full = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);

        const int kill_at = std::uniform_int_distribution<int>(0, opt.budget - 2)(rng);
        kills += (seed > 1 ? "," : "") + std::to_string(kill_at);
        opt.checkpoint_path = (dir / ("cut" + std::to_string(seed))).string();
        opt.on_commit = [&](const Trial& t) {
            if (t.index == kill_at) throw Killed{};
        };
        try {
            search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
        } catch (const Killed&) {
        }
        opt.on_commit = nullptr;
        const auto resumed = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
        identical += write_trial_log(resumed.trials) == write_trial_log(full.trials) && resumed.best == full.best &&
                     slurp(dir / ("cut" + std::to_string(seed))) == slurp(dir / ("full" + std::to_string(seed)));
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return {identical == 5, std::to_string(identical) + "/5 resumed runs byte-identical (killed after trials " + kills + ")"};
}

Outcome metric_oracles() {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> len(2, 12), small(0, 6);
    std::uniform_real_distribution<double> u(-50.0, 150.0);
    int mismatches = 0;
    auto close = [](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
    };
    for (int inst = 0; inst < 1000; ++inst) {
        const int n = len(rng);
        const bool ties = inst % 3 == 0;
        std::vector<double> a(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = ties ? small(rng) : u(rng);
            p[static_cast<std::size_t>(i)] = ties ? small(rng) : u(rng);
        }
        if (inst % 50 == 0) std::fill(a.begin(), a.end(), 0.0);

        long double ape = 0, sq = 0, ab = 0;
        int kept = 0;
        for (int i = 0; i < n; ++i) {
            const long double e = static_cast<long double>(a[static_cast<std::size_t>(i)]) - p[static_cast<std::size_t>(i)];
            sq += e * e;
            ab += std::fabs(e);
            if (a[static_cast<std::size_t>(i)] != 0) {
                ape += std::fabs(e / a[static_cast<std::size_t>(i)]);
                ++kept;
            }
        }
        const double mape = kept ? static_cast<double>(ape / kept) : std::numeric_limits<double>::quiet_NaN();
        const double rmse = static_cast<double>(std::sqrt(sq / n));
        const double mae = static_cast<double>(ab / n);
        int agree = 0;
        for (int i = 1; i < n; ++i) {
            const double da = a[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i - 1)];
            const double dp = p[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i - 1)];
            const int sa = da > 0 ? 1 : da < 0 ? -1 : 0, sp = dp > 0 ? 1 : dp < 0 ? -1 : 0;
            agree += sa == sp;
        }
        const double dir = static_cast<double>(agree) / (n - 1);

        const Eigen::Map<const Eigen::VectorXd> av(a.data(), n), pv(p.data(), n);
        const auto m = point_metrics(av, pv);
        mismatches += !close(m.mape, mape) || !close(m.rmse, rmse) || !close(m.mae, mae) ||
                      static_cast<int>(m.mape_excluded) != n - kept || !close(directional_accuracy(av, pv), dir);
    }
    return {mismatches == 0, "1000 instances, " + std::to_string(mismatches) + " mismatches at 1e-12"};
}

Outcome golden_presets() {
    const fs::path golden = fs::path(DEMANDCAST_SOURCE_DIR) / "tests/data/presets.golden";
    std::ifstream in(golden);
    if (!in) return {false, "cannot read " + golden.string()};
    int matched = 0, rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++rows;
        std::istringstream row(line);
        std::string name, mode;
        double cps, sps, hps, range;
        int n;
        row >> name >> cps >> sps >> hps >> mode >> range >> n;
        const auto it = cli::builtin_presets().find(name);
        if (it == cli::builtin_presets().end()) continue;
        const Hyperparameters want{cps, sps, hps, seasonality_mode_from_string(mode), range, n};
        matched += it->second == want;
    }
    return {rows == 2 && matched == 2, std::to_string(matched) + "/" + std::to_string(rows) + " presets match field-for-field"};
}

Outcome performance() {
    synth::SynthSpec s;
    s.span_days = 2000;
    s.start = DateStamp(2016, 1, 1);
    s.trend_k = 0.05;
    s.trend_m = 80;
    s.weekly = {0.06, 0.02};
    s.yearly = {0.2, 0.08};
    s.holidays = {{{"promo", DateStamp(2017, 11, 24), 0, 3}, 20}, {{"promo", DateStamp(2018, 11, 23), 0, 3}, 20},
                  {{"promo", DateStamp(2019, 11, 29), 0, 3}, 20}, {{"promo", DateStamp(2020, 11, 27), 0, 3}, 20}};
    s.covid_beta_cases = 0.001;
    s.covid_beta_deaths = 0.2;
    s.waves = {{80, 0.4, 20000, 150}, {330, 0.3, 60000, 100}};
    s.mode = SeasonalityMode::multiplicative;
    s.noise_sigma = 3;
    s.seed = 8;
    const auto data = synth::generate(s);
    const auto design = design_of(data);
    double worst_fit = 0.0;
    for (auto mode : {SeasonalityMode::additive, SeasonalityMode::multiplicative}) {
        Hyperparameters hp;
        hp.seasonality_mode = mode;
        const auto t0 = Clock::now();
        fit(design, hp, data.holidays);
        worst_fit = std::max(worst_fit, seconds_since(t0));
    }

    const auto splits = make_cv_splits(data.series.start(), s.span_days, {1700, 100, 90});
    const auto t0 = Clock::now();
    SearchOptions opt;
    opt.budget = 40;
    opt.seed = 1;
    search(data.series, data.covid, data.holidays, SearchSpace{}, splits, {}, opt);
    const double tune = seconds_since(t0);
    return {worst_fit < 5 && tune < 600 && splits.size() == 3,
            "2000-day fit " + fmt(worst_fit, 3) + " s (slower mode); 40-trial tune over " + std::to_string(splits.size()) +
                " splits " + fmt(tune, 4) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"decomposition identity", decomposition_identity},
        {"coefficient recovery", coefficient_recovery},
        {"COVID regressor value", covid_value},
        {"tuned <= default", tuned_vs_default},
        {"mode selection", mode_selection},
        {"future projection", projection},
        {"month_diff and aggregation", month_aggregation},
        {"no-leakage audit", leakage_audit},
        {"gradient check", gradient_check},
        {"interval coverage", interval_coverage},
        {"checkpoint resume", checkpoint_resume},
        {"metric oracles", metric_oracles},
        {"golden presets", golden_presets},
        {"performance floor", performance},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::cerr << "usage: acceptance [1-" << criteria.size() << " ...]\n";
            return 2;
        }
        selected.insert(n);
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(number)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << number << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed ? 1 : 0;
}
