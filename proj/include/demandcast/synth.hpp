#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/model.hpp"

namespace demandcast::synth {

struct TrendChange {
    int day;       // offset from the series start
    double delta;  // slope change, units/day²
};

/// One epidemic wave: a log-normal bump in days since COVID coverage starts.
struct Wave {
    double center_day;
    double width;  // log-scale spread
    double cases_amplitude;
    double deaths_amplitude;
};

struct HolidayEffect {
    HolidaySpec spec;
    double effect;  // units/day while active
};

/// Generating parameters. Trend slope is per day; seasonal coefficient vectors are
/// [sin, cos] pairs over the absolute day number, in units (additive) or as relative
/// factors (multiplicative).
struct SynthSpec {
    std::string sku = "synthetic";
    DateStamp start{2019, 1, 1};
    int span_days = 900;
    double trend_k = 0.0;
    double trend_m = 0.0;
    std::vector<TrendChange> changepoints;
    std::vector<double> weekly;
    std::vector<double> yearly;
    std::vector<HolidayEffect> holidays;
    double covid_beta_cases = 0.0;
    double covid_beta_deaths = 0.0;
    DateStamp covid_start{2020, 1, 21};
    /// Days of COVID records emitted; 0 covers through the end of the series.
    int covid_days = 0;
    std::vector<Wave> waves;
    double noise_sigma = 0.0;
    SeasonalityMode mode = SeasonalityMode::additive;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Components {
    Eigen::VectorXd trend;
    Eigen::VectorXd seasonal;
    Eigen::VectorXd holidays;
    Eigen::VectorXd regressors;
    Eigen::VectorXd noiseless;
    Eigen::VectorXd noise;
};

struct SynthOutput {
    SkuSeries series;
    std::vector<CovidDaily> covid;
    std::vector<HolidaySpec> holidays;
    Components components;
    int floored = 0;

    std::string sales_csv;
    std::string covid_csv;
    std::string holidays_csv;
    std::string truth;
};

/// Builds demand from the decomposition plus Normal(0, noise_sigma) noise, floored at 0.
SynthOutput generate(const SynthSpec& spec);

/// Noiseless demand implied by the spec's components for `days` days from its start,
/// using `covid` as the epidemic record (extrapolation beyond span_days included).
Components components(const SynthSpec& spec, int days, const std::vector<CovidDaily>& covid);

/// The epidemic records implied by the spec's waves.
std::vector<CovidDaily> epidemic_curve(const SynthSpec& spec, int days);

SynthSpec parse_spec(std::string_view json_text);
std::string write_spec(const SynthSpec& spec);

}  // namespace demandcast::synth
