#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "demandcast/aggregate.hpp"
#include "demandcast/core.hpp"
#include "demandcast/features.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/metrics.hpp"
#include "demandcast/model.hpp"

namespace demandcast {

template <typename T>
struct Range {
    T lo;
    T hi;
    bool operator==(const Range&) const = default;
};

struct SearchSpace {
    Range<double> changepoint_prior_scale{0.001, 0.5};
    Range<double> seasonality_prior_scale{1.0, 50.0};
    Range<double> holidays_prior_scale{1.0, 25.0};
    Range<double> changepoint_range{0.8, 0.97};
    Range<int> n_changepoints{15, 55};
    std::vector<SeasonalityMode> modes{SeasonalityMode::additive, SeasonalityMode::multiplicative};

    void validate() const;
    /// FNV-1a over the canonical text form; stored in checkpoint headers.
    std::uint64_t hash() const;
};

/// Trial 0 of every search.
Hyperparameters default_hyperparameters();

/// Deterministic draw for `trial` (log-uniform prior scales, uniform range, count and mode).
/// Trial 0 is always the default configuration.
Hyperparameters sample_trial(const SearchSpace& space, std::uint64_t seed, int trial);

struct CvGeometry {
    int initial_train_days = 365;
    int period_days = 30;
    int horizon_days = 90;

    /// initial = max(365, 40% of span), period 30, horizon 90.
    static CvGeometry defaults_for(std::int64_t span_days);
};

struct CvSplit {
    DateStamp cutoff;  // last training day
    DateStamp test_first;
    DateStamp test_last;
};

/// Expanding-window splits over a series of `span_days` days starting at `start`.
/// Cutoff k sits on day initial + k·period (1-based); splits whose test window runs past
/// the series end are dropped.
std::vector<CvSplit> make_cv_splits(DateStamp start, std::int64_t span_days, const CvGeometry& geometry);

struct CvOptions {
    ModelConfig model;
    SeasonWindows windows;
    /// Monthly buckets (month_diff 1..n) scored per split.
    int monthly_buckets = 3;
};

/// Point metrics over month_diff buckets 1..buckets of aligned monthly totals; every
/// bucket is scored when none fall in that range.
PointMetrics bucket_metrics(const std::vector<MonthlyForecast>& actual, const std::vector<MonthlyForecast>& predicted,
                           int buckets);

/// What a split's fit consumed, reported to an audit hook before fitting.
struct FitInputs {
    const CvSplit& split;
    const SkuSeries& train_series;
    const std::vector<CovidDaily>& train_covid;
    const DesignMatrix& train_design;
    const DesignMatrix& future_design;
};

using FitAudit = std::function<void(const FitInputs&)>;

struct SplitOutcome {
    CvSplit split;
    bool ok = false;
    double mape = 0.0;
    std::string message;
};

struct CvResult {
    double mean_mape = 0.0;
    std::vector<SplitOutcome> splits;
};

/// Fits on each split's history, forecasts its test window, and scores monthly MAPE.
/// Failed splits are skipped (reported in the outcome); all failing raises Error.
CvResult cross_validate(const SkuSeries& series, const std::vector<CovidDaily>& covid,
                        const std::vector<HolidaySpec>& holidays, const Hyperparameters& hp,
                        const std::vector<CvSplit>& splits, const CvOptions& options = {},
                        const FitAudit& audit = {});

struct Trial {
    int index = 0;
    Hyperparameters hp;
    double mape = 0.0;

    bool operator==(const Trial&) const = default;
};

struct SearchOptions {
    int budget = 1;
    std::uint64_t seed = 0;
    /// Empty disables checkpointing.
    std::string checkpoint_path;
    int threads = 1;
    /// Invoked after each trial is committed, in trial order.
    std::function<void(const Trial&)> on_commit;
};

struct SearchResult {
    Trial best;
    std::vector<Trial> trials;
};

/// Random search minimizing cross-validated MAPE. Resumes from `checkpoint_path` when it
/// already holds trials for the same SKU, seed and space.
SearchResult search(const SkuSeries& series, const std::vector<CovidDaily>& covid,
                    const std::vector<HolidaySpec>& holidays, const SearchSpace& space,
                    const std::vector<CvSplit>& splits, const CvOptions& cv, const SearchOptions& options);

std::string write_trial_log(const std::vector<Trial>& trials);

}  // namespace demandcast
