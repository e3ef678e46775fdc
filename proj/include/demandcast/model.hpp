#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "demandcast/core.hpp"
#include "demandcast/features.hpp"
#include "demandcast/ingest.hpp"

namespace demandcast {

enum class SeasonalityMode { additive, multiplicative };

std::string_view to_string(SeasonalityMode mode);
SeasonalityMode seasonality_mode_from_string(std::string_view s);

/// The six tunable knobs governing trend, seasonality and holiday flexibility.
struct Hyperparameters {
    double changepoint_prior_scale = 0.05;
    double seasonality_prior_scale = 10.0;
    double holidays_prior_scale = 10.0;
    SeasonalityMode seasonality_mode = SeasonalityMode::additive;
    double changepoint_range = 0.8;
    int n_changepoints = 25;

    /// Positivity and range sanity needed by any fit.
    void validate() const;
    /// The tuning search bounds (prior scales, range and count limits).
    void validate_search_bounds() const;

    bool operator==(const Hyperparameters&) const = default;
};

struct Seasonality {
    std::string name;
    double period;
    int order;

    bool operator==(const Seasonality&) const = default;
};

struct ModelConfig {
    std::vector<Seasonality> seasonalities{{"weekly", 7.0, 3}, {"yearly", 365.25, 10}};
    double regressor_prior_scale = 10.0;
    int max_iterations = 200;
    double objective_tolerance = 1e-8;
    double coordinate_tolerance = 1e-10;
};

/// Changepoint times on the normalized training axis [0, 1].
struct ChangepointGrid {
    std::vector<double> locations;
};

/// `n` points spaced uniformly over (0, range_frac]: range_frac * i / (n + 1).
ChangepointGrid place_changepoints(int n, double range_frac, std::int64_t span);

/// Piecewise-linear trend g(t) = (k + sum δ_j) t + (m + sum γ_j) over s_j <= t, γ_j = -s_j δ_j.
template <typename Scalar, typename Deltas>
Scalar trend_value(Scalar t, Scalar k, Scalar m, const ChangepointGrid& grid, const Deltas& deltas) {
    Scalar rate = k;
    Scalar offset = m;
    for (std::size_t j = 0; j < grid.locations.size(); ++j) {
        const Scalar s = static_cast<Scalar>(grid.locations[j]);
        if (s <= t) {
            rate += deltas[static_cast<Eigen::Index>(j)];
            offset += -s * deltas[static_cast<Eigen::Index>(j)];
        }
    }
    return rate * t + offset;
}

/// [sin(2π t/P), cos(2π t/P), ..., sin(2π N t/P), cos(2π N t/P)].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fourier_basis(Scalar t, double period, int order) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(2 * order);
    for (int i = 0; i < order; ++i) {
        const Scalar arg = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(i + 1) * t / Scalar(period);
        out[2 * i] = std::sin(arg);
        out[2 * i + 1] = std::cos(arg);
    }
    return out;
}

/// Indicator columns, one per distinct holiday name (sorted), over `rows` days from `start`.
struct HolidayColumns {
    std::vector<std::string> names;
    Eigen::MatrixXd indicators;
};

HolidayColumns holiday_matrix(DateStamp start, Eigen::Index rows, const std::vector<HolidaySpec>& holidays);

struct FittedSeasonality {
    Seasonality spec;
    Eigen::VectorXd coeffs;
};

/// Every estimated parameter. Coefficients live on the target axis scaled by y_scale.
struct FittedModel {
    double y_scale = 1.0;
    double k = 0.0;
    double m = 0.0;
    Eigen::VectorXd deltas;
    ChangepointGrid changepoints;
    std::vector<FittedSeasonality> seasonalities;
    std::vector<HolidaySpec> holidays;
    std::vector<std::string> holiday_names;
    Eigen::VectorXd holiday_coeffs;
    Eigen::Matrix<double, kRegressorCount, 1> regressor_coeffs = Eigen::Matrix<double, kRegressorCount, 1>::Zero();
    double residual_sigma = 0.0;
    SeasonalityMode mode = SeasonalityMode::additive;
    Hyperparameters hyperparameters;
    double regressor_prior_scale = 10.0;
    DateStamp train_start;
    DateStamp train_end;
    double objective = 0.0;
    int iterations = 0;

    Eigen::VectorXd gammas() const { return -Eigen::Map<const Eigen::VectorXd>(changepoints.locations.data(), deltas.size()).cwiseProduct(deltas); }
    double regressor_coeff(RegressorName r) const { return regressor_coeffs[static_cast<int>(r)]; }
    /// Normalized trend time: 0 at the first training day, 1 at the last.
    double time_of(DateStamp d) const;
};

/// Parameter layout of the penalized objective: [k, m, δ, seasonal, holiday, β].
struct ParameterLayout {
    Eigen::Index n_changepoints = 0;
    Eigen::Index n_seasonal = 0;
    Eigen::Index n_holidays = 0;

    Eigen::Index delta_offset() const { return 2; }
    Eigen::Index seasonal_offset() const { return 2 + n_changepoints; }
    Eigen::Index holiday_offset() const { return seasonal_offset() + n_seasonal; }
    Eigen::Index regressor_offset() const { return holiday_offset() + n_holidays; }
    Eigen::Index size() const { return regressor_offset() + kRegressorCount; }
};

/// The MAP objective of the decomposition as penalized least squares on y / y_scale:
///   sum (ŷ - model)² + ‖δ‖₁/τ + ‖c_s‖²/(2σ_s²) + ‖c_h‖²/(2σ_h²) + ‖β‖²/(2σ_r²)
/// with model = g + s + h + Xβ (additive) or g(1 + s) + h + Xβ (multiplicative).
class PenalizedObjective {
public:
    PenalizedObjective(const DesignMatrix& design, const Hyperparameters& hp, const std::vector<HolidaySpec>& holidays,
                       const ModelConfig& config);

    const ParameterLayout& layout() const { return layout_; }
    Eigen::Index rows() const { return y_.size(); }

    double value(const Eigen::VectorXd& theta) const;
    /// The differentiable part (everything except the L1 term).
    double smooth_value(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd smooth_gradient(const Eigen::VectorXd& theta) const;

    const Eigen::VectorXd& scaled_target() const { return y_; }
    double y_scale() const { return y_scale_; }
    const Eigen::MatrixXd& trend_basis() const { return trend_; }
    const Eigen::MatrixXd& seasonal_basis() const { return seasonal_; }
    const Eigen::MatrixXd& holiday_basis() const { return holiday_.indicators; }
    const std::vector<std::string>& holiday_names() const { return holiday_.names; }
    const Eigen::MatrixXd& regressors() const { return regressors_; }
    const ChangepointGrid& grid() const { return grid_; }
    SeasonalityMode mode() const { return hp_.seasonality_mode; }
    double l1_weight() const { return 1.0 / hp_.changepoint_prior_scale; }
    /// Ridge weights for the seasonal, holiday and regressor blocks, in layout order.
    const Eigen::VectorXd& ridge_weights() const { return ridge_; }

    Eigen::VectorXd fitted(const Eigen::VectorXd& theta) const;

private:
    Hyperparameters hp_;
    ParameterLayout layout_;
    double y_scale_;
    Eigen::VectorXd y_;
    ChangepointGrid grid_;
    Eigen::MatrixXd trend_;     // [t, 1, (t - s_j)+]
    Eigen::MatrixXd seasonal_;  // Fourier columns of every seasonality, in config order
    HolidayColumns holiday_;
    Eigen::MatrixXd regressors_;
    Eigen::VectorXd ridge_;     // one weight per seasonal/holiday/regressor parameter
};

/// Fits the decomposition to the design's targets.
FittedModel fit(const DesignMatrix& design, const Hyperparameters& hp, const std::vector<HolidaySpec>& holidays,
                const ModelConfig& config = {});

/// Packs a fitted model into the objective's parameter vector.
Eigen::VectorXd pack_parameters(const FittedModel& model);

/// Per-date components on the original axis. In multiplicative mode `seasonal` and the
/// per-season entries are relative factors: yhat = trend (1 + seasonal) + holidays + regressors.
struct Prediction {
    DateStamp start;
    SeasonalityMode mode = SeasonalityMode::additive;
    Eigen::VectorXd yhat;
    Eigen::VectorXd trend;
    Eigen::VectorXd seasonal;
    std::vector<std::pair<std::string, Eigen::VectorXd>> seasonal_components;
    Eigen::VectorXd holidays;
    Eigen::VectorXd regressors;

    Eigen::Index size() const { return yhat.size(); }
};

Prediction predict(const FittedModel& model, const DesignMatrix& future);

struct Interval {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// Monte-Carlo predictive interval from simulated future trend changes and Gaussian noise.
Interval sample_intervals(const FittedModel& model, const DesignMatrix& future, int n_samples, double level,
                          std::uint64_t seed);

/// Soft-thresholding operator S(x, λ) = sign(x) max(|x| - λ, 0).
inline double soft_threshold(double x, double lambda) {
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

}  // namespace demandcast
