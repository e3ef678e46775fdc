#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"

namespace demandcast {

struct PointMetrics {
    /// NaN when every actual is zero.
    double mape = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::size_t mape_included = 0;
    std::size_t mape_excluded = 0;

    bool mape_defined() const { return mape_included > 0; }
};

/// MAPE as a fraction over pairs with nonzero actuals; RMSE and MAE over all pairs.
PointMetrics point_metrics(const Eigen::Ref<const Eigen::VectorXd>& actual,
                           const Eigen::Ref<const Eigen::VectorXd>& predicted);

/// Share of consecutive steps whose change has the same sign (zero is its own sign).
double directional_accuracy(const Eigen::Ref<const Eigen::VectorXd>& actual,
                            const Eigen::Ref<const Eigen::VectorXd>& predicted);

struct EvalReport {
    SkuId sku;
    int horizon_months = 1;
    double mape = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    double directional_accuracy = 0.0;
    std::size_t n_points = 0;
    std::size_t mape_excluded = 0;
};

std::string write_metrics_report(const std::vector<EvalReport>& rows);

}  // namespace demandcast
