#include "demandcast/metrics.hpp"

#include <cmath>
#include <limits>

#include "demandcast/text.hpp"

namespace demandcast {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

PointMetrics point_metrics(const Eigen::Ref<const Eigen::VectorXd>& actual,
                           const Eigen::Ref<const Eigen::VectorXd>& predicted) {
    if (actual.size() != predicted.size()) throw ContractViolation("actual and predicted lengths differ");
    if (actual.size() < 1) throw ContractViolation("metrics need at least one pair");

    PointMetrics m;
    double ape = 0.0, se = 0.0, ae = 0.0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        const double err = actual[i] - predicted[i];
        se += err * err;
        ae += std::abs(err);
        if (actual[i] != 0.0) {
            ape += std::abs(err) / std::abs(actual[i]);
            ++m.mape_included;
        } else {
            ++m.mape_excluded;
        }
    }
    const auto n = static_cast<double>(actual.size());
    m.rmse = std::sqrt(se / n);
    m.mae = ae / n;
    m.mape = m.mape_included ? ape / static_cast<double>(m.mape_included) : std::numeric_limits<double>::quiet_NaN();
    return m;
}

double directional_accuracy(const Eigen::Ref<const Eigen::VectorXd>& actual,
                            const Eigen::Ref<const Eigen::VectorXd>& predicted) {
    if (actual.size() != predicted.size()) throw ContractViolation("actual and predicted lengths differ");
    if (actual.size() < 2) throw ContractViolation("directional accuracy needs at least two points");
    int hits = 0;
    for (Eigen::Index i = 1; i < actual.size(); ++i)
        hits += sign(actual[i] - actual[i - 1]) == sign(predicted[i] - predicted[i - 1]);
    return static_cast<double>(hits) / static_cast<double>(actual.size() - 1);
}

std::string write_metrics_report(const std::vector<EvalReport>& rows) {
    std::string out = "sku,horizon_months,mape,rmse,mae,directional_accuracy,n_points,mape_excluded\n";
    for (const auto& r : rows)
        out += r.sku.str() + "," + std::to_string(r.horizon_months) + "," + text::format_double(r.mape) + "," +
               text::format_double(r.rmse) + "," + text::format_double(r.mae) + "," +
               text::format_double(r.directional_accuracy) + "," + std::to_string(r.n_points) + "," +
               std::to_string(r.mape_excluded) + "\n";
    return out;
}

}  // namespace demandcast
