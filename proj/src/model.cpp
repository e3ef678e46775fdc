#include "demandcast/model.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace demandcast {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd column_scales(const MatrixXd& m) {
    VectorXd s(m.cols());
    const double n = static_cast<double>(std::max<Index>(m.rows(), 1));
    for (Index j = 0; j < m.cols(); ++j) {
        const double rms = std::sqrt(m.col(j).squaredNorm() / n);
        s[j] = rms > 0.0 ? rms : 1.0;
    }
    return s;
}

// Coordinate descent on  dᵀQd - 2cᵀd + Σ λ_j |d_j|, with periodic exact solves on the
// current support. `scale` maps working coordinates back to model units for the
// convergence test.
void lasso_descent(const MatrixXd& Q, const VectorXd& c, const VectorXd& lambda, const VectorXd& scale, double tol,
                   VectorXd& d) {
    const Index S = d.size();
    if (S == 0) return;
    VectorXd q = Q * d;
    constexpr int kMaxSweeps = 200000;
    constexpr int kPolishEvery = 8;

    auto kkt_holds = [&](const VectorXd& cand) {
        const VectorXd grad = c - Q * cand;  // half of the negative smooth gradient
        for (Index j = 0; j < S; ++j) {
            const double slack = 1e-12 * (1.0 + std::abs(c[j]) + lambda[j]);
            if (cand[j] == 0.0) {
                if (std::abs(grad[j]) > lambda[j] / 2 + slack) return false;
            } else if (std::abs(grad[j] - std::copysign(lambda[j] / 2, cand[j])) > slack * 1e3) {
                return false;
            }
        }
        return true;
    };

    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (Index j = 0; j < S; ++j) {
            const double qjj = Q(j, j);
            if (!(qjj > 0.0)) {
                if (d[j] != 0.0) {
                    q -= Q.col(j) * d[j];
                    d[j] = 0.0;
                }
                continue;
            }
            const double rho = c[j] - q[j] + qjj * d[j];
            const double updated = soft_threshold(rho, lambda[j] / 2) / qjj;
            const double step = updated - d[j];
            if (step != 0.0) {
                q += Q.col(j) * step;
                d[j] = updated;
                max_change = std::max(max_change, std::abs(step) / scale[j]);
            }
        }
        if (max_change < tol) return;

        if (sweep % kPolishEvery == 0) {
            std::vector<Index> active;
            for (Index j = 0; j < S; ++j)
                if (d[j] != 0.0) active.push_back(j);
            VectorXd cand = VectorXd::Zero(S);
            if (!active.empty()) {
                const Index a = static_cast<Index>(active.size());
                MatrixXd Qa(a, a);
                VectorXd rhs(a);
                for (Index i = 0; i < a; ++i) {
                    rhs[i] = c[active[i]] - std::copysign(lambda[active[i]] / 2, d[active[i]]);
                    for (Index k = 0; k < a; ++k) Qa(i, k) = Q(active[i], active[k]);
                }
                const VectorXd sol = Qa.ldlt().solve(rhs);
                bool signs_ok = sol.allFinite();
                for (Index i = 0; i < a && signs_ok; ++i) {
                    signs_ok = sol[i] != 0.0 && std::signbit(sol[i]) == std::signbit(d[active[i]]);
                    cand[active[i]] = sol[i];
                }
                if (!signs_ok) continue;
            }
            if (kkt_holds(cand)) {
                d = cand;
                return;
            }
        }
    }
}

struct BlockSolution {
    VectorXd smooth;  // coefficients of the ridge/unpenalized columns
    VectorXd sparse;  // L1-penalized coefficients
};

// argmin ‖y - A a - D d‖² + Σ ridge_i a_i² + λ ‖d‖₁, warm-started from `warm`.
BlockSolution solve_block(const MatrixXd& A, const VectorXd& ridge, const MatrixXd& D, double lambda,
                          const VectorXd& y, const VectorXd& warm, double tol) {
    const Index pa = A.cols();
    const Index pd = D.cols();
    const VectorXd sa = column_scales(A);
    const VectorXd sd = column_scales(D);

    MatrixXd W(A.rows(), pa + pd);
    W.leftCols(pa) = A * sa.cwiseInverse().asDiagonal();
    W.rightCols(pd) = D * sd.cwiseInverse().asDiagonal();
    MatrixXd G = MatrixXd::Zero(pa + pd, pa + pd);
    G.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    const VectorXd b = W.transpose() * y;

    MatrixXd M = G.topLeftCorner(pa, pa);
    M.diagonal() += ridge.cwiseQuotient(sa.cwiseAbs2());
    const Eigen::LDLT<MatrixXd> ldlt(M);
    const VectorXd w = ldlt.solve(b.head(pa));

    BlockSolution out;
    VectorXd dt = warm.size() == pd ? VectorXd(warm.cwiseProduct(sd)) : VectorXd::Zero(pd);
    if (pd > 0) {
        const MatrixXd Z = ldlt.solve(G.topRightCorner(pa, pd));
        MatrixXd Q = G.bottomRightCorner(pd, pd) - G.bottomLeftCorner(pd, pa) * Z;
        Q = (0.5 * (Q + Q.transpose())).eval();
        const VectorXd c = b.tail(pd) - Z.transpose() * b.head(pa);
        const VectorXd lam = VectorXd::Constant(pd, lambda).cwiseQuotient(sd);
        lasso_descent(Q, c, lam, sd, tol, dt);
        out.smooth = (w - Z * dt).cwiseQuotient(sa);
    } else {
        out.smooth = w.cwiseQuotient(sa);
    }
    out.sparse = dt.cwiseQuotient(sd);
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed) {
    // splitmix64 finalizer
    seed += 0x9e3779b97f4a7c15ULL;
    seed = (seed ^ (seed >> 30)) * 0xbf58476d1ce4e5b9ULL;
    seed = (seed ^ (seed >> 27)) * 0x94d049bb133111ebULL;
    return seed ^ (seed >> 31);
}

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace

std::string_view to_string(SeasonalityMode mode) {
    return mode == SeasonalityMode::additive ? "additive" : "multiplicative";
}

SeasonalityMode seasonality_mode_from_string(std::string_view s) {
    if (s == "additive") return SeasonalityMode::additive;
    if (s == "multiplicative") return SeasonalityMode::multiplicative;
    throw ValidationError("unknown seasonality_mode '" + std::string(s) + "'");
}

void Hyperparameters::validate() const {
    if (!(changepoint_prior_scale > 0.0)) throw ValidationError("changepoint_prior_scale must be positive");
    if (!(seasonality_prior_scale > 0.0)) throw ValidationError("seasonality_prior_scale must be positive");
    if (!(holidays_prior_scale > 0.0)) throw ValidationError("holidays_prior_scale must be positive");
    if (!(changepoint_range > 0.0 && changepoint_range <= 1.0))
        throw ValidationError("changepoint_range must lie in (0, 1]");
    if (n_changepoints < 1) throw ValidationError("n_changepoints must be >= 1");
}

void Hyperparameters::validate_search_bounds() const {
    validate();
    auto check = [](double v, double lo, double hi, const char* name) {
        if (v < lo || v > hi)
            throw ValidationError(std::string(name) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    };
    check(changepoint_prior_scale, 0.001, 0.5, "changepoint_prior_scale");
    check(seasonality_prior_scale, 1.0, 50.0, "seasonality_prior_scale");
    check(holidays_prior_scale, 1.0, 25.0, "holidays_prior_scale");
    check(changepoint_range, 0.8, 0.97, "changepoint_range");
    check(n_changepoints, 15, 55, "n_changepoints");
}

ChangepointGrid place_changepoints(int n, double range_frac, std::int64_t span) {
    if (n < 1) throw ContractViolation("n_changepoints must be >= 1");
    if (!(range_frac > 0.0 && range_frac <= 1.0)) throw ContractViolation("changepoint_range must lie in (0, 1]");
    if (span < 2) throw ContractViolation("changepoint placement needs a span of at least two days");
    ChangepointGrid g;
    g.locations.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) g.locations.push_back(range_frac * i / (n + 1));
    return g;
}

HolidayColumns holiday_matrix(DateStamp start, Index rows, const std::vector<HolidaySpec>& holidays) {
    std::set<std::string> unique;
    for (const auto& h : holidays) unique.insert(h.name);
    HolidayColumns out;
    out.names.assign(unique.begin(), unique.end());
    out.indicators = MatrixXd::Zero(rows, static_cast<Index>(out.names.size()));
    for (const auto& h : holidays) {
        const auto col = std::lower_bound(out.names.begin(), out.names.end(), h.name) - out.names.begin();
        const auto first = std::max<std::int64_t>(h.first_day() - start, 0);
        const auto last = std::min<std::int64_t>(h.last_day() - start, rows - 1);
        for (auto t = first; t <= last; ++t) out.indicators(static_cast<Index>(t), col) = 1.0;
    }
    return out;
}

double FittedModel::time_of(DateStamp d) const {
    return static_cast<double>(d - train_start) / static_cast<double>(train_end - train_start);
}

PenalizedObjective::PenalizedObjective(const DesignMatrix& design, const Hyperparameters& hp,
                                       const std::vector<HolidaySpec>& holidays, const ModelConfig& config)
    : hp_(hp) {
    hp_.validate();
    if (!design.target) throw ContractViolation("design matrix has no target column");
    if (design.columns.cols() != kRegressorCount) throw ContractViolation("design matrix must carry 16 regressors");
    const Index n = design.rows();
    if (n < 2) throw ContractViolation("fit needs at least two distinct dates");
    for (auto r : all_regressors())
        if (!design.column(r).allFinite())
            throw ContractViolation("regressor column '" + std::string(to_string(r)) + "' is not finite");
    if (!design.target->allFinite()) throw ContractViolation("target column is not finite");

    const double ymax = design.target->maxCoeff();
    y_scale_ = ymax > 0.0 ? ymax : 1.0;
    y_ = *design.target / y_scale_;

    grid_ = place_changepoints(hp.n_changepoints, hp.changepoint_range, n);
    const auto S = static_cast<Index>(grid_.locations.size());
    trend_.resize(n, 2 + S);
    for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        trend_(i, 0) = t;
        trend_(i, 1) = 1.0;
        for (Index j = 0; j < S; ++j) {
            const double s = grid_.locations[static_cast<std::size_t>(j)];
            trend_(i, 2 + j) = s <= t ? t - s : 0.0;
        }
    }

    Index n_seasonal = 0;
    for (const auto& s : config.seasonalities) n_seasonal += 2 * s.order;
    seasonal_.resize(n, n_seasonal);
    for (Index i = 0; i < n; ++i) {
        const auto day = static_cast<double>(design.date(i).serial());
        Index col = 0;
        for (const auto& s : config.seasonalities) {
            seasonal_.row(i).segment(col, 2 * s.order) = fourier_basis(day, s.period, s.order).transpose();
            col += 2 * s.order;
        }
    }

    holiday_ = holiday_matrix(design.start, n, holidays);
    regressors_ = design.columns;

    layout_.n_changepoints = S;
    layout_.n_seasonal = n_seasonal;
    layout_.n_holidays = holiday_.indicators.cols();

    ridge_.resize(n_seasonal + layout_.n_holidays + kRegressorCount);
    ridge_.head(n_seasonal).setConstant(1.0 / (2.0 * hp.seasonality_prior_scale * hp.seasonality_prior_scale));
    ridge_.segment(n_seasonal, layout_.n_holidays)
        .setConstant(1.0 / (2.0 * hp.holidays_prior_scale * hp.holidays_prior_scale));
    ridge_.tail(kRegressorCount)
        .setConstant(1.0 / (2.0 * config.regressor_prior_scale * config.regressor_prior_scale));
}

VectorXd PenalizedObjective::fitted(const VectorXd& theta) const {
    const auto& L = layout_;
    const VectorXd g = trend_ * theta.head(2 + L.n_changepoints);
    const VectorXd s = seasonal_ * theta.segment(L.seasonal_offset(), L.n_seasonal);
    const VectorXd h = holiday_.indicators * theta.segment(L.holiday_offset(), L.n_holidays);
    const VectorXd r = regressors_ * theta.tail(kRegressorCount);
    if (hp_.seasonality_mode == SeasonalityMode::additive) return g + s + h + r;
    return g.cwiseProduct((1.0 + s.array()).matrix()) + h + r;
}

double PenalizedObjective::smooth_value(const VectorXd& theta) const {
    const VectorXd resid = y_ - fitted(theta);
    const auto penalized = theta.tail(ridge_.size());
    return resid.squaredNorm() + ridge_.dot(penalized.cwiseAbs2());
}

double PenalizedObjective::value(const VectorXd& theta) const {
    return smooth_value(theta) + l1_weight() * theta.segment(layout_.delta_offset(), layout_.n_changepoints).lpNorm<1>();
}

VectorXd PenalizedObjective::smooth_gradient(const VectorXd& theta) const {
    const auto& L = layout_;
    const VectorXd resid = y_ - fitted(theta);
    VectorXd grad(L.size());
    if (hp_.seasonality_mode == SeasonalityMode::additive) {
        grad.head(2 + L.n_changepoints) = -2.0 * trend_.transpose() * resid;
        grad.segment(L.seasonal_offset(), L.n_seasonal) = -2.0 * seasonal_.transpose() * resid;
    } else {
        const VectorXd g = trend_ * theta.head(2 + L.n_changepoints);
        const VectorXd s = seasonal_ * theta.segment(L.seasonal_offset(), L.n_seasonal);
        grad.head(2 + L.n_changepoints) = -2.0 * trend_.transpose() * resid.cwiseProduct((1.0 + s.array()).matrix());
        grad.segment(L.seasonal_offset(), L.n_seasonal) = -2.0 * seasonal_.transpose() * resid.cwiseProduct(g);
    }
    grad.segment(L.holiday_offset(), L.n_holidays) = -2.0 * holiday_.indicators.transpose() * resid;
    grad.tail(kRegressorCount) = -2.0 * regressors_.transpose() * resid;
    grad.tail(ridge_.size()) += 2.0 * ridge_.cwiseProduct(theta.tail(ridge_.size()));
    return grad;
}

FittedModel fit(const DesignMatrix& design, const Hyperparameters& hp, const std::vector<HolidaySpec>& holidays,
                const ModelConfig& config) {
    const PenalizedObjective obj(design, hp, holidays, config);
    const auto& L = obj.layout();
    const Index n = obj.rows();
    const Index S = L.n_changepoints;
    const Index F = L.n_seasonal;
    const Index H = L.n_holidays;
    const auto& T = obj.trend_basis();
    const auto& y = obj.scaled_target();
    const VectorXd ridge_s = obj.ridge_weights().head(F);
    const VectorXd ridge_hr = obj.ridge_weights().tail(H + kRegressorCount);

    VectorXd theta = VectorXd::Zero(L.size());
    int iterations = 0;

    if (hp.seasonality_mode == SeasonalityMode::additive) {
        MatrixXd A(n, 2 + F + H + kRegressorCount);
        A << T.leftCols(2), obj.seasonal_basis(), obj.holiday_basis(), obj.regressors();
        VectorXd ridge(A.cols());
        ridge << 0.0, 0.0, obj.ridge_weights();
        const auto sol = solve_block(A, ridge, T.rightCols(S), obj.l1_weight(), y, VectorXd(), config.coordinate_tolerance);
        theta.head(2) = sol.smooth.head(2);
        theta.segment(L.delta_offset(), S) = sol.sparse;
        theta.tail(F + H + kRegressorCount) = sol.smooth.tail(F + H + kRegressorCount);
        iterations = 1;
    } else {
        // Alternate between the trend block (seasonal factor fixed) and the seasonal
        // block (trend fixed); holiday and regressor terms are refit in both.
        MatrixXd A1(n, 2 + H + kRegressorCount);
        MatrixXd D1(n, S);
        MatrixXd A2(n, F + H + kRegressorCount);
        VectorXd ridge1(A1.cols());
        ridge1 << 0.0, 0.0, ridge_hr;
        VectorXd ridge2(A2.cols());
        ridge2 << ridge_s, ridge_hr;
        VectorXd deltas = VectorXd::Zero(S);
        double previous = std::numeric_limits<double>::infinity();
        double step = 1.0;
        bool converged = false;
        for (iterations = 1; iterations <= config.max_iterations; ++iterations) {
            const VectorXd start = theta;
            const VectorXd factor = (1.0 + (obj.seasonal_basis() * theta.segment(L.seasonal_offset(), F)).array()).matrix();
            A1 << T.leftCols(2), obj.holiday_basis(), obj.regressors();
            A1.leftCols(2) = factor.asDiagonal() * A1.leftCols(2);
            D1 = factor.asDiagonal() * T.rightCols(S);
            const auto trend_sol = solve_block(A1, ridge1, D1, obj.l1_weight(), y, deltas, config.coordinate_tolerance);
            deltas = trend_sol.sparse;
            theta.head(2) = trend_sol.smooth.head(2);
            theta.segment(L.delta_offset(), S) = deltas;
            theta.tail(H + kRegressorCount) = trend_sol.smooth.tail(H + kRegressorCount);

            const VectorXd g = T * theta.head(2 + S);
            A2 << g.asDiagonal() * obj.seasonal_basis(), obj.holiday_basis(), obj.regressors();
            const auto seasonal_sol = solve_block(A2, ridge2, MatrixXd(n, 0), 0.0, y - g, VectorXd(),
                                                  config.coordinate_tolerance);
            theta.segment(L.seasonal_offset(), F + H + kRegressorCount) = seasonal_sol.smooth;

            double current = obj.value(theta);

            // Joint Gauss-Newton step on the linearized model, then a backtracking search.
            {
                const VectorXd gt = T * theta.head(2 + S);
                const VectorXd sv = obj.seasonal_basis() * theta.segment(L.seasonal_offset(), F);
                const VectorXd fac = (1.0 + sv.array()).matrix();
                MatrixXd J(n, 2 + F + H + kRegressorCount);
                J << fac.asDiagonal() * T.leftCols(2), gt.asDiagonal() * obj.seasonal_basis(), obj.holiday_basis(),
                    obj.regressors();
                VectorXd ridge(J.cols());
                ridge << 0.0, 0.0, obj.ridge_weights();
                const VectorXd z = y + gt.cwiseProduct(sv);
                const auto sol = solve_block(J, ridge, fac.asDiagonal() * T.rightCols(S), obj.l1_weight(), z, deltas,
                                             config.coordinate_tolerance);
                VectorXd target(L.size());
                target.head(2) = sol.smooth.head(2);
                target.segment(L.delta_offset(), S) = sol.sparse;
                target.tail(F + H + kRegressorCount) = sol.smooth.tail(F + H + kRegressorCount);
                const VectorXd dir = target - theta;
                for (double a = 1.0; a >= 1.0 / 64.0; a /= 2.0) {
                    const VectorXd trial = theta + a * dir;
                    const double value = obj.value(trial);
                    if (value < current) {
                        theta = trial;
                        deltas = theta.segment(L.delta_offset(), S);
                        current = value;
                        break;
                    }
                }
            }

            if (iterations > 1) {
                // Extrapolate along the last round's direction; kept only when it helps.
                const VectorXd trial = theta + step * (theta - start);
                const double value = obj.value(trial);
                if (value < current) {
                    theta = trial;
                    deltas = theta.segment(L.delta_offset(), S);
                    current = value;
                    step = std::min(2.0 * step, 64.0);
                } else {
                    step = 1.0;
                }
            }
            const double change = std::abs(previous - current);
            if (change <= config.objective_tolerance * std::abs(current) || current == 0.0) {
                converged = true;
                break;
            }
            previous = current;
        }
        if (!converged)
            throw ConvergenceError("multiplicative fit did not converge in " + std::to_string(config.max_iterations) +
                                       " iterations",
                                   obj.value(theta));
    }

    FittedModel model;
    model.y_scale = obj.y_scale();
    model.k = theta[0];
    model.m = theta[1];
    model.deltas = theta.segment(L.delta_offset(), S);
    model.changepoints = obj.grid();
    Index col = 0;
    for (const auto& s : config.seasonalities) {
        model.seasonalities.push_back({s, theta.segment(L.seasonal_offset() + col, 2 * s.order)});
        col += 2 * s.order;
    }
    model.holidays = holidays;
    model.holiday_names = obj.holiday_names();
    model.holiday_coeffs = theta.segment(L.holiday_offset(), H);
    model.regressor_coeffs = theta.tail(kRegressorCount);
    const VectorXd resid = y - obj.fitted(theta);
    const double mean = resid.mean();
    model.residual_sigma = std::max(std::sqrt((resid.array() - mean).square().mean()), 1e-12);
    model.mode = hp.seasonality_mode;
    model.hyperparameters = hp;
    model.regressor_prior_scale = config.regressor_prior_scale;
    model.train_start = design.start;
    model.train_end = design.last_date();
    model.objective = obj.value(theta);
    model.iterations = iterations;
    return model;
}

VectorXd pack_parameters(const FittedModel& model) {
    ParameterLayout L;
    L.n_changepoints = model.deltas.size();
    for (const auto& s : model.seasonalities) L.n_seasonal += s.coeffs.size();
    L.n_holidays = model.holiday_coeffs.size();
    VectorXd theta(L.size());
    theta[0] = model.k;
    theta[1] = model.m;
    theta.segment(L.delta_offset(), L.n_changepoints) = model.deltas;
    Index col = L.seasonal_offset();
    for (const auto& s : model.seasonalities) {
        theta.segment(col, s.coeffs.size()) = s.coeffs;
        col += s.coeffs.size();
    }
    theta.segment(L.holiday_offset(), L.n_holidays) = model.holiday_coeffs;
    theta.tail(kRegressorCount) = model.regressor_coeffs;
    return theta;
}

Prediction predict(const FittedModel& model, const DesignMatrix& future) {
    if (future.columns.cols() != kRegressorCount) throw ContractViolation("future rows must carry all 16 regressors");
    for (auto r : all_regressors())
        if (!future.column(r).allFinite())
            throw ContractViolation("missing regressor column '" + std::string(to_string(r)) + "'");

    const Index n = future.rows();
    const double ys = model.y_scale;
    Prediction p;
    p.start = future.start;
    p.mode = model.mode;
    p.trend.resize(n);
    for (Index i = 0; i < n; ++i)
        p.trend[i] = ys * trend_value(model.time_of(future.date(i)), model.k, model.m, model.changepoints, model.deltas);

    p.seasonal = VectorXd::Zero(n);
    for (const auto& s : model.seasonalities) {
        VectorXd comp(n);
        for (Index i = 0; i < n; ++i)
            comp[i] = fourier_basis(static_cast<double>(future.date(i).serial()), s.spec.period, s.spec.order)
                          .dot(s.coeffs);
        if (model.mode == SeasonalityMode::additive) comp *= ys;
        p.seasonal += comp;
        p.seasonal_components.emplace_back(s.spec.name, std::move(comp));
    }

    p.holidays = VectorXd::Zero(n);
    const auto hol = holiday_matrix(future.start, n, model.holidays);
    for (std::size_t j = 0; j < model.holiday_names.size(); ++j) {
        auto it = std::find(hol.names.begin(), hol.names.end(), model.holiday_names[j]);
        if (it == hol.names.end()) continue;
        p.holidays += ys * model.holiday_coeffs[static_cast<Index>(j)] * hol.indicators.col(it - hol.names.begin());
    }

    p.regressors = ys * (future.columns * model.regressor_coeffs);
    if (model.mode == SeasonalityMode::additive)
        p.yhat = p.trend + p.seasonal + p.holidays + p.regressors;
    else
        p.yhat = p.trend.cwiseProduct((1.0 + p.seasonal.array()).matrix()) + p.holidays + p.regressors;
    return p;
}

Interval sample_intervals(const FittedModel& model, const DesignMatrix& future, int n_samples, double level,
                          std::uint64_t seed) {
    if (n_samples < 100) throw ContractViolation("sample_intervals needs at least 100 samples");
    if (!(level > 0.0 && level < 1.0)) throw ContractViolation("interval level must lie in (0, 1)");

    const Prediction point = predict(model, future);
    const Index n = future.rows();
    const double ys = model.y_scale;

    VectorXd t(n);
    for (Index i = 0; i < n; ++i) t[i] = model.time_of(future.date(i));
    const double t_max = t.maxCoeff();
    const double dt = 1.0 / static_cast<double>(model.train_end - model.train_start);
    const double rate = static_cast<double>(model.deltas.size()) / model.hyperparameters.changepoint_range;
    const double p_change = std::min(1.0, rate * dt);
    const auto future_steps = static_cast<int>(std::ceil(std::max(0.0, t_max - 1.0) / dt - 1e-9));
    const double laplace_scale = model.deltas.size() ? model.deltas.cwiseAbs().mean() : 0.0;

    VectorXd factor = VectorXd::Ones(n);
    if (model.mode == SeasonalityMode::multiplicative) factor += point.seasonal;

    std::mt19937_64 rng(mix_seed(seed));
    std::normal_distribution<double> noise(0.0, model.residual_sigma);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    MatrixXd samples(n, n_samples);
    for (int k = 0; k < n_samples; ++k) {
        VectorXd dev = VectorXd::Zero(n);
        if (future_steps > 0 && laplace_scale > 0.0) {
            std::binomial_distribution<int> count(future_steps, p_change);
            const int changes = count(rng);
            for (int c = 0; c < changes; ++c) {
                const double loc = 1.0 + unit(rng) * (t_max - 1.0);
                const double u = unit(rng) - 0.5;
                const double delta = -laplace_scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
                for (Index i = 0; i < n; ++i)
                    if (t[i] >= loc) dev[i] += delta * (t[i] - loc);
            }
        }
        for (Index i = 0; i < n; ++i) samples(i, k) = point.yhat[i] + ys * (dev[i] * factor[i] + noise(rng));
    }

    Interval out{VectorXd(n), VectorXd(n)};
    std::vector<double> row(static_cast<std::size_t>(n_samples));
    for (Index i = 0; i < n; ++i) {
        for (int k = 0; k < n_samples; ++k) row[static_cast<std::size_t>(k)] = samples(i, k);
        std::sort(row.begin(), row.end());
        out.lower[i] = quantile_sorted(row, (1.0 - level) / 2.0);
        out.upper[i] = quantile_sorted(row, (1.0 + level) / 2.0);
    }
    return out;
}

}  // namespace demandcast
