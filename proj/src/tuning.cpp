#include "demandcast/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "demandcast/aggregate.hpp"
#include "demandcast/metrics.hpp"
#include "demandcast/text.hpp"

namespace demandcast {

namespace {

constexpr int kCheckpointVersion = 1;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double log_uniform(std::mt19937_64& rng, Range<double> r) {
    const double lo = std::log(r.lo);
    const double hi = std::log(r.hi);
    return std::exp(lo + unit_draw(rng) * (hi - lo));
}

std::string trial_payload(const Trial& t) {
    return std::to_string(t.index) + "," + text::format_double(t.hp.changepoint_prior_scale) + "," +
           text::format_double(t.hp.seasonality_prior_scale) + "," + text::format_double(t.hp.holidays_prior_scale) +
           "," + std::string(to_string(t.hp.seasonality_mode)) + "," + text::format_double(t.hp.changepoint_range) +
           "," + std::to_string(t.hp.n_changepoints) + "," + text::format_double(t.mape);
}

double parse_mape(std::string_view field, std::size_t line) {
    if (field == "inf") return std::numeric_limits<double>::infinity();
    return text::parse_double(field, line, "mape");
}

// Append-only trial log: one header line, then one checksummed record per trial.
class Checkpoint {
public:
    Checkpoint(std::string path, const SkuId& sku, std::uint64_t seed, std::uint64_t space_hash)
        : path_(std::move(path)),
          header_("# demandcast-checkpoint,version=" + std::to_string(kCheckpointVersion) + ",sku=" + sku.str() +
                  ",seed=" + std::to_string(seed) + ",space=" + hex(space_hash)),
          seed_(seed) {}

    std::vector<Trial> load() const {
        std::vector<Trial> trials;
        if (!std::filesystem::exists(path_)) return trials;
        const std::string bytes = read_file(path_);
        if (bytes.empty()) return trials;
        if (bytes.back() != '\n') throw CheckpointError("checkpoint '" + path_ + "' ends in a partial record");
        const auto lines = text::lines(bytes);
        if (lines.front() != header_) {
            const auto fields = text::split(lines.front());
            for (auto f : fields)
                if (f.starts_with("seed=") && f != "seed=" + std::to_string(seed_))
                    throw CheckpointError("checkpoint '" + path_ + "' was written with " + std::string(f) +
                                          ", not seed=" + std::to_string(seed_));
            throw CheckpointError("checkpoint '" + path_ + "' header does not match this search: " +
                                  std::string(lines.front()));
        }
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::size_t ln = i + 1;
            const auto comma = lines[i].rfind(',');
            if (comma == std::string_view::npos) throw CheckpointError("corrupt checkpoint record at line " + std::to_string(ln));
            const auto payload = lines[i].substr(0, comma);
            if (hex(fnv1a(payload)) != lines[i].substr(comma + 1))
                throw CheckpointError("checksum mismatch in checkpoint at line " + std::to_string(ln));
            const auto f = text::split(payload);
            try {
                if (f.size() != 8) throw FormatError("expected 8 fields", ln);
                Trial t;
                t.index = static_cast<int>(text::parse_int(f[0], ln, "trial"));
                t.hp.changepoint_prior_scale = text::parse_double(f[1], ln, "changepoint_prior_scale");
                t.hp.seasonality_prior_scale = text::parse_double(f[2], ln, "seasonality_prior_scale");
                t.hp.holidays_prior_scale = text::parse_double(f[3], ln, "holidays_prior_scale");
                t.hp.seasonality_mode = seasonality_mode_from_string(f[4]);
                t.hp.changepoint_range = text::parse_double(f[5], ln, "changepoint_range");
                t.hp.n_changepoints = static_cast<int>(text::parse_int(f[6], ln, "n_changepoints"));
                t.mape = parse_mape(f[7], ln);
                if (t.index != static_cast<int>(trials.size()))
                    throw FormatError("trial " + std::to_string(t.index) + " out of order", ln);
                trials.push_back(t);
            } catch (const ValidationError& e) {
                throw CheckpointError("corrupt checkpoint '" + path_ + "': " + e.what());
            }
        }
        return trials;
    }

    void open_for_append(bool fresh) {
        out_.open(path_, fresh ? std::ios::binary | std::ios::trunc : std::ios::binary | std::ios::app);
        if (!out_) throw CheckpointError("cannot write checkpoint '" + path_ + "'");
        if (fresh) write_line(header_);
    }

    void append(const Trial& t) {
        const std::string payload = trial_payload(t);
        write_line(payload + "," + hex(fnv1a(payload)));
    }

private:
    void write_line(const std::string& line) {
        out_ << line << '\n';
        out_.flush();
        if (!out_) throw CheckpointError("failed writing checkpoint '" + path_ + "'");
    }

    std::string path_;
    std::string header_;
    std::uint64_t seed_;
    std::ofstream out_;
};

double evaluate_trial(const SkuSeries& series, const std::vector<CovidDaily>& covid,
                      const std::vector<HolidaySpec>& holidays, const Hyperparameters& hp,
                      const std::vector<CvSplit>& splits, const CvOptions& cv) {
    try {
        return cross_validate(series, covid, holidays, hp, splits, cv).mean_mape;
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

void SearchSpace::validate() const {
    auto positive_range = [](Range<double> r, const char* name) {
        if (!(r.lo > 0.0 && r.lo <= r.hi)) throw ConfigError(std::string("invalid search range for ") + name);
    };
    positive_range(changepoint_prior_scale, "changepoint_prior_scale");
    positive_range(seasonality_prior_scale, "seasonality_prior_scale");
    positive_range(holidays_prior_scale, "holidays_prior_scale");
    positive_range(changepoint_range, "changepoint_range");
    if (changepoint_range.hi > 1.0) throw ConfigError("changepoint_range upper bound exceeds 1");
    if (n_changepoints.lo < 1 || n_changepoints.lo > n_changepoints.hi)
        throw ConfigError("invalid search range for n_changepoints");
    if (modes.empty()) throw ConfigError("search space has no seasonality modes");
}

std::uint64_t SearchSpace::hash() const {
    std::string s;
    for (auto r : {changepoint_prior_scale, seasonality_prior_scale, holidays_prior_scale, changepoint_range})
        s += text::format_double(r.lo) + ":" + text::format_double(r.hi) + ";";
    s += std::to_string(n_changepoints.lo) + ":" + std::to_string(n_changepoints.hi) + ";";
    for (auto m : modes) s += std::string(to_string(m)) + ";";
    return fnv1a(s);
}

Hyperparameters default_hyperparameters() { return Hyperparameters{}; }

Hyperparameters sample_trial(const SearchSpace& space, std::uint64_t seed, int trial) {
    if (trial == 0) return default_hyperparameters();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::mt19937_64 rng(seq);
    Hyperparameters hp;
    hp.changepoint_prior_scale = log_uniform(rng, space.changepoint_prior_scale);
    hp.seasonality_prior_scale = log_uniform(rng, space.seasonality_prior_scale);
    hp.holidays_prior_scale = log_uniform(rng, space.holidays_prior_scale);
    const auto& cr = space.changepoint_range;
    hp.changepoint_range = cr.lo + unit_draw(rng) * (cr.hi - cr.lo);
    const int span = space.n_changepoints.hi - space.n_changepoints.lo + 1;
    hp.n_changepoints = space.n_changepoints.lo + std::min(span - 1, static_cast<int>(unit_draw(rng) * span));
    const auto nm = static_cast<int>(space.modes.size());
    hp.seasonality_mode = space.modes[static_cast<std::size_t>(std::min(nm - 1, static_cast<int>(unit_draw(rng) * nm)))];
    return hp;
}

CvGeometry CvGeometry::defaults_for(std::int64_t span_days) {
    CvGeometry g;
    g.initial_train_days = std::max(365, static_cast<int>(std::ceil(0.4 * static_cast<double>(span_days))));
    return g;
}

std::vector<CvSplit> make_cv_splits(DateStamp start, std::int64_t span_days, const CvGeometry& geometry) {
    if (geometry.horizon_days < 1) throw ConfigError("CV horizon must be >= 1 day");
    if (geometry.period_days < 1) throw ConfigError("CV period must be >= 1 day");
    if (geometry.initial_train_days < kWarmupDays + 1)
        throw ConfigError("CV initial training window must cover the " + std::to_string(kWarmupDays) +
                          "-day warm-up plus at least one row");
    std::vector<CvSplit> out;
    for (std::int64_t c = geometry.initial_train_days; c + geometry.horizon_days <= span_days; c += geometry.period_days) {
        const DateStamp cutoff = start + (c - 1);
        out.push_back({cutoff, cutoff + 1, cutoff + geometry.horizon_days});
    }
    if (out.empty()) throw ConfigError("CV geometry yields zero splits for a " + std::to_string(span_days) + "-day series");
    return out;
}

PointMetrics bucket_metrics(const std::vector<MonthlyForecast>& actual, const std::vector<MonthlyForecast>& predicted,
                           int buckets) {
    if (actual.size() != predicted.size()) throw ContractViolation("monthly actuals and predictions differ in length");
    std::vector<double> a, p;
    for (std::size_t i = 0; i < actual.size(); ++i)
        if (actual[i].month_diff >= 1 && actual[i].month_diff <= buckets) {
            a.push_back(actual[i].sales);
            p.push_back(predicted[i].sales);
        }
    if (a.empty())
        for (std::size_t i = 0; i < actual.size(); ++i) {
            a.push_back(actual[i].sales);
            p.push_back(predicted[i].sales);
        }
    return point_metrics(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
                         Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
}

CvResult cross_validate(const SkuSeries& series, const std::vector<CovidDaily>& covid,
                        const std::vector<HolidaySpec>& holidays, const Hyperparameters& hp,
                        const std::vector<CvSplit>& splits, const CvOptions& options, const FitAudit& audit) {
    CvResult result;
    double total = 0.0;
    int scored = 0;
    for (const auto& split : splits) {
        SplitOutcome outcome{split, false, 0.0, {}};
        try {
            if (split.test_last > series.end() || split.cutoff < series.start())
                throw ConfigError("split " + split.cutoff.iso() + " falls outside the series");
            const SkuSeries train = series.truncated(split.cutoff);
            std::vector<CovidDaily> train_covid;
            for (const auto& c : covid)
                if (c.date <= split.cutoff) train_covid.push_back(c);
            const DesignMatrix design = assemble_design(train, merge_covid(train, train_covid), options.windows);
            const auto horizon = static_cast<int>(split.test_last - split.cutoff);
            const DesignMatrix future = project_future(design, horizon, options.windows);
            if (audit) audit(FitInputs{split, train, train_covid, design, future});

            const FittedModel model = fit(design, hp, holidays, options.model);
            const Prediction pred = predict(model, future);

            const auto first = static_cast<Eigen::Index>(split.test_first - series.start());
            const Eigen::Map<const Eigen::VectorXd> actual_daily(series.values().data() + first, horizon);
            const auto actual = monthly_totals(split.test_first, actual_daily, series.sku(), split.cutoff);
            const auto predicted = monthly_totals(split.test_first, pred.yhat, series.sku(), split.cutoff);

            const auto m = bucket_metrics(actual, predicted, options.monthly_buckets);
            if (!m.mape_defined()) throw Error("all monthly actuals are zero; MAPE undefined");
            outcome.ok = true;
            outcome.mape = m.mape;
            total += m.mape;
            ++scored;
        } catch (const Error& e) {
            outcome.message = e.what();
        }
        result.splits.push_back(std::move(outcome));
    }
    if (scored == 0) {
        std::string why = splits.empty() ? "no splits" : result.splits.front().message;
        throw Error("every CV split failed (" + why + ")");
    }
    result.mean_mape = total / scored;
    return result;
}

SearchResult search(const SkuSeries& series, const std::vector<CovidDaily>& covid,
                    const std::vector<HolidaySpec>& holidays, const SearchSpace& space,
                    const std::vector<CvSplit>& splits, const CvOptions& cv, const SearchOptions& options) {
    if (options.budget < 1) throw ConfigError("search budget must be >= 1");
    space.validate();

    SearchResult result;
    std::optional<Checkpoint> checkpoint;
    if (!options.checkpoint_path.empty()) {
        checkpoint.emplace(options.checkpoint_path, series.sku(), options.seed, space.hash());
        result.trials = checkpoint->load();
        for (const auto& t : result.trials)
            if (!(t.hp == sample_trial(space, options.seed, t.index)))
                throw CheckpointError("checkpoint trial " + std::to_string(t.index) +
                                      " does not match the seeded trial sequence");
        if (static_cast<int>(result.trials.size()) > options.budget) result.trials.resize(static_cast<std::size_t>(options.budget));
        checkpoint->open_for_append(result.trials.empty());
    }

    auto commit = [&](const Trial& t) {
        if (checkpoint) checkpoint->append(t);
        result.trials.push_back(t);
        if (options.on_commit) options.on_commit(t);
    };

    const int first = static_cast<int>(result.trials.size());
    const int threads = std::max(1, std::min(options.threads, options.budget - first));
    if (threads <= 1) {
        for (int i = first; i < options.budget; ++i) {
            const Hyperparameters hp = sample_trial(space, options.seed, i);
            commit({i, hp, evaluate_trial(series, covid, holidays, hp, splits, cv)});
        }
    } else {
        // Workers evaluate out of order; the calling thread commits strictly by index.
        std::mutex mu;
        std::condition_variable ready;
        std::vector<std::optional<Trial>> done(static_cast<std::size_t>(options.budget));
        int next = first;
        bool stop = false;
        auto worker = [&] {
            for (;;) {
                int i;
                {
                    std::lock_guard lock(mu);
                    if (stop || next >= options.budget) return;
                    i = next++;
                }
                const Hyperparameters hp = sample_trial(space, options.seed, i);
                Trial t{i, hp, evaluate_trial(series, covid, holidays, hp, splits, cv)};
                {
                    std::lock_guard lock(mu);
                    done[static_cast<std::size_t>(i)] = t;
                }
                ready.notify_all();
            }
        };
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
        try {
            for (int i = first; i < options.budget; ++i) {
                std::unique_lock lock(mu);
                ready.wait(lock, [&] { return done[static_cast<std::size_t>(i)].has_value(); });
                const Trial t = *done[static_cast<std::size_t>(i)];
                lock.unlock();
                commit(t);
            }
        } catch (...) {
            {
                std::lock_guard lock(mu);
                stop = true;
            }
            throw;
        }
    }

    result.best = result.trials.front();
    for (const auto& t : result.trials)
        if (t.mape < result.best.mape) result.best = t;
    return result;
}

std::string write_trial_log(const std::vector<Trial>& trials) {
    std::string out =
        "trial,changepoint_prior_scale,seasonality_prior_scale,holidays_prior_scale,seasonality_mode,"
        "changepoint_range,n_changepoints,mape\n";
    for (const auto& t : trials) out += trial_payload(t) + "\n";
    return out;
}

}  // namespace demandcast
