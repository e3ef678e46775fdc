#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "demandcast/synth.hpp"
#include "demandcast/tuning.hpp"

using namespace demandcast;

namespace {

synth::SynthOutput small_synth(std::uint64_t seed) {
    synth::SynthSpec s;
    s.start = DateStamp(2019, 6, 1);
    s.span_days = 500;
    s.trend_k = 0.05;
    s.trend_m = 40;
    s.weekly = {3.0, 1.0};
    s.noise_sigma = 1.5;
    s.seed = seed;
    return synth::generate(s);
}

std::vector<CvSplit> small_splits(const SkuSeries& s) {
    return make_cv_splits(s.start(), static_cast<std::int64_t>(s.size()), CvGeometry{365, 30, 90});
}

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove(path);
    }
    ~TempFile() { std::filesystem::remove(path); }
    std::string read() const {
        std::ifstream in(path, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }
    void write(const std::string& bytes) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
    }
};

MonthlyForecast bucket(int diff, double sales) {
    MonthlyForecast m;
    m.sku = SkuId("A");
    m.month_diff = diff;
    m.sales = sales;
    return m;
}

}  // namespace

TEST_CASE("make_cv_splits enumerates expanding cutoffs") {
    const DateStamp start(2020, 1, 1);
    const auto splits = make_cv_splits(start, 400, CvGeometry{200, 50, 90});
    REQUIRE(splits.size() == 3);
    CHECK(splits[0].cutoff == start + 199);
    CHECK(splits[1].cutoff == start + 249);
    CHECK(splits[2].cutoff == start + 299);
    CHECK(splits[2].test_last == start + 389);
    for (const auto& s : splits) {
        CHECK(s.test_last - s.cutoff == 90);
        CHECK(s.test_first == s.cutoff + 1);
    }
    CHECK_THROWS_AS(make_cv_splits(start, 400, CvGeometry{400, 50, 90}), ConfigError);
    CHECK_THROWS_AS(make_cv_splits(start, 400, CvGeometry{60, 50, 90}), ConfigError);

    const auto g = CvGeometry::defaults_for(2000);
    CHECK(g.initial_train_days == 800);
    CHECK(g.period_days == 30);
    CHECK(g.horizon_days == 90);
    CHECK(CvGeometry::defaults_for(500).initial_train_days == 365);
}

TEST_CASE("bucket_metrics scores month_diff 1..3") {
    const std::vector<MonthlyForecast> actual{bucket(0, 50), bucket(1, 100), bucket(2, 200), bucket(3, 400), bucket(4, 9)};
    const std::vector<MonthlyForecast> predicted{bucket(0, 1), bucket(1, 110), bucket(2, 180), bucket(3, 400), bucket(4, 1)};
    const auto m = bucket_metrics(actual, predicted, 3);
    CHECK(m.mape == doctest::Approx(0.2 / 3.0).epsilon(1e-14));
    CHECK(m.mape_included == 3);
}

TEST_CASE("cross_validate on a constant series is exact") {
    const SkuSeries flat(SkuId("A"), DateStamp(2020, 1, 1), std::vector<double>(500, 50.0));
    CvOptions opt;
    opt.model.seasonalities.clear();
    const auto r = cross_validate(flat, {}, {}, Hyperparameters{}, small_splits(flat), opt);
    CHECK(r.mean_mape < 1e-6);
    CHECK(r.splits.size() == 2);
}

TEST_CASE("cross_validate averages splits and honours the cutoff") {
    const auto data = small_synth(1);
    const auto splits = small_splits(data.series);
    std::vector<DateStamp> cutoffs;
    const auto r = cross_validate(data.series, data.covid, {}, Hyperparameters{}, splits, {}, [&](const FitInputs& in) {
        cutoffs.push_back(in.split.cutoff);
        CHECK(in.train_series.end() == in.split.cutoff);
        CHECK(in.train_design.last_date() == in.split.cutoff);
        CHECK(in.future_design.start == in.split.test_first);
        for (const auto& c : in.train_covid) CHECK(c.date <= in.split.cutoff);
    });
    REQUIRE(cutoffs.size() == splits.size());
    double sum = 0.0;
    for (const auto& s : r.splits) {
        CHECK(s.ok);
        sum += s.mape;
    }
    CHECK(r.mean_mape == doctest::Approx(sum / static_cast<double>(r.splits.size())).epsilon(1e-15));

    // Splits outside the series are skipped; all failing raises.
    auto bad = splits;
    bad.push_back({data.series.end(), data.series.end() + 1, data.series.end() + 90});
    const auto partial = cross_validate(data.series, data.covid, {}, Hyperparameters{}, bad);
    CHECK_FALSE(partial.splits.back().ok);
    CHECK(partial.mean_mape == doctest::Approx(r.mean_mape).epsilon(1e-12));
    CHECK_THROWS_AS(cross_validate(data.series, data.covid, {}, Hyperparameters{}, {bad.back()}), Error);
}

TEST_CASE("sample_trial is deterministic, bounded and anchored at the default") {
    const SearchSpace space;
    CHECK(sample_trial(space, 7, 0) == default_hyperparameters());
    CHECK(default_hyperparameters() == Hyperparameters{0.05, 10, 10, SeasonalityMode::additive, 0.8, 25});
    int multiplicative = 0;
    for (int i = 1; i < 400; ++i) {
        const auto hp = sample_trial(space, 7, i);
        CHECK(hp == sample_trial(space, 7, i));
        CHECK_NOTHROW(hp.validate_search_bounds());
        multiplicative += hp.seasonality_mode == SeasonalityMode::multiplicative;
    }
    CHECK(multiplicative > 150);
    CHECK(multiplicative < 250);
    CHECK_FALSE(sample_trial(space, 7, 1) == sample_trial(space, 8, 1));

    SearchSpace bad;
    bad.changepoint_prior_scale = {0.5, 0.1};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(space.hash() != bad.hash());
}

TEST_CASE("search keeps the default as a floor, is deterministic and thread-invariant") {
    const auto data = small_synth(2);
    const auto splits = small_splits(data.series);
    SearchOptions one;
    one.budget = 1;
    one.seed = 3;
    const auto r1 = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, one);
    CHECK(r1.best.hp == default_hyperparameters());
    CHECK(r1.trials.size() == 1);

    SearchOptions opt;
    opt.budget = 6;
    opt.seed = 3;
    const auto a = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
    CHECK(a.best.mape <= a.trials.front().mape);
    CHECK(a.trials.front().mape == r1.best.mape);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : a.trials) best = std::min(best, t.mape);
    CHECK(a.best.mape == best);

    const auto b = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
    CHECK(a.trials == b.trials);
    opt.threads = 3;
    const auto c = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
    CHECK(a.trials == c.trials);
    CHECK(a.best == c.best);
    CHECK(write_trial_log(a.trials) == write_trial_log(c.trials));

    opt.budget = 0;
    CHECK_THROWS_AS(search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt), ConfigError);
}

TEST_CASE("checkpoint resume reproduces the uninterrupted run") {
    const auto data = small_synth(4);
    const auto splits = small_splits(data.series);
    TempFile full("dc_ckpt_full.csv"), cut("dc_ckpt_cut.csv");

    SearchOptions opt;
    opt.budget = 5;
    opt.seed = 11;
    opt.checkpoint_path = full.path.string();
    const auto reference = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);

    struct Killed {};
    opt.checkpoint_path = cut.path.string();
    opt.on_commit = [](const Trial& t) {
        if (t.index == 2) throw Killed{};
    };
    CHECK_THROWS_AS(search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt), Killed);
    opt.on_commit = nullptr;
    const auto resumed = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
    CHECK(resumed.trials == reference.trials);
    CHECK(resumed.best == reference.best);
    CHECK(cut.read() == full.read());

    // A completed checkpoint replays without evaluating anything new.
    const auto replay = search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
    CHECK(replay.trials == reference.trials);
}

TEST_CASE("corrupt or mismatched checkpoints are rejected") {
    const auto data = small_synth(5);
    const auto splits = small_splits(data.series);
    TempFile file("dc_ckpt_bad.csv");
    SearchOptions opt;
    opt.budget = 2;
    opt.seed = 9;
    opt.checkpoint_path = file.path.string();
    search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt);
    const std::string good = file.read();

    SearchOptions other = opt;
    other.seed = 10;
    CHECK_THROWS_AS(search(data.series, data.covid, {}, SearchSpace{}, splits, {}, other), CheckpointError);

    SearchSpace narrower;
    narrower.n_changepoints = {15, 30};
    CHECK_THROWS_AS(search(data.series, data.covid, {}, narrower, splits, {}, opt), CheckpointError);

    std::string flipped = good;
    const auto pos = flipped.rfind(',') - 3;
    flipped[pos] = flipped[pos] == '1' ? '2' : '1';
    file.write(flipped);
    CHECK_THROWS_AS(search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt), CheckpointError);

    file.write(good.substr(0, good.size() - 5));
    CHECK_THROWS_AS(search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt), CheckpointError);

    file.write("garbage\n");
    CHECK_THROWS_AS(search(data.series, data.covid, {}, SearchSpace{}, splits, {}, opt), CheckpointError);
}
