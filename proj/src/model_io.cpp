#include "demandcast/model_io.hpp"

#include <sstream>

#include "demandcast/text.hpp"

namespace demandcast {

namespace {

std::string num(double v) { return text::format_double(v); }

std::string month_day(MonthDay md) { return std::to_string(md.month) + "-" + std::to_string(md.day); }

class Reader {
public:
    explicit Reader(std::string_view bytes) : lines_(text::lines(bytes)) {}

    std::vector<std::string_view> next(std::string_view key, std::size_t min_fields = 2) {
        while (pos_ < lines_.size() && (text::trim(lines_[pos_]).empty() || lines_[pos_].front() == '#')) ++pos_;
        if (pos_ >= lines_.size()) throw FormatError("model file ends before '" + std::string(key) + "'", pos_ + 1);
        auto f = text::split(text::trim(lines_[pos_]), ' ');
        std::erase_if(f, [](std::string_view s) { return s.empty(); });
        ++pos_;
        if (f.empty() || f[0] != key)
            throw FormatError("expected '" + std::string(key) + "'", pos_);
        if (f.size() < min_fields) throw FormatError("too few fields for '" + std::string(key) + "'", pos_);
        return f;
    }

    double real(std::string_view key) { return number(next(key)[1]); }
    long long integer(std::string_view key) { return text::parse_int(next(key)[1], pos_, key); }
    std::string_view word(std::string_view key) { return next(key)[1]; }

    double number(std::string_view field) const {
        if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (field == "inf") return std::numeric_limits<double>::infinity();
        if (field == "-inf") return -std::numeric_limits<double>::infinity();
        return text::parse_double(field, pos_, "value");
    }
    std::size_t line() const { return pos_; }

    DateStamp date(std::string_view field) const {
        try {
            return DateStamp::parse(field);
        } catch (const FormatError& e) {
            throw FormatError(e.what(), pos_);
        }
    }

    MonthDay month_day(std::string_view field) const {
        const auto parts = text::split(field, '-');
        if (parts.size() != 2) throw FormatError("expected month-day", pos_);
        return {static_cast<unsigned>(text::parse_int(parts[0], pos_, "month")),
                static_cast<unsigned>(text::parse_int(parts[1], pos_, "day"))};
    }

private:
    std::vector<std::string_view> lines_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string write_model(const ModelFile& file) {
    const auto& m = file.model;
    const auto& hp = m.hyperparameters;
    const auto& w = file.windows;
    std::ostringstream out;
    out << "demandcast-model " << kModelFileVersion << "\n";
    out << "sku " << file.sku.str() << "\n";
    out << "train_start " << m.train_start.iso() << "\n";
    out << "train_end " << m.train_end.iso() << "\n";
    out << "mode " << to_string(m.mode) << "\n";
    out << "changepoint_prior_scale " << num(hp.changepoint_prior_scale) << "\n";
    out << "seasonality_prior_scale " << num(hp.seasonality_prior_scale) << "\n";
    out << "holidays_prior_scale " << num(hp.holidays_prior_scale) << "\n";
    out << "changepoint_range " << num(hp.changepoint_range) << "\n";
    out << "n_changepoints " << hp.n_changepoints << "\n";
    out << "regressor_prior_scale " << num(m.regressor_prior_scale) << "\n";
    out << "y_scale " << num(m.y_scale) << "\n";
    out << "k " << num(m.k) << "\n";
    out << "m " << num(m.m) << "\n";
    out << "residual_sigma " << num(m.residual_sigma) << "\n";
    out << "objective " << num(m.objective) << "\n";
    out << "iterations " << m.iterations << "\n";
    out << "windows " << month_day(w.summer_peak_begin) << " " << month_day(w.summer_peak_end) << " "
        << month_day(w.back_to_school_begin) << " " << month_day(w.back_to_school_end) << " "
        << month_day(w.holiday_season_begin) << " " << month_day(w.holiday_season_end) << " " << w.black_friday_first
        << " " << w.black_friday_last << "\n";
    out << "changepoints " << m.deltas.size() << "\n";
    for (Eigen::Index j = 0; j < m.deltas.size(); ++j)
        out << "changepoint " << num(m.changepoints.locations[static_cast<std::size_t>(j)]) << " " << num(m.deltas[j])
            << "\n";
    out << "seasonalities " << m.seasonalities.size() << "\n";
    for (const auto& s : m.seasonalities) {
        out << "seasonality " << s.spec.name << " " << num(s.spec.period) << " " << s.spec.order;
        for (double c : s.coeffs) out << " " << num(c);
        out << "\n";
    }
    out << "holiday_specs " << m.holidays.size() << "\n";
    for (const auto& h : m.holidays)
        out << "holiday_spec " << h.name << " " << h.date.iso() << " " << h.lower_window << " " << h.upper_window << "\n";
    out << "holiday_coeffs " << m.holiday_names.size() << "\n";
    for (std::size_t i = 0; i < m.holiday_names.size(); ++i)
        out << "holiday_coeff " << m.holiday_names[i] << " " << num(m.holiday_coeffs[static_cast<Eigen::Index>(i)]) << "\n";
    out << "regressors " << kRegressorCount << "\n";
    for (auto r : all_regressors()) out << "regressor " << to_string(r) << " " << num(m.regressor_coeff(r)) << "\n";
    out << "end\n";
    return out.str();
}

ModelFile read_model(std::string_view bytes) {
    Reader in(bytes);
    const auto version = in.integer("demandcast-model");
    if (version != kModelFileVersion)
        throw FormatError("unsupported model file version " + std::to_string(version), in.line());

    ModelFile file;
    auto& m = file.model;
    auto& hp = m.hyperparameters;
    file.sku = SkuId(std::string(in.word("sku")));
    m.train_start = in.date(in.word("train_start"));
    m.train_end = in.date(in.word("train_end"));
    try {
        m.mode = seasonality_mode_from_string(in.word("mode"));
    } catch (const Error& e) {
        throw FormatError(e.what(), in.line());
    }
    hp.seasonality_mode = m.mode;
    hp.changepoint_prior_scale = in.real("changepoint_prior_scale");
    hp.seasonality_prior_scale = in.real("seasonality_prior_scale");
    hp.holidays_prior_scale = in.real("holidays_prior_scale");
    hp.changepoint_range = in.real("changepoint_range");
    hp.n_changepoints = static_cast<int>(in.integer("n_changepoints"));
    m.regressor_prior_scale = in.real("regressor_prior_scale");
    m.y_scale = in.real("y_scale");
    m.k = in.real("k");
    m.m = in.real("m");
    m.residual_sigma = in.real("residual_sigma");
    m.objective = in.real("objective");
    m.iterations = static_cast<int>(in.integer("iterations"));

    const auto w = in.next("windows", 9);
    auto& sw = file.windows;
    sw.summer_peak_begin = in.month_day(w[1]);
    sw.summer_peak_end = in.month_day(w[2]);
    sw.back_to_school_begin = in.month_day(w[3]);
    sw.back_to_school_end = in.month_day(w[4]);
    sw.holiday_season_begin = in.month_day(w[5]);
    sw.holiday_season_end = in.month_day(w[6]);
    sw.black_friday_first = static_cast<int>(text::parse_int(w[7], in.line(), "black_friday_first"));
    sw.black_friday_last = static_cast<int>(text::parse_int(w[8], in.line(), "black_friday_last"));

    const auto n_cp = in.integer("changepoints");
    if (n_cp < 0) throw FormatError("negative changepoint count", in.line());
    m.deltas.resize(n_cp);
    for (long long j = 0; j < n_cp; ++j) {
        const auto f = in.next("changepoint", 3);
        m.changepoints.locations.push_back(in.number(f[1]));
        m.deltas[j] = in.number(f[2]);
    }

    const auto n_s = in.integer("seasonalities");
    for (long long i = 0; i < n_s; ++i) {
        const auto f = in.next("seasonality", 4);
        FittedSeasonality s;
        s.spec.name = std::string(f[1]);
        s.spec.period = in.number(f[2]);
        s.spec.order = static_cast<int>(text::parse_int(f[3], in.line(), "order"));
        if (s.spec.order < 1 || f.size() != 4 + 2 * static_cast<std::size_t>(s.spec.order))
            throw FormatError("seasonality '" + s.spec.name + "' has the wrong coefficient count", in.line());
        s.coeffs.resize(2 * s.spec.order);
        for (int c = 0; c < 2 * s.spec.order; ++c) s.coeffs[c] = in.number(f[4 + static_cast<std::size_t>(c)]);
        m.seasonalities.push_back(std::move(s));
    }

    const auto n_hs = in.integer("holiday_specs");
    for (long long i = 0; i < n_hs; ++i) {
        const auto f = in.next("holiday_spec", 5);
        m.holidays.push_back({std::string(f[1]), in.date(f[2]), static_cast<int>(text::parse_int(f[3], in.line(), "lower_window")),
                              static_cast<int>(text::parse_int(f[4], in.line(), "upper_window"))});
    }
    const auto n_hc = in.integer("holiday_coeffs");
    m.holiday_coeffs.resize(n_hc);
    for (long long i = 0; i < n_hc; ++i) {
        const auto f = in.next("holiday_coeff", 3);
        m.holiday_names.emplace_back(f[1]);
        m.holiday_coeffs[i] = in.number(f[2]);
    }

    if (in.integer("regressors") != kRegressorCount) throw FormatError("expected 16 regressors", in.line());
    for (auto r : all_regressors()) {
        const auto f = in.next("regressor", 3);
        if (f[1] != to_string(r))
            throw FormatError("expected regressor '" + std::string(to_string(r)) + "'", in.line());
        m.regressor_coeffs[static_cast<int>(r)] = in.number(f[2]);
    }
    in.next("end", 1);

    if (!(m.y_scale > 0.0)) throw ValidationError("model y_scale must be positive", 0);
    if (m.train_end < m.train_start) throw ValidationError("model training span is reversed", 0);
    return file;
}

}  // namespace demandcast
