#include "qrate/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <sstream>
#include <utility>

#include "qrate/config.hpp"

namespace qrate {

namespace {

std::string num(double v) { return format_number(v); }

void header_vec(std::ostream& os, const char* prefix, std::size_t n) {
    for (std::size_t i = 1; i <= n; ++i) {
        os << ',' << prefix << i;
    }
}

void row_vec(std::ostream& os, const Vector& v) {
    for (double x : v) {
        os << ',' << num(x);
    }
}

// Minimal SVG canvas with a time axis and either a linear or log10 y axis.
class Canvas {
public:
    Canvas(double t0, double t1, double y0, double y1, bool log_y, std::string title, std::string y_label)
        : t0_(t0), t1_(t1), log_y_(log_y), title_(std::move(title)), y_label_(std::move(y_label)) {
        if (log_y_) {
            y0 = std::log10(y0);
            y1 = std::log10(y1);
        }
        if (!(y1 > y0)) {
            y1 = y0 + 1.0;
        }
        y0_ = y0;
        y1_ = y1;
        if (!(t1_ > t0_)) {
            t1_ = t0_ + 1.0;
        }
    }

    [[nodiscard]] double px(double t) const { return kLeft + (t - t0_) / (t1_ - t0_) * (kWidth - kLeft - kRight); }

    [[nodiscard]] double py(double y) const {
        if (log_y_) {
            y = std::log10(std::max(y, std::pow(10.0, y0_)));
        }
        y = std::clamp(y, y0_, y1_);
        return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom);
    }

    void shade(double ta, double tb) {
        body_ << "<rect x=\"" << fixed(px(ta)) << "\" y=\"" << kTop << "\" width=\"" << fixed(px(tb) - px(ta))
              << "\" height=\"" << (kHeight - kTop - kBottom) << "\" fill=\"#d0d0d0\" fill-opacity=\"0.5\"/>\n";
    }

    void vline(double t) {
        body_ << "<line x1=\"" << fixed(px(t)) << "\" y1=\"" << kTop << "\" x2=\"" << fixed(px(t)) << "\" y2=\""
              << (kHeight - kBottom) << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
        if (pts.empty()) {
            return;
        }
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (const auto& [t, y] : pts) {
            body_ << fixed(px(t)) << ',' << fixed(py(y)) << ' ';
        }
        body_ << "\"/>\n";
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
           << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << body_.str();
        // frame and ticks
        os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << (kWidth - kLeft - kRight)
           << "\" height=\"" << (kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 8; ++i) {
            const double t = t0_ + (t1_ - t0_) * i / 8.0;
            os << "<text x=\"" << fixed(px(t)) << "\" y=\"" << (kHeight - kBottom + 16)
               << "\" text-anchor=\"middle\">" << short_num(t) << "</text>\n";
        }
        const int ticks = log_y_ ? static_cast<int>(std::floor(y1_) - std::ceil(y0_)) : 5;
        for (int i = 0; i <= ticks; ++i) {
            const double v = log_y_ ? std::ceil(y0_) + i : y0_ + (y1_ - y0_) * i / 5.0;
            const double y = log_y_ ? std::pow(10.0, v) : v;
            const std::string label = log_y_ ? "1e" + std::to_string(static_cast<int>(v)) : short_num(v);
            os << "<text x=\"" << (kLeft - 6) << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">" << label
               << "</text>\n";
        }
        os << "<text x=\"" << kWidth / 2 << "\" y=\"" << 18 << "\" text-anchor=\"middle\">" << title_ << "</text>\n";
        os << "<text x=\"" << kWidth / 2 << "\" y=\"" << (kHeight - 6) << "\" text-anchor=\"middle\">t [s]</text>\n";
        os << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
           << ")\" text-anchor=\"middle\">" << y_label_ << "</text>\n";
        os << "</svg>\n";
        return os.str();
    }

private:
    static std::string fixed(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }
    static std::string short_num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }

    static constexpr int kWidth = 900;
    static constexpr int kHeight = 420;
    static constexpr int kLeft = 70;
    static constexpr int kRight = 20;
    static constexpr int kTop = 30;
    static constexpr int kBottom = 45;

    double t0_, t1_, y0_ = 0.0, y1_ = 1.0;
    bool log_y_;
    std::string title_, y_label_;
    std::ostringstream body_;
};

void decorate(Canvas& c, const TrajectoryLog& log, const DisturbanceSignal& sig) {
    const auto& s = log.samples;
    for (std::size_t k = 0; k < s.size();) {
        if (s[k].stage != Stage::searching) {
            ++k;
            continue;
        }
        std::size_t e = k;
        while (e < s.size() && s[e].stage == Stage::searching) {
            ++e;
        }
        c.shade(s[k].t, e < s.size() ? s[e].t : log.horizon);
        k = e;
    }
    for (double t : sig.onsets(log.horizon)) {
        c.vline(t);
    }
}

// Keeps plots small: at most ~6000 points per series, always including
// the last one.
template <class F>
std::vector<std::pair<double, double>> sample_dense(const TrajectoryLog& log, F&& value) {
    std::vector<std::pair<double, double>> pts;
    const std::size_t n = log.dense.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 6000);
    for (std::size_t i = 0; i < n; i += stride) {
        pts.emplace_back(log.dense[i].t, value(log.dense[i]));
    }
    if (n > 0 && (n - 1) % stride != 0) {
        pts.emplace_back(log.dense.back().t, value(log.dense.back()));
    }
    return pts;
}

}  // namespace

void write_samples_csv(std::ostream& os, const TrajectoryLog& log) {
    os << "k,t";
    header_vec(os, "x_", log.nx);
    header_vec(os, "xhat_", log.nx);
    os << ",symbol,stage,E,V,d_sup_prev\n";
    for (const SampleRecord& r : log.samples) {
        os << r.k << ',' << num(r.t);
        row_vec(os, r.x);
        row_vec(os, r.x_hat);
        os << ',' << r.symbol.value << ',' << to_string(r.stage) << ',' << num(r.E) << ',' << num(r.V) << ','
           << num(r.d_sup_prev) << '\n';
    }
}

void write_dense_csv(std::ostream& os, const TrajectoryLog& log) {
    const std::size_t nu = log.dense.empty() ? 0 : log.dense.front().u.size();
    os << "k,t";
    header_vec(os, "x_", log.nx);
    header_vec(os, "xhat_", log.nx);
    header_vec(os, "u_", nu);
    os << '\n';
    for (const DenseRecord& r : log.dense) {
        os << r.k << ',' << num(r.t);
        row_vec(os, r.x);
        row_vec(os, r.x_hat);
        row_vec(os, r.u);
        os << '\n';
    }
}

void write_events_csv(std::ostream& os, const TrajectoryLog& log) {
    os << "kind,k,t\n";
    for (const Event& e : log.events) {
        os << to_string(e.kind) << ',' << e.k << ',' << num(e.t) << '\n';
    }
}

void write_checks_csv(std::ostream& os, const CheckReport& report) {
    os << "name,samples_checked,worst_margin,verdict\n";
    for (const CheckResult& c : report.checks) {
        os << c.name << ',' << c.samples_checked << ',' << num(c.worst_margin) << ',' << to_string(c.verdict) << '\n';
    }
}

std::vector<double> gain_grid(double s_min, double s_max, int points) {
    std::vector<double> out{0.0};
    if (points <= 0) {
        return out;
    }
    if (!(s_min > 0.0) || !(s_max >= s_min)) {
        throw std::invalid_argument("gain grid needs 0 < s_min <= s_max");
    }
    const double a = std::log10(s_min);
    const double b = std::log10(s_max);
    for (int i = 0; i < points; ++i) {
        out.push_back(points == 1 ? s_min : std::pow(10.0, a + (b - a) * i / (points - 1)));
    }
    return out;
}

void write_gains_csv(std::ostream& os, const GainFunctions& f, std::span<const double> grid) {
    os << "s,eta_x,eta_d,eta_hat,gamma_hat_x0,gamma_hat_x,chi_bar1,gamma_hat,gamma_bar,"
          "gamma1_sampled,gamma2_sampled,gamma3_sampled,gamma1,gamma2,gamma3\n";
    for (double s : grid) {
        os << num(s) << ',' << num(f.eta().eta_x(s)) << ',' << num(f.eta().eta_d(s)) << ','
           << num(f.eta().eta_hat(s)) << ',' << num(f.gamma_hat_x0(s)) << ',' << num(f.gamma_hat_x(s)) << ','
           << num(f.chi_bar1(f.E0(), s)) << ',' << num(f.gamma_hat(s)) << ',' << num(f.gamma_bar(s)) << ','
           << num(f.gamma1_sampled(s)) << ',' << num(f.gamma2_sampled(s)) << ',' << num(f.gamma3_sampled(s)) << ','
           << num(f.gamma1(s)) << ',' << num(f.gamma2(s)) << ',' << num(f.gamma3(s)) << '\n';
    }
}

std::string plot_error_radius(const TrajectoryLog& log, const DisturbanceSignal& sig) {
    auto err = [](const DenseRecord& r) { return inf_norm(vec_sub(r.x, r.x_hat)); };
    const auto e_pts = sample_dense(log, err);

    std::vector<std::pair<double, double>> E_pts;  // step function
    for (std::size_t k = 0; k < log.samples.size(); ++k) {
        const double t_next = k + 1 < log.samples.size() ? log.samples[k + 1].t : log.horizon;
        E_pts.emplace_back(log.samples[k].t, log.samples[k].E);
        E_pts.emplace_back(t_next, log.samples[k].E);
    }

    double hi = 0.0;
    double lo_pos = std::numeric_limits<double>::infinity();
    for (const std::vector<std::pair<double, double>>* series : {&e_pts, &std::as_const(E_pts)}) {
        for (const auto& [t, y] : *series) {
            hi = std::max(hi, y);
            if (y > 0.0) {
                lo_pos = std::min(lo_pos, y);
            }
        }
    }
    if (!(hi > 0.0)) {
        hi = 1.0;
    }
    const double top = std::pow(10.0, std::ceil(std::log10(hi)));
    double bottom = std::isfinite(lo_pos) ? std::pow(10.0, std::floor(std::log10(lo_pos))) : top * 1e-3;
    bottom = std::max(bottom, top * 1e-16);

    Canvas c(0.0, log.horizon, bottom, top, true, "error |e(t)| (blue) and quantization radius E_k (red)",
             "magnitude");
    decorate(c, log, sig);
    c.polyline(e_pts, "#1f4fd1");
    c.polyline(E_pts, "#d11f1f");
    return c.str();
}

std::string plot_state_aux(const TrajectoryLog& log, const DisturbanceSignal& sig) {
    const auto x_pts = sample_dense(log, [](const DenseRecord& r) { return r.x.at(0); });
    const auto h_pts = sample_dense(log, [](const DenseRecord& r) { return r.x_hat.at(0); });
    double lo = 0.0;
    double hi = 0.0;
    for (const auto* series : {&x_pts, &h_pts}) {
        for (const auto& [t, y] : *series) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    const double pad = 0.05 * std::max(hi - lo, 1e-12);
    Canvas c(0.0, log.horizon, lo - pad, hi + pad, false, "state x_1(t) (blue) and auxiliary state xhat_1(t) (red)",
             "x_1");
    decorate(c, log, sig);
    c.polyline(x_pts, "#1f4fd1");
    c.polyline(h_pts, "#d11f1f");
    return c.str();
}

}  // namespace qrate
