#include "pass/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pass/errors.hpp"

namespace pass {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTol = 1e-9;

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError(field + ": " + why);
}

double distance_to_pa(const UePosition& ue, double pa_x, const Scenario& sc) {
    const double dx = ue.x - pa_x;
    const double dy = ue.y - sc.area_half_y;
    return std::sqrt(dx * dx + dy * dy + sc.height * sc.height);
}

}  // namespace

double Scenario::wavenumber() const { return 2 * kPi / wavelength(); }

double Scenario::eta() const { return light_speed / (4 * kPi * carrier_freq); }

double Scenario::alpha() const { return kappa0_db_per_m * std::log(10.0) / 20.0; }

double Scenario::feed(int m) const {
    if (feed_x.empty()) return m * segment_length();
    return feed_x.at(static_cast<size_t>(m));
}

double Scenario::weight(int k) const {
    if (weights.empty()) return 1.0;
    return weights.at(static_cast<size_t>(k));
}

void Scenario::validate() const {
    require(area_x > 0, "area_x", "must be positive");
    require(area_half_y >= 0, "area_half_y", "must be nonnegative");
    require(height >= 0, "height", "must be nonnegative");
    require(num_segments >= 1, "num_segments", "must be at least 1");
    require(carrier_freq > 0, "carrier_freq", "must be positive");
    require(light_speed > 0, "light_speed", "must be positive");
    require(n_eff > 0, "n_eff", "must be positive");
    require(kappa0_db_per_m >= 0, "kappa0_db_per_m", "must be nonnegative");
    require(num_ues >= 1, "num_ues", "must be at least 1");
    require(p_max_watts > 0, "p_max_watts", "must be positive");
    require(noise_watts > 0, "noise_watts", "must be positive");
    require(rate_min_bps_hz >= 0, "rate_min_bps_hz", "must be nonnegative");
    require(mse_budget > 0, "mse_budget", "must be positive");
    if (!weights.empty()) {
        require(static_cast<int>(weights.size()) == num_ues, "weights", "needs one entry per UE");
        for (double w : weights) require(w > 0, "weights", "entries must be positive");
    }
    if (!feed_x.empty()) {
        const double len = segment_length();
        require(static_cast<int>(feed_x.size()) == num_segments, "feed_x",
                "needs one entry per segment");
        for (int m = 0; m < num_segments; ++m) {
            require(feed_x[m] >= -kTol && feed_x[m] <= area_x + kTol, "feed_x",
                    "entries must lie in [0, area_x]");
            if (m + 1 < num_segments)
                require(feed_x[m] + len <= feed_x[m + 1] + kTol, "feed_x",
                        "segments overlap or are out of order");
        }
    }
}

cplx free_space_channel(const UePosition& ue, double pa_x, const Scenario& sc) {
    const double d = distance_to_pa(ue, pa_x, sc);
    if (!(d > 0)) throw DegenerateGeometry("UE coincides with the PA");
    return sc.eta() * std::polar(1.0, -sc.wavenumber() * d) / d;
}

cplx in_waveguide_channel(double pa_x, double feed_x, const Scenario& sc) {
    const double x = std::abs(pa_x - feed_x);
    if (x > sc.segment_length() * (1 + kTol))
        throw OutOfSegment("PA is farther from its feed than one segment length");
    const double mag = std::pow(10.0, -sc.kappa0_db_per_m * x / 20.0);
    return std::polar(mag, -2 * kPi * x / sc.guided_wavelength());
}

ChannelSet composite_channel(const std::vector<UePosition>& ues, const PaPlacement& placement,
                             const Scenario& sc) {
    const int M = sc.num_segments;
    if (static_cast<int>(placement.x.size()) != M)
        throw DimensionMismatch("placement must hold one PA per segment");
    ChannelSet h(static_cast<Eigen::Index>(ues.size()), M);
    for (int m = 0; m < M; ++m) {
        const cplx inner = in_waveguide_channel(placement.x[m], sc.feed(m), sc);
        for (size_t k = 0; k < ues.size(); ++k)
            h(static_cast<Eigen::Index>(k), m) =
                inner * free_space_channel(ues[k], placement.x[m], sc);
    }
    return h;
}

double avg_power_gain(double alpha, double len) {
    const double u = 2 * alpha * len;
    if (u == 0) return 1.0;
    return -std::expm1(-u) / u;
}

double avg_gain_segmented(const Scenario& sc) {
    return avg_power_gain(sc.alpha(), sc.segment_length());
}

double avg_gain_conventional(const Scenario& sc) { return avg_power_gain(sc.alpha(), sc.area_x); }

double gain_ratio(double alpha, double area_x, int num_segments) {
    return avg_power_gain(alpha, area_x / num_segments) / avg_power_gain(alpha, area_x);
}

double gain_ratio(const Scenario& sc) { return gain_ratio(sc.alpha(), sc.area_x, sc.num_segments); }

int optimal_segment(const UePosition& ue, const Scenario& sc) {
    const double t = std::ceil((ue.x - sc.feed(0)) / sc.segment_length());
    const int m = static_cast<int>(std::clamp(t, 1.0, static_cast<double>(sc.num_segments)));
    return m - 1;
}

PaPosition closed_form_pa_position(const UePosition& ue, const Scenario& sc) {
    PaPosition out;
    out.segment = optimal_segment(ue, sc);
    const double lo = sc.feed(out.segment);
    const double hi = lo + sc.segment_length();
    const double proj = std::clamp(ue.x, lo, hi);
    const double a = sc.alpha();
    const double dy = ue.y - sc.area_half_y;
    const double d0 = dy * dy + sc.height * sc.height;

    // Power gain of a PA pulled back by s from the projection toward the feed.
    const double reach = proj - lo;
    auto gain = [&](double s) { return std::exp(-2 * a * (reach - s)) / (d0 + s * s); };

    double best_s = 0.0;
    if (a > 0 && reach > 0) {
        const double disc = 1 - 4 * a * a * d0;
        if (disc < 0) {
            out.complex_root = true;
        } else {
            const double s_star = (1 - std::sqrt(disc)) / (2 * a);
            if (s_star <= reach) best_s = s_star;
        }
        if (gain(reach) > gain(best_s)) best_s = reach;
    }
    out.x = std::clamp(proj - best_s, lo, hi);
    return out;
}

PaPlacement place_pas(const std::vector<UePosition>& ues, const Scenario& sc, double grid_step) {
    const double step = grid_step > 0 ? grid_step : sc.wavelength() / 8;
    const double len = sc.segment_length();
    const long n = static_cast<long>(std::floor(len / step));
    PaPlacement out;
    out.x.resize(static_cast<size_t>(sc.num_segments));
    for (int m = 0; m < sc.num_segments; ++m) {
        const double lo = sc.feed(m);
        double best_x = lo;
        double best = -1.0;
        auto consider = [&](double x) {
            const cplx inner = in_waveguide_channel(x, lo, sc);
            double total = 0.0;
            for (const auto& ue : ues) total += std::norm(inner * free_space_channel(ue, x, sc));
            if (total > best) {
                best = total;
                best_x = x;
            }
        };
        for (long i = 0; i <= n; ++i) consider(lo + static_cast<double>(i) * step);
        consider(lo + len);
        out.x[static_cast<size_t>(m)] = best_x;
    }
    return out;
}

}  // namespace pass
