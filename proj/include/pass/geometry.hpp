#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace pass {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

// Deployment geometry and radio constants. The waveguide runs along x at
// height `height`, centered at y = area_half_y; UEs sit on the ground plane.
struct Scenario {
    double area_x = 20.0;
    double area_half_y = 10.0;
    double height = 3.0;
    int num_segments = 8;
    std::vector<double> feed_x;  // empty means segment left edges
    double carrier_freq = 28e9;
    double light_speed = kSpeedOfLight;
    double n_eff = 1.4;
    double kappa0_db_per_m = 0.08;
    double min_spacing = -1.0;  // negative means half a wavelength
    int num_ues = 4;
    double p_max_watts = 0.01;
    double noise_watts = 1e-12;
    double rate_min_bps_hz = 0.1;
    double mse_budget = 10.0;
    std::vector<double> weights;  // empty means all ones

    double segment_length() const { return area_x / num_segments; }
    double wavelength() const { return light_speed / carrier_freq; }
    double guided_wavelength() const { return wavelength() / n_eff; }
    double wavenumber() const;
    double eta() const;
    double alpha() const;  // amplitude attenuation per meter, natural log
    double feed(int m) const;
    double spacing() const { return min_spacing < 0 ? wavelength() / 2 : min_spacing; }
    double weight(int k) const;

    // Throws ConfigError naming the first offending field.
    void validate() const;
};

struct UePosition {
    double x = 0.0;
    double y = 0.0;
};

// One activated PA per segment, x coordinate of each.
struct PaPlacement {
    std::vector<double> x;
};

// Rows are UEs, columns are segments.
using ChannelSet = Eigen::MatrixXcd;

cplx free_space_channel(const UePosition& ue, double pa_x, const Scenario& sc);
cplx in_waveguide_channel(double pa_x, double feed_x, const Scenario& sc);
ChannelSet composite_channel(const std::vector<UePosition>& ues, const PaPlacement& placement,
                             const Scenario& sc);

// Average in-waveguide power gain over a segment of length `len` with
// amplitude attenuation `alpha`; the lossless limit is 1.
double avg_power_gain(double alpha, double len);
double avg_gain_segmented(const Scenario& sc);
double avg_gain_conventional(const Scenario& sc);
double gain_ratio(const Scenario& sc);
double gain_ratio(double alpha, double area_x, int num_segments);

// Zero-based index of the segment whose feed is the nearest one not past the UE.
int optimal_segment(const UePosition& ue, const Scenario& sc);

struct PaPosition {
    double x = 0.0;
    int segment = 0;
    bool complex_root = false;  // stationary point did not exist
};

PaPosition closed_form_pa_position(const UePosition& ue, const Scenario& sc);

// Grid step <= 0 selects a wavelength / 8.
PaPlacement place_pas(const std::vector<UePosition>& ues, const Scenario& sc,
                      double grid_step = -1.0);

}  // namespace pass
