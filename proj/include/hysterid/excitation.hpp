#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace hysterid {

/// Uniformly sampled multi-channel time series.
struct ExcitationSignal {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> channels;
    std::vector<std::string> channel_names;
    nlohmann::json meta = nlohmann::json::object();

    std::size_t size() const { return t.size(); }
    std::size_t n_channels() const { return channels.size(); }
    double duration() const { return t.empty() ? 0.0 : t.back() - t.front(); }

    /// Linear interpolation; held constant outside the sampled range.
    double at(std::size_t channel, double time) const;
    double peak(std::size_t channel = 0) const;

    /// Throws InvalidInput on non-uniform grids, ragged channels or non-finite samples.
    void validate() const;
};

void write_signal_csv(const ExcitationSignal& signal, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Kanai-Tajimi ground motion

struct KanaiTajimiSpec {
    double omega_g = 17.0;   // rad/s
    double zeta_g = 0.3;
    double sigma_w = 2.0;
    double g = 9.81;         // m/s^2
    double duration = 20.0;  // s
    double dt = 0.005;       // s

    void validate() const;
    /// Spectral intensity S0 in m^2/s^3.
    double S0() const;
};

/// One-sided spectral density of the ground acceleration (m^2/s^3 per rad/s).
double kanai_tajimi_psd(const KanaiTajimiSpec& spec, double omega);

/// Spectral-representation synthesis: cosines at k * 2 pi / duration with
/// amplitudes sqrt(2 S dw) and uniform random phases, summed with an FFT.
/// Output is the ground acceleration in m/s^2.
ExcitationSignal kanai_tajimi_realize(const KanaiTajimiSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// ISO 8608 road profiles

struct RoadSpec {
    int road_class_b = 1;
    double omega0 = 1.0;       // cycles/m
    double omega_min = 0.01;   // cycles/m
    double omega_max = 100.0;  // cycles/m
    double a = 2.0;
    double velocity = 20.0;    // m/s
    double t_final = 10.0;     // s
    double wheelbase = 2.99;   // m
    double dt = 0.001;         // s
    /// Linear spacing uses delta Omega = 1 / (velocity * t_final).
    bool log_spacing = false;
    int n_log_bins = 2000;

    void validate() const;
    double distance() const { return velocity * t_final; }
    double t_delay() const { return wheelbase / velocity; }
};

/// Amplitude of one harmonic, in metres.
double road_harmonic_amplitude(const RoadSpec& spec, double omega_i, double d_omega);

struct RoadProfile {
    /// Spatial grid l_j = velocity * t_j and the front-wheel elevation on it.
    std::vector<double> l;
    std::vector<double> h;
    std::vector<double> t;
    std::vector<double> h_front;
    std::vector<double> h_rear;
    double dt = 0.0;
    double t_delay = 0.0;
    std::size_t delay_samples = 0;
    nlohmann::json meta = nlohmann::json::object();
};

/// Rear elevation is the front one delayed by round(t_delay / dt) samples,
/// zero before the delay.
RoadProfile road_profile(const RoadSpec& spec, std::uint64_t seed);

/// Channels [w_f, w_r] = [k_wf h_f, k_wr h_r].
ExcitationSignal road_to_forces(const RoadProfile& profile, double k_wf, double k_wr);

// ---------------------------------------------------------------------------

/// Plain-text accelerogram: '#' comments, then either a "DT=<seconds>"
/// header followed by values, or two columns (t, a). Values are multiplied
/// by `scale` (e.g. 9.81 for records stored in g).
ExcitationSignal load_accelerogram(const std::filesystem::path& path, double scale = 1.0);

/// Rescales every channel so that channel 0 has the given peak magnitude.
void scale_to_peak(ExcitationSignal& signal, double peak);

}  // namespace hysterid
