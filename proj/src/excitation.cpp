#include "hysterid/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"

namespace hysterid {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t step_count(double duration, double dt) {
    const double n = duration / dt;
    const auto N = static_cast<std::size_t>(std::llround(n));
    if (N < 2 || std::abs(n - static_cast<double>(N)) > 1e-6 * n) {
        throw InvalidInput("duration must be a whole number (>= 2) of time steps");
    }
    return N;
}

// Sum_k X_k exp(+2 pi i k j / N) for j = 0..N-1.
std::vector<std::complex<double>> inverse_dft(const std::vector<std::complex<double>>& X) {
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<std::complex<double>> x;
    fft.inv(x, X);
    return x;
}

std::vector<double> time_grid(std::size_t n_points, double dt) {
    std::vector<double> t(n_points);
    for (std::size_t j = 0; j < n_points; ++j) t[j] = static_cast<double>(j) * dt;
    return t;
}

}  // namespace

double ExcitationSignal::at(std::size_t channel, double time) const {
    const std::vector<double>& x = channels.at(channel);
    if (x.empty()) return 0.0;
    const double s = (time - t.front()) / dt;
    if (s <= 0.0) return x.front();
    const auto i = static_cast<std::size_t>(s);
    if (i + 1 >= x.size()) return x.back();
    const double f = s - static_cast<double>(i);
    return x[i] + f * (x[i + 1] - x[i]);
}

double ExcitationSignal::peak(std::size_t channel) const {
    double p = 0.0;
    for (double v : channels.at(channel)) p = std::max(p, std::abs(v));
    return p;
}

void ExcitationSignal::validate() const {
    if (!(dt > 0.0)) throw InvalidInput("signal dt must be positive");
    for (std::size_t j = 1; j < t.size(); ++j) {
        if (std::abs((t[j] - t[j - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(t[j]))) {
            throw InvalidInput("signal time grid is not uniform");
        }
    }
    for (const auto& c : channels) {
        if (c.size() != t.size()) throw InvalidInput("channel length differs from time grid");
        for (double v : c) {
            if (!std::isfinite(v)) throw InvalidInput("non-finite sample in signal");
        }
    }
}

void write_signal_csv(const ExcitationSignal& signal, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t";
    for (std::size_t c = 0; c < signal.n_channels(); ++c) {
        out << ',' << (c < signal.channel_names.size() ? signal.channel_names[c] : "ch" + std::to_string(c));
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t j = 0; j < signal.size(); ++j) {
        out << signal.t[j];
        for (const auto& c : signal.channels) out << ',' << c[j];
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

void KanaiTajimiSpec::validate() const {
    if (!(omega_g > 0.0)) throw InvalidInput("omega_g must be positive");
    if (!(zeta_g > 0.0 && zeta_g < 1.0)) throw InvalidInput("zeta_g must lie in (0, 1)");
    if (!(dt > 0.0) || !(duration > 0.0)) throw InvalidInput("dt and duration must be positive");
    if (!(sigma_w >= 0.0) || !(g > 0.0)) throw InvalidInput("sigma_w must be >= 0 and g > 0");
}

double KanaiTajimiSpec::S0() const {
    return sigma_w * sigma_w * 0.03 * zeta_g / (std::numbers::pi * omega_g * (4.0 * zeta_g * zeta_g + 1.0)) * g * g;
}

double kanai_tajimi_psd(const KanaiTajimiSpec& spec, double omega) {
    const double wg2 = spec.omega_g * spec.omega_g;
    const double w2 = omega * omega;
    const double zz = 4.0 * spec.zeta_g * spec.zeta_g * wg2 * w2;
    return spec.S0() * (zz + wg2 * wg2) / ((w2 - wg2) * (w2 - wg2) + zz);
}

ExcitationSignal kanai_tajimi_realize(const KanaiTajimiSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t N = step_count(spec.duration, spec.dt);
    const double d_omega = kTwoPi / (static_cast<double>(N) * spec.dt);

    Rng rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::vector<std::complex<double>> X(N, {0.0, 0.0});
    // Positive frequencies strictly below Nyquist.
    for (std::size_t k = 1; 2 * k < N; ++k) {
        const double w = static_cast<double>(k) * d_omega;
        const double amp = std::sqrt(2.0 * kanai_tajimi_psd(spec, w) * d_omega);
        X[k] = std::polar(amp, phase(rng));
    }
    const auto x = inverse_dft(X);

    ExcitationSignal s;
    s.dt = spec.dt;
    s.t = time_grid(N + 1, spec.dt);
    std::vector<double> a(N + 1);
    for (std::size_t j = 0; j < N; ++j) a[j] = x[j].real();
    a[N] = a[0];  // the synthesis is periodic in the duration
    s.channels.push_back(std::move(a));
    s.channel_names = {"ug_ddot"};
    s.meta = {{"generator", "kanai_tajimi"},
              {"omega_g", spec.omega_g},
              {"zeta_g", spec.zeta_g},
              {"sigma_w", spec.sigma_w},
              {"g", spec.g},
              {"duration", spec.duration},
              {"dt", spec.dt},
              {"seed", seed}};
    return s;
}

// ---------------------------------------------------------------------------

void RoadSpec::validate() const {
    if (road_class_b < 1 || road_class_b > 7) throw InvalidInput("road class b must be in 1..7");
    if (!(omega_min > 0.0 && omega_min < omega_max)) throw InvalidInput("need 0 < omega_min < omega_max");
    if (!(omega0 > 0.0) || !(velocity > 0.0) || !(t_final > 0.0) || !(dt > 0.0)) {
        throw InvalidInput("omega0, velocity, t_final and dt must be positive");
    }
    if (!(wheelbase >= 0.0)) throw InvalidInput("wheelbase must be >= 0");
    if (log_spacing && n_log_bins < 2) throw InvalidInput("need at least two logarithmic bins");
}

double road_harmonic_amplitude(const RoadSpec& spec, double omega_i, double d_omega) {
    return std::pow(2.0, spec.road_class_b) * std::sqrt(2.0 * std::pow(spec.omega0 / omega_i, spec.a) * d_omega) *
           1e-3;
}

RoadProfile road_profile(const RoadSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t N = step_count(spec.t_final, spec.dt);
    const double d = spec.distance();
    const double dl = spec.velocity * spec.dt;

    RoadProfile out;
    out.dt = spec.dt;
    out.t = time_grid(N + 1, spec.dt);
    out.l.resize(N + 1);
    for (std::size_t j = 0; j <= N; ++j) out.l[j] = static_cast<double>(j) * dl;
    out.h.assign(N + 1, 0.0);

    Rng rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);

    if (!spec.log_spacing) {
        // Omega_i = i / d, so on l_j = j d / N the phase is 2 pi i j / N and
        // every harmonic folds onto DFT bin i mod N exactly.
        const double d_omega = 1.0 / d;
        const auto i_lo = static_cast<std::size_t>(std::ceil(spec.omega_min * d - 1e-9));
        const auto i_hi = static_cast<std::size_t>(std::floor(spec.omega_max * d + 1e-9));
        std::vector<std::complex<double>> X(N, {0.0, 0.0});
        for (std::size_t i = std::max<std::size_t>(i_lo, 1); i <= i_hi; ++i) {
            const double Om = static_cast<double>(i) * d_omega;
            X[i % N] += std::polar(road_harmonic_amplitude(spec, Om, d_omega), phase(rng));
        }
        const auto x = inverse_dft(X);
        for (std::size_t j = 0; j < N; ++j) out.h[j] = x[j].imag();
        out.h[N] = out.h[0];
        out.meta["n_harmonics"] = i_hi >= i_lo ? i_hi - i_lo + 1 : 0;
        out.meta["d_omega"] = d_omega;
    } else {
        const int nb = spec.n_log_bins;
        const double r = std::log(spec.omega_max / spec.omega_min) / nb;
        for (int b = 0; b < nb; ++b) {
            const double lo = spec.omega_min * std::exp(r * b);
            const double hi = spec.omega_min * std::exp(r * (b + 1));
            const double Om = std::sqrt(lo * hi);
            const double S = road_harmonic_amplitude(spec, Om, hi - lo);
            const double ph = phase(rng);
            for (std::size_t j = 0; j <= N; ++j) out.h[j] += S * std::sin(kTwoPi * Om * out.l[j] + ph);
        }
        out.meta["n_harmonics"] = nb;
    }

    out.t_delay = spec.t_delay();
    out.delay_samples = static_cast<std::size_t>(std::llround(out.t_delay / spec.dt));
    out.h_front = out.h;
    out.h_rear.assign(N + 1, 0.0);
    for (std::size_t j = out.delay_samples; j <= N; ++j) out.h_rear[j] = out.h_front[j - out.delay_samples];

    out.meta["generator"] = "iso8608";
    out.meta["road_class_b"] = spec.road_class_b;
    out.meta["velocity"] = spec.velocity;
    out.meta["t_final"] = spec.t_final;
    out.meta["dt"] = spec.dt;
    out.meta["t_delay"] = out.t_delay;
    out.meta["seed"] = seed;
    return out;
}

ExcitationSignal road_to_forces(const RoadProfile& profile, double k_wf, double k_wr) {
    if (!(k_wf > 0.0) || !(k_wr > 0.0)) throw InvalidInput("wheel stiffnesses must be positive");
    ExcitationSignal s;
    s.dt = profile.dt;
    s.t = profile.t;
    std::vector<double> wf(profile.h_front.size()), wr(profile.h_rear.size());
    for (std::size_t j = 0; j < wf.size(); ++j) wf[j] = k_wf * profile.h_front[j];
    for (std::size_t j = 0; j < wr.size(); ++j) wr[j] = k_wr * profile.h_rear[j];
    s.channels = {std::move(wf), std::move(wr)};
    s.channel_names = {"w_f", "w_r"};
    s.meta = profile.meta;
    s.meta["k_wf"] = k_wf;
    s.meta["k_wr"] = k_wr;
    return s;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no) {
    std::vector<double> vals;
    std::string tok;
    std::istringstream is(line);
    while (is >> tok) {
        if (tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw ParseError(line_no, "not a number: '" + tok + "'");
        }
        if (used != tok.size() || !std::isfinite(v)) throw ParseError(line_no, "not a number: '" + tok + "'");
        vals.push_back(v);
    }
    return vals;
}

}  // namespace

ExcitationSignal load_accelerogram(const std::filesystem::path& path, double scale) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open accelerogram " + path.string());

    std::optional<double> header_dt;
    std::vector<double> values;
    std::vector<double> times;
    bool two_column = false;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw.substr(0, raw.find('#'));
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("DT=", 0) == 0 || line.rfind("dt=", 0) == 0) {
            if (header_dt || !values.empty()) throw ParseError(line_no, "DT header must come first and only once");
            const auto v = parse_numbers(line.substr(3), line_no);
            if (v.size() != 1 || !(v[0] > 0.0)) throw ParseError(line_no, "DT header needs one positive value");
            header_dt = v[0];
            continue;
        }
        const auto v = parse_numbers(line, line_no);
        if (header_dt) {
            values.insert(values.end(), v.begin(), v.end());
        } else {
            if (v.size() != 2) throw ParseError(line_no, "expected two columns (t, a) or a DT= header");
            if (!times.empty() && !(v[0] > times.back())) throw ParseError(line_no, "time must increase");
            two_column = true;
            times.push_back(v[0]);
            values.push_back(v[1]);
        }
    }
    if (values.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "accelerogram contains no samples");

    ExcitationSignal s;
    std::vector<double> a;
    if (two_column) {
        double min_step = std::numeric_limits<double>::infinity();
        bool uniform = true;
        for (std::size_t j = 1; j < times.size(); ++j) min_step = std::min(min_step, times[j] - times[j - 1]);
        if (times.size() < 2) min_step = 1.0;
        for (std::size_t j = 1; j < times.size(); ++j) {
            if (std::abs((times[j] - times[j - 1]) - min_step) > 1e-9 * std::max(1.0, times[j])) uniform = false;
        }
        s.dt = min_step;
        if (uniform) {
            a = values;
        } else {
            const auto n = static_cast<std::size_t>(std::floor((times.back() - times.front()) / min_step + 1e-9)) + 1;
            a.resize(n);
            std::size_t k = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double tj = times.front() + static_cast<double>(j) * min_step;
                while (k + 2 < times.size() && times[k + 1] < tj) ++k;
                const double f = std::clamp((tj - times[k]) / (times[k + 1] - times[k]), 0.0, 1.0);
                a[j] = values[k] + f * (values[k + 1] - values[k]);
            }
        }
        s.meta["resampled"] = !uniform;
    } else {
        s.dt = *header_dt;
        a = values;
        s.meta["resampled"] = false;
    }
    for (double& v : a) v *= scale;
    s.t = time_grid(a.size(), s.dt);
    s.channels.push_back(std::move(a));
    s.channel_names = {"ug_ddot"};
    s.meta["generator"] = "file";
    s.meta["path"] = path.string();
    s.meta["scale"] = scale;
    s.meta["peak"] = s.peak(0);
    return s;
}

void scale_to_peak(ExcitationSignal& signal, double peak) {
    const double p = signal.peak(0);
    if (!(p > 0.0)) throw InvalidInput("cannot rescale an all-zero signal");
    const double f = peak / p;
    for (auto& c : signal.channels) {
        for (double& v : c) v *= f;
    }
    signal.meta["peak"] = peak;
}

}  // namespace hysterid
