#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hysterid/errors.hpp"
#include "hysterid/excitation.hpp"
#include "hysterid/random.hpp"

using namespace hysterid;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
    const auto dir = std::filesystem::temp_directory_path() / "hysterid_unit";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_CASE("Kanai-Tajimi intensity and spectrum") {
    const KanaiTajimiSpec spec;
    const double pi = std::acos(-1.0);
    const double S0 = 4.0 * 0.03 * 0.3 / (pi * 17.0 * (4 * 0.09 + 1)) * 9.81 * 9.81;
    CHECK(spec.S0() == doctest::Approx(S0).epsilon(1e-14));
    CHECK(spec.S0() == doctest::Approx(4.77e-2).epsilon(0.005));

    CHECK(kanai_tajimi_psd(spec, 0.0) == doctest::Approx(S0));
    CHECK(kanai_tajimi_psd(spec, 17.0) == doctest::Approx(S0 * (4 * 0.09 + 1) / (4 * 0.09)));
    CHECK(kanai_tajimi_psd(spec, 1e6) < 1e-6 * S0);
    CHECK(kanai_tajimi_psd(spec, 1e4) > kanai_tajimi_psd(spec, 1e5));
}

TEST_CASE("Kanai-Tajimi realization carries the spectral power") {
    KanaiTajimiSpec spec;
    spec.duration = 10.0;
    const auto s = kanai_tajimi_realize(spec, 42);
    const std::size_t N = 2000;
    REQUIRE(s.size() == N + 1);
    CHECK(s.dt == 0.005);
    CHECK(s.t.back() == doctest::Approx(10.0));

    // Parseval: with fixed amplitudes and random phases the mean square over
    // one period equals sum_k S(w_k) dw exactly.
    const double dw = 2 * std::acos(-1.0) / (N * spec.dt);
    double expected = 0.0;
    for (std::size_t k = 1; 2 * k < N; ++k) expected += kanai_tajimi_psd(spec, k * dw) * dw;
    double ms = 0.0;
    for (std::size_t j = 0; j < N; ++j) ms += s.channels[0][j] * s.channels[0][j];
    ms /= N;
    CHECK(ms == doctest::Approx(expected).epsilon(1e-10));

    const auto again = kanai_tajimi_realize(spec, 42);
    CHECK(again.channels == s.channels);
    const auto other = kanai_tajimi_realize(spec, 43);
    CHECK(other.channels != s.channels);
    CHECK(s.meta.at("seed") == 42);

    KanaiTajimiSpec bad;
    bad.zeta_g = 1.5;
    CHECK_THROWS_AS(kanai_tajimi_realize(bad, 1), InvalidInput);
}

TEST_CASE("road harmonic amplitude and wheel delay") {
    RoadSpec spec;
    CHECK(road_harmonic_amplitude(spec, 1.0, 0.005) == doctest::Approx(2e-4));
    CHECK(spec.t_delay() == doctest::Approx(0.1495));
    CHECK(spec.distance() == doctest::Approx(200.0));

    spec.t_final = 2.0;
    const auto prof = road_profile(spec, 5);
    CHECK(prof.delay_samples == 150);
    for (std::size_t j = 0; j < prof.delay_samples; ++j) CHECK(prof.h_rear[j] == 0.0);
    for (std::size_t j = prof.delay_samples; j < prof.h_front.size(); ++j) {
        CHECK(prof.h_rear[j] == prof.h_front[j - prof.delay_samples]);
    }
}

TEST_CASE("road profile matches a direct harmonic sum") {
    RoadSpec spec;
    spec.t_final = 1.0;
    spec.dt = 0.01;
    spec.omega_min = 0.05;
    spec.omega_max = 2.0;
    const auto prof = road_profile(spec, 9);
    // Rebuild the same harmonics with the same phase stream.
    Rng rng(9);
    std::uniform_real_distribution<double> phase(0.0, 2 * std::acos(-1.0));
    const double d = spec.distance();
    std::vector<double> h(prof.l.size(), 0.0);
    for (int i = 1; i <= static_cast<int>(std::floor(spec.omega_max * d + 1e-9)); ++i) {
        if (i < std::ceil(spec.omega_min * d - 1e-9)) continue;
        const double Om = i / d;
        const double S = road_harmonic_amplitude(spec, Om, 1.0 / d);
        const double ph = phase(rng);
        for (std::size_t j = 0; j < h.size(); ++j) h[j] += S * std::sin(2 * std::acos(-1.0) * Om * prof.l[j] + ph);
    }
    for (std::size_t j = 0; j < h.size(); ++j) CHECK(prof.h[j] == doctest::Approx(h[j]).epsilon(1e-9).scale(1e-6));
}

TEST_CASE("road forces scale elevation by wheel stiffness") {
    RoadProfile zero;
    zero.dt = 0.01;
    zero.t = {0.0, 0.01, 0.02};
    zero.h_front = {0.0, 0.0, 0.0};
    zero.h_rear = {0.0, 0.0, 0.0};
    const auto w0 = road_to_forces(zero, 101115.0, 10111.5);
    for (const auto& c : w0.channels)
        for (double v : c) CHECK(v == 0.0);

    RoadProfile mm = zero;
    mm.h_front = {1e-3, 1e-3, 1e-3};
    const auto w = road_to_forces(mm, 101115.0, 10111.5);
    CHECK(w.channels[0][1] == doctest::Approx(101.115));
    CHECK(w.channel_names == std::vector<std::string>{"w_f", "w_r"});
    CHECK_THROWS_AS(road_to_forces(mm, -1.0, 1.0), InvalidInput);
}

TEST_CASE("accelerogram files") {
    const auto dt_file = temp_file("dt.txt", "# synthetic\nDT=0.02\n0 1 0\n");
    const auto s = load_accelerogram(dt_file);
    CHECK(s.size() == 3);
    CHECK(s.dt == 0.02);
    CHECK(s.peak() == 1.0);

    const auto cols = temp_file("cols.txt", "0.0 0.5\n0.01 -2.0\n0.02 1.0\n");
    const auto c = load_accelerogram(cols, 9.81);
    CHECK(c.size() == 3);
    CHECK(c.dt == doctest::Approx(0.01));
    CHECK(c.peak() == doctest::Approx(2.0 * 9.81));

    const auto empty = temp_file("empty.txt", "");
    CHECK_THROWS_AS(load_accelerogram(empty), ParseError);

    const auto bad = temp_file("bad.txt", "0.0 0.5\n0.01 x\n");
    try {
        load_accelerogram(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(load_accelerogram("/nonexistent/record.txt"), IoError);

    auto scaled = load_accelerogram(dt_file);
    scale_to_peak(scaled, 0.348 * 9.81);
    CHECK(scaled.peak() == doctest::Approx(0.348 * 9.81));
}

TEST_CASE("signal interpolation") {
    ExcitationSignal s;
    s.dt = 0.1;
    s.t = {0.0, 0.1, 0.2};
    s.channels = {{0.0, 1.0, 3.0}};
    CHECK(s.at(0, 0.05) == doctest::Approx(0.5));
    CHECK(s.at(0, 0.15) == doctest::Approx(2.0));
    CHECK(s.at(0, 5.0) == 3.0);
    CHECK(s.at(0, -1.0) == 0.0);
    s.channels[0][1] = std::nan("");
    CHECK_THROWS_AS(s.validate(), InvalidInput);
}
