#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hysterid/errors.hpp"
#include "hysterid/mdof_models.hpp"
#include "hysterid/simulate.hpp"

using namespace hysterid;

namespace {

IsolationSample mean_isolation() { return {4e6, 20e6, 0.16, 5.0}; }
CarSample mean_car() { return {66824.0, 18615.0, 101115.0, 10111.5, 0.1875}; }

double mean_of(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }
double sd_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / (x.size() - 1));
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
    std::vector<double> c;
    for (const auto& r : rows) c.push_back(r[j]);
    return c;
}

}  // namespace

TEST_CASE("isolator stiffness and yield force") {
    CHECK(pre_yield_stiffness(4e6, 0.16) == doctest::Approx(25e6));
    CHECK(yield_force_from_pct(5.0, 1400e3) == doctest::Approx(0.05 * 1400e3 * 9.81));
    CHECK(yield_force_from_pct(5.0, 1400e3) == doctest::Approx(686.7e3));
    CHECK_THROWS_AS(pre_yield_stiffness(4e6, 1.0), InvalidParameter);
    CHECK_THROWS_AS(pre_yield_stiffness(4e6, 0.0), InvalidParameter);
}

TEST_CASE("4-DOF system assembly") {
    const auto sys = build_4dof(mean_isolation(), IsolatorLaw{});
    REQUIRE(sys.dofs() == 4);
    CHECK(sys.M(0, 0) == 500e3);
    for (int i = 1; i < 4; ++i) CHECK(sys.M(i, i) == 300e3);
    // Relative-coordinate base isolation: base row carries k_1 + k_post.
    CHECK(sys.K(0, 0) == doctest::Approx(40e6 + 4e6));
    CHECK(sys.K(0, 1) == doctest::Approx(-40e6));
    CHECK(sys.K(1, 1) == doctest::Approx(80e6));
    CHECK(sys.K(3, 3) == doctest::Approx(40e6));
    CHECK(sys.K(0, 2) == 0.0);

    const auto& law = sys.hysteretic_elements.at(0).law;
    const double Qy = 0.05 * 1400e3 * 9.81;
    CHECK(law.bw.A == doctest::Approx(25e6 / Qy));
    CHECK(law.bw.beta == doctest::Approx(law.bw.A / 2));
    CHECK(sys.L_tilde(0, 0) == doctest::Approx(Qy * (1 - 0.16)));
    // Isolator initial stiffness k_post + q_y A equals k_pre.
    CHECK(4e6 + sys.L_tilde(0, 0) * law.bw.A == doctest::Approx(25e6));

    CHECK_THROWS_AS(build_4dof({4e6, 20e6, 1.2, 5.0}, IsolatorLaw{}), InvalidParameter);
}

TEST_CASE("superstructure Rayleigh damping hits 3% on modes 1 and 2") {
    const Eigen::MatrixXd Ms = 300e3 * Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd Ks(3, 3);
    Ks << 80e6, -40e6, 0, -40e6, 80e6, -40e6, 0, -40e6, 40e6;
    const auto r = rayleigh_damping(Ms, Ks, 1, 2, 0.03);
    const auto w = natural_frequencies(Ms, Ks);
    for (int i : {0, 1}) {
        const double zeta = r.beta1 / (2 * w(i)) + r.beta2 * w(i) / 2;
        CHECK(zeta == doctest::Approx(0.03).epsilon(1e-12));
    }
    // The 4-DOF superstructure block uses exactly this damping.
    const auto sys = build_4dof(mean_isolation(), IsolatorLaw{});
    const Eigen::MatrixXd Cs = r.beta1 * Ms + r.beta2 * Ks;
    CHECK((sys.C.block(1, 1, 3, 3) - Cs).cwiseAbs().maxCoeff() < 1e-6 * Cs.cwiseAbs().maxCoeff());
    CHECK(sys.C(0, 0) == doctest::Approx(20e6 + (Cs * Eigen::Vector3d::Ones()).sum()));
}

TEST_CASE("shear building with three stories reproduces the 4-DOF matrices") {
    ShearBuildingParams p = four_dof_params();
    p.damping_mode_j = 2;
    const auto a = build_shear_building(p, mean_isolation(), IsolatorLaw{});
    const auto b = build_4dof(mean_isolation(), IsolatorLaw{});
    CHECK(a.M == b.M);
    CHECK(a.K == b.K);
    CHECK((a.C - b.C).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("corrosion") {
    CorrosionModel c;
    c.t_years = 0.0;
    CHECK(corrosion_loss(c) == 0.0);
    c.t_years = 1.0;
    CHECK(corrosion_loss(c) == doctest::Approx(80.2));
    c.t_years = 50.0;
    CHECK(corrosion_loss(c) == doctest::Approx(80.2 * std::pow(50.0, 0.59)));
    CHECK(corrosion_loss(c) == doctest::Approx(806.0).epsilon(0.005));
    CHECK(stiffness_retention(c) == doctest::Approx(std::pow(1.0 - corrosion_loss(c) / 10000.0, 3)));

    auto cfg = default_example(ExampleId::building);
    const IsolationSample xi{750e3, 35e3, 0.2, 5.0};
    const auto pristine = build_shear_building(cfg.structure, xi, cfg.lf_law);
    const auto pristine2 = build_shear_building(cfg.structure, xi, cfg.lf_law, std::nullopt);
    CHECK(pristine.K == pristine2.K);
    const auto corroded = build_shear_building(cfg.structure, xi, cfg.hf_law, cfg.corrosion);
    const double ret = stiffness_retention(*cfg.corrosion);
    CHECK(corroded.K(5, 5) == doctest::Approx(pristine.K(5, 5) * ret));
    CHECK(corroded.M == pristine.M);
}

TEST_CASE("stand-in building has a one-second fixed-base period") {
    auto cfg = default_example(ExampleId::building);
    const int n = cfg.structure.n_stories;
    const double k = cfg.structure.story_stiffness;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = i + 1 < n ? 2 * k : k;
        if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = -k;
    }
    const Eigen::MatrixXd M = cfg.structure.story_mass * Eigen::MatrixXd::Identity(n, n);
    const double w1 = natural_frequencies(M, K)(0);
    CHECK(2 * M_PI / w1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("half-car matrices at mean values") {
    const auto sys = build_half_car(mean_car());
    CHECK(sys.C(0, 0) == doctest::Approx(2190.0));
    CHECK(sys.K(1, 1) == doctest::Approx(66824 * 1.27 * 1.27 + 18615 * 1.72 * 1.72));
    CHECK(sys.K(1, 1) == doctest::Approx(162856.0).epsilon(1e-4));
    CHECK(sys.M(0, 0) == doctest::Approx(1794.40));
    CHECK(sys.M(1, 1) == doctest::Approx(34430.50));
    CHECK(sys.K(2, 2) == doctest::Approx(66824.0 + 101115.0));
    CHECK(sys.excitation_map(2, 0) == 1.0);
    CHECK(sys.excitation_map(3, 1) == 1.0);
    REQUIRE(sys.hysteretic_elements.size() == 2);
    CHECK(sys.hysteretic_elements[0].coupling == Coupling::rate);
    CHECK(sys.hysteretic_elements[0].law.bw.n_pow == 2.0);
    const double Qf = 0.015 * (1794.40 + 87.15) * 9.81;
    CHECK(sys.L_tilde(0, 0) == doctest::Approx(Qf * (1 - 0.1875)));
    CHECK(sys.hysteretic_elements[0].law.bw.A == doctest::Approx(0.1875 * 66824.0 / Qf));
}

TEST_CASE("quarter-car keeps the full body mass") {
    const auto sys = build_quarter_car(mean_car());
    REQUIRE(sys.dofs() == 2);
    CHECK(sys.M(0, 0) == doctest::Approx(1794.40));
    CHECK(sys.M(1, 1) == doctest::Approx(87.15));
    CHECK(sys.C(0, 0) == doctest::Approx(1190.0));
    CHECK(sys.K(1, 1) == doctest::Approx(66824.0 + 101115.0));
    CHECK_THROWS_AS(build_quarter_car({-1.0, 1.0, 1.0, 1.0, 0.2}), InvalidParameter);
}

TEST_CASE("uncertain parameter sampling") {
    UncertainSpec spec{{"u", Distribution::uniform(4.0, 6.0)},
                       {"r", Distribution::uniform(0.125, 0.250)},
                       {"ln", Distribution::lognormal(4e6, 0.25e6)},
                       {"tg", Distribution::truncated_gaussian(35e3, 2.5e3, 0.0)}};
    const auto rows = sample_uncertain(spec, 11, 40000);
    REQUIRE(rows.size() == 40000);
    const auto u = column(rows, 0), r = column(rows, 1), ln = column(rows, 2), tg = column(rows, 3);
    CHECK(mean_of(u) == doctest::Approx(5.0).epsilon(0.005));
    CHECK(sd_of(u) == doctest::Approx(2.0 / std::sqrt(12.0)).epsilon(0.02));
    CHECK(sd_of(u) == doctest::Approx(0.57735).epsilon(0.02));
    CHECK(sd_of(r) == doctest::Approx(0.0361).epsilon(0.02));
    CHECK(mean_of(ln) == doctest::Approx(4e6).epsilon(0.005));
    CHECK(sd_of(ln) == doctest::Approx(0.25e6).epsilon(0.03));
    CHECK(*std::min_element(tg.begin(), tg.end()) >= 0.0);
    CHECK(*std::min_element(ln.begin(), ln.end()) > 0.0);

    CHECK(sample_uncertain(spec, 3, 5) == sample_uncertain(spec, 3, 5));
    CHECK(sample_uncertain(spec, 3, 5) != sample_uncertain(spec, 4, 5));

    // Moment matching of the underlying normal.
    const auto [mu, sigma] = Distribution::lognormal(4e6, 0.25e6).log_moments();
    CHECK(std::exp(mu + sigma * sigma / 2) == doctest::Approx(4e6));
    CHECK(std::sqrt((std::exp(sigma * sigma) - 1) * std::exp(2 * mu + sigma * sigma)) == doctest::Approx(0.25e6));

    CHECK_THROWS_AS(Distribution::uniform(2.0, 1.0).validate(), InvalidParameter);
}

TEST_CASE("system validation") {
    auto sys = build_4dof(mean_isolation(), IsolatorLaw{});
    sys.K(0, 1) += 1.0;
    CHECK_THROWS_AS(sys.validate(), InvalidParameter);
    auto neg = build_4dof(mean_isolation(), IsolatorLaw{});
    neg.M(2, 2) = -1.0;
    CHECK_THROWS_AS(neg.validate(), InvalidParameter);
}
