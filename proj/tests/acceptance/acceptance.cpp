// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N] --cli <hysterid> --work <dir> --desk-dir <dir>
//
// Criteria 6-9 train networks at desk scale and cache their sweep rows in
// the work directory, keyed by a hash of the desk configuration, so that
// criterion 10 can reuse them. Delete the work directory to force a rerun.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <unsupported/Eigen/FFT>

#include "CLI11.hpp"
#include "json.hpp"

#include "hysterid/bifidelity.hpp"
#include "hysterid/errors.hpp"
#include "hysterid/excitation.hpp"
#include "hysterid/hysteresis.hpp"
#include "hysterid/mdof_models.hpp"
#include "hysterid/neuralop.hpp"
#include "hysterid/run_config.hpp"
#include "hysterid/simulate.hpp"

namespace fs = std::filesystem;
using namespace hysterid;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path cli;
    fs::path work;
    fs::path desk_dir;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return "[" + s + "]";
}

void progress(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

// ---------------------------------------------------------------------------
// 1. Reduction identities

Outcome reductions() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> Z(-1.2, 1.2), V(-3.0, 3.0), E(0.0, 5.0), P(0.5, 3.0);
    double worst_bw = 0.0, worst_h = 0.0;
    for (int i = 0; i < 10000; ++i) {
        BoucWenParams bw;
        bw.A = P(rng);
        bw.beta = 0.5 * P(rng);
        bw.gamma = 0.5 * P(rng);
        bw.n_pow = 1.0 + std::floor(P(rng));
        const double z = Z(rng), v = V(rng), e = E(rng);
        const double ref = bouc_wen_rate(bw, z, v);
        const double got = baber_wen_rate(bw, DegradationParams{0.0, 0.0, 0.0}, {z, e}, v);
        worst_bw = std::max(worst_bw, std::abs(got - ref) / std::max(std::abs(ref), 1e-300));

        PinchingParams pn{0.0, 1.0, 0.5, 0.25, 0.15, 0.5};
        pn.p = P(rng);
        const double h = pinching_shape(bw, DegradationParams{0.6, 0.02, 0.02}, pn, {z, e}, v);
        worst_h = std::max(worst_h, std::abs(h - 1.0));
    }
    return {worst_bw <= 1e-12 && worst_h <= 1e-12,
            "max rel |degrading - classic| = " + fmt(worst_bw) + ", max |h - 1| = " + fmt(worst_h) + " over 1e4 samples"};
}

// ---------------------------------------------------------------------------
// 2. z stays within [-1, 1] under consistent constants

Outcome z_bounded() {
    const auto cfg = default_example(ExampleId::ex1_caseI);
    const auto rows = sample_uncertain(cfg.uncertain, 202, 100);
    double worst = 0.0;
    for (std::size_t r = 0; r < 100; ++r) {
        KanaiTajimiSpec kt = cfg.kanai_tajimi;
        kt.duration = 20.0;
        kt.dt = 0.005;
        auto exc = kanai_tajimi_realize(kt, 5000 + r);
        const auto sys = build_4dof(isolation_sample_from(rows[r]), IsolatorLaw{LawKind::classic, 1.0, {}, {}});
        const auto ss = assemble(sys, LawKind::classic, std::move(exc), "z");
        const auto res = integrate(ss, {IntegratorSpec::Method::rk4, 0.005}, Eigen::VectorXd::Zero(ss.state_dim()),
                                   20.0, true);
        const Eigen::Index iz = 2 * ss.dofs();
        for (const auto& x : res.states) worst = std::max(worst, std::abs(x(iz)));
    }
    return {worst <= 1.001, "max |z| = " + fmt(worst) + " over 100 realizations, every step"};
}

// ---------------------------------------------------------------------------
// 3. RK4 order on a linear oscillator

Outcome integrator_order() {
    const double wn = 2 * std::acos(-1.0), zeta = 0.02, T = 4.0;
    const double wd = wn * std::sqrt(1 - zeta * zeta);
    auto exact_x = [&](double t) {
        return std::exp(-zeta * wn * t) * (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t));
    };
    auto exact_v = [&](double t) { return -std::exp(-zeta * wn * t) * wn * wn / wd * std::sin(wd * t); };
    std::vector<double> errs, ratios;
    for (int level = 0; level < 4; ++level) {
        const double dt = 0.04 / std::pow(2.0, level);
        MdofSystem s;
        s.M = Eigen::MatrixXd::Constant(1, 1, 1.0);
        s.C = Eigen::MatrixXd::Constant(1, 1, 2 * zeta * wn);
        s.K = Eigen::MatrixXd::Constant(1, 1, wn * wn);
        s.L_tilde = Eigen::MatrixXd::Zero(1, 0);
        s.excitation_map = Eigen::MatrixXd::Ones(1, 1);
        s.labels = {"x"};
        ExcitationSignal w;
        w.dt = dt;
        const auto n = static_cast<std::size_t>(std::llround(T / dt)) + 1;
        for (std::size_t j = 0; j < n; ++j) w.t.push_back(j * dt);
        w.channels = {std::vector<double>(n, 0.0)};
        w.channel_names = {"f"};
        StateSpaceSystem ss(s, w, QoiSelector{QoiKind::displacement, 0, "x"});
        Eigen::VectorXd x0(2);
        x0 << 1.0, 0.0;
        const auto r = integrate(ss, {IntegratorSpec::Method::rk4, dt}, x0, T);
        // Terminal state error with velocity scaled by the natural frequency.
        errs.push_back(std::hypot(r.final_state(0) - exact_x(T), (r.final_state(1) - exact_v(T)) / wn));
        if (level > 0) ratios.push_back(errs[level - 1] / errs[level]);
    }
    bool ok = true;
    for (double q : ratios) ok = ok && q >= 12.0 && q <= 20.0;
    return {ok, "error ratios per halving " + join(ratios)};
}

// ---------------------------------------------------------------------------
// 4. Gradient check

Outcome gradient_check() {
    const DeepOnetArch arch;  // m = 100, q = 4, branch 3 x 50, trunk 2 x 50, p = 8
    DeepOnetModel model = init_deeponet(arch, 404);
    std::mt19937_64 rng(405);
    std::normal_distribution<double> N(0.0, 1.0);
    OperatorBatch b;
    const int functions = 8, points = 25;
    b.branch.resize(arch.m, functions);
    for (Eigen::Index i = 0; i < b.branch.size(); ++i) b.branch.data()[i] = N(rng);
    b.trunk.resize(arch.q + 1, functions * points);
    b.target.resize(functions * points);
    for (int k = 0; k < functions * points; ++k) {
        b.trunk(0, k) = 20.0 * (k % points) / points;
        for (int r = 1; r <= arch.q; ++r) b.trunk(r, k) = N(rng);
        b.target(k) = N(rng);
        b.owner.push_back(k / points);
    }
    model.fit_normalization(b);
    model.c0 = 0.05;
    const Eigen::VectorXd g = gradient(model, b).flatten();
    const Eigen::VectorXd theta = model.flatten();
    std::uniform_int_distribution<Eigen::Index> pick(0, theta.size() - 1);
    auto L = [&](const Eigen::VectorXd& t) {
        DeepOnetModel m = model;
        m.unflatten(t);
        return loss(m, b);
    };
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const Eigen::Index i = pick(rng);
        const double h = 1e-4 * std::max(1.0, std::abs(theta(i)));
        Eigen::VectorXd tp1 = theta, tm1 = theta, tp2 = theta, tm2 = theta;
        tp1(i) += h;
        tm1(i) -= h;
        tp2(i) += 2 * h;
        tm2(i) -= 2 * h;
        // Fourth-order central difference.
        const double fd = (8 * (L(tp1) - L(tm1)) - (L(tp2) - L(tm2))) / (12 * h);
        const double rel = std::abs(fd - g(i)) / std::max({std::abs(fd), std::abs(g(i)), 1e-300});
        worst = std::max(worst, rel);
    }
    return {worst <= 1e-5, "max relative mismatch " + fmt(worst) + " on 20 of " + std::to_string(theta.size()) +
                               " parameters"};
}

// ---------------------------------------------------------------------------
// 5. Excitation spectra

// One-sided Welch estimate per unit of the sampling variable's frequency
// (Hz for time series, cycles/m for profiles). Hann window, 50% overlap.
std::vector<double> welch(const std::vector<double>& x, double fs, std::size_t seg, std::vector<double>* freqs) {
    std::vector<double> w(seg);
    double w2 = 0.0;
    for (std::size_t j = 0; j < seg; ++j) {
        w[j] = 0.5 - 0.5 * std::cos(2 * std::acos(-1.0) * j / seg);
        w2 += w[j] * w[j];
    }
    Eigen::FFT<double> fft;
    std::vector<double> acc(seg / 2 + 1, 0.0);
    std::size_t count = 0;
    for (std::size_t start = 0; start + seg <= x.size(); start += seg / 2) {
        std::vector<double> buf(seg);
        for (std::size_t j = 0; j < seg; ++j) buf[j] = w[j] * x[start + j];
        std::vector<std::complex<double>> X;
        fft.fwd(X, buf);
        for (std::size_t k = 0; k <= seg / 2; ++k) acc[k] += std::norm(X[k]);
        ++count;
    }
    for (std::size_t k = 0; k <= seg / 2; ++k) {
        const double one_sided = (k == 0 || k == seg / 2) ? 1.0 : 2.0;
        acc[k] *= one_sided / (fs * w2 * count);
    }
    if (freqs) {
        freqs->resize(seg / 2 + 1);
        for (std::size_t k = 0; k <= seg / 2; ++k) (*freqs)[k] = k * fs / seg;
    }
    return acc;
}

Outcome excitation_spectra() {
    const double two_pi = 2 * std::acos(-1.0);
    KanaiTajimiSpec kt;
    const std::size_t seg = 512;
    std::vector<double> freqs, mean_psd(seg / 2 + 1, 0.0);
    for (int r = 0; r < 50; ++r) {
        const auto s = kanai_tajimi_realize(kt, 700 + r);
        const auto p = welch(s.channels[0], 1.0 / kt.dt, seg, &freqs);
        for (std::size_t k = 0; k < p.size(); ++k) mean_psd[k] += p[k] / 50.0;
    }
    double worst_kt = 0.0;
    std::size_t bins = 0;
    for (std::size_t k = 1; k < freqs.size(); ++k) {
        const double w = two_pi * freqs[k];
        if (w < 0.2 * kt.omega_g || w > 3.0 * kt.omega_g) continue;
        // Per-Hz estimate to per-rad/s density.
        const double est = mean_psd[k] / two_pi;
        worst_kt = std::max(worst_kt, std::abs(est / kanai_tajimi_psd(kt, w) - 1.0));
        ++bins;
    }

    RoadSpec road;
    const std::size_t rseg = 2048;
    std::vector<double> rf, rpsd(rseg / 2 + 1, 0.0);
    const int profiles = 10;
    for (int r = 0; r < profiles; ++r) {
        const auto prof = road_profile(road, 900 + r);
        const double fs = 1.0 / (prof.l[1] - prof.l[0]);
        const auto p = welch(prof.h, fs, rseg, &rf);
        for (std::size_t k = 0; k < p.size(); ++k) rpsd[k] += p[k] / profiles;
    }
    // Least-squares slope of log PSD against log spatial frequency, well
    // inside the synthesized band and below the folding frequency.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 1; k < rf.size(); ++k) {
        if (rf[k] < 0.1 || rf[k] > 5.0) continue;
        const double x = std::log(rf[k]), y = std::log(rpsd[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const bool ok = worst_kt <= 0.10 && std::abs(slope + 2.0) <= 0.2;
    return {ok, "Kanai-Tajimi max relative deviation " + fmt(worst_kt) + " over " + std::to_string(bins) +
                    " bins in [0.2, 3] omega_g; road log-log slope " + fmt(slope) + " over [0.1, 5] cycles/m"};
}

// ---------------------------------------------------------------------------
// Desk-scale experiments (criteria 6-10)

struct Group {
    std::string name;
    std::string config_file;
    std::function<std::vector<SweepRow>(const RunConfig&, const std::vector<std::uint64_t>&)> run;
};

json rows_to_json(const std::vector<SweepRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        a.push_back({{"key", r.key},
                     {"mean_standard", r.mean_standard},
                     {"mean_bifidelity", r.mean_bifidelity},
                     {"mean_passthrough", r.mean_passthrough},
                     {"overlap", r.overlap},
                     {"seed_standard", r.seed_standard},
                     {"seed_bifidelity", r.seed_bifidelity},
                     {"seed_passthrough", r.seed_passthrough}});
    }
    return a;
}

std::vector<SweepRow> rows_from_json(const json& a) {
    std::vector<SweepRow> rows;
    for (const auto& j : a) {
        SweepRow r;
        r.key = j.at("key");
        r.mean_standard = j.at("mean_standard");
        r.mean_bifidelity = j.at("mean_bifidelity");
        r.mean_passthrough = j.at("mean_passthrough");
        r.overlap = j.at("overlap");
        r.seed_standard = j.at("seed_standard").get<std::vector<double>>();
        r.seed_bifidelity = j.at("seed_bifidelity").get<std::vector<double>>();
        r.seed_passthrough = j.at("seed_passthrough").get<std::vector<double>>();
        rows.push_back(r);
    }
    return rows;
}

const std::vector<Group>& groups() {
    static const std::vector<Group> g{
        {"ex1_sizes", "ex1_desk.json",
         [](const RunConfig& c, const std::vector<std::uint64_t>& seeds) {
             return sweep_training_size(c.simulation, c.experiment, {50, 200}, seeds);
         }},
        {"ex1_pinching", "ex1_caseII_desk.json",
         [](const RunConfig& c, const std::vector<std::uint64_t>& seeds) {
             return sweep_pinching(c.experiment, {0.25, 0.5}, seeds);
         }},
        {"ex3_noise", "ex3_desk.json",
         [](const RunConfig& c, const std::vector<std::uint64_t>& seeds) {
             return sweep_noise(c.simulation, c.experiment, {0.0, 10.0}, seeds);
         }},
    };
    return g;
}

std::vector<SweepRow> group_rows(const Context& ctx, const std::string& name) {
    const auto it = std::find_if(groups().begin(), groups().end(), [&](const Group& g) { return g.name == name; });
    RunConfig cfg = load_run_config(ctx.desk_dir / it->config_file);
    const auto seeds = cfg.repetition_seeds();
    const json key = {{"group", name}, {"config", cfg.to_json()}, {"seeds", seeds}};
    const fs::path cache = ctx.work / (name + "_" + hex64(fnv1a64(key.dump())) + ".json");
    if (fs::exists(cache)) {
        std::ifstream in(cache);
        progress("reusing " + cache.string());
        return rows_from_json(json::parse(in).at("rows"));
    }
    cfg.experiment.log = [&](const std::string& s) { progress(name + ": " + s); };
    const auto rows = it->run(cfg, seeds);
    fs::create_directories(ctx.work);
    std::ofstream(cache) << json{{"key", key}, {"rows", rows_to_json(rows)}}.dump(2) << "\n";
    return rows;
}

const SweepRow& row_at(const std::vector<SweepRow>& rows, double key) {
    for (const auto& r : rows)
        if (r.key == key) return r;
    throw InvalidInput("missing sweep row " + fmt(key));
}

Outcome case1_ordering(const Context& ctx) {
    const auto rows = group_rows(ctx, "ex1_sizes");
    const auto& r = row_at(rows, 200);
    return {r.mean_bifidelity <= 0.6 * r.mean_standard,
            "N_tr=200: bi-fidelity " + fmt(r.mean_bifidelity) + " vs 0.6 x standard " + fmt(0.6 * r.mean_standard) +
                " (standard " + fmt(r.mean_standard) + ", per seed bf " + join(r.seed_bifidelity) + ", std " +
                join(r.seed_standard) + ")"};
}

Outcome size_trend(const Context& ctx) {
    const auto rows = group_rows(ctx, "ex1_sizes");
    const auto& a = row_at(rows, 50);
    const auto& b = row_at(rows, 200);
    return {a.ratio() >= b.ratio(), "standard/bi-fidelity ratio " + fmt(a.ratio()) + " at N_tr=50, " +
                                        fmt(b.ratio()) + " at N_tr=200"};
}

Outcome pinching_trend(const Context& ctx) {
    const auto rows = group_rows(ctx, "ex1_pinching");
    const auto& a = row_at(rows, 0.25);
    const auto& b = row_at(rows, 0.5);
    return {b.overlap > a.overlap, "histogram overlap " + fmt(a.overlap) + " at zeta_s=0.25, " + fmt(b.overlap) +
                                       " at zeta_s=0.5 (bf " + fmt(a.mean_bifidelity) + ", " + fmt(b.mean_bifidelity) +
                                       "; std " + fmt(a.mean_standard) + ", " + fmt(b.mean_standard) + ")"};
}

Outcome noise_trend(const Context& ctx) {
    const auto rows = group_rows(ctx, "ex3_noise");
    const auto& a = row_at(rows, 0.0);
    const auto& b = row_at(rows, 10.0);
    const bool ok = b.mean_bifidelity > a.mean_bifidelity && a.mean_bifidelity < a.mean_standard &&
                    b.mean_bifidelity < b.mean_standard;
    return {ok, "bi-fidelity " + fmt(a.mean_bifidelity) + " -> " + fmt(b.mean_bifidelity) + ", standard " +
                    fmt(a.mean_standard) + " -> " + fmt(b.mean_standard) + " for noise 0 -> 10%"};
}

Outcome passthrough_bound(const Context& ctx) {
    bool ok = true;
    std::string detail;
    for (const auto& g : groups()) {
        for (const auto& r : group_rows(ctx, g.name)) {
            for (std::size_t s = 0; s < r.seed_bifidelity.size(); ++s) {
                const bool beat = r.seed_bifidelity[s] < r.seed_passthrough[s];
                ok = ok && beat;
                if (!beat) {
                    detail += " " + g.name + "[" + fmt(r.key) + "] seed " + std::to_string(s) + ": " +
                              fmt(r.seed_bifidelity[s]) + " >= " + fmt(r.seed_passthrough[s]) + ";";
                }
            }
            detail += " " + g.name + "[" + fmt(r.key) + "] mean bf " + fmt(r.mean_bifidelity) + " vs passthrough " +
                      fmt(r.mean_passthrough) + ";";
        }
    }
    return {ok, detail.empty() ? "no runs" : detail.substr(1)};
}

// ---------------------------------------------------------------------------
// 11. Byte-identical reports

int run_cli(const Context& ctx, const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + ctx.cli.string() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const Context& ctx) {
    const fs::path base = ctx.work / "determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path config = ctx.desk_dir / "ex1_desk.json";
    std::vector<std::string> bodies;
    for (const char* run : {"a", "b"}) {
        const fs::path out = base / run;
        // The second run uses more simulation threads; results must not depend on it.
        const std::string args = "reproduce ex1-caseI --config \"" + config.string() +
                                 "\" --seeds 7 --epochs 300 --no-sweeps --jobs " + (run[0] == 'a' ? "1" : "3") +
                                 " --out \"" + out.string() + "\"";
        const int rc = run_cli(ctx, args, base / (std::string(run) + ".log"));
        if (rc != 0) return {false, "reproduce exited with " + std::to_string(rc)};
        std::ifstream in(out / "report.json", std::ios::binary);
        bodies.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    const bool same = !bodies[0].empty() && bodies[0] == bodies[1];
    return {same, std::string(same ? "identical" : "different") + " report.json (" +
                      std::to_string(bodies[0].size()) + " bytes) from two runs with root seed 7"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    Context ctx;
    std::string cli, work, desk;
    app.add_option("--only", only, "run a single criterion (1-11)");
    app.add_option("--cli", cli, "hysterid executable")->required();
    app.add_option("--work", work, "scratch and cache directory")->required();
    app.add_option("--desk-dir", desk, "directory holding the desk-scale configurations")->required();
    CLI11_PARSE(app, argc, argv);
    ctx.cli = cli;
    ctx.work = work;
    ctx.desk_dir = desk;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"reduction identities", reductions},
        {"z boundedness", z_bounded},
        {"RK4 order", integrator_order},
        {"gradient check", gradient_check},
        {"excitation spectra", excitation_spectra},
        {"case I ordering", [&] { return case1_ordering(ctx); }},
        {"training-size trend", [&] { return size_trend(ctx); }},
        {"pinching trend", [&] { return pinching_trend(ctx); }},
        {"noise trend", [&] { return noise_trend(ctx); }},
        {"passthrough bound", [&] { return passthrough_bound(ctx); }},
        {"determinism", [&] { return determinism(ctx); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (only != 0 && only != id) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %-22s %s  %s  [%.1f s]\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
