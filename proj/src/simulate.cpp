#include "hysterid/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"

namespace hysterid {

// ---------------------------------------------------------------------------
// Assembly

QoiSelector parse_qoi(const MdofSystem& system, const std::string& name) {
    QoiSelector q;
    q.name = name;
    if (name == "z") {
        if (system.hysteretic_elements.empty()) throw InvalidParameter("system has no hysteretic element");
        q.kind = QoiKind::auxiliary_z;
        q.index = 0;
        return q;
    }
    if (name.rfind("z:", 0) == 0) {
        const std::string label = name.substr(2);
        for (std::size_t j = 0; j < system.hysteretic_elements.size(); ++j) {
            if (system.hysteretic_elements[j].label == label) {
                q.kind = QoiKind::auxiliary_z;
                q.index = static_cast<Eigen::Index>(j);
                return q;
            }
        }
        throw InvalidParameter("no hysteretic element labelled '" + label + "'");
    }
    if (name.rfind("a:", 0) == 0) {
        q.kind = QoiKind::acceleration;
        q.index = system.dof_index(name.substr(2));
        return q;
    }
    q.kind = QoiKind::displacement;
    q.index = name == "roof" ? system.dofs() - 1 : system.dof_index(name);
    return q;
}

StateSpaceSystem::StateSpaceSystem(MdofSystem system, ExcitationSignal excitation, QoiSelector qoi)
    : system_(std::move(system)), excitation_(std::move(excitation)), qoi_(std::move(qoi)) {
    system_.validate();
    excitation_.validate();
    n_ = system_.dofs();
    g_ = static_cast<Eigen::Index>(system_.hysteretic_elements.size());
    if (system_.excitation_map.cols() != static_cast<Eigen::Index>(excitation_.n_channels())) {
        throw InvalidParameter("excitation has " + std::to_string(excitation_.n_channels()) +
                               " channels, system expects " + std::to_string(system_.excitation_map.cols()));
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(system_.M);
    Minv_K_ = llt.solve(system_.K);
    Minv_C_ = llt.solve(system_.C);
    Minv_L_ = llt.solve(system_.L_tilde);
    Minv_E_ = llt.solve(system_.excitation_map);
    drives_.resize(g_, n_);
    for (Eigen::Index j = 0; j < g_; ++j) drives_.row(j) = system_.hysteretic_elements[j].drive.transpose();
    omega_max_ = natural_frequencies(system_.M, system_.K).maxCoeff();

    const Eigen::Index limit = qoi_.kind == QoiKind::auxiliary_z ? g_ : n_;
    if (qoi_.index < 0 || qoi_.index >= limit) throw InvalidParameter("QoI index out of range");
}

void StateSpaceSystem::rate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx, Eigen::VectorXd* accel) const {
    const auto u = x.segment(0, n_);
    const auto ud = x.segment(n_, n_);
    const auto z = x.segment(2 * n_, g_);
    const auto e = x.segment(2 * n_ + g_, g_);
    dx.resize(state_dim());

    Eigen::VectorXd g(g_);
    if (g_ > 0) {
        const Eigen::VectorXd v = drives_ * ud;
        for (Eigen::Index j = 0; j < g_; ++j) {
            const auto& el = system_.hysteretic_elements[static_cast<std::size_t>(j)];
            const double zdot = el.law.rate({z(j), e(j)}, v(j));
            dx(2 * n_ + j) = zdot;
            dx(2 * n_ + g_ + j) = energy_rate(z(j), v(j));
            g(j) = el.coupling == Coupling::state ? z(j) : zdot;
        }
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(excitation_.n_channels()));
    for (Eigen::Index c = 0; c < w.size(); ++c) w(c) = excitation_.at(static_cast<std::size_t>(c), t);

    dx.segment(0, n_) = ud;
    dx.segment(n_, n_) = Minv_E_ * w - Minv_C_ * ud - Minv_K_ * u;
    if (g_ > 0) dx.segment(n_, n_) -= Minv_L_ * g;
    if (accel) *accel = dx.segment(n_, n_);
}

double StateSpaceSystem::output(double t, const Eigen::VectorXd& x) const {
    switch (qoi_.kind) {
        case QoiKind::auxiliary_z: return x(2 * n_ + qoi_.index);
        case QoiKind::displacement: return x(qoi_.index);
        case QoiKind::acceleration: {
            Eigen::VectorXd dx, a;
            rate(t, x, dx, &a);
            return a(qoi_.index);
        }
    }
    return 0.0;
}

StateSpaceSystem assemble(MdofSystem system, std::optional<LawKind> law, ExcitationSignal excitation,
                          const std::string& qoi) {
    if (law) {
        for (auto& el : system.hysteretic_elements) el.law.kind = *law;
    }
    QoiSelector sel = parse_qoi(system, qoi);
    return StateSpaceSystem(std::move(system), std::move(excitation), std::move(sel));
}

// ---------------------------------------------------------------------------
// Integration

void IntegratorSpec::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("integrator dt must be positive");
}

IntegrationResult integrate(const StateSpaceSystem& ss, const IntegratorSpec& spec, const Eigen::VectorXd& x0,
                            std::optional<double> duration, bool keep_states) {
    spec.validate();
    if (x0.size() != ss.state_dim()) {
        throw InvalidParameter("initial state has " + std::to_string(x0.size()) + " entries, expected " +
                               std::to_string(ss.state_dim()));
    }
    const double T = duration.value_or(ss.excitation().duration());
    const auto steps = static_cast<std::size_t>(std::llround(T / spec.dt));

    IntegrationResult res;
    if (spec.dt * ss.max_frequency() >= 0.5) {
        res.warnings.push_back("dt * omega_max = " + std::to_string(spec.dt * ss.max_frequency()) +
                               " exceeds the 0.5 advisory bound");
    }
    res.t.reserve(steps + 1);
    res.qoi.reserve(steps + 1);

    Eigen::VectorXd x = x0;
    Eigen::VectorXd k1, k2, k3, k4, tmp;
    const double h = spec.dt;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * h;
        res.t.push_back(t);
        res.qoi.push_back(ss.output(t, x));
        if (keep_states) res.states.push_back(x);
        if (i == steps) break;

        switch (spec.method) {
            case IntegratorSpec::Method::rk4:
                ss.rate(t, x, k1);
                tmp = x + 0.5 * h * k1;
                ss.rate(t + 0.5 * h, tmp, k2);
                tmp = x + 0.5 * h * k2;
                ss.rate(t + 0.5 * h, tmp, k3);
                tmp = x + h * k3;
                ss.rate(t + h, tmp, k4);
                x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                break;
            case IntegratorSpec::Method::midpoint:
                ss.rate(t, x, k1);
                tmp = x + 0.5 * h * k1;
                ss.rate(t + 0.5 * h, tmp, k2);
                x += h * k2;
                break;
        }
        if (!x.allFinite()) throw DivergenceError(i + 1, "non-finite state during time integration");
    }
    res.final_state = x;
    return res;
}

// ---------------------------------------------------------------------------
// Examples

const char* to_string(ExampleId id) {
    switch (id) {
        case ExampleId::ex1_caseI: return "ex1-caseI";
        case ExampleId::ex1_caseII: return "ex1-caseII";
        case ExampleId::car: return "car";
        case ExampleId::building: return "ex3";
    }
    return "ex1-caseI";
}

ExampleId example_from_string(const std::string& name) {
    if (name == "ex1-caseI" || name == "ex1") return ExampleId::ex1_caseI;
    if (name == "ex1-caseII") return ExampleId::ex1_caseII;
    if (name == "car" || name == "ex2") return ExampleId::car;
    if (name == "ex3" || name == "building") return ExampleId::building;
    throw InvalidParameter("unknown example '" + name + "'");
}

void ExampleConfig::validate() const {
    integrator.validate();
    if (n_store < 1) throw InvalidParameter("n_store must be >= 1");
    if (!(duration > 0.0)) throw InvalidParameter("duration must be positive");
    const double steps = duration / integrator.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6 * steps) {
        throw InvalidParameter("duration must be a whole number of integrator steps");
    }
    for (const auto& p : uncertain) p.dist.validate();
    if (corrosion) corrosion->validate();
}

ExampleConfig default_example(ExampleId id, double zeta_s) {
    ExampleConfig c;
    c.id = id;
    const DegradationParams degradation{0.6, 0.02, 0.02};
    const PinchingParams pinching{zeta_s, 1.0, 0.5, 0.25, 0.15, 0.5};
    switch (id) {
        case ExampleId::ex1_caseI:
        case ExampleId::ex1_caseII:
            c.qoi = "z";
            c.duration = 20.0;
            c.integrator.dt = 0.005;
            c.uncertain = example1_uncertain_spec();
            c.kanai_tajimi.duration = c.duration;
            c.kanai_tajimi.dt = c.integrator.dt;
            c.structure = four_dof_params();
            c.structure.damping_mode_j = 2;
            c.lf_law = IsolatorLaw{LawKind::classic, 1.0, {}, {}};
            c.hf_law = IsolatorLaw{id == ExampleId::ex1_caseI ? LawKind::degrading : LawKind::pinching, 1.0,
                                   degradation, pinching};
            break;
        case ExampleId::car:
            c.qoi = "a:u_c";
            c.duration = 10.0;
            c.integrator.dt = 0.001;
            c.uncertain = car_uncertain_spec();
            c.road.t_final = c.duration;
            c.road.dt = c.integrator.dt;
            c.road.wheelbase = c.car.L_f + c.car.L_r;
            c.road.velocity = c.car.velocity;
            break;
        case ExampleId::building:
            c.qoi = "roof";
            c.duration = 30.0;
            c.integrator.dt = 0.005;
            c.uncertain = building_uncertain_spec();
            c.kanai_tajimi.duration = c.duration;
            c.kanai_tajimi.dt = c.integrator.dt;
            c.structure.n_stories = 11;
            c.structure.story_mass = 10e3;
            c.structure.story_stiffness = 21192929.39376757;  // T1 = 1.0 s
            c.structure.base_mass = 10e3;
            c.structure.damping_mode_i = 1;
            c.structure.damping_mode_j = 10;
            c.lf_law = IsolatorLaw{LawKind::classic, 1.0, {}, {}};
            c.hf_law = IsolatorLaw{LawKind::degrading, 1.0, degradation, {}};
            c.corrosion = CorrosionModel{};
            break;
    }
    return c;
}

namespace {

std::vector<double> resample_to_store(const std::vector<double>& series, double dt, double duration,
                                      std::size_t n_store) {
    std::vector<double> out(n_store);
    for (std::size_t k = 0; k < n_store; ++k) {
        const double tk = static_cast<double>(k + 1) * duration / static_cast<double>(n_store);
        const double s = tk / dt;
        auto i = static_cast<std::size_t>(std::floor(s + 1e-9));
        double f = s - static_cast<double>(i);
        if (std::abs(f) < 1e-9) f = 0.0;
        if (i + 1 >= series.size()) {
            i = series.size() - 1;
            f = 0.0;
        }
        out[k] = f == 0.0 ? series[i] : series[i] + f * (series[i + 1] - series[i]);
    }
    return out;
}

std::vector<double> storage_times(double duration, std::size_t n_store) {
    std::vector<double> t(n_store);
    for (std::size_t k = 0; k < n_store; ++k) t[k] = static_cast<double>(k + 1) * duration / static_cast<double>(n_store);
    return t;
}

ExcitationSignal front_channel(const ExcitationSignal& s) {
    ExcitationSignal f = s;
    f.channels.resize(1);
    f.channel_names.resize(std::min<std::size_t>(1, f.channel_names.size()));
    return f;
}

std::vector<double> run(const ExampleConfig& cfg, MdofSystem sys, const ExcitationSignal& w) {
    StateSpaceSystem ss(std::move(sys), w, QoiSelector{});
    ss = StateSpaceSystem(ss.system(), w, parse_qoi(ss.system(), cfg.qoi));
    const auto res = integrate(ss, cfg.integrator, Eigen::VectorXd::Zero(ss.state_dim()), cfg.duration);
    return resample_to_store(res.qoi, cfg.integrator.dt, cfg.duration, cfg.n_store);
}

}  // namespace

TrajectoryPair simulate_pair(const ExampleConfig& cfg, const std::vector<double>& xi,
                             const ExcitationSignal& excitation) {
    TrajectoryPair pair;
    pair.xi = xi;
    pair.t = storage_times(cfg.duration, cfg.n_store);
    switch (cfg.id) {
        case ExampleId::ex1_caseI:
        case ExampleId::ex1_caseII:
        case ExampleId::building: {
            const IsolationSample s = isolation_sample_from(xi);
            const bool corroded = cfg.id == ExampleId::building && cfg.corrosion.has_value();
            pair.y_lf = run(cfg, build_shear_building(cfg.structure, s, cfg.lf_law), excitation);
            pair.y_hf = run(cfg,
                            build_shear_building(cfg.structure, s, cfg.hf_law,
                                                 corroded ? cfg.corrosion : std::optional<CorrosionModel>{}),
                            excitation);
            break;
        }
        case ExampleId::car: {
            const CarSample s = car_sample_from(xi);
            CarParams lf = cfg.car;
            lf.law.kind = cfg.car_lf_law;
            pair.y_lf = run(cfg, build_quarter_car(s, lf), front_channel(excitation));
            pair.y_hf = run(cfg, build_half_car(s, cfg.car), excitation);
            break;
        }
    }
    pair.y_corr.resize(pair.y_hf.size());
    for (std::size_t i = 0; i < pair.y_hf.size(); ++i) pair.y_corr[i] = pair.y_hf[i] - pair.y_lf[i];
    pair.excitation = resample_to_store(excitation.channels.at(0), excitation.dt, cfg.duration, cfg.n_store);
    return pair;
}

ExcitationSignal building_record(const ExampleConfig& cfg) {
    ExcitationSignal rec;
    if (!cfg.accelerogram.empty()) {
        rec = load_accelerogram(cfg.accelerogram, cfg.accelerogram_scale);
    } else {
        KanaiTajimiSpec kt = cfg.kanai_tajimi;
        kt.duration = cfg.duration;
        kt.dt = cfg.integrator.dt;
        rec = kanai_tajimi_realize(kt, cfg.record_seed);
        scale_to_peak(rec, cfg.record_pga_g * kGravity);
    }
    return rec;
}

ExcitationSignal draw_excitation(const ExampleConfig& cfg, const std::vector<double>& xi, std::uint64_t seed) {
    switch (cfg.id) {
        case ExampleId::ex1_caseI:
        case ExampleId::ex1_caseII: {
            KanaiTajimiSpec kt = cfg.kanai_tajimi;
            kt.duration = cfg.duration;
            kt.dt = cfg.integrator.dt;
            return kanai_tajimi_realize(kt, seed);
        }
        case ExampleId::car: {
            RoadSpec road = cfg.road;
            road.t_final = cfg.duration;
            road.dt = cfg.integrator.dt;
            const CarSample s = car_sample_from(xi);
            return road_to_forces(road_profile(road, seed), s.k_wf, s.k_wr);
        }
        case ExampleId::building: return building_record(cfg);
    }
    throw InvalidParameter("unknown example");
}

TrajectoryPair simulate_realization(const ExampleConfig& cfg, std::uint64_t seed,
                                    const ExcitationSignal* fixed_excitation) {
    constexpr int kMaxRetries = 3;
    for (int attempt = 0;; ++attempt) {
        const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(attempt)});
        const auto xi = sample_uncertain(cfg.uncertain, derive_seed(s, {stage::parameters}), 1).front();
        try {
            TrajectoryPair pair = fixed_excitation
                                      ? simulate_pair(cfg, xi, *fixed_excitation)
                                      : simulate_pair(cfg, xi, draw_excitation(cfg, xi, derive_seed(s, {stage::excitation})));
            pair.seed = seed;
            pair.retries = attempt;
            return pair;
        } catch (const DivergenceError&) {
            if (attempt == kMaxRetries) throw;
        } catch (const DegenerateState&) {
            if (attempt == kMaxRetries) throw;
        }
    }
}

void add_target_noise(TrajectoryPair& pair, double noise_pct, std::uint64_t seed) {
    if (noise_pct == 0.0) return;
    if (!(noise_pct > 0.0)) throw InvalidParameter("noise_pct must be >= 0");
    const double n = static_cast<double>(pair.y_hf.size());
    const double mean = std::accumulate(pair.y_hf.begin(), pair.y_hf.end(), 0.0) / n;
    double var = 0.0;
    for (double y : pair.y_hf) var += (y - mean) * (y - mean);
    const double sd = std::sqrt(var / n);
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, noise_pct / 100.0 * sd);
    for (std::size_t i = 0; i < pair.y_hf.size(); ++i) {
        pair.y_hf[i] += noise(rng);
        pair.y_corr[i] = pair.y_hf[i] - pair.y_lf[i];
    }
}

// ---------------------------------------------------------------------------
// Dataset generation and I/O

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(const TrajectoryPair& p) {
    std::string out = "t,y_lf,y_hf,y_corr";
    for (std::size_t q = 0; q < p.xi.size(); ++q) out += ",xi_" + std::to_string(q + 1);
    out += '\n';
    std::string xi_tail;
    for (double x : p.xi) xi_tail += ',' + fmt17(x);
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        out += fmt17(p.t[i]) + ',' + fmt17(p.y_lf[i]) + ',' + fmt17(p.y_hf[i]) + ',' + fmt17(p.y_corr[i]) + xi_tail +
               '\n';
    }
    return out;
}

std::string excitation_dat(const std::vector<TrajectoryPair>& all) {
    std::string out = "# excitation channel 0 on the storage grid, one realization per line\n";
    for (const auto& p : all) {
        for (std::size_t i = 0; i < p.excitation.size(); ++i) {
            if (i) out += ' ';
            out += fmt17(p.excitation[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<const TrajectoryPair*> ordered(const Dataset& ds) {
    std::vector<const TrajectoryPair*> all;
    for (const auto& p : ds.train) all.push_back(&p);
    for (const auto& p : ds.val) all.push_back(&p);
    return all;
}

nlohmann::json manifest_core(const nlohmann::json& m) {
    nlohmann::json core = m;
    core.erase("manifest_hash");
    return core;
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no, char sep) {
    std::vector<double> vals;
    const char* p = line.c_str();
    while (*p) {
        while (*p == sep || *p == ' ') ++p;
        if (!*p || *p == '\r') break;
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p) throw ParseError(line_no, "not a number");
        vals.push_back(v);
        p = end;
    }
    return vals;
}

std::vector<std::string> header_columns(const std::string& line) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
        if (!c.empty() && c.back() == '\r') c.pop_back();
        cols.push_back(c);
    }
    return cols;
}

int find_column(const std::vector<std::string>& cols, const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    return it == cols.end() ? -1 : static_cast<int>(it - cols.begin());
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << bytes;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t Dataset::manifest_hash() const {
    std::uint64_t h = fnv1a64(manifest_core(manifest).dump());
    for (const TrajectoryPair* p : ordered(*this)) h = fnv1a64(trajectory_csv(*p), h);
    std::vector<TrajectoryPair> all;
    for (const TrajectoryPair* p : ordered(*this)) all.push_back(*p);
    return fnv1a64(excitation_dat(all), h);
}

Dataset generate_dataset(const ExampleConfig& cfg, const DatasetRequest& req) {
    cfg.validate();
    if (req.n_train + req.n_val == 0) throw InvalidParameter("dataset must hold at least one realization");
    Dataset ds;
    ds.config = cfg;
    for (const auto& p : cfg.uncertain) ds.xi_names.push_back(p.name);

    std::optional<ExcitationSignal> fixed;
    if (cfg.id == ExampleId::building) fixed = building_record(cfg);

    const std::size_t n_train_total = std::max(req.n_train, req.n_train_standard);
    ds.train.resize(n_train_total);
    ds.val.resize(req.n_val);
    const ExcitationSignal* rec = fixed ? &*fixed : nullptr;
    auto work = [&](std::size_t i) {
        if (i < n_train_total) {
            TrajectoryPair p = simulate_realization(cfg, derive_seed(req.seed, {stage::dataset, 0, i}), rec);
            add_target_noise(p, req.noise_pct, derive_seed(req.seed, {stage::noise, i}));
            ds.train[i] = std::move(p);
        } else {
            const std::size_t k = i - n_train_total;
            ds.val[k] = simulate_realization(cfg, derive_seed(req.seed, {stage::dataset, 1, k}), rec);
        }
    };
    const std::size_t total = n_train_total + req.n_val;
    const std::size_t jobs = std::clamp<std::size_t>(req.jobs, 1, total);
    if (jobs == 1) {
        for (std::size_t i = 0; i < total; ++i) work(i);
    } else {
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < total; i += jobs) work(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    int retries = 0;
    for (const auto& p : ds.train) retries += p.retries;
    for (const auto& p : ds.val) retries += p.retries;

    nlohmann::json& m = ds.manifest;
    m["format"] = "hysterid-dataset/1";
    m["example"] = to_string(cfg.id);
    m["seed"] = req.seed;
    m["n_train"] = req.n_train;
    m["n_train_standard"] = req.n_train_standard ? req.n_train_standard : req.n_train;
    m["n_train_files"] = n_train_total;
    m["n_val"] = req.n_val;
    m["n_store"] = cfg.n_store;
    m["dt"] = cfg.integrator.dt;
    m["duration"] = cfg.duration;
    m["integrator"] = cfg.integrator.method == IntegratorSpec::Method::rk4 ? "rk4" : "midpoint";
    m["qoi"] = cfg.qoi;
    m["noise_pct"] = req.noise_pct;
    m["cost_ratio"] = req.cost_ratio;
    m["xi_names"] = ds.xi_names;
    m["retries"] = retries;
    if (cfg.id == ExampleId::car) {
        m["lf_model"] = std::string("quarter-car/") + to_string(cfg.car_lf_law);
        m["hf_model"] = std::string("half-car/") + to_string(cfg.car.law.kind);
    } else {
        m["lf_model"] = to_string(cfg.lf_law.kind);
        m["hf_model"] = to_string(cfg.hf_law.kind);
    }
    if (cfg.id == ExampleId::ex1_caseII) m["zeta_s"] = cfg.hf_law.pn.zeta_s;
    if (cfg.id == ExampleId::building && cfg.corrosion) {
        m["corrosion_loss_um"] = corrosion_loss(*cfg.corrosion);
        m["stiffness_retention"] = stiffness_retention(*cfg.corrosion);
    }
    m["manifest_hash"] = hex64(ds.manifest_hash());
    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    nlohmann::json m = ds.manifest;
    m["manifest_hash"] = hex64(ds.manifest_hash());
    spit(dir / "manifest.json", m.dump(2) + "\n");
    std::size_t k = 0;
    std::vector<TrajectoryPair> all;
    for (const TrajectoryPair* p : ordered(ds)) {
        spit(dir / ("real_" + std::to_string(k++) + ".csv"), trajectory_csv(*p));
        all.push_back(*p);
    }
    spit(dir / "excitation.dat", excitation_dat(all));
}

Dataset read_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    try {
        ds.manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad manifest in " + dir.string() + ": " + e.what());
    }
    const auto& m = ds.manifest;
    try {
        ds.config = default_example(example_from_string(m.at("example").get<std::string>()),
                                    m.value("zeta_s", 0.5));
        ds.config.qoi = m.at("qoi").get<std::string>();
        ds.config.n_store = m.at("n_store").get<std::size_t>();
        ds.config.integrator.dt = m.at("dt").get<double>();
        ds.config.duration = m.at("duration").get<double>();
        ds.xi_names = m.at("xi_names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("incomplete manifest in " + dir.string() + ": " + e.what());
    }
    const auto n_train = m.at("n_train_files").get<std::size_t>();
    const auto n_val = m.at("n_val").get<std::size_t>();

    std::vector<std::vector<double>> exc;
    {
        std::istringstream is(slurp(dir / "excitation.dat"));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            exc.push_back(parse_row(line, line_no, ' '));
        }
    }
    if (exc.size() != n_train + n_val) throw IoError("excitation.dat does not match the manifest sizes");

    for (std::size_t k = 0; k < n_train + n_val; ++k) {
        const auto path = dir / ("real_" + std::to_string(k) + ".csv");
        std::istringstream is(slurp(path));
        std::string line;
        std::getline(is, line);
        const auto cols = header_columns(line);
        const int c_t = find_column(cols, "t"), c_lf = find_column(cols, "y_lf"), c_hf = find_column(cols, "y_hf"),
                  c_corr = find_column(cols, "y_corr");
        if (c_t < 0 || c_hf < 0) throw IoError(path.string() + ": header lacks t or y_hf");
        std::vector<int> c_xi;
        for (std::size_t q = 0; q < ds.xi_names.size(); ++q) {
            c_xi.push_back(find_column(cols, "xi_" + std::to_string(q + 1)));
            if (c_xi.back() < 0) throw IoError(path.string() + ": header lacks xi_" + std::to_string(q + 1));
        }
        TrajectoryPair p;
        std::size_t line_no = 1;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto row = parse_row(line, line_no, ',');
            if (row.size() != cols.size()) throw ParseError(line_no, path.string() + ": wrong column count");
            p.t.push_back(row[static_cast<std::size_t>(c_t)]);
            p.y_hf.push_back(row[static_cast<std::size_t>(c_hf)]);
            if (c_lf >= 0) p.y_lf.push_back(row[static_cast<std::size_t>(c_lf)]);
            if (c_corr >= 0) {
                p.y_corr.push_back(row[static_cast<std::size_t>(c_corr)]);
            } else if (c_lf >= 0) {
                p.y_corr.push_back(p.y_hf.back() - p.y_lf.back());
            }
            if (p.xi.empty()) {
                for (int c : c_xi) p.xi.push_back(row[static_cast<std::size_t>(c)]);
            }
        }
        p.excitation = exc[k];
        (k < n_train ? ds.train : ds.val).push_back(std::move(p));
    }
    return ds;
}

}  // namespace hysterid
