#include "hysterid/bifidelity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"

namespace hysterid {

const char* to_string(ProtocolKind kind) { return kind == ProtocolKind::standard ? "standard" : "bifidelity"; }

ProtocolKind protocol_from_string(const std::string& name) {
    if (name == "standard") return ProtocolKind::standard;
    if (name == "bifidelity" || name == "bi-fidelity") return ProtocolKind::bifidelity;
    throw InvalidParameter("unknown protocol '" + name + "'");
}

std::vector<std::size_t> sensor_indices(std::size_t n_store, std::size_t m) {
    if (m == 0 || m > n_store) throw InvalidParameter("sensor count must lie in [1, n_store]");
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = (i + 1) * n_store / m - 1;
    return idx;
}

Eigen::VectorXd branch_input(const TrajectoryPair& pair, ProtocolKind kind, std::size_t m) {
    const auto& series = kind == ProtocolKind::bifidelity ? pair.y_lf : pair.excitation;
    if (series.empty()) {
        throw InvalidInput(kind == ProtocolKind::bifidelity ? "trajectory has no low-fidelity response"
                                                            : "trajectory has no excitation record");
    }
    const auto idx = sensor_indices(series.size(), m);
    Eigen::VectorXd b(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) b(static_cast<Eigen::Index>(i)) = series[idx[i]];
    return b;
}

namespace {

std::vector<std::size_t> point_subset(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    if (k == 0 || k >= n) return all;
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> U(i, n - 1);
        std::swap(all[i], all[U(rng)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

void append_points(OperatorBatch& b, const TrajectoryPair& p, Eigen::Index owner, const std::vector<std::size_t>& pts,
                   ProtocolKind kind, Eigen::Index& col) {
    const auto q = static_cast<Eigen::Index>(p.xi.size());
    for (std::size_t k : pts) {
        b.trunk(0, col) = p.t[k];
        for (Eigen::Index j = 0; j < q; ++j) b.trunk(1 + j, col) = p.xi[static_cast<std::size_t>(j)];
        b.owner.push_back(owner);
        if (b.target.size() > 0) b.target(col) = kind == ProtocolKind::bifidelity ? p.y_corr[k] : p.y_hf[k];
        ++col;
    }
}

}  // namespace

OperatorBatch make_batch(const std::vector<TrajectoryPair>& trajs, ProtocolKind kind, std::size_t m,
                         std::size_t points_per_trajectory, std::uint64_t seed) {
    if (trajs.empty()) throw InvalidInput("no trajectories");
    const std::size_t n_store = trajs.front().t.size();
    const std::size_t q = trajs.front().xi.size();
    const std::size_t per = points_per_trajectory == 0 ? n_store : std::min(points_per_trajectory, n_store);
    OperatorBatch b;
    b.branch.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(trajs.size()));
    b.trunk.resize(static_cast<Eigen::Index>(q + 1), static_cast<Eigen::Index>(per * trajs.size()));
    b.target.resize(b.trunk.cols());
    b.owner.reserve(static_cast<std::size_t>(b.trunk.cols()));
    Rng rng(seed);
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < trajs.size(); ++j) {
        const auto& p = trajs[j];
        if (p.t.size() != n_store || p.xi.size() != q || p.y_hf.size() != n_store) {
            throw InvalidInput("trajectories differ in shape");
        }
        if (kind == ProtocolKind::bifidelity && p.y_corr.size() != n_store) {
            throw InvalidInput("trajectory has no correction target");
        }
        b.branch.col(static_cast<Eigen::Index>(j)) = branch_input(p, kind, m);
        append_points(b, p, static_cast<Eigen::Index>(j), point_subset(n_store, per, rng), kind, col);
    }
    return b;
}

namespace {

OperatorBatch query_batch(const DeepOnetModel& model, ProtocolKind kind, const TrajectoryPair& pair) {
    OperatorBatch b;
    b.branch = branch_input(pair, kind, static_cast<std::size_t>(model.arch.m));
    b.trunk.resize(static_cast<Eigen::Index>(pair.xi.size() + 1), static_cast<Eigen::Index>(pair.t.size()));
    std::vector<std::size_t> all(pair.t.size());
    std::iota(all.begin(), all.end(), 0);
    Eigen::Index col = 0;
    append_points(b, pair, 0, all, kind, col);
    return b;
}

}  // namespace

std::vector<double> predict_bifidelity(const DeepOnetModel& model, const TrajectoryPair& pair) {
    if (pair.y_lf.size() != pair.t.size()) throw InvalidInput("trajectory has no low-fidelity response");
    const Eigen::VectorXd g = predict(model, query_batch(model, ProtocolKind::bifidelity, pair));
    std::vector<double> y(pair.y_lf.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = pair.y_lf[i] + g(static_cast<Eigen::Index>(i));
    return y;
}

std::vector<double> predict_standard(const DeepOnetModel& model, const TrajectoryPair& pair) {
    const Eigen::VectorXd g = predict(model, query_batch(model, ProtocolKind::standard, pair));
    return {g.data(), g.data() + g.size()};
}

std::vector<double> predict_protocol(const DeepOnetModel& model, ProtocolKind kind, const TrajectoryPair& pair) {
    return kind == ProtocolKind::bifidelity ? predict_bifidelity(model, pair) : predict_standard(model, pair);
}

double rel_rmse(const std::vector<double>& pred, const std::vector<double>& val) {
    if (pred.size() != val.size()) throw InvalidInput("prediction and reference differ in length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
        num += (pred[i] - val[i]) * (pred[i] - val[i]);
        den += val[i] * val[i];
    }
    if (!(den > 0.0)) throw InvalidInput("relative error is undefined for a zero reference series");
    return std::sqrt(num / den);
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
    if (bins == 0) throw InvalidParameter("histogram needs at least one bin");
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 0.5 : 0.5 * std::abs(lo);
        lo -= pad;
        hi += pad;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : values) {
        if (v < lo || v > hi) continue;
        auto i = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        h.counts[std::min(i, bins - 1)]++;
    }
    return h;
}

double histogram_overlap(const Histogram& a, const Histogram& b) {
    if (a.counts.size() != b.counts.size()) throw InvalidInput("histograms have different bin counts");
    const double na = static_cast<double>(std::accumulate(a.counts.begin(), a.counts.end(), std::size_t{0}));
    const double nb = static_cast<double>(std::accumulate(b.counts.begin(), b.counts.end(), std::size_t{0}));
    if (na == 0.0 || nb == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        s += std::min(static_cast<double>(a.counts[i]) / na, static_cast<double>(b.counts[i]) / nb);
    }
    return s;
}

namespace {

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ValidationReport evaluate(const DeepOnetModel& model, ProtocolKind kind, const std::vector<TrajectoryPair>& val) {
    ValidationReport r;
    r.protocol = to_string(kind);
    for (const auto& p : val) r.errors.push_back(rel_rmse(predict_protocol(model, kind, p), p.y_hf));
    r.mean = mean_of(r.errors);
    return r;
}

ValidationReport evaluate_passthrough(const std::vector<TrajectoryPair>& val) {
    ValidationReport r;
    r.protocol = "passthrough";
    for (const auto& p : val) r.errors.push_back(rel_rmse(p.y_lf, p.y_hf));
    r.mean = mean_of(r.errors);
    return r;
}

std::size_t cost_equalized_size(std::size_t n_bf, double r) {
    if (!(r > 0.0)) throw InvalidParameter("cost ratio must be positive");
    return static_cast<std::size_t>(std::llround(static_cast<double>(n_bf) * (1.0 + r) / r));
}

void ExperimentSpec::validate() const {
    arch.validate();
    adam.validate();
    if (n_train_bf == 0 || n_train_std == 0 || n_val == 0) throw InvalidParameter("dataset sizes must be positive");
    if (bins == 0) throw InvalidParameter("bins must be positive");
}

ExperimentSpec default_experiment(ExampleId id) {
    ExperimentSpec s;
    s.arch.m = 100;
    s.arch.branch_hidden = {50, 50, 50};
    s.arch.trunk_hidden = {50, 50};
    s.adam.halve_every = 2500;
    switch (id) {
        case ExampleId::ex1_caseI:
        case ExampleId::ex1_caseII:
            s.arch.q = 4;
            s.arch.p = 8;
            s.adam.lr0 = id == ExampleId::ex1_caseI ? 1e-3 : 4e-3;
            s.adam.epochs = 10000;
            s.n_train_bf = s.n_train_std = 200;
            break;
        case ExampleId::car:
            s.arch.q = 5;
            s.arch.p = 10;
            s.adam.lr0 = 1e-3;
            s.adam.epochs = 20000;
            s.cost_ratio = 1.84;
            s.n_train_bf = 250;
            s.n_train_std = cost_equalized_size(250, s.cost_ratio);
            break;
        case ExampleId::building:
            s.arch.q = 4;
            s.arch.branch_hidden = {100, 100, 100};
            s.arch.trunk_hidden = {100, 100};
            s.arch.p = 20;
            s.adam.lr0 = 2e-3;
            s.adam.epochs = 10000;
            s.cost_ratio = 1.0;
            s.n_train_bf = 250;
            s.n_train_std = cost_equalized_size(250, s.cost_ratio);
            break;
    }
    s.n_val = 250;
    return s;
}

nlohmann::json ExperimentResult::summary() const {
    auto side = [](const ProtocolOutcome& o) {
        return nlohmann::json{{"n_train", o.n_train},
                              {"mean_error", o.report.mean},
                              {"final_loss", o.training.final_loss}};
    };
    return {{"seed", seed},
            {"dataset_hash", dataset_hash},
            {"standard", side(standard)},
            {"bifidelity", side(bifidelity)},
            {"passthrough_mean_error", passthrough.mean},
            {"ratio_standard_over_bifidelity", standard.report.mean / bifidelity.report.mean},
            {"histogram_overlap", overlap}};
}

namespace {

std::vector<TrajectoryPair> prefix(const std::vector<TrajectoryPair>& v, std::size_t n, const char* what) {
    if (n > v.size()) {
        throw InvalidParameter(std::string(what) + " needs " + std::to_string(n) + " trajectories, dataset has " +
                               std::to_string(v.size()));
    }
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

ProtocolOutcome train_protocol(const Dataset& ds, ProtocolKind kind, const ExperimentSpec& spec_in,
                               std::uint64_t seed) {
    ExperimentSpec spec = spec_in;
    spec.arch.q = static_cast<int>(ds.xi_names.size());
    spec.validate();
    const bool bf = kind == ProtocolKind::bifidelity;
    const auto train_set = prefix(ds.train, bf ? spec.n_train_bf : spec.n_train_std,
                                  bf ? "bi-fidelity protocol" : "standard protocol");
    const auto tag = static_cast<std::uint64_t>(kind);
    ProtocolOutcome o;
    o.kind = kind;
    o.n_train = train_set.size();
    const OperatorBatch batch = make_batch(train_set, kind, static_cast<std::size_t>(spec.arch.m),
                                           spec.points_per_trajectory, derive_seed(seed, {stage::training, tag, 0}));
    o.model = init_deeponet(spec.arch, derive_seed(seed, {stage::training, tag, 1}));
    o.model.fit_normalization(batch);
    if (spec.log) {
        spec.log(std::string("training ") + to_string(kind) + " on " + std::to_string(train_set.size()) +
                 " trajectories");
    }
    o.training = train(o.model, batch, spec.adam);
    return o;
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentSpec& spec, std::uint64_t seed) {
    const auto val = prefix(ds.val, spec.n_val, "validation");
    ExperimentResult r;
    r.seed = seed;
    r.dataset_hash = ds.manifest.value("manifest_hash", hex64(ds.manifest_hash()));
    for (ProtocolOutcome* o : {&r.standard, &r.bifidelity}) {
        const ProtocolKind kind = o == &r.standard ? ProtocolKind::standard : ProtocolKind::bifidelity;
        *o = train_protocol(ds, kind, spec, seed);
        o->report = evaluate(o->model, kind, val);
        if (spec.log) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s: final loss %.4e, mean validation error %.4e", to_string(kind),
                          o->training.final_loss, o->report.mean);
            spec.log(buf);
        }
    }
    r.passthrough = evaluate_passthrough(val);

    std::vector<double> pooled = r.standard.report.errors;
    pooled.insert(pooled.end(), r.bifidelity.report.errors.begin(), r.bifidelity.report.errors.end());
    const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
    r.standard.report.histogram = make_histogram(r.standard.report.errors, *lo, *hi, spec.bins);
    r.bifidelity.report.histogram = make_histogram(r.bifidelity.report.errors, *lo, *hi, spec.bins);
    r.passthrough.histogram = make_histogram(r.passthrough.errors, *lo, *hi, spec.bins);
    r.overlap = histogram_overlap(r.standard.report.histogram, r.bifidelity.report.histogram);
    return r;
}

namespace {

nlohmann::json spec_json(const ExperimentSpec& s) {
    return {{"arch", s.arch.to_json()},
            {"adam",
             {{"lr0", s.adam.lr0},
              {"beta1", s.adam.beta1},
              {"beta2", s.adam.beta2},
              {"eps", s.adam.eps},
              {"epochs", s.adam.epochs},
              {"halve_every", s.adam.halve_every}}},
            {"n_train_bifidelity", s.n_train_bf},
            {"n_train_standard", s.n_train_std},
            {"n_val", s.n_val},
            {"points_per_trajectory", s.points_per_trajectory},
            {"bins", s.bins},
            {"cost_ratio", s.cost_ratio}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
    std::string s = "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        s += g17(h.edges[i]) + ',' + g17(h.edges[i + 1]) + ',' + std::to_string(h.counts[i]) + '\n';
    }
    write_text(path, s);
}

void write_errors_csv(const std::vector<double>& errors, const std::filesystem::path& path) {
    std::string s = "trajectory,eps_val\n";
    for (std::size_t i = 0; i < errors.size(); ++i) s += std::to_string(i) + ',' + g17(errors[i]) + '\n';
    write_text(path, s);
}

void write_experiment(const ExperimentResult& r, const ExperimentSpec& spec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j = r.summary();
    const nlohmann::json sj = spec_json(spec);
    j["config"] = sj;
    j["protocol_hash"] = hex64(fnv1a64(sj.dump()));
    write_text(dir / "report.json", j.dump(2) + "\n");
    for (const ProtocolOutcome* o : {&r.standard, &r.bifidelity}) {
        write_histogram_csv(o->report.histogram, dir / ("hist_" + std::string(to_string(o->kind)) + ".csv"));
        write_errors_csv(o->report.errors, dir / ("errors_" + std::string(to_string(o->kind)) + ".csv"));
    }
    write_errors_csv(r.passthrough.errors, dir / "errors_passthrough.csv");
}

// ---------------------------------------------------------------------------
// Sweeps

std::uint64_t dataset_seed(std::uint64_t root) { return derive_seed(root, {stage::dataset}); }

namespace {

SweepRow aggregate(double key, const std::vector<ExperimentResult>& runs) {
    SweepRow row;
    row.key = key;
    for (const auto& r : runs) {
        row.seed_standard.push_back(r.standard.report.mean);
        row.seed_bifidelity.push_back(r.bifidelity.report.mean);
        row.seed_passthrough.push_back(r.passthrough.mean);
        row.overlap += r.overlap;
    }
    const double n = static_cast<double>(runs.size());
    row.mean_standard = mean_of(row.seed_standard);
    row.mean_bifidelity = mean_of(row.seed_bifidelity);
    row.mean_passthrough = mean_of(row.seed_passthrough);
    row.overlap /= n;
    return row;
}

Dataset dataset_for(const ExampleConfig& cfg, std::size_t n_train, std::size_t n_val, double noise_pct,
                    std::uint64_t root) {
    DatasetRequest req;
    req.n_train = n_train;
    req.n_val = n_val;
    req.seed = dataset_seed(root);
    req.noise_pct = noise_pct;
    return generate_dataset(cfg, req);
}

}  // namespace

std::vector<SweepRow> sweep_training_size(const ExampleConfig& cfg, const ExperimentSpec& spec,
                                          const std::vector<std::size_t>& sizes,
                                          const std::vector<std::uint64_t>& seeds) {
    if (sizes.empty() || seeds.empty()) throw InvalidParameter("sweep needs sizes and seeds");
    const std::size_t n_max = *std::max_element(sizes.begin(), sizes.end());
    std::vector<std::vector<ExperimentResult>> runs(sizes.size());
    for (std::uint64_t s : seeds) {
        const Dataset ds = dataset_for(cfg, n_max, spec.n_val, 0.0, s);
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            ExperimentSpec sp = spec;
            sp.n_train_bf = sp.n_train_std = sizes[i];
            runs[i].push_back(run_experiment(ds, sp, s));
        }
    }
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < sizes.size(); ++i) rows.push_back(aggregate(static_cast<double>(sizes[i]), runs[i]));
    return rows;
}

std::vector<SweepRow> sweep_pinching(const ExperimentSpec& spec, const std::vector<double>& zetas,
                                     const std::vector<std::uint64_t>& seeds) {
    if (zetas.empty() || seeds.empty()) throw InvalidParameter("sweep needs zeta_s values and seeds");
    std::vector<SweepRow> rows;
    for (double z : zetas) {
        const ExampleConfig cfg = default_example(ExampleId::ex1_caseII, z);
        std::vector<ExperimentResult> runs;
        for (std::uint64_t s : seeds) {
            const Dataset ds =
                dataset_for(cfg, std::max(spec.n_train_bf, spec.n_train_std), spec.n_val, 0.0, s);
            runs.push_back(run_experiment(ds, spec, s));
        }
        rows.push_back(aggregate(z, runs));
    }
    return rows;
}

std::vector<SweepRow> sweep_noise(const ExampleConfig& cfg, const ExperimentSpec& spec,
                                  const std::vector<double>& noise_pct, const std::vector<std::uint64_t>& seeds) {
    if (noise_pct.empty() || seeds.empty()) throw InvalidParameter("sweep needs noise levels and seeds");
    std::vector<SweepRow> rows;
    for (double pct : noise_pct) {
        std::vector<ExperimentResult> runs;
        for (std::uint64_t s : seeds) {
            const Dataset ds = dataset_for(cfg, std::max(spec.n_train_bf, spec.n_train_std), spec.n_val, pct, s);
            runs.push_back(run_experiment(ds, spec, s));
        }
        rows.push_back(aggregate(pct, runs));
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& key_name, const std::filesystem::path& path) {
    std::string s = key_name + ",mean_standard,mean_bifidelity,mean_passthrough,ratio,overlap\n";
    for (const auto& r : rows) {
        s += g17(r.key) + ',' + g17(r.mean_standard) + ',' + g17(r.mean_bifidelity) + ',' + g17(r.mean_passthrough) +
             ',' + g17(r.ratio()) + ',' + g17(r.overlap) + '\n';
    }
    write_text(path, s);
}

}  // namespace hysterid
