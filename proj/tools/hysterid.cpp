// hysterid: dataset generation, DeepONet training, evaluation and full
// reproduction runs for the hysteretic bi-fidelity examples.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hysterid/bifidelity.hpp"
#include "hysterid/errors.hpp"
#include "hysterid/neuralop.hpp"
#include "hysterid/random.hpp"
#include "hysterid/run_config.hpp"
#include "hysterid/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hysterid;

namespace {

enum Exit { ok = 0, failure = 1, config = 2, divergence = 3, io = 4 };

void log_line(const std::string& s) { std::cerr << "[hysterid] " << s << std::endl; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Precedence: --seed flag, then HYSTERID_SEED, then the config file.
void apply_seed_overrides(RunConfig& cfg, const std::string& seed_flag) {
    auto parse = [](const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw ConfigError(what, "not an unsigned integer: '" + s + "'");
        }
    };
    if (const char* env = std::getenv("HYSTERID_SEED"); env && *env) cfg.seed = parse(env, "HYSTERID_SEED");
    if (!seed_flag.empty()) cfg.seed = parse(seed_flag, "--seed");
}

RunConfig config_for(const std::string& path, const std::string& example) {
    if (!path.empty()) return load_run_config(path);
    if (example.empty()) throw ConfigError("", "either --config or an example id is required");
    return default_run_config(example_from_string(example));
}

DatasetRequest request_for(const RunConfig& cfg, std::uint64_t root, std::size_t jobs) {
    DatasetRequest req = cfg.dataset;
    req.seed = dataset_seed(root);
    req.jobs = jobs;
    return req;
}

json protocol_json(const RunConfig& cfg, ProtocolKind kind) {
    json j = cfg.to_json();
    j["protocol"] = to_string(kind);
    return j;
}

void write_loss_csv(const TrainResult& tr, const fs::path& path) {
    std::string s = "epoch,loss\n";
    for (const auto& [e, l] : tr.history) s += std::to_string(e) + ',' + g17(l) + '\n';
    write_text(path, s);
}

// ---------------------------------------------------------------------------

int cmd_gen(const RunConfig& cfg, const fs::path& out, std::size_t jobs) {
    log_line(std::string("generating ") + to_string(cfg.example) + " dataset in " + out.string());
    const Dataset ds = generate_dataset(cfg.simulation, request_for(cfg, cfg.seed, jobs));
    write_dataset(ds, out);
    std::cout << "manifest_hash " << ds.manifest.at("manifest_hash").get<std::string>() << "\n";
    return ok;
}

int cmd_train(const RunConfig& cfg, const fs::path& data, ProtocolKind kind, const fs::path& out) {
    const Dataset ds = read_dataset(data);
    if (kind == ProtocolKind::bifidelity) {
        for (const auto& p : ds.train) {
            if (p.y_lf.empty()) throw ConfigError("/protocol", "bi-fidelity training needs y_lf, which the dataset lacks");
        }
    }
    ExperimentSpec spec = cfg.experiment;
    spec.log = log_line;
    const ProtocolOutcome o = train_protocol(ds, kind, spec, cfg.seed);
    fs::create_directories(out);
    const std::string name = to_string(kind);
    const json pj = protocol_json(cfg, kind);
    json extra = {{"protocol", name},
                  {"seed", cfg.seed},
                  {"epochs", spec.adam.epochs},
                  {"n_train", o.n_train},
                  {"final_loss", o.training.final_loss},
                  {"dataset_hash", ds.manifest.value("manifest_hash", std::string())},
                  {"protocol_hash", hex64(fnv1a64(pj.dump()))},
                  {"config", pj}};
    save_checkpoint(o.model, extra, out / ("model_" + name + ".ckpt"));
    write_loss_csv(o.training, out / ("loss_" + name + ".csv"));
    std::cout << "final_loss " << g17(o.training.final_loss) << "\n";
    return ok;
}

int cmd_eval(const fs::path& ckpt, const fs::path& data, const fs::path& out) {
    json header;
    const DeepOnetModel model = load_checkpoint(ckpt, &header);
    const ProtocolKind kind = protocol_from_string(header.value("protocol", std::string("bifidelity")));
    const Dataset ds = read_dataset(data);
    if (static_cast<std::size_t>(model.arch.q) != ds.xi_names.size()) {
        throw ConfigError("/network", "checkpoint and dataset disagree on the number of uncertain parameters");
    }
    ValidationReport r = evaluate(model, kind, ds.val);
    const auto [lo, hi] = std::minmax_element(r.errors.begin(), r.errors.end());
    const std::size_t bins = header.contains("config") ? header["config"]["training"].value("bins", 30) : 30;
    r.histogram = make_histogram(r.errors, *lo, *hi, bins);

    json rep = {{"protocol", to_string(kind)},
                {"protocol_hash", header.value("protocol_hash", std::string())},
                {"checkpoint_hash", hex64(fnv1a64(read_bytes(ckpt)))},
                {"dataset_hash", ds.manifest.value("manifest_hash", std::string())},
                {"n_val", r.errors.size()},
                {"mean_error", r.mean},
                {"normalization", {{"target_mean", model.target_mean}, {"target_sd", model.target_sd}}}};
    bool have_lf = !ds.val.empty();
    for (const auto& p : ds.val) have_lf = have_lf && !p.y_lf.empty();
    fs::create_directories(out);
    if (have_lf) {
        const ValidationReport pass = evaluate_passthrough(ds.val);
        rep["passthrough_mean_error"] = pass.mean;
        write_errors_csv(pass.errors, out / "errors_passthrough.csv");
    }
    write_text(out / "report.json", rep.dump(2) + "\n");
    write_histogram_csv(r.histogram, out / ("hist_" + std::string(to_string(kind)) + ".csv"));
    write_errors_csv(r.errors, out / ("errors_" + std::string(to_string(kind)) + ".csv"));
    std::cout << "mean_error " << g17(r.mean) << "\n";
    return ok;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            T v;
            if constexpr (std::is_floating_point_v<T>) v = static_cast<T>(std::stod(item, &used));
            else v = static_cast<T>(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(flag, "bad list entry '" + item + "'");
        }
    }
    return out;
}

struct ReproduceFlags {
    std::string seeds, sizes, noise, zetas;
    int epochs = -1;
    std::size_t jobs = 1;
    bool no_sweeps = false;
};

json sweep_json(const std::vector<SweepRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        a.push_back({{"key", r.key},
                     {"mean_standard", r.mean_standard},
                     {"mean_bifidelity", r.mean_bifidelity},
                     {"mean_passthrough", r.mean_passthrough},
                     {"ratio", r.ratio()},
                     {"overlap", r.overlap},
                     {"seed_standard", r.seed_standard},
                     {"seed_bifidelity", r.seed_bifidelity},
                     {"seed_passthrough", r.seed_passthrough}});
    }
    return a;
}

int cmd_reproduce(RunConfig cfg, const ReproduceFlags& f, const fs::path& out) {
    if (!f.sizes.empty()) cfg.sizes = parse_list<std::size_t>(f.sizes, "--sizes");
    if (!f.noise.empty()) cfg.noise_pct = parse_list<double>(f.noise, "--noise");
    if (!f.zetas.empty()) cfg.zetas = parse_list<double>(f.zetas, "--zeta");
    if (f.epochs >= 0) cfg.experiment.adam.epochs = f.epochs;
    if (f.no_sweeps) {
        cfg.sizes.clear();
        cfg.noise_pct.clear();
        cfg.zetas.clear();
    }
    if (!cfg.zetas.empty() && cfg.example != ExampleId::ex1_caseII) {
        throw ConfigError("--zeta", "only ex1-caseII sweeps zeta_s");
    }
    const std::vector<std::uint64_t> seeds =
        f.seeds.empty() ? cfg.repetition_seeds() : parse_list<std::uint64_t>(f.seeds, "--seeds");
    if (seeds.empty()) throw ConfigError("--seeds", "no seeds given");
    ExperimentSpec spec = cfg.experiment;
    spec.log = log_line;

    fs::create_directories(out);
    json report = {{"example", to_string(cfg.example)}, {"config", cfg.to_json()}, {"seeds", seeds}};
    report["config"]["adam"]["epochs"] = spec.adam.epochs;
    if (seeds.size() < 3) report["noisy"] = true;

    std::string table = "qoi,mean_standard,mean_bifidelity,mean_passthrough,ratio\n";
    json qoi_rows = json::array();
    for (const std::string& qoi : cfg.qois) {
        ExampleConfig sim = cfg.simulation;
        sim.qoi = qoi;
        std::vector<ExperimentResult> runs;
        for (std::uint64_t s : seeds) {
            log_line("qoi " + qoi + ", seed " + std::to_string(s));
            DatasetRequest req = request_for(cfg, s, f.jobs);
            const Dataset ds = generate_dataset(sim, req);
            runs.push_back(run_experiment(ds, spec, s));
            const fs::path dir = out / qoi / ("seed_" + std::to_string(s));
            write_experiment(runs.back(), spec, dir);
        }
        double ms = 0, mb = 0, mp = 0;
        json per_seed = json::array();
        for (const auto& r : runs) {
            ms += r.standard.report.mean;
            mb += r.bifidelity.report.mean;
            mp += r.passthrough.mean;
            per_seed.push_back(r.summary());
        }
        const double n = static_cast<double>(runs.size());
        ms /= n;
        mb /= n;
        mp /= n;
        table += qoi + ',' + g17(ms) + ',' + g17(mb) + ',' + g17(mp) + ',' + g17(ms / mb) + '\n';
        qoi_rows.push_back({{"qoi", qoi},
                            {"mean_standard", ms},
                            {"mean_bifidelity", mb},
                            {"mean_passthrough", mp},
                            {"ratio", ms / mb},
                            {"runs", per_seed}});
    }
    report["results"] = qoi_rows;
    write_text(out / "summary.csv", table);

    if (!cfg.sizes.empty()) {
        const auto rows = sweep_training_size(cfg.simulation, spec, cfg.sizes, seeds);
        write_sweep_csv(rows, "n_train", out / "error_vs_ntrain.csv");
        report["sweeps"]["n_train"] = sweep_json(rows);
    }
    if (!cfg.zetas.empty()) {
        const auto rows = sweep_pinching(spec, cfg.zetas, seeds);
        write_sweep_csv(rows, "zeta_s", out / "pinching.csv");
        report["sweeps"]["zeta_s"] = sweep_json(rows);
    }
    if (!cfg.noise_pct.empty()) {
        const auto rows = sweep_noise(cfg.simulation, spec, cfg.noise_pct, seeds);
        write_sweep_csv(rows, "noise_pct", out / "noise.csv");
        report["sweeps"]["noise_pct"] = sweep_json(rows);
    }
    write_text(out / "report.json", report.dump(2) + "\n");
    std::cout << table;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bi-fidelity DeepONet experiments on hysteretic structures"};
    app.require_subcommand(1);

    std::string config_path, seed_flag, out_dir, data_dir, protocol = "bifidelity", checkpoint, example;
    std::size_t jobs = 1;
    ReproduceFlags rf;

    auto* gen = app.add_subcommand("gen", "simulate a paired low/high-fidelity dataset");
    gen->add_option("--config", config_path, "run configuration (JSON)")->required();
    gen->add_option("--out", out_dir, "dataset directory (default <output_dir>/dataset)");
    gen->add_option("--seed", seed_flag, "root seed");
    gen->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* trn = app.add_subcommand("train", "train one protocol on a dataset");
    trn->add_option("--config", config_path, "run configuration (JSON)")->required();
    trn->add_option("--data", data_dir, "dataset directory")->required();
    trn->add_option("--protocol", protocol, "standard | bifidelity");
    trn->add_option("--out", out_dir, "output directory (default <output_dir>/model)");
    trn->add_option("--seed", seed_flag, "root seed");

    auto* evl = app.add_subcommand("eval", "score a checkpoint on the validation set");
    evl->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    evl->add_option("--data", data_dir, "dataset directory")->required();
    evl->add_option("--out", out_dir, "report directory")->required();

    auto* rep = app.add_subcommand("reproduce", "generate, train both protocols, evaluate and report");
    rep->add_option("example", example, "ex1-caseI | ex1-caseII | car | ex3");
    rep->add_option("--config", config_path, "run configuration (JSON); defaults to the example's settings");
    rep->add_option("--out", out_dir, "output directory (default <output_dir>)");
    rep->add_option("--seed", seed_flag, "root seed");
    rep->add_option("--seeds", rf.seeds, "comma-separated root seeds, one repetition each");
    rep->add_option("--sizes", rf.sizes, "training-size sweep, e.g. 50,100,200");
    rep->add_option("--noise", rf.noise, "noise sweep in percent, e.g. 0,5,10");
    rep->add_option("--zeta", rf.zetas, "pinching sweep, e.g. 0.25,0.4,0.5");
    rep->add_option("--epochs", rf.epochs, "override the number of epochs");
    rep->add_flag("--no-sweeps", rf.no_sweeps, "skip sweeps defined by the configuration");
    rep->add_option("--jobs", rf.jobs, "worker threads for simulation")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config;
    }

    try {
        if (*evl) return cmd_eval(checkpoint, data_dir, out_dir);
        RunConfig cfg = config_for(config_path, example);
        if (*rep && !example.empty() && example_from_string(example) != cfg.example) {
            throw ConfigError("/example", "config is for " + std::string(to_string(cfg.example)) + ", not " + example);
        }
        apply_seed_overrides(cfg, seed_flag);
        if (*gen) return cmd_gen(cfg, out_dir.empty() ? fs::path(cfg.output_dir) / "dataset" : fs::path(out_dir), jobs);
        if (*trn) {
            return cmd_train(cfg, data_dir, protocol_from_string(protocol),
                             out_dir.empty() ? fs::path(cfg.output_dir) / "model" : fs::path(out_dir));
        }
        return cmd_reproduce(cfg, rf, out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return divergence;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return io;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
}
