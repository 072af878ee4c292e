#include "hysterid/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"
#include "run_config_schema.inc"

namespace hysterid {

using nlohmann::json;

const json& run_config_schema() {
    static const json schema = json::parse(kRunConfigSchema);
    return schema;
}

namespace {

std::string child(const std::string& path, const std::string& key) {
    std::string k;
    for (char c : key) {
        if (c == '~') k += "~0";
        else if (c == '/') k += "~1";
        else k += c;
    }
    return path + "/" + k;
}

bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") {
        if (v.is_number_integer()) return true;
        return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
    }
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
}

void check(const json& v, const json& s, const std::string& path) {
    if (s.contains("type")) {
        const auto& t = s["type"];
        bool ok = false;
        if (t.is_array()) {
            for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
        } else {
            ok = has_type(v, t.get<std::string>());
        }
        if (!ok) throw ConfigError(path.empty() ? "/" : path, "expected type " + t.dump());
    }
    if (s.contains("enum")) {
        bool found = false;
        for (const auto& e : s["enum"]) found = found || e == v;
        if (!found) throw ConfigError(path.empty() ? "/" : path, "value must be one of " + s["enum"].dump());
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        const std::string where = path.empty() ? "/" : path;
        if (s.contains("minimum") && x < s["minimum"].get<double>())
            throw ConfigError(where, "must be >= " + s["minimum"].dump());
        if (s.contains("maximum") && x > s["maximum"].get<double>())
            throw ConfigError(where, "must be <= " + s["maximum"].dump());
        if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
            throw ConfigError(where, "must be > " + s["exclusiveMinimum"].dump());
        if (s.contains("exclusiveMaximum") && x >= s["exclusiveMaximum"].get<double>())
            throw ConfigError(where, "must be < " + s["exclusiveMaximum"].dump());
    }
    if (v.is_object()) {
        if (s.contains("required")) {
            for (const auto& r : s["required"]) {
                if (!v.contains(r.get<std::string>())) {
                    throw ConfigError(child(path, r.get<std::string>()), "required property is missing");
                }
            }
        }
        const json props = s.value("properties", json::object());
        const bool closed = s.contains("additionalProperties") && s["additionalProperties"] == false;
        for (const auto& [key, val] : v.items()) {
            if (props.contains(key)) {
                check(val, props[key], child(path, key));
            } else if (closed) {
                throw ConfigError(child(path, key), "unknown key");
            }
        }
    }
    if (v.is_array()) {
        if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) {
            throw ConfigError(path.empty() ? "/" : path, "needs at least " + s["minItems"].dump() + " items");
        }
        if (s.contains("items")) {
            for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], path + "/" + std::to_string(i));
        }
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj[key].get<T>();
}

}  // namespace

void validate_schema(const json& doc, const json& schema) { check(doc, schema, ""); }

std::vector<std::uint64_t> RunConfig::repetition_seeds() const {
    std::vector<std::uint64_t> s;
    s.push_back(seed);
    for (int r = 1; r < repetitions; ++r) s.push_back(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    return s;
}

RunConfig default_run_config(ExampleId id) {
    RunConfig c;
    c.example = id;
    c.simulation = default_example(id);
    c.experiment = default_experiment(id);
    c.dataset.n_train = c.experiment.n_train_bf;
    c.dataset.n_train_standard = c.experiment.n_train_std;
    c.dataset.n_val = c.experiment.n_val;
    c.dataset.cost_ratio = c.experiment.cost_ratio;
    c.qois = {c.simulation.qoi};
    switch (id) {
        case ExampleId::ex1_caseI:
            c.qois = {"z", "u_b", "u_3"};
            break;
        case ExampleId::ex1_caseII:
            c.zetas = {0.25, 0.4, 0.5};
            break;
        case ExampleId::car: break;
        case ExampleId::building: break;
    }
    c.output_dir = std::string("runs/") + to_string(id);
    return c;
}

RunConfig parse_run_config(const json& doc) {
    validate_schema(doc, run_config_schema());
    const ExampleId id = example_from_string(doc.at("example").get<std::string>());
    RunConfig c = default_run_config(id);
    read_if(doc, "seed", c.seed);
    read_if(doc, "repetitions", c.repetitions);
    read_if(doc, "output_dir", c.output_dir);

    const json sim = doc.value("simulation", json::object());
    if (sim.contains("zeta_s")) {
        if (id != ExampleId::ex1_caseII) throw ConfigError("/simulation/zeta_s", "only the pinching case uses zeta_s");
        c.simulation = default_example(id, sim["zeta_s"].get<double>());
    }
    read_if(sim, "qoi", c.simulation.qoi);
    if (sim.contains("qoi")) c.qois = {c.simulation.qoi};
    if (sim.contains("duration")) {
        c.simulation.duration = sim["duration"].get<double>();
        c.simulation.kanai_tajimi.duration = c.simulation.duration;
        c.simulation.road.t_final = c.simulation.duration;
    }
    read_if(sim, "accelerogram", c.simulation.accelerogram);
    read_if(sim, "accelerogram_scale", c.simulation.accelerogram_scale);
    read_if(sim, "record_pga_g", c.simulation.record_pga_g);
    if (sim.contains("corrosion_years")) {
        if (!c.simulation.corrosion) throw ConfigError("/simulation/corrosion_years", "example has no corrosion model");
        c.simulation.corrosion->t_years = sim["corrosion_years"].get<double>();
    }

    const json integ = doc.value("integrator", json::object());
    if (integ.contains("method")) {
        c.simulation.integrator.method = integ["method"] == "rk4" ? IntegratorSpec::Method::rk4
                                                                  : IntegratorSpec::Method::midpoint;
    }
    if (integ.contains("dt")) {
        c.simulation.integrator.dt = integ["dt"].get<double>();
        c.simulation.kanai_tajimi.dt = c.simulation.integrator.dt;
        c.simulation.road.dt = c.simulation.integrator.dt;
    }

    const json ds = doc.value("dataset", json::object());
    read_if(ds, "n_train", c.dataset.n_train);
    read_if(ds, "n_val", c.dataset.n_val);
    read_if(ds, "n_store", c.simulation.n_store);
    read_if(ds, "noise_pct", c.dataset.noise_pct);
    read_if(ds, "cost_ratio", c.dataset.cost_ratio);
    if (ds.contains("n_train_standard")) {
        c.dataset.n_train_standard = ds["n_train_standard"].get<std::size_t>();
    } else if (ds.contains("n_train") || ds.contains("cost_ratio")) {
        c.dataset.n_train_standard = id == ExampleId::ex1_caseI || id == ExampleId::ex1_caseII
                                         ? c.dataset.n_train
                                         : cost_equalized_size(c.dataset.n_train, c.dataset.cost_ratio);
    }
    c.experiment.n_train_bf = c.dataset.n_train;
    c.experiment.n_train_std = c.dataset.n_train_standard;
    c.experiment.n_val = c.dataset.n_val;
    c.experiment.cost_ratio = c.dataset.cost_ratio;

    const json net = doc.value("network", json::object());
    read_if(net, "m", c.experiment.arch.m);
    read_if(net, "branch_hidden", c.experiment.arch.branch_hidden);
    read_if(net, "trunk_hidden", c.experiment.arch.trunk_hidden);
    read_if(net, "p", c.experiment.arch.p);
    if (static_cast<std::size_t>(c.experiment.arch.m) > c.simulation.n_store) {
        throw ConfigError("/network/m", "more branch sensors than stored time points");
    }

    const json adam = doc.value("adam", json::object());
    read_if(adam, "lr0", c.experiment.adam.lr0);
    read_if(adam, "beta1", c.experiment.adam.beta1);
    read_if(adam, "beta2", c.experiment.adam.beta2);
    read_if(adam, "eps", c.experiment.adam.eps);
    read_if(adam, "epochs", c.experiment.adam.epochs);
    read_if(adam, "halve_every", c.experiment.adam.halve_every);

    const json tr = doc.value("training", json::object());
    read_if(tr, "points_per_trajectory", c.experiment.points_per_trajectory);
    read_if(tr, "bins", c.experiment.bins);

    const json sw = doc.value("sweeps", json::object());
    read_if(sw, "qois", c.qois);
    read_if(sw, "sizes", c.sizes);
    read_if(sw, "zeta_s", c.zetas);
    read_if(sw, "noise_pct", c.noise_pct);
    if (!c.zetas.empty() && id != ExampleId::ex1_caseII) {
        throw ConfigError("/sweeps/zeta_s", "only the pinching case sweeps zeta_s");
    }

    try {
        c.simulation.validate();
        c.experiment.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError("", e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::json RunConfig::to_json() const {
    const auto& a = experiment.arch;
    const auto& o = experiment.adam;
    json j = {
        {"example", to_string(example)},
        {"seed", seed},
        {"repetitions", repetitions},
        {"output_dir", output_dir},
        {"dataset",
         {{"n_train", dataset.n_train},
          {"n_train_standard", dataset.n_train_standard},
          {"n_val", dataset.n_val},
          {"n_store", simulation.n_store},
          {"noise_pct", dataset.noise_pct},
          {"cost_ratio", dataset.cost_ratio}}},
        {"simulation", {{"qoi", simulation.qoi}, {"duration", simulation.duration}}},
        {"integrator",
         {{"method", simulation.integrator.method == IntegratorSpec::Method::rk4 ? "rk4" : "midpoint"},
          {"dt", simulation.integrator.dt}}},
        {"network", {{"m", a.m}, {"branch_hidden", a.branch_hidden}, {"trunk_hidden", a.trunk_hidden}, {"p", a.p}}},
        {"adam",
         {{"lr0", o.lr0},
          {"beta1", o.beta1},
          {"beta2", o.beta2},
          {"eps", o.eps},
          {"epochs", o.epochs},
          {"halve_every", o.halve_every}}},
        {"training", {{"points_per_trajectory", experiment.points_per_trajectory}, {"bins", experiment.bins}}},
        {"sweeps", {{"qois", qois}, {"sizes", sizes}, {"zeta_s", zetas}, {"noise_pct", noise_pct}}}};
    if (example == ExampleId::ex1_caseII) j["simulation"]["zeta_s"] = simulation.hf_law.pn.zeta_s;
    if (!simulation.accelerogram.empty()) {
        j["simulation"]["accelerogram"] = simulation.accelerogram;
        j["simulation"]["accelerogram_scale"] = simulation.accelerogram_scale;
    }
    if (example == ExampleId::building) {
        j["simulation"]["record_pga_g"] = simulation.record_pga_g;
        if (simulation.corrosion) j["simulation"]["corrosion_years"] = simulation.corrosion->t_years;
    }
    return j;
}

}  // namespace hysterid
