#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"
#include "hysterid/run_config.hpp"

using namespace hysterid;
using nlohmann::json;

namespace {

std::filesystem::path config_dir() {
    const char* d = std::getenv("HYSTERID_CONFIG_DIR");
    REQUIRE(d != nullptr);
    return d;
}

std::string error_path(const json& doc) {
    try {
        parse_run_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("schema validator reports the failing pointer") {
    const json schema = {{"type", "object"},
                         {"additionalProperties", false},
                         {"required", {"a"}},
                         {"properties",
                          {{"a", {{"type", "integer"}, {"minimum", 1}}},
                           {"b", {{"type", "array"}, {"minItems", 1}, {"items", {{"enum", {"x", "y"}}}}}},
                           {"c", {{"type", "number"}, {"exclusiveMinimum", 0}}}}}};
    CHECK_NOTHROW(validate_schema(json{{"a", 2}, {"b", {"x"}}}, schema));
    CHECK_NOTHROW(validate_schema(json{{"a", 2.0}}, schema));

    auto fails_at = [&](const json& doc) {
        try {
            validate_schema(doc, schema);
        } catch (const ConfigError& e) {
            return e.path();
        }
        return std::string("<accepted>");
    };
    CHECK(fails_at(json{{"b", {"x"}}}) == "/a");
    CHECK(fails_at(json{{"a", 0}}) == "/a");
    CHECK(fails_at(json{{"a", 1.5}}) == "/a");
    CHECK(fails_at(json{{"a", 1}, {"b", json::array()}}) == "/b");
    CHECK(fails_at(json{{"a", 1}, {"b", {"x", "z"}}}) == "/b/1");
    CHECK(fails_at(json{{"a", 1}, {"c", 0}}) == "/c");
    CHECK(fails_at(json{{"a", 1}, {"d", 0}}) == "/d");
    CHECK(fails_at(json::array()) == "/");
}

TEST_CASE("shipped configurations load and validate") {
    for (const char* name : {"ex1_caseI.json", "ex1_caseII.json", "car.json", "ex3.json"}) {
        CAPTURE(name);
        const auto c = load_run_config(config_dir() / name);
        CHECK_NOTHROW(c.simulation.validate());
        CHECK_NOTHROW(c.experiment.validate());
        CHECK_NOTHROW(validate_schema(c.to_json(), run_config_schema()));
    }
    const auto car = load_run_config(config_dir() / "car.json");
    CHECK(car.example == ExampleId::car);
    CHECK(car.dataset.n_train_standard == 386);
    CHECK(car.experiment.arch.p == 10);
    CHECK(car.simulation.qoi == "a:u_c");
}

TEST_CASE("defaults and overlay") {
    const auto base = parse_run_config(json{{"example", "ex3"}});
    CHECK(base.example == ExampleId::building);
    CHECK(base.experiment.arch.p == 20);
    CHECK(base.experiment.adam.lr0 == 2e-3);

    const auto c = parse_run_config(json{{"example", "ex1-caseI"},
                                         {"seed", 17},
                                         {"adam", {{"epochs", 300}}},
                                         {"training", {{"points_per_trajectory", 50}}}});
    CHECK(c.seed == 17);
    CHECK(c.experiment.adam.epochs == 300);
    CHECK(c.experiment.adam.lr0 == 1e-3);
    CHECK(c.experiment.points_per_trajectory == 50);

    // Round trip through JSON keeps every setting.
    const auto back = parse_run_config(c.to_json());
    CHECK(back.to_json() == c.to_json());
}

TEST_CASE("configuration errors") {
    CHECK(error_path(json{{"example", "ex9"}}) == "/example");
    CHECK(error_path(json{{"example", "car"}, {"adam", {{"lr0", -1.0}}}}) == "/adam/lr0");
    CHECK(error_path(json{{"example", "car"}, {"network", {{"depth", 3}}}}) == "/network/depth");
    CHECK(error_path(json{{"example", "car"}, {"simulation", {{"zeta_s", 0.3}}}}) == "/simulation/zeta_s");
    CHECK(error_path(json{{"example", "ex1-caseII"}, {"simulation", {{"zeta_s", 0.3}}}}) == "<accepted>");
    CHECK(parse_run_config(json{{"example", "ex1-caseII"}, {"simulation", {{"zeta_s", 0.3}}}})
              .simulation.hf_law.pn.zeta_s == 0.3);

    const auto dir = std::filesystem::temp_directory_path() / "hysterid_unit";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "broken.json") << "{\"example\": ";
    CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ConfigError);
    CHECK_THROWS_AS(load_run_config(dir / "absent.json"), IoError);
}

TEST_CASE("repetition seeds") {
    auto c = default_run_config(ExampleId::ex1_caseI);
    c.seed = 5;
    c.repetitions = 3;
    const auto s = c.repetition_seeds();
    REQUIRE(s.size() == 3);
    CHECK(s[0] == 5);
    CHECK(s[1] == derive_seed(5, {1}));
    CHECK(s[2] == derive_seed(5, {2}));
}
