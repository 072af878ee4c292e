#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "hysterid/excitation.hpp"
#include "hysterid/mdof_models.hpp"

namespace hysterid {

// ---------------------------------------------------------------------------
// State-space assembly

enum class QoiKind { auxiliary_z, displacement, acceleration };

struct QoiSelector {
    QoiKind kind = QoiKind::auxiliary_z;
    Eigen::Index index = 0;
    std::string name;
};

/// "z" (first hysteretic element), "z:<element label>", a DOF label such as
/// "u_b", "roof" (last DOF), or "a:<DOF label>" for an acceleration.
QoiSelector parse_qoi(const MdofSystem& system, const std::string& name);

/// First-order form of the equations of motion with state
/// X = [u; u_dot; z_1..z_g; e_1..e_g].
class StateSpaceSystem {
public:
    /// Throws InvalidParameter if the excitation channels do not match the system.
    StateSpaceSystem(MdofSystem system, ExcitationSignal excitation, QoiSelector qoi);

    Eigen::Index dofs() const { return n_; }
    Eigen::Index n_hysteretic() const { return g_; }
    Eigen::Index state_dim() const { return 2 * n_ + 2 * g_; }

    const MdofSystem& system() const { return system_; }
    const ExcitationSignal& excitation() const { return excitation_; }
    const QoiSelector& qoi() const { return qoi_; }

    /// dx = f(t, x); also leaves the DOF accelerations in `accel` if non-null.
    void rate(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx, Eigen::VectorXd* accel = nullptr) const;
    double output(double t, const Eigen::VectorXd& x) const;

    /// Largest undamped natural frequency of (M, K).
    double max_frequency() const { return omega_max_; }

private:
    MdofSystem system_;
    ExcitationSignal excitation_;
    QoiSelector qoi_;
    Eigen::Index n_ = 0;
    Eigen::Index g_ = 0;
    Eigen::MatrixXd Minv_K_, Minv_C_, Minv_L_, Minv_E_;
    Eigen::MatrixXd drives_;  // g x n
    double omega_max_ = 0.0;
};

/// Optionally replaces the law kind of every hysteretic element.
StateSpaceSystem assemble(MdofSystem system, std::optional<LawKind> law, ExcitationSignal excitation,
                          const std::string& qoi);

// ---------------------------------------------------------------------------
// Time integration

struct IntegratorSpec {
    enum class Method { rk4, midpoint };
    Method method = Method::rk4;
    double dt = 0.005;

    void validate() const;
};

struct IntegrationResult {
    std::vector<double> t;
    std::vector<double> qoi;
    /// Full state history, only filled when requested.
    std::vector<Eigen::VectorXd> states;
    Eigen::VectorXd final_state;
    std::vector<std::string> warnings;
};

/// Fixed-step march over [0, duration]; duration defaults to the excitation length.
IntegrationResult integrate(const StateSpaceSystem& ss, const IntegratorSpec& spec, const Eigen::VectorXd& x0,
                            std::optional<double> duration = {}, bool keep_states = false);

// ---------------------------------------------------------------------------
// Paired low-/high-fidelity datasets

enum class ExampleId { ex1_caseI, ex1_caseII, car, building };

const char* to_string(ExampleId id);
ExampleId example_from_string(const std::string& name);

struct ExampleConfig {
    ExampleId id = ExampleId::ex1_caseI;
    std::string qoi = "z";
    double duration = 20.0;
    IntegratorSpec integrator{};
    /// Storage grid size per record.
    std::size_t n_store = 200;
    UncertainSpec uncertain;

    // base-isolated structures (Examples 1 and 3)
    KanaiTajimiSpec kanai_tajimi{};
    ShearBuildingParams structure{};
    IsolatorLaw lf_law{};
    IsolatorLaw hf_law{};

    // car
    RoadSpec road{};
    CarParams car{};
    LawKind car_lf_law = LawKind::degrading;

    // building
    std::optional<CorrosionModel> corrosion;
    std::string accelerogram;  // empty: synthetic record
    double accelerogram_scale = 1.0;
    double record_pga_g = 0.348;
    std::uint64_t record_seed = 1940;

    /// Throws InvalidParameter when the storage grid does not fit the record.
    void validate() const;
};

/// Published defaults for each example. `zeta_s` is used by ex1_caseII only.
ExampleConfig default_example(ExampleId id, double zeta_s = 0.5);

struct TrajectoryPair {
    std::vector<double> xi;
    std::vector<double> t;
    std::vector<double> y_lf;
    std::vector<double> y_hf;
    std::vector<double> y_corr;
    /// Excitation channel 0 on the storage grid.
    std::vector<double> excitation;
    std::uint64_t seed = 0;
    int retries = 0;
};

/// Simulates both fidelities for fixed parameters and excitation. For the
/// car the quarter-car model sees channel 0 (front wheel) only.
TrajectoryPair simulate_pair(const ExampleConfig& cfg, const std::vector<double>& xi,
                             const ExcitationSignal& excitation);

/// Excitation for one realization; the building example ignores the seed
/// and returns its fixed record.
ExcitationSignal draw_excitation(const ExampleConfig& cfg, const std::vector<double>& xi, std::uint64_t seed);

/// Draws xi and an excitation from `seed` and simulates both fidelities;
/// redraws up to 3 times on divergence. `fixed_excitation` short-circuits
/// draw_excitation (used for the building record).
TrajectoryPair simulate_realization(const ExampleConfig& cfg, std::uint64_t seed,
                                    const ExcitationSignal* fixed_excitation = nullptr);

/// The fixed record used by the building example.
ExcitationSignal building_record(const ExampleConfig& cfg);

/// Adds N(0, (pct/100 * sd(y_hf))^2) to y_hf and refreshes y_corr.
void add_target_noise(TrajectoryPair& pair, double noise_pct, std::uint64_t seed);

struct Dataset {
    ExampleConfig config;
    std::vector<std::string> xi_names;
    std::vector<TrajectoryPair> train;
    std::vector<TrajectoryPair> val;
    nlohmann::json manifest = nlohmann::json::object();

    std::uint64_t manifest_hash() const;
};

struct DatasetRequest {
    std::size_t n_train = 200;
    std::size_t n_val = 250;
    std::uint64_t seed = 1;
    double noise_pct = 0.0;
    /// Informational; stored in the manifest.
    double cost_ratio = 1.0;
    std::size_t n_train_standard = 0;
    /// Worker threads; results do not depend on this.
    std::size_t jobs = 1;
};

/// Training realization k uses derive_seed(seed, {dataset, 0, k}) and
/// validation realization k uses derive_seed(seed, {dataset, 1, k}), so
/// smaller training sets are prefixes of larger ones and the validation
/// set does not depend on n_train. Noise touches training targets only.
Dataset generate_dataset(const ExampleConfig& cfg, const DatasetRequest& request);

/// Writes manifest.json, real_<k>.csv (training realizations first) and
/// excitation.dat (one line of storage-grid excitation samples per realization).
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Columns are located by header name; y_lf and y_corr may be absent
/// (high-fidelity-only data), in which case they are left empty.
Dataset read_dataset(const std::filesystem::path& dir);

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace hysterid
