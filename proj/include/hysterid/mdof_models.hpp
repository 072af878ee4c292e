#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hysterid/hysteresis.hpp"

namespace hysterid {

constexpr double kGravity = 9.81;

/// How a hysteretic element's variable enters the equations of motion:
/// either the force is proportional to z, or (as printed for the car
/// suspension) to its rate z-dot.
enum class Coupling { state, rate };

struct HystereticElement {
    HystereticLaw law;
    /// Driving velocity is drive.dot(u_dot).
    Eigen::VectorXd drive;
    Coupling coupling = Coupling::state;
    std::string label;
};

/// M u'' + C u' + K u + L_tilde g = excitation_map * w(t)
struct MdofSystem {
    Eigen::MatrixXd M;
    Eigen::MatrixXd C;
    Eigen::MatrixXd K;
    /// n x n_g, column j is the force pattern of hysteretic element j per unit g_j.
    Eigen::MatrixXd L_tilde;
    std::vector<HystereticElement> hysteretic_elements;
    Eigen::MatrixXd excitation_map;
    std::vector<std::string> labels;

    Eigen::Index dofs() const { return M.rows(); }
    Eigen::Index dof_index(const std::string& label) const;

    /// Throws InvalidParameter on inconsistent dimensions, asymmetric
    /// matrices or a mass matrix that is not positive definite.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Uncertain parameters

struct Distribution {
    enum class Kind { lognormal, uniform, truncated_gaussian };
    Kind kind = Kind::uniform;
    /// lognormal / truncated_gaussian: mean and sd of the variable itself.
    double mean = 0.0;
    double sd = 0.0;
    /// uniform: [lower, upper]; truncated_gaussian: lower truncation point.
    double lower = 0.0;
    double upper = 0.0;

    static Distribution lognormal(double mean, double sd);
    static Distribution uniform(double lower, double upper);
    static Distribution truncated_gaussian(double mean, double sd, double lower = 0.0);

    void validate() const;
    /// Parameters of the underlying normal, by moment matching.
    std::pair<double, double> log_moments() const;
};

struct UncertainParameter {
    std::string name;
    Distribution dist;
};

using UncertainSpec = std::vector<UncertainParameter>;

/// count i.i.d. draws; row k holds one realization, ordered as `spec`.
std::vector<std::vector<double>> sample_uncertain(const UncertainSpec& spec, std::uint64_t seed,
                                                  std::size_t count);

UncertainSpec example1_uncertain_spec();
UncertainSpec car_uncertain_spec();
UncertainSpec building_uncertain_spec();

// ---------------------------------------------------------------------------
// Damping, corrosion

struct RayleighDamping {
    double beta1 = 0.0;
    double beta2 = 0.0;
    std::pair<int, int> mode_indices{1, 2};
    double damping_ratio = 0.0;
    std::pair<double, double> anchor_frequencies{0.0, 0.0};
};

/// Natural circular frequencies of (M, K), ascending.
Eigen::VectorXd natural_frequencies(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K);

/// Mode indices are 1-based.
RayleighDamping rayleigh_damping(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K, int mode_i, int mode_j,
                                 double damping_ratio);

struct CorrosionModel {
    double B1 = 80.2;
    double B2 = 0.59;
    double t_years = 50.0;
    /// Plate thickness used to map penetration depth to a flexural
    /// stiffness retention (1 - d/t_ref)^3.
    double t_ref_um = 10000.0;

    void validate() const;
};

/// Penetration depth in micrometres.
double corrosion_loss(const CorrosionModel& model);
double stiffness_retention(const CorrosionModel& model);

// ---------------------------------------------------------------------------
// Example systems

/// Law selection for a base isolator / suspension; the Bouc-Wen constants
/// are derived from the sampled stiffness and yield force.
struct IsolatorLaw {
    LawKind kind = LawKind::classic;
    double n_pow = 1.0;
    DegradationParams dg;
    PinchingParams pn;
};

/// Sampled isolation-layer parameters shared by the base-isolated examples.
struct IsolationSample {
    double k_post = 0.0;    // N/m
    double c_b = 0.0;       // N s/m
    double r_k = 0.0;       // k_post / k_pre
    double Q_y_pct = 0.0;   // percent of total weight
};

struct ShearBuildingParams {
    int n_stories = 3;
    double story_mass = 300e3;
    double story_stiffness = 40e6;
    double base_mass = 500e3;
    /// Linear base stiffness in addition to k_post.
    double base_stiffness = 0.0;
    double damping_ratio = 0.03;
    /// 1-based Rayleigh anchor modes; 0 for the second means min(10, n_stories).
    int damping_mode_i = 1;
    int damping_mode_j = 0;
};

/// DOF order is [u_b, u_1, ..., u_n], all relative to the ground. The
/// single excitation channel is the ground acceleration.
MdofSystem build_shear_building(const ShearBuildingParams& params, const IsolationSample& xi,
                                const IsolatorLaw& law, const std::optional<CorrosionModel>& corrosion = {});

/// Three 300 Mg / 40 MN/m stories on a 500 Mg base, damping anchored on modes 1-2.
MdofSystem build_4dof(const IsolationSample& xi, const IsolatorLaw& law);

ShearBuildingParams four_dof_params();

/// Pre-yield stiffness k_post / r_k; throws InvalidParameter if r_k is not in (0, 1).
double pre_yield_stiffness(double k_post, double r_k);
/// Q_y from a percentage of the weight of `total_mass`.
double yield_force_from_pct(double pct, double total_mass);

struct CarParams {
    double M_b = 1794.40;
    double I_b = 34430.50;
    double m_wf = 87.15;
    double m_wr = 140.14;
    double c_bf = 1190.0;
    double c_br = 1000.0;
    double L_f = 1.27;
    double L_r = 1.72;
    double velocity = 20.0;
    double qy_pct = 1.5;
    Coupling coupling = Coupling::rate;
    IsolatorLaw law{LawKind::degrading, 2.0, {0.02, 0.02, 0.02}, {}};
};

struct CarSample {
    double k_bf = 0.0;
    double k_br = 0.0;
    double k_wf = 0.0;
    double k_wr = 0.0;
    double r_k = 0.0;
};

/// u = [u_c, theta_c, u_wf, u_wr]; excitation channels [w_f, w_r].
MdofSystem build_half_car(const CarSample& xi, const CarParams& params = {});
/// u = [u_c, u_wf]; excitation channel w_f. Uses the full body mass M_b.
MdofSystem build_quarter_car(const CarSample& xi, const CarParams& params = {});

IsolationSample isolation_sample_from(const std::vector<double>& row);
CarSample car_sample_from(const std::vector<double>& row);

}  // namespace hysterid
