#pragma once

// Bouc-Wen family evolution laws for the hysteretic auxiliary variable z.
//
// All functions here are pure: they take parameters, the current
// (z, e) state and the driving velocity, and return a rate. The energy-like
// measure e is carried by the integrator as an extra state variable.

namespace hysterid {

struct BoucWenParams {
    double A = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    double n_pow = 1.0;

    /// A = k_pre / Q_y and beta = gamma = A / 2, which keeps z in [-1, 1].
    static BoucWenParams consistent(double k_pre, double yield_force, double n_pow = 1.0);

    /// Throws InvalidParameter unless A > 0, beta >= 0, gamma >= 0, n_pow >= 1.
    void validate() const;
};

struct DegradationParams {
    double delta_A = 0.0;
    double delta_nu = 0.0;
    double delta_eta = 0.0;

    void validate() const;
};

struct PinchingParams {
    double zeta_s = 0.0;
    double p = 1.0;
    double q = 0.5;
    double psi = 0.25;
    double delta_psi = 0.0;
    double lambda = 0.5;

    void validate() const;
};

struct HystereticState {
    double z = 0.0;
    double e = 0.0;
};

struct DegradationShapes {
    double A_bar;
    double nu;
    double eta;
};

double bouc_wen_rate(const BoucWenParams& bw, double z, double v);

/// Throws DegenerateState when eta(e) <= 0.
DegradationShapes degradation_shapes(const BoucWenParams& bw, const DegradationParams& dg, double e);

double baber_wen_rate(const BoucWenParams& bw, const DegradationParams& dg,
                      const HystereticState& state, double v);

/// h(z) in (1 - zeta_s, 1]. sgn(0) is taken as 0.
double pinching_shape(const BoucWenParams& bw, const DegradationParams& dg, const PinchingParams& pn,
                      const HystereticState& state, double v);

/// Note the bracket uses the undegraded A, not A_bar.
double pinching_rate(const BoucWenParams& bw, const DegradationParams& dg, const PinchingParams& pn,
                     const HystereticState& state, double v);

/// de/dt = z * v.
double energy_rate(double z, double v);

enum class LawKind { classic, degrading, pinching };

const char* to_string(LawKind kind);
LawKind law_kind_from_string(const char* name);

/// One of the three variants together with its parameters.
struct HystereticLaw {
    LawKind kind = LawKind::classic;
    BoucWenParams bw;
    DegradationParams dg;
    PinchingParams pn;

    double rate(const HystereticState& state, double v) const;
    void validate() const;
};

}  // namespace hysterid
