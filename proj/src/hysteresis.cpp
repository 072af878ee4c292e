#include "hysterid/hysteresis.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "hysterid/errors.hpp"

namespace hysterid {

namespace {

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) {
        throw InvalidInput(std::string("non-finite ") + name);
    }
}

// |z|^(n-1), with the n == 1 case pinned to 1 so that 0^0 never shows up.
double abs_pow_nm1(double z, double n) {
    if (n == 1.0) return 1.0;
    return std::pow(std::abs(z), n - 1.0);
}

// beta*v*|z|^n + gamma*z*|v|*|z|^(n-1)
double nonlinear_part(const BoucWenParams& bw, double z, double v) {
    const double az_nm1 = abs_pow_nm1(z, bw.n_pow);
    const double az_n = std::abs(z) * az_nm1;
    return bw.beta * v * az_n + bw.gamma * z * std::abs(v) * az_nm1;
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

BoucWenParams BoucWenParams::consistent(double k_pre, double yield_force, double n_pow) {
    if (!(k_pre > 0.0) || !(yield_force > 0.0)) {
        throw InvalidParameter("consistent Bouc-Wen constants need k_pre > 0 and Q_y > 0");
    }
    BoucWenParams p;
    p.A = k_pre / yield_force;
    p.beta = p.A / 2.0;
    p.gamma = p.A / 2.0;
    p.n_pow = n_pow;
    p.validate();
    return p;
}

void BoucWenParams::validate() const {
    if (!(A > 0.0) || !(beta >= 0.0) || !(gamma >= 0.0) || !(n_pow >= 1.0) || !std::isfinite(A) ||
        !std::isfinite(beta) || !std::isfinite(gamma) || !std::isfinite(n_pow)) {
        throw InvalidParameter("Bouc-Wen parameters require A > 0, beta >= 0, gamma >= 0, n_pow >= 1");
    }
}

void DegradationParams::validate() const {
    if (!(delta_A >= 0.0) || !(delta_nu >= 0.0) || !(delta_eta >= 0.0)) {
        throw InvalidParameter("degradation rates must be non-negative");
    }
}

void PinchingParams::validate() const {
    if (!(zeta_s >= 0.0 && zeta_s < 1.0)) throw InvalidParameter("zeta_s must lie in [0, 1)");
    if (!(p >= 0.0)) throw InvalidParameter("pinching slope p must be >= 0");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("pinching initiation q must lie in [0, 1]");
    if (!(psi > 0.0)) throw InvalidParameter("pinching magnitude psi must be > 0");
    if (!(delta_psi >= 0.0)) throw InvalidParameter("pinching rate delta_psi must be >= 0");
    if (!(lambda >= 0.0)) throw InvalidParameter("pinching severity lambda must be >= 0");
}

double bouc_wen_rate(const BoucWenParams& bw, double z, double v) {
    require_finite(z, "z");
    require_finite(v, "velocity");
    return bw.A * v - nonlinear_part(bw, z, v);
}

DegradationShapes degradation_shapes(const BoucWenParams& bw, const DegradationParams& dg, double e) {
    require_finite(e, "e");
    DegradationShapes s{bw.A * (1.0 - dg.delta_A * e), 1.0 + dg.delta_nu * e, 1.0 + dg.delta_eta * e};
    if (!(s.eta > 0.0)) {
        throw DegenerateState("eta(e) <= 0 in degradation shapes");
    }
    return s;
}

double baber_wen_rate(const BoucWenParams& bw, const DegradationParams& dg, const HystereticState& state,
                      double v) {
    require_finite(state.z, "z");
    require_finite(v, "velocity");
    const DegradationShapes s = degradation_shapes(bw, dg, state.e);
    return (s.A_bar * v - s.nu * nonlinear_part(bw, state.z, v)) / s.eta;
}

double pinching_shape(const BoucWenParams& bw, const DegradationParams& dg, const PinchingParams& pn,
                      const HystereticState& state, double v) {
    require_finite(state.z, "z");
    require_finite(v, "velocity");
    const DegradationShapes s = degradation_shapes(bw, dg, state.e);
    const double zeta1 = pn.zeta_s * (1.0 - std::exp(-pn.p * state.e));
    if (zeta1 == 0.0) return 1.0;
    const double nu_bg = s.nu * (bw.beta + bw.gamma);
    if (!(nu_bg > 0.0)) {
        throw DegenerateState("nu * (beta + gamma) must be positive for pinching");
    }
    const double z_u = std::pow(nu_bg, -1.0 / bw.n_pow);
    const double zeta2 = (pn.psi + pn.delta_psi * state.e) * (pn.lambda + zeta1);
    if (zeta2 == 0.0 || !std::isfinite(zeta2)) {
        throw DegenerateState("zeta_2 vanished in pinching shape");
    }
    const double arg = state.z * sgn(v) - pn.q * z_u;
    return 1.0 - zeta1 * std::exp(-(arg * arg) / (zeta2 * zeta2));
}

double pinching_rate(const BoucWenParams& bw, const DegradationParams& dg, const PinchingParams& pn,
                     const HystereticState& state, double v) {
    const double h = pinching_shape(bw, dg, pn, state, v);
    const DegradationShapes s = degradation_shapes(bw, dg, state.e);
    return h / s.eta * (bw.A * v - s.nu * nonlinear_part(bw, state.z, v));
}

double energy_rate(double z, double v) {
    require_finite(z, "z");
    require_finite(v, "velocity");
    return z * v;
}

const char* to_string(LawKind kind) {
    switch (kind) {
        case LawKind::classic: return "classic";
        case LawKind::degrading: return "degrading";
        case LawKind::pinching: return "pinching";
    }
    return "classic";
}

LawKind law_kind_from_string(const char* name) {
    if (std::strcmp(name, "classic") == 0) return LawKind::classic;
    if (std::strcmp(name, "degrading") == 0) return LawKind::degrading;
    if (std::strcmp(name, "pinching") == 0) return LawKind::pinching;
    throw InvalidParameter(std::string("unknown hysteretic law '") + name + "'");
}

double HystereticLaw::rate(const HystereticState& state, double v) const {
    switch (kind) {
        case LawKind::classic: return bouc_wen_rate(bw, state.z, v);
        case LawKind::degrading: return baber_wen_rate(bw, dg, state, v);
        case LawKind::pinching: return pinching_rate(bw, dg, pn, state, v);
    }
    return 0.0;
}

void HystereticLaw::validate() const {
    bw.validate();
    dg.validate();
    if (kind == LawKind::pinching) pn.validate();
}

}  // namespace hysterid
