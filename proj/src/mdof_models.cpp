#include "hysterid/mdof_models.hpp"

#include <algorithm>
#include <cmath>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"

namespace hysterid {

namespace {

bool symmetric(const Eigen::MatrixXd& A, double rel_tol = 1e-12) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Eigen::MatrixXd shear_stiffness(int n, double k) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) += k;
        if (i + 1 < n) {
            K(i, i) += k;
            K(i, i + 1) -= k;
            K(i + 1, i) -= k;
        }
    }
    return K;
}

// Embeds a fixed-base superstructure (K_s, C_s) on a base DOF placed first.
// The story-1 spring/damper couples to the base exactly as in the
// relative-coordinate base-isolation equations.
void embed_on_base(const Eigen::MatrixXd& S, double base_term, Eigen::MatrixXd& out) {
    const Eigen::Index n = S.rows();
    const Eigen::VectorXd s1 = S * Eigen::VectorXd::Ones(n);
    out.resize(n + 1, n + 1);
    out.setZero();
    out(0, 0) = s1.sum() + base_term;
    out.block(0, 1, 1, n) = -s1.transpose();
    out.block(1, 0, n, 1) = -s1;
    out.block(1, 1, n, n) = S;
}

HystereticLaw make_law(const IsolatorLaw& spec, double k_pre, double yield_force) {
    HystereticLaw law;
    law.kind = spec.kind;
    law.bw = BoucWenParams::consistent(k_pre, yield_force, spec.n_pow);
    law.dg = spec.dg;
    law.pn = spec.pn;
    law.validate();
    return law;
}

}  // namespace

Eigen::Index MdofSystem::dof_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<Eigen::Index>(i);
    }
    throw InvalidParameter("no DOF labelled '" + label + "'");
}

void MdofSystem::validate() const {
    const Eigen::Index n = M.rows();
    if (n == 0 || M.cols() != n || C.rows() != n || C.cols() != n || K.rows() != n || K.cols() != n) {
        throw InvalidParameter("M, C, K must be square with matching size");
    }
    if (L_tilde.rows() != n || L_tilde.cols() != static_cast<Eigen::Index>(hysteretic_elements.size())) {
        throw InvalidParameter("L_tilde must be n x (number of hysteretic elements)");
    }
    if (excitation_map.rows() != n) throw InvalidParameter("excitation map must have n rows");
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n) {
        throw InvalidParameter("one label per DOF");
    }
    for (const auto& el : hysteretic_elements) {
        if (el.drive.size() != n) throw InvalidParameter("hysteretic drive vector must have n entries");
        el.law.validate();
    }
    if (!symmetric(M) || !symmetric(C) || !symmetric(K)) {
        throw InvalidParameter("M, C, K must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw InvalidParameter("M must be positive definite");
}

// ---------------------------------------------------------------------------

Distribution Distribution::lognormal(double mean, double sd) {
    Distribution d;
    d.kind = Kind::lognormal;
    d.mean = mean;
    d.sd = sd;
    d.validate();
    return d;
}

Distribution Distribution::uniform(double lower, double upper) {
    Distribution d;
    d.kind = Kind::uniform;
    d.lower = lower;
    d.upper = upper;
    d.mean = 0.5 * (lower + upper);
    d.sd = (upper - lower) / std::sqrt(12.0);
    d.validate();
    return d;
}

Distribution Distribution::truncated_gaussian(double mean, double sd, double lower) {
    Distribution d;
    d.kind = Kind::truncated_gaussian;
    d.mean = mean;
    d.sd = sd;
    d.lower = lower;
    d.validate();
    return d;
}

void Distribution::validate() const {
    switch (kind) {
        case Kind::lognormal:
            if (!(mean > 0.0) || !(sd > 0.0)) throw InvalidParameter("lognormal needs mean > 0 and sd > 0");
            break;
        case Kind::uniform:
            if (!(lower < upper)) throw InvalidParameter("uniform needs lower < upper");
            break;
        case Kind::truncated_gaussian:
            if (!(sd > 0.0)) throw InvalidParameter("truncated gaussian needs sd > 0");
            // Rejection sampling would practically never terminate this far out.
            if ((lower - mean) / sd > 6.0) throw InvalidParameter("truncation point too far in the upper tail");
            break;
    }
}

std::pair<double, double> Distribution::log_moments() const {
    const double m2 = mean * mean;
    const double s2 = sd * sd;
    const double mu = std::log(m2 / std::sqrt(m2 + s2));
    const double sigma = std::sqrt(std::log1p(s2 / m2));
    return {mu, sigma};
}

std::vector<std::vector<double>> sample_uncertain(const UncertainSpec& spec, std::uint64_t seed,
                                                  std::size_t count) {
    for (const auto& p : spec) p.dist.validate();
    Rng rng(seed);
    std::vector<std::vector<double>> rows(count, std::vector<double>(spec.size()));
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t j = 0; j < spec.size(); ++j) {
            const Distribution& d = spec[j].dist;
            double x = 0.0;
            switch (d.kind) {
                case Distribution::Kind::lognormal: {
                    const auto [mu, sigma] = d.log_moments();
                    x = std::lognormal_distribution<double>(mu, sigma)(rng);
                    break;
                }
                case Distribution::Kind::uniform:
                    x = std::uniform_real_distribution<double>(d.lower, d.upper)(rng);
                    break;
                case Distribution::Kind::truncated_gaussian: {
                    std::normal_distribution<double> normal(d.mean, d.sd);
                    do {
                        x = normal(rng);
                    } while (x < d.lower);
                    break;
                }
            }
            rows[k][j] = x;
        }
    }
    return rows;
}

UncertainSpec example1_uncertain_spec() {
    return {
        {"k_post", Distribution::lognormal(4e6, 0.25e6)},
        {"c_b", Distribution::lognormal(20e6, 4e6)},
        {"r_k", Distribution::uniform(0.15, 0.17)},
        {"Q_y_pct", Distribution::uniform(4.0, 6.0)},
    };
}

UncertainSpec car_uncertain_spec() {
    // The printed sd of k_wr equals its mean; one tenth of that is used,
    // matching the 10% coefficient of variation of the other rows.
    return {
        {"k_bf", Distribution::lognormal(66824.0, 6682.4)},
        {"k_br", Distribution::lognormal(18615.0, 1861.5)},
        {"k_wf", Distribution::lognormal(101115.0, 10111.5)},
        {"k_wr", Distribution::lognormal(10111.5, 1011.15)},
        {"r_k", Distribution::uniform(0.125, 0.250)},
    };
}

UncertainSpec building_uncertain_spec() {
    return {
        {"k_post", Distribution::lognormal(750e3, 20e3)},
        {"c_b", Distribution::truncated_gaussian(35e3, 2.5e3, 0.0)},
        {"r_k", Distribution::uniform(0.125, 0.250)},
        {"Q_y_pct", Distribution::uniform(4.0, 6.0)},
    };
}

// ---------------------------------------------------------------------------

Eigen::VectorXd natural_frequencies(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M);
    if (solver.info() != Eigen::Success) throw InvalidParameter("eigen-solution of (K, M) failed");
    return solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

RayleighDamping rayleigh_damping(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K, int mode_i, int mode_j,
                                 double damping_ratio) {
    const Eigen::VectorXd w = natural_frequencies(M, K);
    if (mode_i < 1 || mode_j < 1 || mode_i > w.size() || mode_j > w.size() || mode_i == mode_j) {
        throw InvalidParameter("Rayleigh anchor modes out of range");
    }
    const double wi = w(mode_i - 1);
    const double wj = w(mode_j - 1);
    // zeta = beta1 / (2 w) + beta2 w / 2 at both anchors
    Eigen::Matrix2d A;
    A << 1.0 / (2.0 * wi), wi / 2.0, 1.0 / (2.0 * wj), wj / 2.0;
    const Eigen::Vector2d b = A.fullPivLu().solve(Eigen::Vector2d(damping_ratio, damping_ratio));
    RayleighDamping r;
    r.beta1 = b(0);
    r.beta2 = b(1);
    r.mode_indices = {mode_i, mode_j};
    r.damping_ratio = damping_ratio;
    r.anchor_frequencies = {wi, wj};
    return r;
}

void CorrosionModel::validate() const {
    if (!(B1 > 0.0) || !(B2 > 0.0)) throw InvalidParameter("corrosion B1, B2 must be positive");
    if (!(t_years >= 0.0)) throw InvalidParameter("exposure time must be >= 0");
    if (!(t_ref_um > 0.0)) throw InvalidParameter("reference thickness must be positive");
}

double corrosion_loss(const CorrosionModel& model) {
    model.validate();
    return model.B1 * std::pow(model.t_years, model.B2);
}

double stiffness_retention(const CorrosionModel& model) {
    const double frac = corrosion_loss(model) / model.t_ref_um;
    if (!(frac < 1.0)) throw InvalidParameter("corrosion depth exceeds the reference thickness");
    return std::pow(1.0 - frac, 3.0);
}

// ---------------------------------------------------------------------------

double pre_yield_stiffness(double k_post, double r_k) {
    if (!(r_k > 0.0 && r_k < 1.0)) throw InvalidParameter("hardening ratio r_k must lie in (0, 1)");
    if (!(k_post > 0.0)) throw InvalidParameter("k_post must be positive");
    return k_post / r_k;
}

double yield_force_from_pct(double pct, double total_mass) {
    if (!(pct > 0.0)) throw InvalidParameter("yield force percentage must be positive");
    return pct / 100.0 * total_mass * kGravity;
}

ShearBuildingParams four_dof_params() { return ShearBuildingParams{}; }

MdofSystem build_shear_building(const ShearBuildingParams& params, const IsolationSample& xi,
                                const IsolatorLaw& law, const std::optional<CorrosionModel>& corrosion) {
    const int n = params.n_stories;
    if (n < 1) throw InvalidParameter("n_stories must be >= 1");
    if (!(params.story_mass > 0.0) || !(params.story_stiffness > 0.0) || !(params.base_mass > 0.0)) {
        throw InvalidParameter("story mass, story stiffness and base mass must be positive");
    }
    if (!(params.base_stiffness >= 0.0) || !(xi.c_b >= 0.0)) {
        throw InvalidParameter("base stiffness and damping must be non-negative");
    }
    const double k_pre = pre_yield_stiffness(xi.k_post, xi.r_k);

    const Eigen::MatrixXd Ms = params.story_mass * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Ks = shear_stiffness(n, params.story_stiffness);
    if (corrosion) Ks *= stiffness_retention(*corrosion);

    Eigen::MatrixXd Cs = Eigen::MatrixXd::Zero(n, n);
    if (n >= 2 && params.damping_ratio > 0.0) {
        const int mode_j = params.damping_mode_j > 0 ? params.damping_mode_j : std::min(10, n);
        const RayleighDamping r = rayleigh_damping(Ms, Ks, params.damping_mode_i, mode_j, params.damping_ratio);
        Cs = r.beta1 * Ms + r.beta2 * Ks;
    }

    MdofSystem sys;
    const Eigen::Index N = n + 1;
    sys.M = Eigen::MatrixXd::Zero(N, N);
    sys.M(0, 0) = params.base_mass;
    sys.M.block(1, 1, n, n) = Ms;
    embed_on_base(Ks, params.base_stiffness + xi.k_post, sys.K);
    embed_on_base(Cs, xi.c_b, sys.C);

    const double total_mass = params.base_mass + n * params.story_mass;
    const double Q_y = yield_force_from_pct(xi.Q_y_pct, total_mass);
    // Total isolator force k_post u_b + Q_y (1 - r_k) z gives initial stiffness k_pre.
    const double q_y = Q_y * (1.0 - xi.r_k);

    HystereticElement el;
    el.law = make_law(law, k_pre, Q_y);
    el.drive = Eigen::VectorXd::Unit(N, 0);
    el.coupling = Coupling::state;
    el.label = "isolator";
    sys.hysteretic_elements.push_back(el);
    sys.L_tilde = Eigen::MatrixXd::Zero(N, 1);
    sys.L_tilde(0, 0) = q_y;

    // w = -M 1 u_g''
    sys.excitation_map = -sys.M * Eigen::VectorXd::Ones(N);

    sys.labels.push_back("u_b");
    for (int i = 1; i <= n; ++i) sys.labels.push_back("u_" + std::to_string(i));
    sys.validate();
    return sys;
}

MdofSystem build_4dof(const IsolationSample& xi, const IsolatorLaw& law) {
    ShearBuildingParams p = four_dof_params();
    p.damping_mode_i = 1;
    p.damping_mode_j = 2;
    return build_shear_building(p, xi, law);
}

namespace {

void check_car(const CarSample& xi, bool half) {
    if (!(xi.r_k > 0.0 && xi.r_k < 1.0)) throw InvalidParameter("hardening ratio r_k must lie in (0, 1)");
    if (!(xi.k_bf > 0.0) || !(xi.k_wf > 0.0)) throw InvalidParameter("front stiffnesses must be positive");
    if (half && (!(xi.k_br > 0.0) || !(xi.k_wr > 0.0))) {
        throw InvalidParameter("rear stiffnesses must be positive");
    }
}

HystereticElement suspension_element(const CarParams& p, double k_b, double r_k, double wheel_mass,
                                     Eigen::VectorXd drive, const char* label, double& alpha) {
    const double Q_y = yield_force_from_pct(p.qy_pct, p.M_b + wheel_mass);
    alpha = Q_y * (1.0 - r_k);
    HystereticElement el;
    el.law = make_law(p.law, r_k * k_b, Q_y);
    el.drive = std::move(drive);
    el.coupling = p.coupling;
    el.label = label;
    return el;
}

}  // namespace

MdofSystem build_half_car(const CarSample& xi, const CarParams& p) {
    check_car(xi, true);
    const double Lf = p.L_f, Lr = p.L_r;
    const double cf = p.c_bf, cr = p.c_br;
    const double kf = xi.k_bf, kr = xi.k_br;

    MdofSystem sys;
    sys.M = Eigen::Vector4d(p.M_b, p.I_b, p.m_wf, p.m_wr).asDiagonal();
    sys.C.resize(4, 4);
    sys.C << cf + cr, cf * Lf - cr * Lr, -cf, -cr,
             cf * Lf - cr * Lr, cf * Lf * Lf + cr * Lr * Lr, -cf * Lf, cr * Lr,
             -cf, -cf * Lf, cf, 0.0,
             -cr, cr * Lr, 0.0, cr;
    sys.K.resize(4, 4);
    sys.K << kf + kr, kf * Lf - kr * Lr, -kf, -kr,
             kf * Lf - kr * Lr, kf * Lf * Lf + kr * Lr * Lr, -kf * Lf, kr * Lr,
             -kf, -kf * Lf, kf + xi.k_wf, 0.0,
             -kr, kr * Lr, 0.0, kr + xi.k_wr;

    double alpha_f = 0.0, alpha_r = 0.0;
    sys.hysteretic_elements.push_back(
        suspension_element(p, xi.k_bf, xi.r_k, p.m_wf, Eigen::Vector4d(1.0, Lf, -1.0, 0.0), "front", alpha_f));
    sys.hysteretic_elements.push_back(
        suspension_element(p, xi.k_br, xi.r_k, p.m_wr, Eigen::Vector4d(1.0, -Lr, 0.0, -1.0), "rear", alpha_r));
    sys.L_tilde.resize(4, 2);
    sys.L_tilde << alpha_f, alpha_r,
                   Lf * alpha_f, -Lr * alpha_r,
                   -alpha_f, 0.0,
                   0.0, -alpha_r;

    sys.excitation_map = Eigen::MatrixXd::Zero(4, 2);
    sys.excitation_map(2, 0) = 1.0;
    sys.excitation_map(3, 1) = 1.0;
    sys.labels = {"u_c", "theta_c", "u_wf", "u_wr"};
    sys.validate();
    return sys;
}

MdofSystem build_quarter_car(const CarSample& xi, const CarParams& p) {
    check_car(xi, false);
    const double cf = p.c_bf, kf = xi.k_bf;

    MdofSystem sys;
    sys.M = Eigen::Vector2d(p.M_b, p.m_wf).asDiagonal();
    sys.C.resize(2, 2);
    sys.C << cf, -cf, -cf, cf;
    sys.K.resize(2, 2);
    sys.K << kf, -kf, -kf, kf + xi.k_wf;

    double alpha_f = 0.0;
    sys.hysteretic_elements.push_back(
        suspension_element(p, xi.k_bf, xi.r_k, p.m_wf, Eigen::Vector2d(1.0, -1.0), "front", alpha_f));
    sys.L_tilde.resize(2, 1);
    sys.L_tilde << alpha_f, -alpha_f;

    sys.excitation_map = Eigen::MatrixXd::Zero(2, 1);
    sys.excitation_map(1, 0) = 1.0;
    sys.labels = {"u_c", "u_wf"};
    sys.validate();
    return sys;
}

IsolationSample isolation_sample_from(const std::vector<double>& row) {
    if (row.size() != 4) throw InvalidParameter("isolation sample needs {k_post, c_b, r_k, Q_y_pct}");
    return {row[0], row[1], row[2], row[3]};
}

CarSample car_sample_from(const std::vector<double>& row) {
    if (row.size() != 5) throw InvalidParameter("car sample needs {k_bf, k_br, k_wf, k_wr, r_k}");
    return {row[0], row[1], row[2], row[3], row[4]};
}

}  // namespace hysterid
