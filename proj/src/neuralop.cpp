#include "hysterid/neuralop.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "hysterid/errors.hpp"
#include "hysterid/random.hpp"

namespace hysterid {

double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }
double elu_derivative(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

namespace {

void elu_inplace(Eigen::MatrixXd& z) {
    z.array() = z.array().max(0.0) + (z.array().min(0.0).exp() - 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseNet

DenseNet::DenseNet(const std::vector<int>& widths) {
    if (widths.size() < 2) throw InvalidParameter("a dense network needs at least an input and an output width");
    for (int w : widths) {
        if (w < 1) throw InvalidParameter("layer widths must be positive");
    }
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        layers_.push_back({Eigen::MatrixXd::Zero(widths[l + 1], widths[l]), Eigen::VectorXd::Zero(widths[l + 1])});
    }
}

std::vector<int> DenseNet::widths() const {
    std::vector<int> w;
    if (layers_.empty()) return w;
    w.push_back(static_cast<int>(layers_.front().W.cols()));
    for (const auto& L : layers_) w.push_back(static_cast<int>(L.W.rows()));
    return w;
}

int DenseNet::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().W.cols()); }
int DenseNet::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().W.rows()); }

std::size_t DenseNet::n_params() const {
    std::size_t n = 0;
    for (const auto& L : layers_) n += static_cast<std::size_t>(L.W.size() + L.b.size());
    return n;
}

void DenseNet::glorot_init(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& L : layers_) {
        const double bound = std::sqrt(6.0 / static_cast<double>(L.W.rows() + L.W.cols()));
        std::uniform_real_distribution<double> U(-bound, bound);
        for (Eigen::Index i = 0; i < L.W.rows(); ++i) {
            for (Eigen::Index j = 0; j < L.W.cols(); ++j) L.W(i, j) = U(rng);
        }
        L.b.setZero();
    }
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& X) const {
    if (X.rows() != input_dim()) throw InvalidInput("dense network input has wrong dimension");
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = layers_[l].W * a;
        z.colwise() += layers_[l].b;
        if (l + 1 < layers_.size()) elu_inplace(z);
        a = std::move(z);
    }
    return a;
}

const Eigen::MatrixXd& DenseNet::forward(const Eigen::MatrixXd& X, Cache& cache) const {
    if (X.rows() != input_dim()) throw InvalidInput("dense network input has wrong dimension");
    cache.a.resize(layers_.size() + 1);
    cache.a[0] = X;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto& out = cache.a[l + 1];
        out.resize(layers_[l].W.rows(), X.cols());
        out.noalias() = layers_[l].W * cache.a[l];
        out.colwise() += layers_[l].b;
        if (l + 1 < layers_.size()) elu_inplace(out);
    }
    return cache.a.back();
}

void DenseNet::backward(Cache& cache, const Eigen::MatrixXd& d_out, DenseNet& grad) const {
    cache.delta.resize(2);
    Eigen::MatrixXd* delta = &cache.delta[0];
    Eigen::MatrixXd* next = &cache.delta[1];
    *delta = d_out;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l + 1 < layers_.size()) {
            // ELU'(z) = min(a, 0) + 1 in terms of the activation a
            delta->array() *= cache.a[l + 1].array().min(0.0) + 1.0;
        }
        grad.layers_[l].W.noalias() += *delta * cache.a[l].transpose();
        grad.layers_[l].b += delta->rowwise().sum();
        if (l > 0) {
            next->resize(layers_[l].W.cols(), delta->cols());
            next->noalias() = layers_[l].W.transpose() * *delta;
            std::swap(delta, next);
        }
    }
}

void DenseNet::set_zero() {
    for (auto& L : layers_) {
        L.W.setZero();
        L.b.setZero();
    }
}

void DenseNet::validate() const {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].b.size() != layers_[l].W.rows()) throw InvalidParameter("bias size does not match layer width");
        if (l > 0 && layers_[l].W.cols() != layers_[l - 1].W.rows()) throw InvalidParameter("inconsistent width chain");
        if (!layers_[l].W.allFinite() || !layers_[l].b.allFinite()) throw InvalidParameter("non-finite parameter");
    }
}

// ---------------------------------------------------------------------------
// Normalization

Normalizer Normalizer::identity(Eigen::Index dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& X) {
    if (X.cols() == 0) throw InvalidInput("cannot fit normalization on an empty batch");
    Normalizer n;
    n.mean = X.rowwise().mean();
    n.sd = ((X.colwise() - n.mean).array().square().rowwise().sum() / static_cast<double>(X.cols())).sqrt();
    for (Eigen::Index i = 0; i < n.sd.size(); ++i) {
        if (!(n.sd(i) > 0.0)) n.sd(i) = 1.0;
    }
    return n;
}

Eigen::MatrixXd Normalizer::normalize(const Eigen::MatrixXd& X) const {
    return ((X.colwise() - mean).array().colwise() / sd.array()).matrix();
}

Eigen::MatrixXd Normalizer::denormalize(const Eigen::MatrixXd& X) const {
    return ((X.array().colwise() * sd.array()).matrix().colwise() + mean);
}

// ---------------------------------------------------------------------------
// Architecture and batches

void DeepOnetArch::validate() const {
    if (m < 1 || q < 0 || p < 1) throw InvalidParameter("DeepONet dimensions must be positive");
    for (int w : branch_hidden) {
        if (w < 1) throw InvalidParameter("branch widths must be positive");
    }
    for (int w : trunk_hidden) {
        if (w < 1) throw InvalidParameter("trunk widths must be positive");
    }
}

nlohmann::json DeepOnetArch::to_json() const {
    return {{"m", m}, {"q", q}, {"branch_hidden", branch_hidden}, {"trunk_hidden", trunk_hidden}, {"p", p}};
}

DeepOnetArch DeepOnetArch::from_json(const nlohmann::json& j) {
    DeepOnetArch a;
    a.m = j.at("m").get<int>();
    a.q = j.at("q").get<int>();
    a.branch_hidden = j.at("branch_hidden").get<std::vector<int>>();
    a.trunk_hidden = j.at("trunk_hidden").get<std::vector<int>>();
    a.p = j.at("p").get<int>();
    a.validate();
    return a;
}

void OperatorBatch::validate(const DeepOnetArch& arch, bool need_target) const {
    if (branch.rows() != arch.m) throw InvalidInput("branch input has " + std::to_string(branch.rows()) +
                                                    " rows, expected " + std::to_string(arch.m));
    if (trunk.rows() != arch.q + 1) throw InvalidInput("trunk input has " + std::to_string(trunk.rows()) +
                                                       " rows, expected " + std::to_string(arch.q + 1));
    if (static_cast<Eigen::Index>(owner.size()) != trunk.cols()) throw InvalidInput("owner list does not match points");
    for (Eigen::Index o : owner) {
        if (o < 0 || o >= branch.cols()) throw InvalidInput("owner index out of range");
    }
    if (need_target && target.size() != trunk.cols()) throw InvalidInput("target size does not match points");
    if (trunk.cols() == 0) throw InvalidInput("batch is empty");
}

// ---------------------------------------------------------------------------
// Model

namespace {

std::vector<int> chain(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

template <typename F>
void for_each_block(DenseNet& net, F&& f) {
    for (auto& L : net.layers()) {
        f(L.W);
        f(L.b);
    }
}

template <typename F>
void for_each_block(const DenseNet& net, F&& f) {
    for (const auto& L : net.layers()) {
        f(L.W);
        f(L.b);
    }
}

// Row-major flattening of W keeps the on-disk layout independent of Eigen's storage order.
template <typename M>
void put(const M& block, Eigen::VectorXd& theta, Eigen::Index& k) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
        for (Eigen::Index j = 0; j < block.cols(); ++j) theta(k++) = block(i, j);
    }
}

template <typename M>
void take(M& block, const Eigen::VectorXd& theta, Eigen::Index& k) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
        for (Eigen::Index j = 0; j < block.cols(); ++j) block(i, j) = theta(k++);
    }
}

}  // namespace

DeepOnetModel::DeepOnetModel(const DeepOnetArch& a)
    : arch(a),
      branch(chain(a.m, a.branch_hidden, a.p)),
      trunk(chain(a.q + 1, a.trunk_hidden, a.p)),
      branch_norm(Normalizer::identity(a.m)),
      trunk_norm(Normalizer::identity(a.q + 1)) {
    a.validate();
}

std::size_t DeepOnetModel::n_params() const { return branch.n_params() + trunk.n_params() + 1; }

Eigen::VectorXd DeepOnetModel::flatten() const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(n_params()));
    Eigen::Index k = 0;
    for_each_block(branch, [&](const auto& b) { put(b, theta, k); });
    for_each_block(trunk, [&](const auto& b) { put(b, theta, k); });
    theta(k++) = c0;
    return theta;
}

void DeepOnetModel::unflatten(const Eigen::VectorXd& theta) {
    if (theta.size() != static_cast<Eigen::Index>(n_params())) throw InvalidInput("parameter vector has wrong size");
    Eigen::Index k = 0;
    for_each_block(branch, [&](auto& b) { take(b, theta, k); });
    for_each_block(trunk, [&](auto& b) { take(b, theta, k); });
    c0 = theta(k++);
}

void DeepOnetModel::set_zero() {
    branch.set_zero();
    trunk.set_zero();
    c0 = 0.0;
}

void DeepOnetModel::fit_normalization(const OperatorBatch& batch) {
    batch.validate(arch, true);
    branch_norm = Normalizer::fit(batch.branch);
    trunk_norm = Normalizer::fit(batch.trunk);
    const Normalizer t = Normalizer::fit(batch.target.transpose());
    target_mean = t.mean(0);
    target_sd = t.sd(0);
}

OperatorBatch DeepOnetModel::normalize(const OperatorBatch& raw) const {
    OperatorBatch n;
    n.branch = branch_norm.normalize(raw.branch);
    n.trunk = trunk_norm.normalize(raw.trunk);
    n.owner = raw.owner;
    if (raw.target.size() > 0) n.target = (raw.target.array() - target_mean) / target_sd;
    return n;
}

DeepOnetModel init_deeponet(const DeepOnetArch& arch, std::uint64_t seed) {
    DeepOnetModel model(arch);
    model.branch.glorot_init(derive_seed(seed, {stage::init, 0}));
    model.trunk.glorot_init(derive_seed(seed, {stage::init, 1}));
    return model;
}

namespace {

// Standardized outputs G_k = c0 + <b_owner(k), t_k>.
Eigen::VectorXd combine(const DeepOnetModel& model, const Eigen::MatrixXd& B, const Eigen::MatrixXd& T,
                        const std::vector<Eigen::Index>& owner) {
    Eigen::VectorXd G(T.cols());
    for (Eigen::Index k = 0; k < T.cols(); ++k) G(k) = model.c0 + B.col(owner[static_cast<std::size_t>(k)]).dot(T.col(k));
    return G;
}

}  // namespace

double forward(const DeepOnetModel& model, const Eigen::VectorXd& branch_input, const Eigen::VectorXd& trunk_input) {
    OperatorBatch b;
    b.branch = branch_input;
    b.trunk = trunk_input;
    b.owner = {0};
    return predict(model, b)(0);
}

Eigen::VectorXd predict(const DeepOnetModel& model, const OperatorBatch& raw) {
    raw.validate(model.arch, false);
    const OperatorBatch n = model.normalize(raw);
    const Eigen::MatrixXd B = model.branch.forward(n.branch);
    const Eigen::MatrixXd T = model.trunk.forward(n.trunk);
    return (combine(model, B, T, n.owner).array() * model.target_sd + model.target_mean).matrix();
}

namespace {

struct Workspace {
    DenseNet::Cache branch, trunk;
    Eigen::VectorXd r;
    Eigen::MatrixXd dB, dT;
};

double loss_impl(const DeepOnetModel& model, const OperatorBatch& n, DeepOnetModel* grad, Workspace& ws) {
    const Eigen::MatrixXd& B = model.branch.forward(n.branch, ws.branch);
    const Eigen::MatrixXd& T = model.trunk.forward(n.trunk, ws.trunk);
    ws.r = combine(model, B, T, n.owner) - n.target;
    const double N = static_cast<double>(ws.r.size());
    const double J = ws.r.squaredNorm() / N;
    if (!grad) return J;

    if (grad->n_params() != model.n_params()) *grad = DeepOnetModel(model.arch);
    grad->set_zero();
    ws.r *= 2.0 / N;  // dJ/dG
    ws.dB.setZero(B.rows(), B.cols());
    ws.dT.resize(T.rows(), T.cols());
    for (Eigen::Index k = 0; k < T.cols(); ++k) {
        const Eigen::Index o = n.owner[static_cast<std::size_t>(k)];
        ws.dT.col(k) = ws.r(k) * B.col(o);
        ws.dB.col(o) += ws.r(k) * T.col(k);
    }
    grad->c0 = ws.r.sum();
    model.branch.backward(ws.branch, ws.dB, grad->branch);
    model.trunk.backward(ws.trunk, ws.dT, grad->trunk);
    return J;
}

}  // namespace

double loss_normalized(const DeepOnetModel& model, const OperatorBatch& n, DeepOnetModel* grad) {
    Workspace ws;
    return loss_impl(model, n, grad, ws);
}

double loss(const DeepOnetModel& model, const OperatorBatch& raw) {
    raw.validate(model.arch, true);
    return loss_normalized(model, model.normalize(raw), nullptr);
}

DeepOnetModel gradient(const DeepOnetModel& model, const OperatorBatch& raw) {
    raw.validate(model.arch, true);
    DeepOnetModel g;
    loss_normalized(model, model.normalize(raw), &g);
    return g;
}

// ---------------------------------------------------------------------------
// Adam

void AdamConfig::validate() const {
    if (!(lr0 > 0.0)) throw InvalidParameter("lr0 must be positive");
    if (halve_every <= 0) throw InvalidParameter("halve_every must be positive");
    if (epochs < 0) throw InvalidParameter("epochs must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw InvalidParameter("Adam betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw InvalidParameter("Adam eps must be positive");
}

double AdamConfig::lr_at(int epoch) const { return lr0 * std::ldexp(1.0, -(epoch / halve_every)); }

AdamOptimizer::AdamOptimizer(const AdamConfig& config, Eigen::Index n_params)
    : config_(config), m_(Eigen::VectorXd::Zero(n_params)), v_(Eigen::VectorXd::Zero(n_params)) {
    config_.validate();
}

void AdamOptimizer::step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, int epoch) {
    ++t_;
    m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * g;
    v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const double lr = config_.lr_at(epoch);
    theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps);
}

TrainResult train(DeepOnetModel& model, const OperatorBatch& raw, const AdamConfig& config) {
    config.validate();
    raw.validate(model.arch, true);
    const OperatorBatch n = model.normalize(raw);
    AdamOptimizer adam(config, static_cast<Eigen::Index>(model.n_params()));
    Eigen::VectorXd theta = model.flatten();
    DeepOnetModel grad(model.arch);
    Workspace ws;
    TrainResult res;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double J = loss_impl(model, n, &grad, ws);
        if (!std::isfinite(J)) throw DivergenceError(static_cast<std::size_t>(epoch), "non-finite training loss");
        if (epoch % 100 == 0) res.history.emplace_back(epoch, J);
        adam.step(theta, grad.flatten(), epoch);
        model.unflatten(theta);
    }
    res.final_loss = loss_impl(model, n, nullptr, ws);
    if (!std::isfinite(res.final_loss)) {
        throw DivergenceError(static_cast<std::size_t>(config.epochs), "non-finite training loss");
    }
    res.history.emplace_back(config.epochs, res.final_loss);
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'D', 'O', 'N', 'E', 'T', '1'};

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void save_checkpoint(const DeepOnetModel& model, const nlohmann::json& extra, const std::filesystem::path& path) {
    nlohmann::json h = extra.is_object() ? extra : nlohmann::json::object();
    h["format"] = "hysterid-deeponet/1";
    h["arch"] = model.arch.to_json();
    h["normalization"] = {{"branch_mean", to_vec(model.branch_norm.mean)},
                          {"branch_sd", to_vec(model.branch_norm.sd)},
                          {"trunk_mean", to_vec(model.trunk_norm.mean)},
                          {"trunk_sd", to_vec(model.trunk_norm.sd)},
                          {"target_mean", model.target_mean},
                          {"target_sd", model.target_sd}};
    h["n_params"] = model.n_params();
    const std::string header = h.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic, 8);
    put_u64(out, header.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    const Eigen::VectorXd theta = model.flatten();
    for (Eigen::Index i = 0; i < theta.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(theta(i)));
    if (!out) throw IoError("write failed for " + path.string());
}

DeepOnetModel load_checkpoint(const std::filesystem::path& path, nlohmann::json* header_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError(path.string() + " is not a DeepONet checkpoint");
    const std::uint64_t len = get_u64(in);
    if (!in || len > (1ULL << 30)) throw IoError(path.string() + ": bad header length");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError(path.string() + ": truncated header");

    nlohmann::json h;
    DeepOnetModel model;
    try {
        h = nlohmann::json::parse(text);
        model = DeepOnetModel(DeepOnetArch::from_json(h.at("arch")));
        const auto& nrm = h.at("normalization");
        model.branch_norm = {from_vec(nrm.at("branch_mean").get<std::vector<double>>()),
                             from_vec(nrm.at("branch_sd").get<std::vector<double>>())};
        model.trunk_norm = {from_vec(nrm.at("trunk_mean").get<std::vector<double>>()),
                            from_vec(nrm.at("trunk_sd").get<std::vector<double>>())};
        model.target_mean = nrm.at("target_mean").get<double>();
        model.target_sd = nrm.at("target_sd").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": bad checkpoint header: " + e.what());
    }
    if (model.branch_norm.mean.size() != model.arch.m || model.trunk_norm.mean.size() != model.arch.q + 1) {
        throw IoError(path.string() + ": normalization does not match the architecture");
    }

    Eigen::VectorXd theta(static_cast<Eigen::Index>(model.n_params()));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = std::bit_cast<double>(get_u64(in));
    if (!in) throw IoError(path.string() + ": truncated parameter block");
    model.unflatten(theta);
    if (header_out) *header_out = std::move(h);
    return model;
}

}  // namespace hysterid
