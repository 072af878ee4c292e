#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace hysterid {

/// ELU with alpha = 1.
double elu(double x);
double elu_derivative(double x);

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

/// Fully connected network, ELU on hidden layers, identity on the output.
class DenseNet {
public:
    DenseNet() = default;
    /// widths = {in, hidden..., out}; parameters are zero until initialized.
    explicit DenseNet(const std::vector<int>& widths);

    std::vector<int> widths() const;
    int input_dim() const;
    int output_dim() const;
    std::size_t n_params() const;

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    /// Glorot-uniform weights with bound sqrt(6 / (fan_in + fan_out)), zero biases.
    void glorot_init(std::uint64_t seed);

    /// Columns of X are samples.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;

    /// Activations kept for backward(); a[0] is the input, a[l + 1] the output
    /// of layer l. Reusing a Cache across calls avoids reallocation.
    struct Cache {
        std::vector<Eigen::MatrixXd> a;
        std::vector<Eigen::MatrixXd> delta;
    };
    const Eigen::MatrixXd& forward(const Eigen::MatrixXd& X, Cache& cache) const;

    /// Accumulates dJ/dW, dJ/db into `grad` (same shape as *this) given dJ/d(output).
    void backward(Cache& cache, const Eigen::MatrixXd& d_out, DenseNet& grad) const;

    void set_zero();
    void validate() const;

private:
    std::vector<DenseLayer> layers_;
};

/// Per-feature standardization.
struct Normalizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;

    static Normalizer identity(Eigen::Index dim);
    /// Columns are samples; a zero sd is replaced by 1.
    static Normalizer fit(const Eigen::MatrixXd& X);

    Eigen::MatrixXd normalize(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd denormalize(const Eigen::MatrixXd& X) const;
};

struct DeepOnetArch {
    int m = 100;  // branch sensors
    int q = 4;    // uncertain parameters; trunk input is (t, xi)
    std::vector<int> branch_hidden{50, 50, 50};
    std::vector<int> trunk_hidden{50, 50};
    int p = 8;

    void validate() const;
    nlohmann::json to_json() const;
    static DeepOnetArch from_json(const nlohmann::json& j);
};

/// Training or evaluation data for an operator network. Each point k uses
/// branch column owner[k] and trunk column k. All values are in raw units.
struct OperatorBatch {
    Eigen::MatrixXd branch;  // m x n_functions
    Eigen::MatrixXd trunk;   // (1 + q) x n_points
    std::vector<Eigen::Index> owner;
    Eigen::VectorXd target;  // n_points (may be empty for prediction)

    Eigen::Index n_points() const { return trunk.cols(); }
    void validate(const DeepOnetArch& arch, bool need_target) const;
};

struct DeepOnetModel {
    DeepOnetArch arch;
    DenseNet branch;
    DenseNet trunk;
    double c0 = 0.0;
    Normalizer branch_norm;
    Normalizer trunk_norm;
    double target_mean = 0.0;
    double target_sd = 1.0;

    DeepOnetModel() = default;
    /// Zero parameters, identity normalization.
    explicit DeepOnetModel(const DeepOnetArch& arch);

    std::size_t n_params() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& theta);
    void set_zero();

    /// Fits input and target statistics on raw training data.
    void fit_normalization(const OperatorBatch& batch);
    /// Standardizes inputs and targets of a raw batch.
    OperatorBatch normalize(const OperatorBatch& raw) const;
};

/// Glorot-uniform weights, zero biases, c0 = 0, identity normalization.
DeepOnetModel init_deeponet(const DeepOnetArch& arch, std::uint64_t seed);

/// Prediction in target units for one branch input and one trunk input.
double forward(const DeepOnetModel& model, const Eigen::VectorXd& branch_input, const Eigen::VectorXd& trunk_input);
/// Predictions in target units for every point of a raw batch.
Eigen::VectorXd predict(const DeepOnetModel& model, const OperatorBatch& raw);

/// Mean squared error in standardized target units.
double loss(const DeepOnetModel& model, const OperatorBatch& raw);
/// Loss of an already normalized batch; fills `grad` (model-shaped) if non-null.
double loss_normalized(const DeepOnetModel& model, const OperatorBatch& normalized, DeepOnetModel* grad);
/// Gradient of loss() with respect to every weight, bias and c0.
DeepOnetModel gradient(const DeepOnetModel& model, const OperatorBatch& raw);

struct AdamConfig {
    double lr0 = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int epochs = 10000;
    int halve_every = 2500;

    void validate() const;
    /// lr0 * 2^-floor(epoch / halve_every).
    double lr_at(int epoch) const;
};

class AdamOptimizer {
public:
    AdamOptimizer(const AdamConfig& config, Eigen::Index n_params);
    /// One bias-corrected Adam update using the learning rate of `epoch`.
    void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, int epoch);

private:
    AdamConfig config_;
    Eigen::VectorXd m_, v_;
    long t_ = 0;
};

struct TrainResult {
    std::vector<std::pair<int, double>> history;  // (epoch, loss) every 100 epochs, then the final loss
    double final_loss = 0.0;
};

/// Full-batch Adam on a raw batch. Normalization statistics must already be
/// set (fit_normalization). Throws DivergenceError with the epoch index on a
/// non-finite loss.
TrainResult train(DeepOnetModel& model, const OperatorBatch& raw, const AdamConfig& config);

/// Binary checkpoint: 8-byte magic "HYDONET1", uint64 LE header length, JSON
/// header, then little-endian float64 parameters in flatten() order.
void save_checkpoint(const DeepOnetModel& model, const nlohmann::json& extra, const std::filesystem::path& path);
DeepOnetModel load_checkpoint(const std::filesystem::path& path, nlohmann::json* header = nullptr);

}  // namespace hysterid
