#pragma once

#include <cmath>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace mfrl {

// Two-layer fully connected network: y = W2 tanh(W1 x + b1) + b2.
//
// All parameters live in one flat vector laid out as [W1 | b1 | W2 | b2]
// (matrices column-major), so optimizers and gradients share a single
// representation. Gradients returned by backward() use the same layout.
class Mlp {
public:
    Mlp() = default;
    // Zero-initialized network.
    Mlp(int input, int hidden, int output);

    // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    template <class Rng>
    static Mlp glorot(int input, int hidden, int output, Rng& rng);

    int input_dim() const { return input_; }
    int hidden_dim() const { return hidden_; }
    int output_dim() const { return output_; }
    Eigen::Index parameter_count() const { return params_.size(); }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    Eigen::Map<Eigen::MatrixXd> w1();
    Eigen::Map<Eigen::VectorXd> b1();
    Eigen::Map<Eigen::MatrixXd> w2();
    Eigen::Map<Eigen::VectorXd> b2();
    Eigen::Map<const Eigen::MatrixXd> w1() const;
    Eigen::Map<const Eigen::VectorXd> b1() const;
    Eigen::Map<const Eigen::MatrixXd> w2() const;
    Eigen::Map<const Eigen::VectorXd> b2() const;

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    // Intermediates of a batched forward pass; one sample per column.
    struct Tape {
        Eigen::MatrixXd input;
        Eigen::MatrixXd hidden;  // post-activation
        Eigen::MatrixXd output;
    };
    Tape forward_batch(const Eigen::MatrixXd& inputs) const;

    // Parameter gradient of sum_j <upstream_j, f(x_j)>. If input_grad is
    // given it receives d/dx_j for every column.
    Eigen::VectorXd backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                             Eigen::MatrixXd* input_grad = nullptr) const;

    // Largest absolute parameter value, or +inf if any parameter is non-finite.
    double max_abs_parameter() const;

private:
    Eigen::Index w1_offset() const { return 0; }
    Eigen::Index b1_offset() const { return static_cast<Eigen::Index>(hidden_) * input_; }
    Eigen::Index w2_offset() const { return b1_offset() + hidden_; }
    Eigen::Index b2_offset() const { return w2_offset() + static_cast<Eigen::Index>(output_) * hidden_; }

    int input_ = 0;
    int hidden_ = 0;
    int output_ = 0;
    Eigen::VectorXd params_;
};

struct MlpGradient {
    Eigen::VectorXd params;
    Eigen::VectorXd input;
};

// Single-sample backward pass (recomputes the forward intermediates).
MlpGradient backward(const Mlp& net, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream);

// Adam with bias correction. Minimizes: params -= lr * m_hat / (sqrt(v_hat) + eps).
struct AdamState {
    AdamState() = default;
    AdamState(Eigen::Index size, double learning_rate);

    Eigen::VectorXd first;
    Eigen::VectorXd second;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Throws DivergenceError("diverged") on a non-finite gradient. `lr_scale`
// multiplies the configured rate for this step only.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               double lr_scale = 1.0);

// Flat CSV checkpoints: one line per parameter array, `name,RxC,v0,v1,...`,
// values column-major at full precision.
void write_parameters_csv(std::ostream& out, std::string_view prefix, const Mlp& net);
using ParameterTable = std::map<std::string, Eigen::MatrixXd>;
ParameterTable read_parameter_table(std::istream& in);
Mlp mlp_from_table(const ParameterTable& table, std::string_view prefix);

template <class Rng>
Mlp Mlp::glorot(int input, int hidden, int output, Rng& rng) {
    Mlp net(input, hidden, output);
    std::uniform_real_distribution<double> u1(-1.0, 1.0);
    const double lim1 = std::sqrt(6.0 / (input + hidden));
    const double lim2 = std::sqrt(6.0 / (hidden + output));
    auto w1 = net.w1();
    for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = lim1 * u1(rng);
    auto w2 = net.w2();
    for (Eigen::Index i = 0; i < w2.size(); ++i) w2.data()[i] = lim2 * u1(rng);
    return net;
}

}  // namespace mfrl
