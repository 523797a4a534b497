#include "mfrl/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "mfrl/error.hpp"

namespace mfrl {

Mlp::Mlp(int input, int hidden, int output) : input_(input), hidden_(hidden), output_(output) {
    if (input <= 0 || hidden <= 0 || output <= 0) throw ShapeError("mlp dimensions must be positive");
    params_ = Eigen::VectorXd::Zero(b2_offset() + output_);
}

Eigen::Map<Eigen::MatrixXd> Mlp::w1() { return {params_.data() + w1_offset(), hidden_, input_}; }
Eigen::Map<Eigen::VectorXd> Mlp::b1() { return {params_.data() + b1_offset(), hidden_}; }
Eigen::Map<Eigen::MatrixXd> Mlp::w2() { return {params_.data() + w2_offset(), output_, hidden_}; }
Eigen::Map<Eigen::VectorXd> Mlp::b2() { return {params_.data() + b2_offset(), output_}; }
Eigen::Map<const Eigen::MatrixXd> Mlp::w1() const {
    return {params_.data() + w1_offset(), hidden_, input_};
}
Eigen::Map<const Eigen::VectorXd> Mlp::b1() const { return {params_.data() + b1_offset(), hidden_}; }
Eigen::Map<const Eigen::MatrixXd> Mlp::w2() const {
    return {params_.data() + w2_offset(), output_, hidden_};
}
Eigen::Map<const Eigen::VectorXd> Mlp::b2() const { return {params_.data() + b2_offset(), output_}; }

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_) throw ShapeError("mlp input dimension mismatch");
    const Eigen::VectorXd h = (w1() * x + b1()).array().tanh().matrix();
    return w2() * h + b2();
}

Mlp::Tape Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != input_) throw ShapeError("mlp input dimension mismatch");
    Tape tape;
    tape.input = inputs;
    tape.hidden = ((w1() * inputs).colwise() + b1()).array().tanh().matrix();
    tape.output = (w2() * tape.hidden).colwise() + b2();
    return tape;
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                              Eigen::MatrixXd* input_grad) const {
    if (upstream.rows() != output_ || upstream.cols() != tape.input.cols()) {
        throw ShapeError("mlp upstream gradient shape mismatch");
    }
    Eigen::VectorXd grad(params_.size());
    Eigen::Map<Eigen::MatrixXd> gw1(grad.data() + w1_offset(), hidden_, input_);
    Eigen::Map<Eigen::VectorXd> gb1(grad.data() + b1_offset(), hidden_);
    Eigen::Map<Eigen::MatrixXd> gw2(grad.data() + w2_offset(), output_, hidden_);
    Eigen::Map<Eigen::VectorXd> gb2(grad.data() + b2_offset(), output_);

    gw2.noalias() = upstream * tape.hidden.transpose();
    gb2 = upstream.rowwise().sum();
    const Eigen::MatrixXd pre =
        ((w2().transpose() * upstream).array() * (1.0 - tape.hidden.array().square())).matrix();
    gw1.noalias() = pre * tape.input.transpose();
    gb1 = pre.rowwise().sum();
    if (input_grad) *input_grad = w1().transpose() * pre;
    return grad;
}

double Mlp::max_abs_parameter() const {
    if (!params_.allFinite()) return std::numeric_limits<double>::infinity();
    return params_.size() ? params_.cwiseAbs().maxCoeff() : 0.0;
}

MlpGradient backward(const Mlp& net, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) {
    if (upstream.size() != net.output_dim()) throw ShapeError("mlp upstream gradient shape mismatch");
    const auto tape = net.forward_batch(x);
    Eigen::MatrixXd input_grad;
    MlpGradient g;
    g.params = net.backward(tape, upstream, &input_grad);
    g.input = input_grad.col(0);
    return g;
}

AdamState::AdamState(Eigen::Index size, double learning_rate)
    : first(Eigen::VectorXd::Zero(size)), second(Eigen::VectorXd::Zero(size)), lr(learning_rate) {}

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               double lr_scale) {
    if (grads.size() != params.size() || state.first.size() != params.size()) {
        throw ShapeError("adam state does not match parameter shape");
    }
    if (!grads.allFinite()) throw DivergenceError("diverged");
    ++state.step;
    state.first = state.beta1 * state.first + (1.0 - state.beta1) * grads;
    state.second = state.beta2 * state.second + (1.0 - state.beta2) * grads.cwiseProduct(grads);
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const double lr = state.lr * lr_scale;
    params.array() -=
        lr * (state.first.array() / c1) / ((state.second.array() / c2).sqrt() + state.eps);
}

namespace {

void write_array(std::ostream& out, const std::string& name, const double* data, Eigen::Index rows,
                 Eigen::Index cols) {
    out << name << ',' << rows << 'x' << cols;
    char buf[64];
    for (Eigen::Index i = 0; i < rows * cols; ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", data[i]);
        out << buf;
    }
    out << '\n';
}

}  // namespace

void write_parameters_csv(std::ostream& out, std::string_view prefix, const Mlp& net) {
    const std::string p(prefix);
    write_array(out, p + ".w1", net.w1().data(), net.hidden_dim(), net.input_dim());
    write_array(out, p + ".b1", net.b1().data(), net.hidden_dim(), 1);
    write_array(out, p + ".w2", net.w2().data(), net.output_dim(), net.hidden_dim());
    write_array(out, p + ".b2", net.b2().data(), net.output_dim(), 1);
}

ParameterTable read_parameter_table(std::istream& in) {
    ParameterTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string name, shape, cell;
        if (!std::getline(fields, name, ',') || !std::getline(fields, shape, ',')) {
            throw Error("checkpoint: malformed line");
        }
        long rows = 0, cols = 0;
        if (std::sscanf(shape.c_str(), "%ldx%ld", &rows, &cols) != 2 || rows <= 0 || cols <= 0) {
            throw Error("checkpoint: malformed shape for " + name);
        }
        Eigen::MatrixXd values(rows, cols);
        for (long i = 0; i < rows * cols; ++i) {
            if (!std::getline(fields, cell, ',')) throw Error("checkpoint: too few values for " + name);
            values.data()[i] = std::stod(cell);
        }
        if (std::getline(fields, cell, ',')) throw Error("checkpoint: too many values for " + name);
        table[name] = std::move(values);
    }
    return table;
}

Mlp mlp_from_table(const ParameterTable& table, std::string_view prefix) {
    const std::string p(prefix);
    auto get = [&](const char* suffix) -> const Eigen::MatrixXd& {
        auto it = table.find(p + suffix);
        if (it == table.end()) throw Error("checkpoint: missing " + p + suffix);
        return it->second;
    };
    const auto& w1 = get(".w1");
    const auto& b1 = get(".b1");
    const auto& w2 = get(".w2");
    const auto& b2 = get(".b2");
    Mlp net(static_cast<int>(w1.cols()), static_cast<int>(w1.rows()), static_cast<int>(w2.rows()));
    if (b1.rows() != w1.rows() || w2.cols() != w1.rows() || b2.rows() != w2.rows()) {
        throw ShapeError("checkpoint: inconsistent shapes for " + p);
    }
    net.w1() = w1;
    net.b1() = b1.col(0);
    net.w2() = w2;
    net.b2() = b2.col(0);
    return net;
}

}  // namespace mfrl
