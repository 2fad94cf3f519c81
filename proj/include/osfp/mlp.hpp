#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "osfp/random.hpp"

namespace osfp {

/// Multilayer perceptron with tanh units. Layer l maps sizes[l] inputs to
/// sizes[l+1] outputs through a sizes[l+1] x (sizes[l] + 1) weight matrix
/// whose column 0 multiplies the fixed bias input x0 = -1:
///
///     v = tanh(W.rightCols(n) * x - W.col(0))
template <typename Scalar>
class BasicMlp {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicMlp() = default;
    explicit BasicMlp(std::vector<Eigen::Index> layer_sizes) : sizes_(std::move(layer_sizes)) {
        if (sizes_.size() < 2) throw std::invalid_argument("mlp: need at least input and output layers");
        for (auto s : sizes_)
            if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) weights_.push_back(Matrix::Zero(sizes_[l + 1], sizes_[l] + 1));
    }

    const std::vector<Eigen::Index>& layer_sizes() const { return sizes_; }
    std::size_t layer_count() const { return weights_.size(); }
    Eigen::Index input_size() const { return sizes_.empty() ? 0 : sizes_.front(); }
    Eigen::Index output_size() const { return sizes_.empty() ? 0 : sizes_.back(); }

    Matrix& weights(std::size_t layer) { return weights_.at(layer); }
    const Matrix& weights(std::size_t layer) const { return weights_.at(layer); }
    std::vector<Matrix>& all_weights() { return weights_; }
    const std::vector<Matrix>& all_weights() const { return weights_; }

    bool all_finite() const {
        for (const auto& w : weights_)
            if (!w.allFinite()) return false;
        return true;
    }

    bool operator==(const BasicMlp& other) const {
        if (sizes_ != other.sizes_) return false;
        for (std::size_t l = 0; l < weights_.size(); ++l)
            if (weights_[l] != other.weights_[l]) return false;
        return true;
    }

private:
    std::vector<Eigen::Index> sizes_;
    std::vector<Matrix> weights_;
};

using Mlp = BasicMlp<double>;

/// Activations of every layer, input first.
template <typename Scalar, typename Derived>
std::vector<typename BasicMlp<Scalar>::Vector> forward_trace(const BasicMlp<Scalar>& net,
                                                             const Eigen::MatrixBase<Derived>& x) {
    using Vector = typename BasicMlp<Scalar>::Vector;
    if (x.size() != net.input_size())
        throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " values, net expects " +
                                    std::to_string(net.input_size()));
    std::vector<Vector> acts;
    acts.reserve(net.layer_count() + 1);
    acts.emplace_back(x.template cast<Scalar>());
    for (const auto& w : net.all_weights()) {
        const auto n = w.cols() - 1;
        acts.emplace_back((w.rightCols(n) * acts.back() - w.col(0)).array().tanh().matrix());
    }
    return acts;
}

template <typename Scalar, typename Derived>
typename BasicMlp<Scalar>::Vector forward(const BasicMlp<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    return forward_trace(net, x).back();
}

/// Forward pass of every row of `inputs`; one output row per input row.
template <typename Scalar, typename Derived>
typename BasicMlp<Scalar>::Matrix forward_rows(const BasicMlp<Scalar>& net, const Eigen::MatrixBase<Derived>& inputs) {
    using Matrix = typename BasicMlp<Scalar>::Matrix;
    if (inputs.cols() != net.input_size()) throw std::invalid_argument("forward_rows: width mismatch");
    Matrix a = inputs.template cast<Scalar>().transpose();
    for (const auto& w : net.all_weights()) {
        const auto n = w.cols() - 1;
        Matrix z = w.rightCols(n) * a;
        z.colwise() -= w.col(0);
        a = z.array().tanh().matrix();
    }
    return a.transpose();
}

/// Backpropagated error terms of one pair, output layer last:
/// delta_out = f'(v) (y - v), delta_l = f'(v_l) * W_{l+1}^T delta_{l+1}.
template <typename Scalar>
std::vector<typename BasicMlp<Scalar>::Vector> backprop_deltas(
    const BasicMlp<Scalar>& net, const std::vector<typename BasicMlp<Scalar>::Vector>& acts,
    const typename BasicMlp<Scalar>::Vector& target) {
    using Vector = typename BasicMlp<Scalar>::Vector;
    const auto layers = net.layer_count();
    std::vector<Vector> deltas(layers);
    const Vector& out = acts.back();
    deltas[layers - 1] = (Scalar(1) - out.array().square()) * (target - out).array();
    for (std::size_t l = layers - 1; l > 0; --l) {
        const auto& w = net.weights(l);
        const Vector back = w.rightCols(w.cols() - 1).transpose() * deltas[l];
        deltas[l - 1] = (Scalar(1) - acts[l].array().square()) * back.array();
    }
    return deltas;
}

/// Gradient of E = 1/2 |y - v|^2 with respect to every weight matrix.
template <typename Scalar, typename DX, typename DY>
std::vector<typename BasicMlp<Scalar>::Matrix> error_gradient(const BasicMlp<Scalar>& net,
                                                              const Eigen::MatrixBase<DX>& x,
                                                              const Eigen::MatrixBase<DY>& y) {
    using Matrix = typename BasicMlp<Scalar>::Matrix;
    using Vector = typename BasicMlp<Scalar>::Vector;
    const auto acts = forward_trace(net, x);
    const Vector target = y.template cast<Scalar>();
    const auto deltas = backprop_deltas(net, acts, target);
    std::vector<Matrix> grads;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        Matrix g(deltas[l].size(), acts[l].size() + 1);
        // The update direction is delta * [x0, a]; the gradient is its negation.
        g.col(0) = deltas[l];
        g.rightCols(acts[l].size()).noalias() = -deltas[l] * acts[l].transpose();
        grads.push_back(std::move(g));
    }
    return grads;
}

/// Zero matrices shaped like the weights; the momentum carry of training.
template <typename Scalar>
std::vector<typename BasicMlp<Scalar>::Matrix> zero_updates(const BasicMlp<Scalar>& net) {
    std::vector<typename BasicMlp<Scalar>::Matrix> out;
    for (const auto& w : net.all_weights()) out.push_back(BasicMlp<Scalar>::Matrix::Zero(w.rows(), w.cols()));
    return out;
}

class TrainingError : public std::runtime_error {
public:
    TrainingError(std::size_t generation, const std::string& message)
        : std::runtime_error("generation " + std::to_string(generation) + ": " + message), generation_(generation) {}
    std::size_t generation() const noexcept { return generation_; }

private:
    std::size_t generation_;
};

/// One generation of online backpropagation over the pairs in `order`.
/// Each pair's update is
///
///     dW_t = lambda * delta * [x0, a]^T + mu * dW_{t-1}
///
/// with the carry kept in `updates`. Returns the mean over pairs of
/// sum((y - v)^2) / outputs, each measured before that pair's update.
template <typename Scalar, typename DX, typename DY>
Scalar backprop_generation(BasicMlp<Scalar>& net, const Eigen::MatrixBase<DX>& inputs,
                           const Eigen::MatrixBase<DY>& targets, std::span<const Eigen::Index> order, Scalar lambda,
                           Scalar mu, std::vector<typename BasicMlp<Scalar>::Matrix>& updates) {
    using Vector = typename BasicMlp<Scalar>::Vector;
    if (order.empty()) throw std::invalid_argument("backprop_generation: no pairs");
    if (inputs.rows() != targets.rows()) throw std::invalid_argument("backprop_generation: row count mismatch");
    if (targets.cols() != net.output_size()) throw std::invalid_argument("backprop_generation: target width mismatch");
    if (updates.size() != net.layer_count()) updates = zero_updates(net);

    const auto outputs = static_cast<Scalar>(net.output_size());
    Scalar total = 0;
    for (const auto row : order) {
        const auto acts = forward_trace(net, inputs.row(row).transpose());
        const Vector target = targets.row(row).transpose().template cast<Scalar>();
        total += (target - acts.back()).squaredNorm() / outputs;
        const auto deltas = backprop_deltas(net, acts, target);
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            auto& du = updates[l];
            const auto n = acts[l].size();
            du *= mu;
            du.col(0).noalias() -= lambda * deltas[l];
            du.rightCols(n).noalias() += lambda * deltas[l] * acts[l].transpose();
            net.weights(l) += du;
        }
    }
    return total / static_cast<Scalar>(order.size());
}

template <typename Scalar, typename DX, typename DY>
Scalar backprop_generation(BasicMlp<Scalar>& net, const Eigen::MatrixBase<DX>& inputs,
                           const Eigen::MatrixBase<DY>& targets, Scalar lambda, Scalar mu,
                           std::vector<typename BasicMlp<Scalar>::Matrix>& updates) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    return backprop_generation(net, inputs, targets, std::span<const Eigen::Index>(order), lambda, mu, updates);
}

struct TrainConfig {
    double learning_rate = 0.01;  ///< initial lambda
    double momentum = 0.8;
    double rate_increase = 1.05;
    double rate_decrease = 0.7;
    double min_rate = 1e-6;
    double max_rate = 1.0;
    std::size_t generations = 1000;
    std::uint64_t shuffle_seed = 1;
    std::optional<std::size_t> subset_size;
    std::optional<double> target_error;

    /// Same settings with lambda held constant.
    TrainConfig fixed_rate() const {
        auto c = *this;
        c.rate_increase = 1.0;
        c.rate_decrease = 1.0;
        return c;
    }
    /// Throws std::invalid_argument when the settings are inconsistent. A
    /// fixed rate (both multipliers 1) is accepted.
    void validate() const;
};

struct SubsetFitness {
    std::size_t generation = 0;  ///< generations completed when measured
    double g = 0;
    bool operator==(const SubsetFitness&) const = default;
};

struct TrainHistory {
    std::vector<double> mse;
    std::vector<double> lambda;
    std::vector<SubsetFitness> fitness;

    std::size_t generations() const { return mse.size(); }
    /// First generation (1-based) whose error is at or below `threshold`.
    std::optional<std::size_t> generations_to_reach(double threshold) const;
    /// `generation,mse,lambda,G` rows; G is empty except where a subset ended.
    std::string to_csv() const;
    bool operator==(const TrainHistory&) const = default;
};

enum class FitnessKind { Binary, Categorical };

/// Binary: G = 1 - (false-positive rate + false-negative rate), threshold 0
/// on the single output. Categorical: G = 1 - wrong argmax rows / rows.
template <typename DO, typename DT>
double fitness_g(const Eigen::MatrixBase<DO>& outputs, const Eigen::MatrixBase<DT>& targets, FitnessKind kind) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw std::invalid_argument("fitness_g: shape mismatch");
    if (outputs.rows() == 0) return 0.0;
    if (kind == FitnessKind::Binary) {
        double fp = 0, fn = 0, negatives = 0, positives = 0;
        for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
            const bool actual = targets(i, 0) > 0;
            const bool predicted = outputs(i, 0) > 0;
            (actual ? positives : negatives) += 1;
            if (predicted && !actual) fp += 1;
            if (!predicted && actual) fn += 1;
        }
        return 1.0 - ((negatives > 0 ? fp / negatives : 0.0) + (positives > 0 ? fn / positives : 0.0));
    }
    double wrong = 0;
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        Eigen::Index o = 0, t = 0;
        outputs.row(i).maxCoeff(&o);
        targets.row(i).maxCoeff(&t);
        if (o != t) wrong += 1;
    }
    return 1.0 - wrong / static_cast<double>(outputs.rows());
}

inline FitnessKind fitness_kind_for(Eigen::Index outputs) {
    return outputs == 1 ? FitnessKind::Binary : FitnessKind::Categorical;
}

/// Generations of shuffled online backpropagation with the adaptive rate:
/// after each generation lambda grows by rate_increase when the error did not
/// rise, and shrinks by rate_decrease when it did.
template <typename Scalar, typename DX, typename DY>
TrainHistory train(BasicMlp<Scalar>& net, const Eigen::MatrixBase<DX>& inputs, const Eigen::MatrixBase<DY>& targets,
                   const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.rows() == 0) throw std::invalid_argument("train: empty dataset");
    if (inputs.cols() != net.input_size())
        throw std::invalid_argument("train: data has " + std::to_string(inputs.cols()) + " columns, net expects " +
                                    std::to_string(net.input_size()));

    TrainHistory history;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(cfg.shuffle_seed);
    auto updates = zero_updates(net);
    double lambda = cfg.learning_rate;

    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        shuffle(std::span<Eigen::Index>(order), rng);
        const double mse = static_cast<double>(backprop_generation(
            net, inputs, targets, std::span<const Eigen::Index>(order), static_cast<Scalar>(lambda),
            static_cast<Scalar>(cfg.momentum), updates));
        if (!std::isfinite(mse) || !net.all_finite()) throw TrainingError(gen, "training diverged");
        history.mse.push_back(mse);
        history.lambda.push_back(lambda);
        if (cfg.target_error && mse <= *cfg.target_error) break;
        if (history.mse.size() >= 2) {
            if (mse <= history.mse[history.mse.size() - 2])
                lambda = std::min(lambda * cfg.rate_increase, cfg.max_rate);
            else
                lambda = std::max(lambda * cfg.rate_decrease, cfg.min_rate);
        }
    }
    return history;
}

/// Trains on consecutive random subsets. After each subset the fitness G is
/// measured on the next subset of the partition (the only one for a single
/// subset); when G rose, the next subset starts from a larger lambda.
template <typename Scalar, typename DX, typename DY>
TrainHistory train_subsets(BasicMlp<Scalar>& net, const Eigen::MatrixBase<DX>& inputs,
                           const Eigen::MatrixBase<DY>& targets, const TrainConfig& cfg) {
    using Matrix = typename BasicMlp<Scalar>::Matrix;
    cfg.validate();
    if (!cfg.subset_size || *cfg.subset_size == 0) throw std::invalid_argument("train_subsets: subset_size not set");
    const auto n = static_cast<std::size_t>(inputs.rows());
    if (*cfg.subset_size > n)
        throw std::invalid_argument("train_subsets: subset_size " + std::to_string(*cfg.subset_size) +
                                    " exceeds dataset size " + std::to_string(n));

    std::vector<Eigen::Index> all(n);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    if (*cfg.subset_size < n) {
        Rng rng(derive_seed(cfg.shuffle_seed, 0x5B5E7));
        shuffle(std::span<Eigen::Index>(all), rng);
    }
    std::vector<std::vector<Eigen::Index>> subsets;
    for (std::size_t start = 0; start < n; start += *cfg.subset_size) {
        std::vector<Eigen::Index> s(all.begin() + static_cast<std::ptrdiff_t>(start),
                                    all.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + *cfg.subset_size)));
        std::sort(s.begin(), s.end());
        subsets.push_back(std::move(s));
    }
    auto gather = [&](const auto& src, const std::vector<Eigen::Index>& rows) {
        Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]).template cast<Scalar>();
        return out;
    };

    TrainHistory history;
    TrainConfig sub = cfg;
    std::optional<double> last_g;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const Matrix x = gather(inputs, subsets[s]);
        const Matrix y = gather(targets, subsets[s]);
        TrainHistory h;
        try {
            h = train(net, x, y, sub);
        } catch (const TrainingError& e) {
            throw TrainingError(history.generations() + e.generation(), "training diverged");
        }
        history.mse.insert(history.mse.end(), h.mse.begin(), h.mse.end());
        history.lambda.insert(history.lambda.end(), h.lambda.begin(), h.lambda.end());

        const auto& held = subsets[(s + 1) % subsets.size()];
        const Matrix hx = gather(inputs, held);
        const Matrix hy = gather(targets, held);
        const double g = fitness_g(forward_rows(net, hx), hy, fitness_kind_for(net.output_size()));
        history.fitness.push_back({history.generations(), g});
        if (last_g && g > *last_g) sub.learning_rate = std::min(sub.learning_rate * cfg.rate_increase, cfg.max_rate);
        last_g = g;
    }
    return history;
}

/// Weights uniform in [-r, r], r = 1/sqrt(fan-in).
template <typename Scalar = double>
BasicMlp<Scalar> init_weights(const std::vector<Eigen::Index>& layer_sizes, std::uint64_t seed) {
    BasicMlp<Scalar> net(layer_sizes);
    Rng rng(seed);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& w = net.weights(l);
        const double r = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l]));
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(uniform_real(rng, -r, r));
    }
    return net;
}

}  // namespace osfp
