#pragma once

// Syndrome-based MLP decoder: input [|y|, s(y)], output per-bit flip logits.
//
// The network predicts, for every position, the logit e_i that the hard
// decision of y_i is wrong. P(bit_i = 1) is sigma(e_i) when the hard decision
// is 0 and 1 - sigma(e_i) when it is 1, so BCE against the codeword equals BCE
// of sigma(e) against the error pattern.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decrob/channel.hpp"
#include "decrob/code.hpp"
#include "decrob/decoder.hpp"
#include "decrob/errors.hpp"
#include "decrob/random.hpp"

namespace decrob {

struct PreprocessedInput {
    std::vector<double> magnitude;
    BitVector syndrome_bits;
    std::vector<double> concatenated;
};

inline PreprocessedInput preprocess(const LinearCode& code, std::span<const double> y) {
    if (y.size() != code.n()) throw InputError("preprocess: input length != n");
    PreprocessedInput p;
    p.magnitude.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) p.magnitude[i] = std::abs(y[i]);
    p.syndrome_bits = code.syndrome(hard_demodulate(y));
    p.concatenated = p.magnitude;
    for (auto b : p.syndrome_bits) p.concatenated.push_back(static_cast<double>(b));
    return p;
}

enum class Activation : std::uint32_t { softplus = 0, tanh = 1 };

inline std::string to_string(Activation a) { return a == Activation::softplus ? "softplus" : "tanh"; }

inline Activation parse_activation(const std::string& s) {
    if (s == "softplus") return Activation::softplus;
    if (s == "tanh") return Activation::tanh;
    throw InputError("unknown activation: " + s);
}

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
};

namespace mlp_detail {

inline double softplus(double x) noexcept { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double logistic(double x) noexcept {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline void activate(Activation a, const Eigen::MatrixXd& pre, Eigen::MatrixXd& out, Eigen::MatrixXd& deriv) {
    out.resize(pre.rows(), pre.cols());
    deriv.resize(pre.rows(), pre.cols());
    for (Eigen::Index j = 0; j < pre.cols(); ++j)
        for (Eigen::Index i = 0; i < pre.rows(); ++i) {
            const double x = pre(i, j);
            if (a == Activation::softplus) {
                const double e = std::exp(-std::abs(x));
                out(i, j) = std::max(x, 0.0) + std::log1p(e);
                deriv(i, j) = x >= 0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
            } else {
                const double t = std::tanh(x);
                out(i, j) = t;
                deriv(i, j) = 1.0 - t * t;
            }
        }
}

}  // namespace mlp_detail

/// Fully connected network with widths [n + (n-k), h, ..., h, n].
class MlpModel {
public:
    MlpModel() = default;

    /// Glorot-uniform weights, zero biases.
    static MlpModel create(const LinearCode& code, std::size_t hidden_width = 128, std::size_t hidden_layers = 2,
                           std::uint64_t seed = 0, Activation act = Activation::softplus) {
        if (hidden_width == 0 || hidden_layers == 0) throw InputError("mlp: empty hidden layers");
        MlpModel m;
        m.code_id_ = code.id();
        m.code_fingerprint_ = code.fingerprint();
        m.activation_ = act;
        m.seed_ = seed;
        m.widths_.push_back(code.n() + (code.n() - code.k()));
        for (std::size_t l = 0; l < hidden_layers; ++l) m.widths_.push_back(hidden_width);
        m.widths_.push_back(code.n());
        Engine eng = make_engine(StreamId{seed, 0}.child(0x6d6c70));
        for (std::size_t l = 0; l + 1 < m.widths_.size(); ++l) {
            const auto in = static_cast<Eigen::Index>(m.widths_[l]), out = static_cast<Eigen::Index>(m.widths_[l + 1]);
            const double r = std::sqrt(6.0 / static_cast<double>(in + out));
            std::uniform_real_distribution<double> u(-r, r);
            DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
            for (Eigen::Index i = 0; i < out; ++i)
                for (Eigen::Index j = 0; j < in; ++j) layer.weight(i, j) = u(eng);
            m.layers_.push_back(std::move(layer));
        }
        return m;
    }

    std::size_t input_width() const { return widths_.front(); }
    std::size_t output_width() const { return widths_.back(); }
    const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    Activation activation() const noexcept { return activation_; }
    const std::string& code_id() const noexcept { return code_id_; }
    std::uint64_t code_fingerprint() const noexcept { return code_fingerprint_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::size_t parameter_count() const {
        std::size_t c = 0;
        for (const auto& l : layers_) c += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return c;
    }

    void zero_final_layer() {
        layers_.back().weight.setZero();
        layers_.back().bias.setZero();
    }

    void set_zero() {
        for (auto& l : layers_) {
            l.weight.setZero();
            l.bias.setZero();
        }
    }

    bool all_finite() const {
        for (const auto& l : layers_)
            if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
        return true;
    }

    bool matches(const LinearCode& code) const {
        return widths_.front() == code.n() + (code.n() - code.k()) && widths_.back() == code.n();
    }

    void save(const std::string& path) const;
    static MlpModel load(const std::string& path);

private:
    std::vector<std::size_t> widths_;
    std::vector<DenseLayer> layers_;
    Activation activation_ = Activation::softplus;
    std::string code_id_;
    std::uint64_t code_fingerprint_ = 0;
    std::uint64_t seed_ = 0;
};

/// Activations of one batched forward pass (columns are samples).
struct MlpForward {
    std::vector<Eigen::MatrixXd> activations;  // [input, hidden..., ] post-activation
    std::vector<Eigen::MatrixXd> derivatives;  // activation derivative per hidden layer
    Eigen::MatrixXd logits;                    // n x B flip logits
};

inline MlpForward mlp_forward(const MlpModel& m, const Eigen::MatrixXd& x) {
    MlpForward f;
    f.activations.push_back(x);
    const auto& layers = m.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd pre = layers[l].weight * f.activations.back();
        pre.colwise() += layers[l].bias;
        if (l + 1 == layers.size()) {
            f.logits = std::move(pre);
        } else {
            Eigen::MatrixXd a, d;
            mlp_detail::activate(m.activation(), pre, a, d);
            f.activations.push_back(std::move(a));
            f.derivatives.push_back(std::move(d));
        }
    }
    return f;
}

/// Gradients of a scalar objective with respect to parameters and inputs.
struct MlpBackward {
    std::vector<DenseLayer> params;
    Eigen::MatrixXd input;  // input_width x B
};

/// Backpropagates d(objective)/d(logits). Parameter gradients are summed over columns.
inline MlpBackward mlp_backward(const MlpModel& m, const MlpForward& f, const Eigen::MatrixXd& dlogits,
                                bool want_params) {
    const auto& layers = m.layers();
    MlpBackward b;
    if (want_params) b.params.resize(layers.size());
    Eigen::MatrixXd delta = dlogits;
    for (std::size_t l = layers.size(); l-- > 0;) {
        if (want_params) {
            b.params[l].weight = delta * f.activations[l].transpose();
            b.params[l].bias = delta.rowwise().sum();
        }
        Eigen::MatrixXd up = layers[l].weight.transpose() * delta;
        if (l == 0) {
            b.input = std::move(up);
        } else {
            delta = up.cwiseProduct(f.derivatives[l - 1]);
        }
    }
    return b;
}

/// Builds the preprocessed input matrix and the hard decisions for a batch.
inline void mlp_batch_inputs(const LinearCode& code, const Eigen::MatrixXd& y, Eigen::MatrixXd& x,
                             Eigen::MatrixXd& hard) {
    const auto n = static_cast<Eigen::Index>(code.n());
    const auto m = static_cast<Eigen::Index>(code.n() - code.k());
    if (y.rows() != n) throw InputError("mlp: input rows != n");
    x.resize(n + m, y.cols());
    hard.resize(n, y.cols());
    BitVector bits(code.n());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = y(i, j);
            x(i, j) = std::abs(v);
            bits[static_cast<std::size_t>(i)] = v < 0.0 ? 1 : 0;
            hard(i, j) = bits[static_cast<std::size_t>(i)];
        }
        const auto s = code.syndrome(bits);
        for (Eigen::Index r = 0; r < m; ++r) x(n + r, j) = s[static_cast<std::size_t>(r)];
    }
}

/// Per-column mean BCE from flip logits, and d(loss)/d(logit) when `dlogits` is given.
/// `flip` holds target XOR hard decision. The probability clamp is applied exactly:
/// saturated entries contribute the clamped constant and a zero derivative.
inline Eigen::VectorXd mlp_bce(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& flip, Eigen::MatrixXd* dlogits) {
    const auto n = logits.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double lo = std::log(kProbabilityClamp / (1.0 - kProbabilityClamp));
    Eigen::VectorXd loss = Eigen::VectorXd::Zero(logits.cols());
    if (dlogits) dlogits->resize(n, logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = logits(i, j);
            const double z = flip(i, j);
            double v, d;
            if (e < lo || e > -lo) {
                const double p = e < lo ? kProbabilityClamp : 1.0 - kProbabilityClamp;
                v = z > 0.5 ? -std::log(p) : -std::log1p(-p);
                d = 0.0;
            } else {
                v = z > 0.5 ? mlp_detail::softplus(-e) : mlp_detail::softplus(e);
                d = (mlp_detail::logistic(e) - z) * inv_n;
            }
            loss(j) += v * inv_n;
            if (dlogits) (*dlogits)(i, j) = d;
        }
    return loss;
}

class MlpDecoder final : public Decoder {
public:
    MlpDecoder(std::shared_ptr<const LinearCode> code, std::shared_ptr<const MlpModel> model)
        : Decoder(std::move(code)), model_(std::move(model)) {
        if (!model_ || !model_->matches(this->code())) throw InputError("mlp model does not match the code");
    }

    std::string name() const override { return "mlp"; }
    Capabilities capabilities() const override { return {true, true}; }
    const MlpModel& model() const noexcept { return *model_; }

    /// Per-bit P(bit = 1), strictly inside (0, 1).
    std::vector<double> probabilities(std::span<const double> y) const {
        check_length(y);
        const auto e = logits_of(y);
        std::vector<double> p(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double s = mlp_detail::logistic(e(static_cast<Eigen::Index>(i)));
            p[i] = std::clamp(y[i] < 0.0 ? 1.0 - s : s, kProbabilityClamp, 1.0 - kProbabilityClamp);
        }
        return p;
    }

    DecodeResult decode(std::span<const double> y, double /*sigma2*/) const override {
        check_length(y);
        const auto e = logits_of(y);
        std::vector<double> soft(y.size());
        // log P(0)/P(1): -e when the hard decision is 0, +e when it is 1.
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double ei = e(static_cast<Eigen::Index>(i));
            soft[i] = y[i] < 0.0 ? ei : -ei;
        }
        auto r = finish(std::move(soft), 1);
        // Zero soft values keep the channel hard decision.
        for (std::size_t i = 0; i < y.size(); ++i)
            if (r.soft[i] == 0.0) r.bits_hat[i] = y[i] < 0.0 ? 1 : 0;
        r.converged = code().is_codeword(r.bits_hat);
        return r;
    }

    double loss(std::span<const double> y, std::span<const std::uint8_t> target, double sigma2) const override {
        Eigen::VectorXd losses;
        batch_loss(column(y), target, sigma2, losses, nullptr);
        return losses(0);
    }

    double loss_gradient(std::span<const double> y, std::span<const std::uint8_t> target, double sigma2,
                         std::span<double> grad) const override {
        if (grad.size() != y.size()) throw InputError("mlp: gradient length != n");
        Eigen::VectorXd losses;
        Eigen::MatrixXd g;
        batch_loss(column(y), target, sigma2, losses, &g);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = g(static_cast<Eigen::Index>(i), 0);
        return losses(0);
    }

    void batch_loss(const Eigen::MatrixXd& inputs, std::span<const std::uint8_t> target, double /*sigma2*/,
                    Eigen::VectorXd& losses, Eigen::MatrixXd* grads) const override {
        const auto n = static_cast<Eigen::Index>(code().n());
        if (target.size() != code().n()) throw InputError("mlp: target length != n");
        Eigen::MatrixXd x, hard;
        mlp_batch_inputs(code(), inputs, x, hard);
        Eigen::MatrixXd flip(n, inputs.cols());
        for (Eigen::Index j = 0; j < inputs.cols(); ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                flip(i, j) = static_cast<double>((target[static_cast<std::size_t>(i)] & 1u) ^
                                                 static_cast<unsigned>(hard(i, j)));
        const auto fw = mlp_forward(*model_, x);
        if (!grads) {
            losses = mlp_bce(fw.logits, flip, nullptr);
            return;
        }
        Eigen::MatrixXd dlogits;
        losses = mlp_bce(fw.logits, flip, &dlogits);
        const auto bw = mlp_backward(*model_, fw, dlogits, false);
        grads->resize(n, inputs.cols());
        // d|y|/dy = sign(y); the syndrome and the hard-decision composition are piecewise constant.
        for (Eigen::Index j = 0; j < inputs.cols(); ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                (*grads)(i, j) = (inputs(i, j) < 0.0 ? -1.0 : 1.0) * bw.input(i, j);
    }

private:
    static Eigen::MatrixXd column(std::span<const double> y) {
        Eigen::MatrixXd c(static_cast<Eigen::Index>(y.size()), 1);
        for (std::size_t i = 0; i < y.size(); ++i) c(static_cast<Eigen::Index>(i), 0) = y[i];
        return c;
    }

    Eigen::VectorXd logits_of(std::span<const double> y) const {
        Eigen::MatrixXd x, hard;
        mlp_batch_inputs(code(), column(y), x, hard);
        return mlp_forward(*model_, x).logits.col(0);
    }

    std::shared_ptr<const MlpModel> model_;
};

inline std::shared_ptr<MlpDecoder> make_mlp_decoder(std::shared_ptr<const LinearCode> code, MlpModel model) {
    return std::make_shared<MlpDecoder>(std::move(code), std::make_shared<const MlpModel>(std::move(model)));
}

enum class Optimizer { sgd, adam };

struct TrainConfig {
    double snr_low_db = 2.0;
    double snr_high_db = 8.0;
    std::size_t batch_size = 128;
    std::size_t steps = 20000;
    double learning_rate = 1e-3;
    double final_learning_rate_fraction = 0.05;  // cosine decay floor
    Optimizer optimizer = Optimizer::adam;
    MessageMode messages = MessageMode::uniform;
    std::uint64_t seed = 1;
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean batch loss per step
};

/// Minibatch training of the BCE objective. Deterministic in (model, code, config).
inline TrainResult train(MlpModel& model, const LinearCode& code, const TrainConfig& cfg) {
    if (!(cfg.snr_low_db <= cfg.snr_high_db)) throw InputError("train: empty snr range");
    if (cfg.batch_size == 0) throw InputError("train: batch size must be positive");
    if (!(cfg.learning_rate > 0)) throw InputError("train: learning rate must be positive");
    if (!model.matches(code)) throw InputError("train: model does not match the code");

    const auto n = static_cast<Eigen::Index>(code.n());
    const auto batch = static_cast<Eigen::Index>(cfg.batch_size);
    auto& layers = model.layers();
    std::vector<DenseLayer> m1, m2;
    for (const auto& l : layers) {
        m1.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
        m2.push_back(m1.back());
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double pi = std::acos(-1.0);

    TrainResult out;
    out.loss_curve.reserve(cfg.steps);
    Eigen::MatrixXd y(n, batch), x, hard, flip(n, batch), dlogits;
    BitVector message(code.k());
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        Engine eng = make_engine(StreamId{cfg.seed, step}.child(0x747261696e));
        const double ebno = std::uniform_real_distribution<double>(cfg.snr_low_db, cfg.snr_high_db)(eng);
        const auto snr = SnrContext::from_ebno(ebno, code.rate());
        std::bernoulli_distribution coin(0.5);
        std::normal_distribution<double> gauss(0.0, std::sqrt(snr.sigma2));
        for (Eigen::Index j = 0; j < batch; ++j) {
            for (auto& b : message) b = cfg.messages == MessageMode::uniform && coin(eng) ? 1 : 0;
            const auto c = code.encode(message);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto bit = c[static_cast<std::size_t>(i)];
                y(i, j) = (bit ? -1.0 : 1.0) + gauss(eng);
                flip(i, j) = bit;
            }
        }
        mlp_batch_inputs(code, y, x, hard);
        for (Eigen::Index j = 0; j < batch; ++j)
            for (Eigen::Index i = 0; i < n; ++i) flip(i, j) = flip(i, j) != hard(i, j) ? 1.0 : 0.0;

        const auto fw = mlp_forward(model, x);
        const Eigen::VectorXd losses = mlp_bce(fw.logits, flip, &dlogits);
        const double mean_loss = losses.mean();
        if (!std::isfinite(mean_loss)) throw TrainingError(step, "loss is not finite");
        out.loss_curve.push_back(mean_loss);

        dlogits /= static_cast<double>(batch);
        const auto bw = mlp_backward(model, fw, dlogits, true);

        const double progress = cfg.steps > 1 ? static_cast<double>(step) / static_cast<double>(cfg.steps - 1) : 0.0;
        const double floor = cfg.final_learning_rate_fraction;
        const double lr = cfg.learning_rate * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(pi * progress)));
        const double t = static_cast<double>(step + 1);
        const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            auto update = [&](auto& param, const auto& grad, auto& mom, auto& var) {
                if (cfg.optimizer == Optimizer::sgd) {
                    param -= lr * grad;
                    return;
                }
                mom = beta1 * mom + (1.0 - beta1) * grad;
                var = beta2 * var + (1.0 - beta2) * grad.cwiseAbs2();
                param.array() -= lr * (mom.array() / c1) / ((var.array() / c2).sqrt() + eps);
            };
            update(layers[l].weight, bw.params[l].weight, m1[l].weight, m2[l].weight);
            update(layers[l].bias, bw.params[l].bias, m1[l].bias, m2[l].bias);
        }
        if (!model.all_finite()) throw TrainingError(step, "parameters are not finite");
    }
    return out;
}

// Checkpoint layout (little-endian):
//   "DECROBNN" | u32 version | u32 id length | id bytes | u64 code fingerprint
//   | u32 activation | u64 seed | u32 width count | u32 widths...
//   | f64 parameters: per layer, weight row-major (out x in) then bias.
namespace mlp_detail {

inline constexpr char kMagic[8] = {'D', 'E', 'C', 'R', 'O', 'B', 'N', 'N'};
inline constexpr std::uint32_t kVersion = 1;

inline void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 8);
}
inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 4);
}
inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw InputError("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw InputError("checkpoint: truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace mlp_detail

inline void MlpModel::save(const std::string& path) const {
    using namespace mlp_detail;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write checkpoint: " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(code_id_.size()));
    os.write(code_id_.data(), static_cast<std::streamsize>(code_id_.size()));
    put_u64(os, code_fingerprint_);
    put_u32(os, static_cast<std::uint32_t>(activation_));
    put_u64(os, seed_);
    put_u32(os, static_cast<std::uint32_t>(widths_.size()));
    for (auto w : widths_) put_u32(os, static_cast<std::uint32_t>(w));
    for (const auto& l : layers_) {
        for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
            for (Eigen::Index j = 0; j < l.weight.cols(); ++j) put_u64(os, std::bit_cast<std::uint64_t>(l.weight(i, j)));
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) put_u64(os, std::bit_cast<std::uint64_t>(l.bias(i)));
    }
    if (!os) throw InputError("checkpoint write failed: " + path);
}

inline MlpModel MlpModel::load(const std::string& path) {
    using namespace mlp_detail;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open checkpoint: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw InputError("not a decoder checkpoint: " + path);
    if (get_u32(is) != kVersion) throw InputError("unsupported checkpoint version");
    MlpModel m;
    const auto id_len = get_u32(is);
    if (id_len > 4096) throw InputError("checkpoint: bad code id");
    m.code_id_.resize(id_len);
    if (!is.read(m.code_id_.data(), id_len)) throw InputError("checkpoint: truncated");
    m.code_fingerprint_ = get_u64(is);
    const auto act = get_u32(is);
    if (act > 1) throw InputError("checkpoint: unknown activation");
    m.activation_ = static_cast<Activation>(act);
    m.seed_ = get_u64(is);
    const auto count = get_u32(is);
    if (count < 2 || count > 64) throw InputError("checkpoint: bad layer count");
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto w = get_u32(is);
        if (w == 0 || w > (1u << 20)) throw InputError("checkpoint: bad width");
        m.widths_.push_back(w);
    }
    for (std::size_t l = 0; l + 1 < m.widths_.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(m.widths_[l]), out = static_cast<Eigen::Index>(m.widths_[l + 1]);
        DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (Eigen::Index i = 0; i < out; ++i)
            for (Eigen::Index j = 0; j < in; ++j) layer.weight(i, j) = std::bit_cast<double>(get_u64(is));
        for (Eigen::Index i = 0; i < out; ++i) layer.bias(i) = std::bit_cast<double>(get_u64(is));
        m.layers_.push_back(std::move(layer));
    }
    if (is.peek() != std::char_traits<char>::eof()) throw InputError("checkpoint: trailing data");
    if (!m.all_finite()) throw InputError("checkpoint: non-finite parameters");
    return m;
}

/// Loads a checkpoint and checks it belongs to `code`.
inline MlpModel load_checkpoint_for(const std::string& path, const LinearCode& code) {
    auto m = MlpModel::load(path);
    if (m.code_fingerprint() != code.fingerprint() || !m.matches(code))
        throw InputError("checkpoint was trained for code '" + m.code_id() + "', not '" + code.id() + "'");
    return m;
}

}  // namespace decrob
