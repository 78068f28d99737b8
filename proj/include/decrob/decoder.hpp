#pragma once

// Uniform decoder interface shared by classical and neural decoders.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decrob/code.hpp"
#include "decrob/errors.hpp"

namespace decrob {

struct Capabilities {
    bool differentiable = false;
    bool black_box = true;
};

struct DecodeResult {
    BitVector bits_hat;
    std::vector<double> soft;  ///< per-bit score, positive means bit 0
    std::size_t iterations_used = 0;
    bool converged = false;    ///< bits_hat has zero syndrome
};

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7].
inline double bce_loss(std::span<const double> prob_one, std::span<const std::uint8_t> target) {
    if (prob_one.size() != target.size()) throw InputError("bce_loss: length mismatch");
    if (prob_one.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < prob_one.size(); ++i) {
        const double p = std::clamp(prob_one[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        acc -= target[i] ? std::log(p) : std::log1p(-p);
    }
    return acc / static_cast<double>(prob_one.size());
}

/// P(bit = 1) from a soft score with the positive-means-zero convention.
inline double soft_to_prob_one(double soft) noexcept {
    if (soft >= 0.0) {
        const double e = std::exp(-soft);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(soft));
}

/// Hard decision on a soft vector; a zero score maps to bit 0.
inline BitVector hard_decision(std::span<const double> soft) {
    BitVector out(soft.size());
    for (std::size_t i = 0; i < soft.size(); ++i) out[i] = soft[i] < 0.0 ? 1 : 0;
    return out;
}

/// Base class for decoders. Each instance is bound to one code.
///
/// Decoders are stateless across calls and safe to use from several threads.
/// `loss` is the per-frame BCE between P(bit=1) and the target codeword bits;
/// decoders without an analytic path derive it from `decode().soft`.
class Decoder {
public:
    explicit Decoder(std::shared_ptr<const LinearCode> code) : code_(std::move(code)) {
        if (!code_) throw InputError("decoder needs a code");
    }
    virtual ~Decoder() = default;

    virtual std::string name() const = 0;
    virtual Capabilities capabilities() const { return {false, true}; }
    virtual DecodeResult decode(std::span<const double> y, double sigma2) const = 0;

    const LinearCode& code() const noexcept { return *code_; }
    std::shared_ptr<const LinearCode> code_ptr() const noexcept { return code_; }

    virtual double loss(std::span<const double> y, std::span<const std::uint8_t> target, double sigma2) const {
        const DecodeResult r = decode(y, sigma2);
        std::vector<double> p(r.soft.size());
        std::transform(r.soft.begin(), r.soft.end(), p.begin(), soft_to_prob_one);
        return bce_loss(p, target);
    }

    /// Loss and its input gradient. Only for differentiable decoders.
    virtual double loss_gradient(std::span<const double> /*y*/, std::span<const std::uint8_t> /*target*/,
                                 double /*sigma2*/, std::span<double> /*grad*/) const {
        throw CapabilityError(name() + " does not provide input gradients");
    }

    /// Column-batched losses (and gradients if `grads` is non-null). Columns of
    /// `inputs` are received vectors. Override for a faster batched path.
    virtual void batch_loss(const Eigen::MatrixXd& inputs, std::span<const std::uint8_t> target, double sigma2,
                            Eigen::VectorXd& losses, Eigen::MatrixXd* grads) const {
        const auto n = inputs.rows();
        losses.resize(inputs.cols());
        if (grads) grads->resize(n, inputs.cols());
        std::vector<double> col(static_cast<std::size_t>(n)), g(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
            for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = inputs(i, j);
            if (grads) {
                losses(j) = loss_gradient(col, target, sigma2, g);
                for (Eigen::Index i = 0; i < n; ++i) (*grads)(i, j) = g[static_cast<std::size_t>(i)];
            } else {
                losses(j) = loss(col, target, sigma2);
            }
        }
    }

protected:
    void check_length(std::span<const double> y) const {
        if (y.size() != code_->n()) throw InputError(name() + ": input length != n");
    }

    DecodeResult finish(std::vector<double> soft, std::size_t iterations) const {
        DecodeResult r;
        r.bits_hat = hard_decision(soft);
        r.soft = std::move(soft);
        r.iterations_used = iterations;
        r.converged = code_->is_codeword(r.bits_hat);
        return r;
    }

private:
    std::shared_ptr<const LinearCode> code_;
};

using DecoderHandle = std::shared_ptr<const Decoder>;

}  // namespace decrob
