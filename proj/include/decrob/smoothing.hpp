#pragma once

// Gaussian-smoothed losses g(u) = E[min(l(u + V), C)], V ~ N(0, nu^2 I),
// and their gradient estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decrob/decoder.hpp"
#include "decrob/errors.hpp"
#include "decrob/random.hpp"

namespace decrob {

enum class GradientEstimator { backprop_mc, stein };

inline std::string to_string(GradientEstimator e) { return e == GradientEstimator::stein ? "stein" : "backprop_mc"; }

inline GradientEstimator parse_estimator(const std::string& s) {
    if (s == "stein") return GradientEstimator::stein;
    if (s == "backprop_mc" || s == "backprop") return GradientEstimator::backprop_mc;
    throw InputError("unknown estimator: " + s);
}

struct SmoothingConfig {
    double nu = 0.1;
    std::size_t samples = 128;
    std::uint64_t seed = 0;
    GradientEstimator estimator = GradientEstimator::backprop_mc;
    double loss_clip = 10.0;
    bool antithetic = true;  // Stein estimator only

    void validate() const {
        if (!(nu > 0) || !std::isfinite(nu)) throw InputError("smoothing: nu must be positive");
        if (samples == 0) throw InputError("smoothing: need at least one sample");
        if (!(loss_clip > 0)) throw InputError("smoothing: loss clip must be positive");
    }
};

struct GradientEstimate {
    Eigen::VectorXd gradient;
    std::size_t samples_used = 0;
    GradientEstimator estimator = GradientEstimator::backprop_mc;
    Eigen::VectorXd variance;  ///< per-coordinate sample variance of the averaged units
    std::size_t units = 0;     ///< independent units averaged (pairs for antithetic Stein)
    double mean_loss = 0.0;    ///< clipped loss averaged over the same samples

    /// Standard error of gradient coordinate i.
    double standard_error(Eigen::Index i) const {
        return units > 1 ? std::sqrt(variance(i) / static_cast<double>(units)) : 0.0;
    }
};

/// A scalar loss over R^n evaluated on column batches.
class LossModel {
public:
    virtual ~LossModel() = default;
    virtual std::size_t dim() const = 0;
    virtual bool differentiable() const = 0;
    /// Losses of each column of `u`; gradients as columns when `grads` is non-null.
    virtual void evaluate(const Eigen::MatrixXd& u, Eigen::VectorXd& losses, Eigen::MatrixXd* grads) const = 0;
};

/// l(u) = BCE(f(u), target) of a decoder.
class DecoderLoss final : public LossModel {
public:
    DecoderLoss(const Decoder& decoder, std::span<const std::uint8_t> target, double sigma2)
        : decoder_(decoder), target_(target.begin(), target.end()), sigma2_(sigma2) {
        if (target_.size() != decoder.code().n()) throw InputError("decoder loss: target length != n");
    }
    std::size_t dim() const override { return decoder_.code().n(); }
    bool differentiable() const override { return decoder_.capabilities().differentiable; }
    void evaluate(const Eigen::MatrixXd& u, Eigen::VectorXd& losses, Eigen::MatrixXd* grads) const override {
        decoder_.batch_loss(u, target_, sigma2_, losses, grads);
    }

private:
    const Decoder& decoder_;
    BitVector target_;
    double sigma2_;
};

/// Loss given by plain functions; the gradient function is optional.
class FunctionLoss final : public LossModel {
public:
    using Value = std::function<double(const Eigen::VectorXd&)>;
    using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    FunctionLoss(std::size_t dim, Value value, Gradient gradient = {})
        : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)) {}
    std::size_t dim() const override { return dim_; }
    bool differentiable() const override { return static_cast<bool>(gradient_); }
    void evaluate(const Eigen::MatrixXd& u, Eigen::VectorXd& losses, Eigen::MatrixXd* grads) const override {
        losses.resize(u.cols());
        if (grads) {
            if (!gradient_) throw CapabilityError("loss has no gradient");
            grads->resize(u.rows(), u.cols());
        }
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
            const Eigen::VectorXd col = u.col(j);
            losses(j) = value_(col);
            if (grads) grads->col(j) = gradient_(col);
        }
    }

private:
    std::size_t dim_;
    Value value_;
    Gradient gradient_;
};

namespace smoothing_detail {

inline constexpr Eigen::Index kChunk = 2048;

/// Fills `v` (n x cols) with N(0, nu^2) draws from `eng`, column by column.
inline void draw(Engine& eng, double nu, Eigen::MatrixXd& v) {
    std::normal_distribution<double> g(0.0, nu);
    for (Eigen::Index j = 0; j < v.cols(); ++j)
        for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = g(eng);
}

inline Eigen::VectorXd as_vector(std::span<const double> u) {
    return Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

/// Welford accumulator over vector-valued units.
struct Moments {
    Eigen::VectorXd mean, m2;
    std::size_t count = 0;
    explicit Moments(Eigen::Index n) : mean(Eigen::VectorXd::Zero(n)), m2(Eigen::VectorXd::Zero(n)) {}
    void add(const Eigen::VectorXd& x) {
        ++count;
        const Eigen::VectorXd d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d.cwiseProduct(x - mean);
    }
    Eigen::VectorXd variance() const {
        return count > 1 ? Eigen::VectorXd(m2 / static_cast<double>(count - 1)) : Eigen::VectorXd::Zero(mean.size());
    }
};

}  // namespace smoothing_detail

/// Monte Carlo estimate of g(u) with M independent draws.
inline double smoothed_loss(const LossModel& loss, std::span<const double> u, const SmoothingConfig& cfg,
                            StreamId stream) {
    cfg.validate();
    if (u.size() != loss.dim()) throw InputError("smoothed_loss: dimension mismatch");
    using namespace smoothing_detail;
    const auto n = static_cast<Eigen::Index>(u.size());
    const Eigen::VectorXd base = as_vector(u);
    Engine eng = make_engine(stream);
    double acc = 0.0;
    Eigen::VectorXd losses;
    for (std::size_t done = 0; done < cfg.samples;) {
        const auto cols = std::min<Eigen::Index>(kChunk, static_cast<Eigen::Index>(cfg.samples - done));
        Eigen::MatrixXd v(n, cols);
        draw(eng, cfg.nu, v);
        v.colwise() += base;
        loss.evaluate(v, losses, nullptr);
        for (Eigen::Index j = 0; j < cols; ++j) acc += std::min(losses(j), cfg.loss_clip);
        done += static_cast<std::size_t>(cols);
    }
    return acc / static_cast<double>(cfg.samples);
}

/// Average of analytic gradients of the clipped loss at u + V_m.
inline GradientEstimate grad_backprop_mc(const LossModel& loss, std::span<const double> u, const SmoothingConfig& cfg,
                                         StreamId stream) {
    cfg.validate();
    if (!loss.differentiable()) throw CapabilityError("backprop estimator needs an input gradient");
    if (u.size() != loss.dim()) throw InputError("grad_backprop_mc: dimension mismatch");
    using namespace smoothing_detail;
    const auto n = static_cast<Eigen::Index>(u.size());
    const Eigen::VectorXd base = as_vector(u);
    Engine eng = make_engine(stream);
    Moments mom(n);
    double loss_acc = 0.0;
    Eigen::VectorXd losses;
    Eigen::MatrixXd grads;
    for (std::size_t done = 0; done < cfg.samples;) {
        const auto cols = std::min<Eigen::Index>(kChunk, static_cast<Eigen::Index>(cfg.samples - done));
        Eigen::MatrixXd v(n, cols);
        draw(eng, cfg.nu, v);
        v.colwise() += base;
        loss.evaluate(v, losses, &grads);
        for (Eigen::Index j = 0; j < cols; ++j) {
            // Above the clip the clipped loss is flat.
            if (losses(j) > cfg.loss_clip) grads.col(j).setZero();
            loss_acc += std::min(losses(j), cfg.loss_clip);
            mom.add(grads.col(j));
        }
        done += static_cast<std::size_t>(cols);
    }
    GradientEstimate est;
    est.gradient = mom.mean;
    est.variance = mom.variance();
    est.units = mom.count;
    est.samples_used = cfg.samples;
    est.estimator = GradientEstimator::backprop_mc;
    est.mean_loss = loss_acc / static_cast<double>(cfg.samples);
    return est;
}

/// Loss-only estimate (1/nu^2) E[min(l(u+V), C) V]. With antithetic pairs each
/// unit is (l(u+V) - l(u-V)) V / (2 nu^2); an odd M is rounded up to even.
inline GradientEstimate grad_stein(const LossModel& loss, std::span<const double> u, const SmoothingConfig& cfg,
                                   StreamId stream) {
    cfg.validate();
    if (u.size() != loss.dim()) throw InputError("grad_stein: dimension mismatch");
    using namespace smoothing_detail;
    const auto n = static_cast<Eigen::Index>(u.size());
    const Eigen::VectorXd base = as_vector(u);
    const double inv_nu2 = 1.0 / (cfg.nu * cfg.nu);
    const std::size_t units = cfg.antithetic ? (cfg.samples + 1) / 2 : cfg.samples;
    Engine eng = make_engine(stream);
    Moments mom(n);
    double loss_acc = 0.0;
    Eigen::VectorXd losses;
    for (std::size_t done = 0; done < units;) {
        const auto cols = std::min<Eigen::Index>(kChunk, static_cast<Eigen::Index>(units - done));
        Eigen::MatrixXd v(n, cols);
        draw(eng, cfg.nu, v);
        if (cfg.antithetic) {
            Eigen::MatrixXd pts(n, 2 * cols);
            pts.leftCols(cols) = v.colwise() + base;
            pts.rightCols(cols) = (-v).colwise() + base;
            loss.evaluate(pts, losses, nullptr);
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double lp = std::min(losses(j), cfg.loss_clip), lm = std::min(losses(cols + j), cfg.loss_clip);
                loss_acc += lp + lm;
                mom.add(((lp - lm) * 0.5 * inv_nu2) * v.col(j));
            }
        } else {
            loss.evaluate(v.colwise() + base, losses, nullptr);
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double l = std::min(losses(j), cfg.loss_clip);
                loss_acc += l;
                mom.add((l * inv_nu2) * v.col(j));
            }
        }
        done += static_cast<std::size_t>(cols);
    }
    GradientEstimate est;
    est.gradient = mom.mean;
    est.variance = mom.variance();
    est.units = mom.count;
    est.samples_used = cfg.antithetic ? 2 * units : units;
    est.estimator = GradientEstimator::stein;
    est.mean_loss = loss_acc / static_cast<double>(est.samples_used);
    return est;
}

/// Dispatches on cfg.estimator.
inline GradientEstimate estimate_gradient(const LossModel& loss, std::span<const double> u, const SmoothingConfig& cfg,
                                          StreamId stream) {
    return cfg.estimator == GradientEstimator::stein ? grad_stein(loss, u, cfg, stream)
                                                     : grad_backprop_mc(loss, u, cfg, stream);
}

// Decoder conveniences: u = y + delta, loss against `target`.

inline std::vector<double> shifted(std::span<const double> y, std::span<const double> delta) {
    if (y.size() != delta.size()) throw InputError("delta length != n");
    std::vector<double> u(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) u[i] = y[i] + delta[i];
    return u;
}

inline double smoothed_loss(const Decoder& dec, std::span<const double> y, std::span<const double> delta,
                            std::span<const std::uint8_t> target, double sigma2, const SmoothingConfig& cfg,
                            StreamId stream) {
    return smoothed_loss(DecoderLoss(dec, target, sigma2), shifted(y, delta), cfg, stream);
}

inline GradientEstimate grad_backprop_mc(const Decoder& dec, std::span<const double> y, std::span<const double> delta,
                                         std::span<const std::uint8_t> target, double sigma2,
                                         const SmoothingConfig& cfg, StreamId stream) {
    return grad_backprop_mc(DecoderLoss(dec, target, sigma2), shifted(y, delta), cfg, stream);
}

inline GradientEstimate grad_stein(const Decoder& dec, std::span<const double> y, std::span<const double> delta,
                                   std::span<const std::uint8_t> target, double sigma2, const SmoothingConfig& cfg,
                                   StreamId stream) {
    return grad_stein(DecoderLoss(dec, target, sigma2), shifted(y, delta), cfg, stream);
}

/// E|Z^2 - 1| for standard normal Z, by composite Simpson quadrature on [0, 40]
/// split at the kink z = 1.
inline double expected_abs_z2_minus_1() {
    static const double value = [] {
        const double pi = std::acos(-1.0);
        auto f = [pi](double z) { return 2.0 * std::abs(z * z - 1.0) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * pi); };
        auto simpson = [&](double a, double b, int intervals) {
            const double h = (b - a) / intervals;
            double s = f(a) + f(b);
            for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
            return s * h / 3.0;
        };
        return simpson(0.0, 1.0, 20000) + simpson(1.0, 40.0, 200000);
    }();
    return value;
}

/// Smoothness constant (C / nu^2) E|Z^2 - 1| of the smoothed loss.
inline double beta_bound(double loss_clip, double nu) {
    if (!(nu > 0) || !(loss_clip > 0)) throw InputError("beta_bound: nu and C must be positive");
    return loss_clip / (nu * nu) * expected_abs_z2_minus_1();
}

inline double beta_bound(const SmoothingConfig& cfg) { return beta_bound(cfg.loss_clip, cfg.nu); }

}  // namespace decrob
