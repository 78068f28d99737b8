#pragma once

// Finite-sample bounds for the universal objective and the PCA direction,
// plus a known-population simulation to check their coverage.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "decrob/errors.hpp"
#include "decrob/random.hpp"

namespace decrob {

namespace concentration_detail {
inline void check_eta(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw InputError("eta must lie in (0, 1)");
}
inline void check_n(double samples) {
    if (!(samples >= 1.0)) throw InputError("need at least one sample");
}
}  // namespace concentration_detail

/// |F_hat - F| <= C sqrt(log(4/eta) / (2N)).
inline double hoeffding_objective_bound(double c, double eta, double samples) {
    concentration_detail::check_eta(eta);
    concentration_detail::check_n(samples);
    if (c < 0) throw InputError("loss bound C must be non-negative");
    return c * std::sqrt(std::log(4.0 / eta) / (2.0 * samples));
}

/// ||Sigma_hat - Sigma||_op <= 4 sqrt(2) L^2 sqrt(log(4n/eta) / N).
inline double matrix_bound(double l, double eta, double samples, double dim) {
    concentration_detail::check_eta(eta);
    concentration_detail::check_n(samples);
    if (!(dim >= 1.0)) throw InputError("dimension must be >= 1");
    return 4.0 * std::sqrt(2.0) * l * l * std::sqrt(std::log(4.0 * dim / eta) / samples);
}

/// sin angle(u_hat, u) <= matrix_bound / Delta.
inline double davis_kahan_bound(double l, double eta, double samples, double dim, double delta) {
    if (!(delta > 0.0)) throw InputError("eigengap Delta must be positive");
    return matrix_bound(l, eta, samples, dim) / delta;
}

struct ConcentrationReport {
    double C = 0, L = 0, Delta = 0, N = 0, eta = 0;
    std::size_t n = 0;
    double bound_objective = 0;
    double bound_sigma_op = 0;
    double bound_sin_angle = 0;
};

inline ConcentrationReport concentration_report(double c, double l, double delta, double samples, double eta,
                                                std::size_t dim) {
    ConcentrationReport r{c, l, delta, samples, eta, dim, 0, 0, 0};
    r.bound_objective = hoeffding_objective_bound(c, eta, samples);
    r.bound_sigma_op = matrix_bound(l, eta, samples, static_cast<double>(dim));
    r.bound_sin_angle = davis_kahan_bound(l, eta, samples, static_cast<double>(dim), delta);
    return r;
}

/// Known population: loss = C * Bernoulli(p); q = sqrt(lambda_J / w_J) s e_J with
/// J ~ w (w proportional to lambda) and s a random sign. Then Sigma_q = diag(lambda),
/// ||q||^2 = sum(lambda) exactly, u_1 = e_1.
struct SyntheticSpec {
    std::vector<double> lambda{1.0, 0.0};  // non-increasing, lambda_1 > lambda_2
    double loss_bound = 1.0;
    double loss_mean = 0.3;  // p in [0, 1]
    std::size_t samples = 100;
    double eta = 0.05;

    double gradient_bound() const { return std::sqrt(std::accumulate(lambda.begin(), lambda.end(), 0.0)); }
    double eigengap() const { return lambda.size() > 1 ? lambda[0] - lambda[1] : lambda[0]; }

    void validate() const {
        if (lambda.empty()) throw InputError("synthetic spec: empty spectrum");
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            if (!(lambda[i] >= 0)) throw InputError("synthetic spec: negative eigenvalue");
            if (i && lambda[i] > lambda[i - 1]) throw InputError("synthetic spec: spectrum must be non-increasing");
        }
        if (!(eigengap() > 0)) throw InputError("synthetic spec: zero eigengap");
        if (!(loss_mean >= 0 && loss_mean <= 1)) throw InputError("synthetic spec: loss mean outside [0,1]");
        concentration_detail::check_eta(eta);
        if (samples == 0) throw InputError("synthetic spec: N = 0");
    }
};

struct CoverageReport {
    ConcentrationReport bounds;
    std::size_t repetitions = 0;
    std::size_t violations_objective = 0;
    std::size_t violations_sigma = 0;
    std::size_t violations_angle = 0;
    std::size_t violations_any = 0;
    double max_objective_error = 0;
    double max_sigma_error = 0;
    double max_sin_angle = 0;

    double rate_objective() const { return rate(violations_objective); }
    double rate_sigma() const { return rate(violations_sigma); }
    double rate_angle() const { return rate(violations_angle); }
    double rate_any() const { return rate(violations_any); }

private:
    double rate(std::size_t v) const { return repetitions ? static_cast<double>(v) / static_cast<double>(repetitions) : 0; }
};

inline CoverageReport validate_concentration(const SyntheticSpec& spec, std::size_t repetitions, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = spec.lambda.size();
    const auto dim = static_cast<Eigen::Index>(n);
    CoverageReport rep;
    rep.repetitions = repetitions;
    rep.bounds = concentration_report(spec.loss_bound, spec.gradient_bound(), spec.eigengap(),
                                      static_cast<double>(spec.samples), spec.eta, n);
    const double trace = spec.gradient_bound() * spec.gradient_bound();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t j = 0; j < n; ++j) sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = spec.lambda[j];
    const double f_true = spec.loss_bound * spec.loss_mean;

    for (std::size_t r = 0; r < repetitions; ++r) {
        Engine eng = make_engine(StreamId{seed, r}.child(0x636f6e63));
        std::discrete_distribution<std::size_t> axis(spec.lambda.begin(), spec.lambda.end());
        std::bernoulli_distribution bern(spec.loss_mean), sign(0.5);
        double loss_sum = 0;
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.samples), dim);
        for (std::size_t i = 0; i < spec.samples; ++i) {
            loss_sum += bern(eng) ? spec.loss_bound : 0.0;
            const std::size_t j = axis(eng);
            // lambda_j / w_j = trace
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (sign(eng) ? 1.0 : -1.0) * std::sqrt(trace);
        }
        const double obj_err = std::abs(loss_sum / static_cast<double>(spec.samples) - f_true);
        const Eigen::MatrixXd sigma_hat = q.transpose() * q / static_cast<double>(spec.samples);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diff(sigma_hat - sigma, Eigen::EigenvaluesOnly);
        const double op_err = diff.eigenvalues().cwiseAbs().maxCoeff();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_hat);
        const Eigen::VectorXd u_hat = es.eigenvectors().col(dim - 1);
        const double cos = std::min(1.0, std::abs(u_hat(0)));
        const double sin = std::sqrt(std::max(0.0, 1.0 - cos * cos));

        const bool v1 = obj_err > rep.bounds.bound_objective;
        const bool v2 = op_err > rep.bounds.bound_sigma_op;
        const bool v3 = sin > rep.bounds.bound_sin_angle;
        rep.violations_objective += v1;
        rep.violations_sigma += v2;
        rep.violations_angle += v3;
        rep.violations_any += v1 || v2 || v3;
        rep.max_objective_error = std::max(rep.max_objective_error, obj_err);
        rep.max_sigma_error = std::max(rep.max_sigma_error, op_err);
        rep.max_sin_angle = std::max(rep.max_sin_angle, sin);
    }
    return rep;
}

}  // namespace decrob
