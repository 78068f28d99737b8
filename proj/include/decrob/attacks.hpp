#pragma once

// L2-bounded perturbations: random baseline, FGM, PGD, UAP-Grad, UAP-PCA.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decrob/decoder.hpp"
#include "decrob/errors.hpp"
#include "decrob/random.hpp"
#include "decrob/smoothing.hpp"

namespace decrob {

enum class AttackKind { none, random, fgm, pgd, uap_grad, uap_pca };

inline std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::none: return "none";
        case AttackKind::random: return "random";
        case AttackKind::fgm: return "fgm";
        case AttackKind::pgd: return "pgd";
        case AttackKind::uap_grad: return "uap_grad";
        case AttackKind::uap_pca: return "uap_pca";
    }
    return "?";
}

inline AttackKind parse_attack(const std::string& s) {
    if (s == "none" || s == "clean") return AttackKind::none;
    if (s == "random") return AttackKind::random;
    if (s == "fgm") return AttackKind::fgm;
    if (s == "pgd") return AttackKind::pgd;
    if (s == "uap_grad" || s == "uap") return AttackKind::uap_grad;
    if (s == "uap_pca") return AttackKind::uap_pca;
    throw InputError("unknown attack: " + s);
}

inline bool is_universal(AttackKind k) { return k == AttackKind::uap_grad || k == AttackKind::uap_pca; }

struct EnergyBudget {
    double alpha = 0.0;
    double epsilon = 0.0;

    /// epsilon = alpha * ||y||.
    static EnergyBudget sample_wise(double alpha, std::span<const double> y) {
        if (!(alpha >= 0)) throw InputError("alpha must be non-negative");
        double s = 0;
        for (double v : y) s += v * v;
        return {alpha, alpha * std::sqrt(s)};
    }

    /// epsilon = alpha * sqrt(n (1 + sigma^2)), the root expected received energy.
    static EnergyBudget universal(double alpha, std::size_t n, double sigma2) {
        if (!(alpha >= 0)) throw InputError("alpha must be non-negative");
        return {alpha, alpha * std::sqrt(static_cast<double>(n) * (1.0 + sigma2))};
    }
};

/// One received frame together with what the attacker optimizes against.
struct AttackFrame {
    std::vector<double> y;
    BitVector target;
    double sigma2 = 1.0;
    StreamId stream;  // randomness owned by this frame's attack
};

struct Perturbation {
    std::vector<double> delta;
    bool degenerate_gradient = false;
    double objective = 0.0;  // smoothed loss estimate at delta, when computed
};

inline double l2_norm(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline std::vector<double> project_l2(std::span<const double> delta, double epsilon) {
    if (!(epsilon >= 0)) throw InputError("project_l2: epsilon must be non-negative");
    std::vector<double> out(delta.begin(), delta.end());
    const double norm = l2_norm(delta);
    if (norm > epsilon) {
        const double s = epsilon / norm;
        for (auto& v : out) v *= s;
    }
    return out;
}

/// Gaussian direction scaled to norm epsilon.
inline std::vector<double> random_baseline(std::size_t n, double epsilon, StreamId stream) {
    Engine eng = make_engine(stream);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> d(n);
    double norm = 0;
    while (norm == 0.0) {
        for (auto& v : d) v = g(eng);
        norm = l2_norm(d);
    }
    for (auto& v : d) v *= epsilon / norm;
    return project_l2(d, epsilon);
}

/// Uniform draw from the epsilon-ball.
inline std::vector<double> random_in_ball(std::size_t n, double epsilon, StreamId stream) {
    auto d = random_baseline(n, epsilon, stream);
    Engine eng = make_engine(stream.child(1));
    const double r = std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(eng), 1.0 / static_cast<double>(n));
    for (auto& v : d) v *= r;
    return d;
}

inline constexpr double kDegenerateGradient = 1e-12;

/// delta = epsilon * g / ||g|| with g the smoothed gradient at delta = 0.
inline Perturbation fgm_attack(const Decoder& dec, const AttackFrame& f, double epsilon, SmoothingConfig cfg) {
    const DecoderLoss loss(dec, f.target, f.sigma2);
    const auto est = estimate_gradient(loss, f.y, cfg, f.stream.child(0x66676d));
    Perturbation p;
    p.delta.assign(f.y.size(), 0.0);
    p.objective = est.mean_loss;
    const double norm = est.gradient.norm();
    if (!(norm >= kDegenerateGradient)) {
        p.degenerate_gradient = true;
        return p;
    }
    for (std::size_t i = 0; i < p.delta.size(); ++i) p.delta[i] = epsilon * est.gradient(static_cast<Eigen::Index>(i)) / norm;
    p.delta = project_l2(p.delta, epsilon);
    return p;
}

struct PgdConfig {
    std::size_t iterations = 20;
    double step_scale = 1.2;       // step = step_scale * epsilon / iterations
    bool normalized_step = true;   // step along g/||g||; false gives delta + step * g
    bool random_start = true;
    double start_radius = 0.1;      // random start drawn from the ball of radius start_radius * epsilon
    bool radius_uniform = false;    // radius ~ U[0, r] instead of uniform in volume
    bool common_samples = true;     // reuse one set of smoothing draws for every iterate
};

/// Projected ascent on the smoothed loss; returns the best iterate by its
/// Monte Carlo loss estimate.
inline Perturbation pgd_attack(const Decoder& dec, const AttackFrame& f, double epsilon, SmoothingConfig cfg,
                               const PgdConfig& pgd = {}) {
    const std::size_t n = f.y.size();
    const DecoderLoss loss(dec, f.target, f.sigma2);
    const double step = pgd.iterations ? pgd.step_scale * epsilon / static_cast<double>(pgd.iterations) : 0.0;
    std::vector<double> delta(n, 0.0);
    if (pgd.random_start) {
        delta = random_baseline(n, pgd.start_radius * epsilon, f.stream.child(0x706764));
        Engine eng = make_engine(f.stream.child(0x706765));
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(eng);
        const double r = pgd.radius_uniform ? u : std::pow(u, 1.0 / static_cast<double>(n));
        for (auto& v : delta) v *= r;
        delta = project_l2(delta, epsilon);
    }
    Perturbation best;
    best.objective = -1.0;
    bool any_gradient = false;
    for (std::size_t t = 0; t <= pgd.iterations; ++t) {
        const auto u = shifted(f.y, delta);
        const StreamId s = f.stream.child(pgd.common_samples ? 0x70676400 : 0x70676400 + t);
        if (t == pgd.iterations) {
            const double v = smoothed_loss(loss, u, cfg, s);
            if (v > best.objective) best = {delta, false, v};
            break;
        }
        const auto est = estimate_gradient(loss, u, cfg, s);
        if (est.mean_loss > best.objective) best = {delta, false, est.mean_loss};
        const double norm = est.gradient.norm();
        if (!(norm >= kDegenerateGradient)) continue;
        any_gradient = true;
        const double scale = pgd.normalized_step ? step / norm : step;
        for (std::size_t i = 0; i < n; ++i) delta[i] += scale * est.gradient(static_cast<Eigen::Index>(i));
        delta = project_l2(delta, epsilon);
    }
    best.degenerate_gradient = !any_gradient;
    return best;
}

/// Mean smoothed loss over frames at a shared delta (common random numbers per frame).
inline double empirical_objective(const Decoder& dec, const std::vector<AttackFrame>& frames,
                                  std::span<const double> delta, const SmoothingConfig& cfg) {
    if (frames.empty()) return 0.0;
    double acc = 0;
    for (const auto& f : frames)
        acc += smoothed_loss(DecoderLoss(dec, f.target, f.sigma2), shifted(f.y, delta), cfg, f.stream.child(0x6f626a));
    return acc / static_cast<double>(frames.size());
}

struct AttackArtifact {
    AttackKind kind = AttackKind::none;
    std::string code_id;
    EnergyBudget budget;
    std::string source_decoder;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params;  // hyperparameters and diagnostics
    std::vector<double> delta;

    std::string serialize() const;
    static AttackArtifact parse(const std::string& text);
    void save(const std::string& path) const;
    static AttackArtifact load(const std::string& path);
};

struct UapGradConfig {
    double learning_rate = 0.05;
    std::size_t batches = 50;
    std::size_t epochs = 1;
    bool normalized_step = false;  // true: step lr * g / ||g||
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Stochastic projected ascent of the empirical objective over mini-batches.
/// Frames are shuffled once per epoch; with fewer frames than batches the
/// mini-batches cycle through the frames.
inline AttackArtifact uap_grad_attack(const Decoder& dec, const std::vector<AttackFrame>& frames,
                                      const EnergyBudget& budget, const SmoothingConfig& cfg,
                                      const UapGradConfig& ucfg = {}, std::uint64_t seed = 0) {
    if (frames.empty()) throw InputError("uap_grad: need at least one frame");
    if (ucfg.batches == 0) throw InputError("uap_grad: need at least one batch");
    const std::size_t n = dec.code().n(), count = frames.size();
    std::vector<double> delta(n, 0.0);
    std::vector<std::size_t> order(count);
    Engine eng = make_engine(StreamId{seed, 0}.child(0x756170));
    const std::size_t per_batch = std::max<std::size_t>(1, (count + ucfg.batches - 1) / ucfg.batches);
    std::size_t updates = 0;
    for (std::size_t epoch = 0; epoch < ucfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), eng);
        for (std::size_t b = 0; b < ucfg.batches; ++b) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < per_batch; ++j) {
                const auto& f = frames[order[(b * per_batch + j) % count]];
                const DecoderLoss loss(dec, f.target, f.sigma2);
                g += estimate_gradient(loss, shifted(f.y, delta), cfg, f.stream.child(0x75670000 + updates)).gradient;
            }
            g /= static_cast<double>(per_batch);
            const double norm = g.norm();
            const double scale = ucfg.normalized_step ? (norm >= kDegenerateGradient ? ucfg.learning_rate / norm : 0.0)
                                                      : ucfg.learning_rate;
            for (std::size_t i = 0; i < n; ++i) delta[i] += scale * g(static_cast<Eigen::Index>(i));
            delta = project_l2(delta, budget.epsilon);
            ++updates;
        }
    }
    AttackArtifact a;
    a.kind = AttackKind::uap_grad;
    a.code_id = dec.code().id();
    a.budget = budget;
    a.source_decoder = dec.name();
    a.seed = seed;
    a.delta = std::move(delta);
    a.params = {{"learning_rate", format_double(ucfg.learning_rate)},
                {"batches", std::to_string(ucfg.batches)},
                {"epochs", std::to_string(ucfg.epochs)},
                {"frames", std::to_string(count)},
                {"normalized_step", ucfg.normalized_step ? "1" : "0"},
                {"nu", format_double(cfg.nu)},
                {"samples", std::to_string(cfg.samples)},
                {"estimator", to_string(cfg.estimator)}};
    return a;
}

/// Per-frame smoothed gradients at delta = 0, stacked as rows.
struct GradientBatch {
    Eigen::MatrixXd q;      // N x n
    Eigen::VectorXd norms;  // ||q_i||
    double max_norm = 0.0;
};

inline GradientBatch collect_gradients(const Decoder& dec, const std::vector<AttackFrame>& frames,
                                       const SmoothingConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(dec.code().n());
    GradientBatch b;
    b.q.resize(static_cast<Eigen::Index>(frames.size()), n);
    b.norms.resize(static_cast<Eigen::Index>(frames.size()));
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        const auto est = estimate_gradient(DecoderLoss(dec, f.target, f.sigma2), f.y, cfg, f.stream.child(0x7163));
        b.q.row(static_cast<Eigen::Index>(i)) = est.gradient.transpose();
        b.norms(static_cast<Eigen::Index>(i)) = est.gradient.norm();
    }
    b.max_norm = frames.empty() ? 0.0 : b.norms.maxCoeff();
    return b;
}

struct TopEigen {
    Eigen::VectorXd vector;  // unit norm
    double value = 0.0;
    double second_value = 0.0;
    std::size_t iterations = 0;
    bool power_converged = false;
    double eigengap() const { return value - second_value; }
};

namespace attack_detail {

/// Power iteration for the dominant eigenpair of a PSD matrix.
inline bool power_iterate(const Eigen::MatrixXd& s, Eigen::VectorXd& v, double& lambda, std::size_t& iters,
                          double tol, std::size_t max_iter) {
    lambda = v.dot(s * v);
    for (iters = 1; iters <= max_iter; ++iters) {
        Eigen::VectorXd w = s * v;
        const double norm = w.norm();
        if (norm == 0.0) {
            lambda = 0.0;
            return true;
        }
        w /= norm;
        const double next = w.dot(s * w);
        const double change = std::min((w - v).norm(), (w + v).norm());
        v = w;
        lambda = next;
        if (change < tol) return true;
    }
    return false;
}

}  // namespace attack_detail

/// Dominant eigenvector of a symmetric PSD matrix: power iteration (tolerance
/// `tol` on the iterate, at most `max_iter` steps), dense fallback otherwise.
/// The second eigenvalue comes from deflation.
inline TopEigen top_eigenvector(const Eigen::MatrixXd& s, std::uint64_t seed = 0, double tol = 1e-10,
                                std::size_t max_iter = 10000) {
    if (s.rows() != s.cols() || s.rows() == 0) throw InputError("top_eigenvector: need a square matrix");
    const auto n = s.rows();
    TopEigen out;
    Engine eng = make_engine(StreamId{seed, 0}.child(0x706f77));
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = g(eng);
    v.normalize();
    double lambda = 0;
    out.power_converged = attack_detail::power_iterate(s, v, lambda, out.iterations, tol, max_iter);
    if (out.power_converged && lambda > 0) {
        out.vector = v;
        out.value = lambda;
        if (n == 1) return out;
        const Eigen::MatrixXd deflated = s - lambda * v * v.transpose();
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = g(eng);
        w -= w.dot(v) * v;
        w.normalize();
        double l2 = 0;
        std::size_t it2 = 0;
        const bool ok = attack_detail::power_iterate(deflated, w, l2, it2, tol, max_iter);
        if (ok) {
            out.second_value = std::max(l2, 0.0);
            return out;
        }
    }
    // Slow or ambiguous convergence: dense solve.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    out.vector = es.eigenvectors().col(n - 1);
    out.value = es.eigenvalues()(n - 1);
    out.second_value = n > 1 ? es.eigenvalues()(n - 2) : 0.0;
    return out;
}

/// Top principal direction of the gradient second-moment matrix, scaled to epsilon,
/// with the sign chosen by the empirical objective.
inline AttackArtifact uap_pca_attack(const Decoder& dec, const std::vector<AttackFrame>& frames,
                                     const EnergyBudget& budget, const SmoothingConfig& cfg, std::uint64_t seed = 0) {
    if (frames.size() < 2) throw InputError("uap_pca: need at least two frames");
    const auto batch = collect_gradients(dec, frames, cfg);
    const Eigen::MatrixXd sigma = batch.q.transpose() * batch.q / static_cast<double>(frames.size());
    const auto top = top_eigenvector(sigma, seed);
    const std::size_t n = dec.code().n();
    AttackArtifact a;
    a.kind = AttackKind::uap_pca;
    a.code_id = dec.code().id();
    a.budget = budget;
    a.source_decoder = dec.name();
    a.seed = seed;
    a.delta.assign(n, 0.0);
    if (top.value > 0) {
        std::vector<double> plus(n), minus(n);
        for (std::size_t i = 0; i < n; ++i) {
            plus[i] = budget.epsilon * top.vector(static_cast<Eigen::Index>(i));
            minus[i] = -plus[i];
        }
        plus = project_l2(plus, budget.epsilon);
        minus = project_l2(minus, budget.epsilon);
        const double fp = empirical_objective(dec, frames, plus, cfg);
        const double fm = empirical_objective(dec, frames, minus, cfg);
        a.delta = fp >= fm ? plus : minus;
        a.params["objective_plus"] = format_double(fp);
        a.params["objective_minus"] = format_double(fm);
    }
    a.params["frames"] = std::to_string(frames.size());
    a.params["lambda1"] = format_double(top.value);
    a.params["lambda2"] = format_double(top.second_value);
    a.params["eigengap"] = format_double(top.eigengap());
    a.params["power_converged"] = top.power_converged ? "1" : "0";
    a.params["power_iterations"] = std::to_string(top.iterations);
    a.params["gradient_norm_max"] = format_double(batch.max_norm);
    a.params["nu"] = format_double(cfg.nu);
    a.params["samples"] = std::to_string(cfg.samples);
    a.params["estimator"] = to_string(cfg.estimator);
    return a;
}

/// Perturbation for one frame. Universal kinds use `universal` (already budgeted).
inline Perturbation perturb(AttackKind kind, const Decoder& dec, const AttackFrame& f, double epsilon,
                            const SmoothingConfig& cfg, const PgdConfig& pgd = {},
                            const std::vector<double>* universal = nullptr) {
    Perturbation p;
    switch (kind) {
        case AttackKind::none: p.delta.assign(f.y.size(), 0.0); return p;
        case AttackKind::random: p.delta = random_baseline(f.y.size(), epsilon, f.stream.child(0x726e64)); return p;
        case AttackKind::fgm: return fgm_attack(dec, f, epsilon, cfg);
        case AttackKind::pgd: return pgd_attack(dec, f, epsilon, cfg, pgd);
        case AttackKind::uap_grad:
        case AttackKind::uap_pca:
            if (!universal || universal->size() != f.y.size()) throw InputError("universal attack needs a delta");
            p.delta = *universal;
            return p;
    }
    return p;
}

// Artifact text format:
//   decrob-attack 1
//   kind <kind> / code <id> / alpha <a> / epsilon <e> / source_decoder <name> / seed <s>
//   param <key> <value>      (zero or more)
//   n <count>
//   <delta_i>                (one per line, %.17g)

inline std::string AttackArtifact::serialize() const {
    std::ostringstream os;
    os << "decrob-attack 1\n";
    os << "kind " << to_string(kind) << "\n";
    os << "code " << code_id << "\n";
    os << "alpha " << format_double(budget.alpha) << "\n";
    os << "epsilon " << format_double(budget.epsilon) << "\n";
    os << "source_decoder " << source_decoder << "\n";
    os << "seed " << seed << "\n";
    for (const auto& [k, v] : params) os << "param " << k << " " << v << "\n";
    os << "n " << delta.size() << "\n";
    for (double d : delta) os << format_double(d) << "\n";
    return os.str();
}

inline AttackArtifact AttackArtifact::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw ParseError(lineno, "bad number '" + s + "'");
        }
        if (used != s.size()) throw ParseError(lineno, "bad number '" + s + "'");
        return v;
    };
    if (!next() || line != "decrob-attack 1") throw ParseError(lineno, "missing artifact header");
    AttackArtifact a;
    bool have_n = false, have_kind = false;
    std::size_t n = 0;
    while (!have_n && next()) {
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw ParseError(lineno, "expected 'key value'");
        const std::string key = line.substr(0, sp), value = line.substr(sp + 1);
        if (key == "kind") {
            try {
                a.kind = parse_attack(value);
            } catch (const InputError& e) {
                throw ParseError(lineno, e.what());
            }
            have_kind = true;
        } else if (key == "code") {
            a.code_id = value;
        } else if (key == "alpha") {
            a.budget.alpha = number(value);
        } else if (key == "epsilon") {
            a.budget.epsilon = number(value);
        } else if (key == "source_decoder") {
            a.source_decoder = value;
        } else if (key == "seed") {
            try {
                a.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw ParseError(lineno, "bad seed");
            }
        } else if (key == "param") {
            const auto sp2 = value.find(' ');
            if (sp2 == std::string::npos) throw ParseError(lineno, "param needs a key and a value");
            a.params[value.substr(0, sp2)] = value.substr(sp2 + 1);
        } else if (key == "n") {
            const double v = number(value);
            if (v < 0 || v != std::floor(v) || v > 1e7) throw ParseError(lineno, "bad length");
            n = static_cast<std::size_t>(v);
            have_n = true;
        } else {
            throw ParseError(lineno, "unknown key '" + key + "'");
        }
    }
    if (!have_kind) throw ParseError(lineno, "missing kind");
    if (!have_n) throw ParseError(lineno, "missing n");
    a.delta.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!next()) throw ParseError(lineno, "expected " + std::to_string(n) + " values, got " + std::to_string(i));
        a.delta.push_back(number(line));
    }
    if (next()) throw ParseError(lineno, "trailing data");
    if (l2_norm(a.delta) > a.budget.epsilon + 1e-12) throw ParseError(lineno, "delta exceeds epsilon");
    return a;
}

inline void AttackArtifact::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write artifact: " + path);
    os << serialize();
}

inline AttackArtifact AttackArtifact::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open artifact: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

}  // namespace decrob
