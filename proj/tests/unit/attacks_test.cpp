#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "decrob/attacks.hpp"
#include "decrob/channel.hpp"
#include "decrob/mlp.hpp"
#include "decrob/registry.hpp"

using namespace decrob;

namespace {

/// Decoder stub whose loss is an explicit function of the input.
class ScriptedLossDecoder final : public Decoder {
public:
    using Fn = std::function<double(const Eigen::VectorXd&, const BitVector&, Eigen::VectorXd*)>;
    ScriptedLossDecoder(std::shared_ptr<const LinearCode> code, Fn fn) : Decoder(std::move(code)), fn_(std::move(fn)) {}
    std::string name() const override { return "scripted"; }
    Capabilities capabilities() const override { return {true, true}; }
    DecodeResult decode(std::span<const double> y, double) const override {
        return finish(std::vector<double>(y.begin(), y.end()), 0);
    }
    void batch_loss(const Eigen::MatrixXd& u, std::span<const std::uint8_t> target, double, Eigen::VectorXd& losses,
                    Eigen::MatrixXd* grads) const override {
        const BitVector t(target.begin(), target.end());
        losses.resize(u.cols());
        if (grads) grads->resize(u.rows(), u.cols());
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
            Eigen::VectorXd g(u.rows());
            losses(j) = fn_(u.col(j), t, grads ? &g : nullptr);
            if (grads) grads->col(j) = g;
        }
    }
    double loss(std::span<const double> y, std::span<const std::uint8_t> t, double) const override {
        return fn_(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())),
                   BitVector(t.begin(), t.end()), nullptr);
    }

private:
    Fn fn_;
};

std::shared_ptr<ScriptedLossDecoder> linear_decoder(std::shared_ptr<const LinearCode> code, Eigen::VectorXd w) {
    return std::make_shared<ScriptedLossDecoder>(code, [w](const Eigen::VectorXd& u, const BitVector&, Eigen::VectorXd* g) {
        if (g) *g = w;
        return w.dot(u);
    });
}

SmoothingConfig smoothing(std::size_t m, GradientEstimator e = GradientEstimator::backprop_mc, double nu = 0.1) {
    SmoothingConfig c;
    c.samples = m;
    c.estimator = e;
    c.nu = nu;
    c.loss_clip = 1e9;
    return c;
}

AttackFrame frame_of(const LinearCode& code, double ebno, std::uint64_t seed, std::uint64_t i) {
    const auto snr = SnrContext::from_ebno(ebno, code.rate());
    const auto f = transmit(code, snr, seed, i);
    return AttackFrame{f.received, f.codeword, snr.sigma2, StreamId{seed, i}.child(7)};
}

std::shared_ptr<MlpDecoder> trained_hamming_mlp() {
    static const auto dec = [] {
        const auto code = make_code("hamming_7_4");
        auto m = MlpModel::create(*code, 64, 2, 4);
        TrainConfig cfg;
        cfg.steps = 2000;
        cfg.learning_rate = 1e-2;
        train(m, *code, cfg);
        return make_mlp_decoder(code, std::move(m));
    }();
    return dec;
}

}  // namespace

TEST(ProjectL2, Examples) {
    EXPECT_EQ(project_l2(std::vector<double>{0.1, 0.2}, 1.0), (std::vector<double>{0.1, 0.2}));
    const auto p = project_l2(std::vector<double>{3.0, 4.0}, 1.0);
    EXPECT_NEAR(p[0], 0.6, 1e-15);
    EXPECT_NEAR(p[1], 0.8, 1e-15);
    EXPECT_EQ(project_l2(p, 1.0), p);
    EXPECT_EQ(project_l2(std::vector<double>{1.0, 1.0}, 0.0), (std::vector<double>{0.0, 0.0}));
    EXPECT_THROW(project_l2(std::vector<double>{1.0}, -1.0), InputError);
}

TEST(Budget, SampleWiseAndUniversal) {
    const auto b = EnergyBudget::sample_wise(0.01, std::vector<double>{3.0, 4.0});
    EXPECT_DOUBLE_EQ(b.epsilon, 0.05);
    EXPECT_DOUBLE_EQ(EnergyBudget::universal(0.1, 8, 1.0).epsilon, 0.4);
}

TEST(RandomBaseline, ExactNormZeroMeanAndIsotropy) {
    const std::size_t n = 10, draws = 10000;
    const double eps = 0.3;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = 1.0 - 0.2 * static_cast<double>(i);
    double abs_cos = 0, abs_cos2 = 0;
    for (std::uint64_t t = 0; t < draws; ++t) {
        const auto d = random_baseline(n, eps, {5, t});
        EXPECT_NEAR(l2_norm(d), eps, 1e-12);
        const Eigen::Map<const Eigen::VectorXd> v(d.data(), static_cast<Eigen::Index>(n));
        mean += v;
        const double c = std::abs(v.dot(y)) / (eps * y.norm());
        abs_cos += c;
        abs_cos2 += c * c;
    }
    mean /= static_cast<double>(draws);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
        EXPECT_LE(std::abs(mean(i)), 4 * eps / std::sqrt(static_cast<double>(draws * n)));
    // |u_1| for u uniform on the sphere: E = Gamma(n/2) / (sqrt(pi) Gamma((n+1)/2)).
    const double expected = std::exp(std::lgamma(n / 2.0) - std::lgamma((n + 1) / 2.0)) / std::sqrt(std::acos(-1.0));
    const double m = abs_cos / draws, sd = std::sqrt(abs_cos2 / draws - m * m);
    EXPECT_NEAR(m, expected, 4 * sd / std::sqrt(static_cast<double>(draws)));
}

TEST(RandomInBall, StaysInside) {
    for (std::uint64_t t = 0; t < 200; ++t) EXPECT_LE(l2_norm(random_in_ball(7, 0.5, {1, t})), 0.5 + 1e-12);
}

TEST(Fgm, LinearLossGivesScaledDirection) {
    const auto code = make_code("hamming_7_4");
    Eigen::VectorXd w(7);
    w << 1, -2, 0.5, 0, 3, -1, 0.25;
    const auto dec = linear_decoder(code, w);
    AttackFrame f{std::vector<double>(7, 1.0), BitVector(7, 0), 1.0, {3, 0}};
    const double eps = 0.2;
    const Eigen::VectorXd expected = eps * w / w.norm();
    // Exact with backprop, within 2% with the Stein estimator.
    const auto a = fgm_attack(*dec, f, eps, smoothing(16));
    const auto b = fgm_attack(*dec, f, eps, smoothing(100000, GradientEstimator::stein, 0.5));
    for (Eigen::Index i = 0; i < 7; ++i) {
        EXPECT_NEAR(a.delta[static_cast<std::size_t>(i)], expected(i), 1e-14);
        EXPECT_NEAR(b.delta[static_cast<std::size_t>(i)], expected(i), 0.02 * eps);
    }
    EXPECT_NEAR(l2_norm(a.delta), eps, 1e-14);
    EXPECT_NEAR(l2_norm(b.delta), eps, 1e-12);
    EXPECT_FALSE(a.degenerate_gradient);
}

TEST(Fgm, ConstantLossIsFlaggedDegenerate) {
    const auto code = make_code("hamming_7_4");
    const auto dec = std::make_shared<ScriptedLossDecoder>(code, [](const Eigen::VectorXd& u, const BitVector&, Eigen::VectorXd* g) {
        if (g) *g = Eigen::VectorXd::Zero(u.size());
        return 0.7;
    });
    AttackFrame f{std::vector<double>(7, 1.0), BitVector(7, 0), 1.0, {3, 0}};
    for (auto e : {GradientEstimator::backprop_mc, GradientEstimator::stein}) {
        const auto p = fgm_attack(*dec, f, 0.5, smoothing(64, e));
        EXPECT_TRUE(p.degenerate_gradient);
        EXPECT_EQ(l2_norm(p.delta), 0.0);
    }
}

TEST(Fgm, NormIsEpsilonOnMlp) {
    const auto dec = trained_hamming_mlp();
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto f = frame_of(dec->code(), 3.0, 2, i);
        const double eps = EnergyBudget::sample_wise(0.05, f.y).epsilon;
        const auto p = fgm_attack(*dec, f, eps, smoothing(32));
        if (!p.degenerate_gradient) {
            EXPECT_NEAR(l2_norm(p.delta), eps, 1e-12);
        }
    }
}

TEST(Pgd, StepSize) {
    // 1.2 * eps / T with the default T = 20.
    const PgdConfig cfg;
    EXPECT_NEAR(cfg.step_scale * 0.1 / static_cast<double>(cfg.iterations), 0.006, 1e-15);
}

TEST(Pgd, ConcaveQuadraticConvergesNearOptimum) {
    const auto code = make_code("hamming_7_4");
    const std::vector<double> y(7, 1.0);
    Eigen::VectorXd star(7);
    star << 0.1, -0.05, 0.0, 0.08, 0.02, -0.1, 0.03;
    Eigen::VectorXd center = star;
    center.array() += 1.0;
    const auto dec = std::make_shared<ScriptedLossDecoder>(code, [center](const Eigen::VectorXd& u, const BitVector&, Eigen::VectorXd* g) {
        if (g) *g = -2.0 * (u - center);
        return 5.0 - (u - center).squaredNorm();
    });
    const double eps = 0.3;
    AttackFrame f{y, BitVector(7, 0), 1.0, {9, 0}};
    const auto p = pgd_attack(*dec, f, eps, smoothing(64, GradientEstimator::backprop_mc, 1e-4));
    const double step = 1.2 * eps / 20;
    double dist = 0;
    for (std::size_t i = 0; i < 7; ++i) dist += std::pow(p.delta[i] - star(static_cast<Eigen::Index>(i)), 2);
    EXPECT_LE(std::sqrt(dist), step);
    EXPECT_LE(l2_norm(p.delta), eps + 1e-12);
}

TEST(Pgd, AtLeastAsStrongAsFgmOnMlp) {
    const auto dec = trained_hamming_mlp();
    const auto cfg = [] {
        auto c = smoothing(32);
        c.loss_clip = 10.0;
        return c;
    }();
    auto eval = cfg;
    eval.samples = 128;
    const std::size_t frames = 500;
    double sum = 0, sum2 = 0;
    for (std::uint64_t i = 0; i < frames; ++i) {
        const auto f = frame_of(dec->code(), 3.0, 6, i);
        const double eps = EnergyBudget::sample_wise(0.05, f.y).epsilon;
        const auto pg = pgd_attack(*dec, f, eps, cfg);
        const auto fg = fgm_attack(*dec, f, eps, cfg);
        const DecoderLoss loss(*dec, f.target, f.sigma2);
        const StreamId s{99, i};
        const double d = smoothed_loss(loss, shifted(f.y, pg.delta), eval, s) - smoothed_loss(loss, shifted(f.y, fg.delta), eval, s);
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / frames, se = std::sqrt((sum2 / frames - mean * mean) / frames);
    EXPECT_GT(mean + 2 * se, 0.0) << "mean " << mean << " se " << se;
}

TEST(UapGrad, IdenticalFramesMatchSingleFrame) {
    const auto code = make_code("hamming_7_4");
    Eigen::VectorXd w(7);
    w << 0.1, 0.2, -0.1, 0.05, 0, 0.3, -0.2;
    const auto dec = linear_decoder(code, w);
    const AttackFrame f{std::vector<double>(7, 1.0), BitVector(7, 0), 1.0, {1, 0}};
    const auto budget = EnergyBudget{0.1, 0.25};
    const auto single = uap_grad_attack(*dec, {f}, budget, smoothing(8));
    const auto many = uap_grad_attack(*dec, std::vector<AttackFrame>(6, f), budget, smoothing(8));
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(single.delta[i], many.delta[i], 1e-15);
    // 50 raw steps of 0.05 w overshoot the ball, ending at eps w / ||w||.
    for (std::size_t i = 0; i < 7; ++i)
        EXPECT_NEAR(single.delta[i], budget.epsilon * w(static_cast<Eigen::Index>(i)) / w.norm(), 1e-12);
}

TEST(UapGrad, ImprovesEmpiricalObjective) {
    const auto dec = trained_hamming_mlp();
    std::vector<AttackFrame> frames;
    for (std::uint64_t i = 0; i < 200; ++i) frames.push_back(frame_of(dec->code(), 3.0, 8, i));
    const auto budget = EnergyBudget::universal(0.1, 7, frames[0].sigma2);
    auto cfg = smoothing(32);
    cfg.loss_clip = 10.0;
    UapGradConfig u;
    u.normalized_step = true;
    const auto a = uap_grad_attack(*dec, frames, budget, cfg, u, 3);
    EXPECT_LE(l2_norm(a.delta), budget.epsilon + 1e-12);
    auto eval = cfg;
    eval.samples = 256;
    EXPECT_GE(empirical_objective(*dec, frames, a.delta, eval),
              empirical_objective(*dec, frames, std::vector<double>(7, 0.0), eval));
}

TEST(TopEigen, MatchesDenseSolverOnRandomBatches) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index n = 5 + t, N = 20 + 9 * t;
        Eigen::MatrixXd q(N, n);
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < n; ++j) q(i, j) = g(rng) * (1.0 + (j == 0 ? 0.5 : 0.0));
        const Eigen::MatrixXd s = q.transpose() * q / static_cast<double>(N);
        const auto top = top_eigenvector(s, static_cast<std::uint64_t>(t));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        const double l1 = es.eigenvalues()(n - 1);
        EXPECT_GE(top.vector.dot(s * top.vector), (1 - 1e-6) * l1);
        EXPECT_NEAR(top.vector.norm(), 1.0, 1e-12);
        EXPECT_NEAR(top.second_value, es.eigenvalues()(n - 2), 1e-6 * l1);
    }
}

TEST(TopEigen, RankOneAndClusters) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 6);
    for (int i = 0; i < 4; ++i) q(i, 0) = 0.5 + i;
    auto top = top_eigenvector(q.transpose() * q / 4.0);
    EXPECT_NEAR(std::abs(top.vector(0)), 1.0, 1e-12);

    // Two orthogonal clusters with norm ratio 3:1.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.05);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(6), v = Eigen::VectorXd::Zero(6);
    u << 1, 1, 0, 0, 1, -1;
    u.normalize();
    v << 1, -1, 1, 1, 0, 0;
    v.normalize();
    Eigen::MatrixXd c(200, 6);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd row = (i % 2 ? 3.0 * u : 1.0 * v) * (i % 4 < 2 ? 1.0 : -1.0);
        for (int j = 0; j < 6; ++j) row(j) += g(rng);
        c.row(i) = row.transpose();
    }
    top = top_eigenvector(c.transpose() * c / 200.0);
    EXPECT_GT(std::abs(top.vector.dot(u)), 0.99);
}

TEST(TopEigen, DegenerateSpectrumFallsBackAndReportsGap) {
    const auto top = top_eigenvector(Eigen::MatrixXd::Identity(5, 5) * 2.0, 0, 1e-10, 50);
    EXPECT_NEAR(top.value, 2.0, 1e-12);
    EXPECT_NEAR(top.eigengap(), 0.0, 1e-12);
}

TEST(UapPca, RankOneGradientsGiveSignedAxis) {
    const auto code = make_code("hamming_7_4");
    // Loss (1 + |t|) u_0: all gradients are positive multiples of e_0.
    const auto dec = std::make_shared<ScriptedLossDecoder>(code, [](const Eigen::VectorXd& u, const BitVector& t, Eigen::VectorXd* g) {
        double c = 1;
        for (auto b : t) c += b;
        if (g) {
            *g = Eigen::VectorXd::Zero(u.size());
            (*g)(0) = c;
        }
        return c * u(0);
    });
    std::vector<AttackFrame> frames;
    for (std::uint64_t i = 0; i < 10; ++i) {
        BitVector t(7, 0);
        for (std::uint64_t j = 0; j < i % 7; ++j) t[j] = 1;
        frames.push_back({std::vector<double>(7, 1.0), t, 1.0, {2, i}});
    }
    const EnergyBudget budget{0.01, 0.3};
    for (auto e : {GradientEstimator::backprop_mc, GradientEstimator::stein}) {
        const auto a = uap_pca_attack(*dec, frames, budget, smoothing(20000, e, 0.3));
        EXPECT_NEAR(a.delta[0], 0.3, 1e-3) << to_string(e);
        EXPECT_LE(l2_norm(a.delta), budget.epsilon + 1e-12);
    }
}

TEST(UapPca, SurrogateBeatsRandomDirections) {
    const auto dec = trained_hamming_mlp();
    std::vector<AttackFrame> frames;
    for (std::uint64_t i = 0; i < 64; ++i) frames.push_back(frame_of(dec->code(), 2.0, 4, i));
    auto cfg = smoothing(64, GradientEstimator::stein, 0.1);
    cfg.loss_clip = 10.0;
    const auto batch = collect_gradients(*dec, frames, cfg);
    const auto a = uap_pca_attack(*dec, frames, EnergyBudget::universal(0.1, 7, frames[0].sigma2), cfg);
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(a.delta.data(), 7);
    d.normalize();
    const double beta = beta_bound(cfg);
    auto surrogate = [&](const Eigen::VectorXd& dir) { return (batch.q * dir).squaredNorm() / (2 * beta * 64.0); };
    const double best = surrogate(d);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd r(7);
        for (int i = 0; i < 7; ++i) r(i) = g(rng);
        r.normalize();
        EXPECT_GE(best, surrogate(r));
    }
}

TEST(Artifact, RoundTripIsExact) {
    AttackArtifact a;
    a.kind = AttackKind::uap_pca;
    a.code_id = "ldpc_49_24";
    a.budget = {0.01, 0.0857};
    a.source_decoder = "mlp";
    a.seed = 123;
    a.params = {{"nu", "0.1"}, {"eigengap", "1.5e-3"}};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 0.01);
    for (int i = 0; i < 49; ++i) a.delta.push_back(g(rng));
    a.delta = project_l2(a.delta, a.budget.epsilon);
    const auto path = (std::filesystem::temp_directory_path() / "decrob_artifact_test.txt").string();
    a.save(path);
    const auto b = AttackArtifact::load(path);
    std::filesystem::remove(path);
    EXPECT_EQ(b.kind, a.kind);
    EXPECT_EQ(b.code_id, a.code_id);
    EXPECT_EQ(b.budget.alpha, a.budget.alpha);
    EXPECT_EQ(b.budget.epsilon, a.budget.epsilon);
    EXPECT_EQ(b.source_decoder, a.source_decoder);
    EXPECT_EQ(b.seed, a.seed);
    EXPECT_EQ(b.params, a.params);
    EXPECT_EQ(b.delta, a.delta);
    EXPECT_EQ(b.serialize(), a.serialize());
}

TEST(Artifact, ParseErrorsCarryLines) {
    const std::string good = "decrob-attack 1\nkind uap_grad\ncode c\nalpha 0.1\nepsilon 1\nsource_decoder mlp\nseed 1\nn 2\n0.5\n-0.5\n";
    EXPECT_NO_THROW(AttackArtifact::parse(good));
    auto expect_line = [](const std::string& text, std::size_t line) {
        try {
            AttackArtifact::parse(text);
            FAIL() << "expected ParseError";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), line) << e.what();
        }
    };
    expect_line("not an artifact\n", 1);
    expect_line("decrob-attack 1\nkind laser\n", 2);
    expect_line("decrob-attack 1\nkind pgd\nalpha x\n", 3);
    expect_line("decrob-attack 1\nkind pgd\nepsilon 1\nn 2\n0.1\n", 5);
    expect_line(good + "0.3\n", 11);
    // Exceeding the stated epsilon is rejected.
    std::string big = good;
    big.replace(big.find("0.5\n-0.5"), 8, "0.9\n-0.9");
    EXPECT_THROW(AttackArtifact::parse(big), ParseError);
}

TEST(BudgetFuzz, NoAttackExceedsEpsilon) {
    const auto dec = trained_hamming_mlp();
    const auto& code = dec->code();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> log_alpha(-4.0, 0.0);
    std::uniform_real_distribution<double> snr(0.0, 8.0);
    auto cfg = smoothing(8);
    cfg.loss_clip = 10.0;
    PgdConfig pgd;
    pgd.iterations = 5;
    UapGradConfig u;
    u.batches = 5;
    const AttackKind kinds[] = {AttackKind::random, AttackKind::fgm, AttackKind::pgd, AttackKind::uap_grad, AttackKind::uap_pca};
    double worst = -1;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto kind = kinds[t % 5];
        const double alpha = std::pow(10.0, log_alpha(rng));
        cfg.estimator = t % 2 ? GradientEstimator::stein : GradientEstimator::backprop_mc;
        const auto f = frame_of(code, snr(rng), 1000 + t, t);
        double eps;
        std::vector<double> delta;
        if (is_universal(kind)) {
            std::vector<AttackFrame> frames;
            for (std::uint64_t i = 0; i < 4; ++i) frames.push_back(frame_of(code, 4.0, t, i));
            const auto budget = EnergyBudget::universal(alpha, 7, frames[0].sigma2);
            eps = budget.epsilon;
            delta = kind == AttackKind::uap_grad ? uap_grad_attack(*dec, frames, budget, cfg, u, t).delta
                                                 : uap_pca_attack(*dec, frames, budget, cfg, t).delta;
        } else {
            eps = EnergyBudget::sample_wise(alpha, f.y).epsilon;
            delta = perturb(kind, *dec, f, eps, cfg, pgd).delta;
        }
        ASSERT_LE(l2_norm(delta), eps + 1e-12) << to_string(kind) << " t=" << t;
        worst = std::max(worst, l2_norm(delta) - eps);
    }
    EXPECT_LE(worst, 1e-12);
}
