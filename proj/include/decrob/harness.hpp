#pragma once

// Monte Carlo FER estimation under perturbations, transferability and
// ablation sweeps. Frames are indexed by StreamId{seed, i}, so any two runs
// with the same seed see the same channel realizations.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "decrob/attacks.hpp"
#include "decrob/channel.hpp"
#include "decrob/decoder.hpp"
#include "decrob/smoothing.hpp"
#include "decrob/stats.hpp"

namespace decrob {

struct StopRule {
    std::uint64_t max_frames = 1'000'000;
    std::uint64_t target_errors = 100;  // 0: run exactly max_frames

    static StopRule fixed(std::uint64_t frames) { return {frames, 0}; }
};

struct AttackSetup {
    AttackKind kind = AttackKind::none;
    double alpha = 0.0;
    const Decoder* source = nullptr;  // crafts sample-wise deltas; null: each target attacks itself
    SmoothingConfig smoothing;
    PgdConfig pgd;
    std::vector<double> universal;  // budgeted delta for universal kinds

    std::string source_name(const Decoder& target) const {
        if (kind == AttackKind::none || kind == AttackKind::random) return "-";
        return source ? source->name() : target.name();
    }
};

/// Gradient-free decoders fall back to the Stein estimator.
inline SmoothingConfig smoothing_for(const Decoder& dec, SmoothingConfig cfg) {
    if (!dec.capabilities().differentiable) cfg.estimator = GradientEstimator::stein;
    return cfg;
}

struct PairedRun {
    std::vector<FERStats> stats;                    // per target
    std::vector<std::vector<std::uint8_t>> errors;  // per target, per frame
    std::uint64_t degenerate = 0;                   // frames whose attack gradient vanished
};

namespace harness_detail {

inline void check_code(const LinearCode& code, const Decoder& dec) {
    if (dec.code().fingerprint() != code.fingerprint())
        throw InputError("decoder " + dec.name() + " is bound to a different code than " + code.id());
}

inline constexpr std::uint64_t kAttackTag = 0x61747461;
inline constexpr std::uint64_t kUapTrainTag = 0x75747261;

}  // namespace harness_detail

/// One channel realization per frame index, shared by every target. With a
/// `source` the perturbation is computed once per frame and reused for all
/// targets; without one each target is attacked white-box. Stops after
/// max_frames, or once every target has target_errors frame errors.
inline PairedRun simulate_paired(const LinearCode& code, const SnrContext& snr, std::span<const Decoder* const> targets,
                                 const AttackSetup& attack, const StopRule& stop, std::uint64_t seed,
                                 MessageMode mode = MessageMode::uniform) {
    using namespace harness_detail;
    if (targets.empty()) throw InputError("simulate: no decoders");
    if (stop.max_frames == 0) throw InputError("simulate: frame budget must be positive");
    for (const auto* t : targets) check_code(code, *t);
    if (attack.source) check_code(code, *attack.source);
    if (!(attack.alpha >= 0)) throw InputError("simulate: alpha must be non-negative");
    if (is_universal(attack.kind) && attack.universal.size() != code.n())
        throw InputError("universal perturbation length " + std::to_string(attack.universal.size()) + " != n = " +
                         std::to_string(code.n()));

    const bool active = attack.kind != AttackKind::none && attack.alpha > 0;
    PairedRun run;
    run.stats.resize(targets.size());
    run.errors.resize(targets.size());
    std::vector<double> shifted_y(code.n());

    auto decode_into = [&](std::size_t t, std::span<const double> y, const ReceivedFrame& f) {
        const auto r = targets[t]->decode(y, snr.sigma2);
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < code.n(); ++i) bits += r.bits_hat[i] != f.codeword[i];
        auto& s = run.stats[t];
        ++s.frames;
        s.bits += code.n();
        s.bit_errors += bits;
        s.frame_errors += bits > 0;
        run.errors[t].push_back(bits > 0);
    };
    auto perturbation = [&](const Decoder& src, const AttackFrame& af) {
        const double eps = EnergyBudget::sample_wise(attack.alpha, af.y).epsilon;
        auto p = perturb(attack.kind, src, af, eps, smoothing_for(src, attack.smoothing), attack.pgd,
                         is_universal(attack.kind) ? &attack.universal : nullptr);
        run.degenerate += p.degenerate_gradient;
        return std::move(p.delta);
    };

    for (std::uint64_t i = 0; i < stop.max_frames; ++i) {
        const ReceivedFrame f = transmit(code, snr, StreamId{seed, i}, mode);
        const AttackFrame af{f.received, f.codeword, snr.sigma2, StreamId{seed, i}.child(kAttackTag)};
        const bool shared = !active || attack.source || attack.kind == AttackKind::random || is_universal(attack.kind);
        std::vector<double> delta;
        if (active && shared) delta = perturbation(attack.source ? *attack.source : *targets[0], af);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (!active) {
                decode_into(t, f.received, f);
                continue;
            }
            if (!shared) delta = perturbation(*targets[t], af);
            for (std::size_t k = 0; k < code.n(); ++k) shifted_y[k] = f.received[k] + delta[k];
            decode_into(t, shifted_y, f);
        }
        if (stop.target_errors &&
            std::ranges::all_of(run.stats, [&](const FERStats& s) { return s.frame_errors >= stop.target_errors; }))
            break;
    }
    for (auto& s : run.stats) s.finalize();
    return run;
}

inline FERStats estimate_fer(const Decoder& dec, const LinearCode& code, const SnrContext& snr,
                             const AttackSetup& attack = {}, const StopRule& stop = {}, std::uint64_t seed = 1,
                             MessageMode mode = MessageMode::uniform) {
    const Decoder* t[] = {&dec};
    return simulate_paired(code, snr, t, attack, stop, seed, mode).stats[0];
}

/// Training frames for universal attacks come from a stream disjoint from the evaluation frames.
inline std::vector<AttackFrame> universal_training_frames(const LinearCode& code, const SnrContext& snr,
                                                          std::size_t count, std::uint64_t seed) {
    std::vector<AttackFrame> frames;
    frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const StreamId s = StreamId{seed, i}.child(harness_detail::kUapTrainTag);
        const auto f = transmit(code, snr, s);
        frames.push_back({f.received, f.codeword, snr.sigma2, s.child(harness_detail::kAttackTag)});
    }
    return frames;
}

struct UniversalSetup {
    std::size_t train_frames = 1000;
    UapGradConfig grad;
};

inline AttackArtifact craft_universal(AttackKind kind, const Decoder& source, const LinearCode& code,
                                      const SnrContext& snr, double alpha, const SmoothingConfig& smoothing,
                                      const UniversalSetup& setup, std::uint64_t seed) {
    if (!is_universal(kind)) throw InputError("craft_universal: " + to_string(kind) + " is not universal");
    harness_detail::check_code(code, source);
    const auto frames = universal_training_frames(code, snr, setup.train_frames, seed);
    const auto budget = EnergyBudget::universal(alpha, code.n(), snr.sigma2);
    const auto cfg = smoothing_for(source, smoothing);
    auto art = kind == AttackKind::uap_grad ? uap_grad_attack(source, frames, budget, cfg, setup.grad, seed)
                                            : uap_pca_attack(source, frames, budget, cfg, seed);
    art.params["snr_db"] = format_double(snr.ebno_db);
    art.params["train_frames"] = std::to_string(setup.train_frames);
    return art;
}

/// Everything needed to build an AttackSetup per (kind, alpha, snr).
struct AttackPlan {
    SmoothingConfig smoothing;
    PgdConfig pgd;
    UniversalSetup universal;
};

inline AttackSetup make_setup(AttackKind kind, double alpha, const Decoder* source, const LinearCode& code,
                              const SnrContext& snr, const AttackPlan& plan, std::uint64_t seed,
                              AttackArtifact* artifact = nullptr) {
    AttackSetup s{kind, alpha, source, plan.smoothing, plan.pgd, {}};
    if (is_universal(kind)) {
        if (!source) throw InputError("universal attacks need a source decoder");
        if (alpha > 0) {
            auto art = craft_universal(kind, *source, code, snr, alpha, plan.smoothing, plan.universal, seed);
            s.universal = art.delta;
            if (artifact) *artifact = std::move(art);
        } else {
            s.universal.assign(code.n(), 0.0);
        }
    }
    return s;
}

struct TransferCell {
    std::string source;
    std::string target;
    AttackKind attack = AttackKind::none;
    double snr_db = 0;
    double alpha = 0;
    FERStats stats;
};

/// Perturbations crafted on each source, evaluated on every target over the
/// same frames (fixed frame count so that all cells are paired).
inline std::vector<TransferCell> transferability_matrix(std::span<const Decoder* const> sources,
                                                        std::span<const Decoder* const> targets,
                                                        std::span<const AttackKind> attacks, const LinearCode& code,
                                                        std::span<const double> snr_db, double alpha,
                                                        std::uint64_t frames, const AttackPlan& plan,
                                                        std::uint64_t seed) {
    std::vector<TransferCell> out;
    for (double db : snr_db) {
        const auto snr = SnrContext::from_ebno(db, code.rate());
        for (const auto* src : sources) {
            for (AttackKind kind : attacks) {
                const auto setup = make_setup(kind, alpha, src, code, snr, plan, seed);
                const auto run = simulate_paired(code, snr, targets, setup, StopRule::fixed(frames), seed);
                for (std::size_t t = 0; t < targets.size(); ++t)
                    out.push_back({src->name(), targets[t]->name(), kind, db, alpha, run.stats[t]});
            }
        }
    }
    return out;
}

struct AblationRow {
    AttackKind attack = AttackKind::none;
    double snr_db = 0;
    double alpha = 0;
    FERStats stats;
};

/// Step between consecutive alphas for one attack: a significant FER drop
/// (exact McNemar, one-sided) is flagged as a monotonicity violation.
struct MonotonicityCheck {
    AttackKind attack = AttackKind::none;
    double snr_db = 0;
    double alpha_low = 0;
    double alpha_high = 0;
    double fer_low = 0;
    double fer_high = 0;
    double p_decrease = 1;
    bool violation = false;
};

/// FER(attack) - FER(random) at one alpha, with the one-sided McNemar p-value.
struct RandomGap {
    AttackKind attack = AttackKind::none;
    double snr_db = 0;
    double alpha = 0;
    double gap = 0;
    double p_greater = 1;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    std::vector<MonotonicityCheck> monotonicity;
    std::vector<RandomGap> random_gap;
};

inline AblationTable ablation_alpha_sweep(const Decoder& dec, const LinearCode& code, std::span<const double> snr_db,
                                          std::span<const double> alphas, std::span<const AttackKind> attacks,
                                          std::uint64_t frames, const AttackPlan& plan, std::uint64_t seed,
                                          double significance = 0.01) {
    std::vector<double> grid(alphas.begin(), alphas.end());
    std::ranges::sort(grid);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    AblationTable table;
    const Decoder* t[] = {&dec};
    for (double db : snr_db) {
        const auto snr = SnrContext::from_ebno(db, code.rate());
        std::map<std::pair<AttackKind, double>, std::vector<std::uint8_t>> errs;
        for (AttackKind kind : attacks) {
            for (double a : grid) {
                const auto setup = make_setup(kind, a, &dec, code, snr, plan, seed);
                auto run = simulate_paired(code, snr, t, setup, StopRule::fixed(frames), seed);
                table.rows.push_back({kind, db, a, run.stats[0]});
                errs[{kind, a}] = std::move(run.errors[0]);
            }
            for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
                const auto& lo = errs[{kind, grid[i]}];
                const auto& hi = errs[{kind, grid[i + 1]}];
                const auto m = mcnemar_exact(lo, hi);
                const auto nf = static_cast<double>(frames);
                const double fl = static_cast<double>(std::ranges::count(lo, 1)) / nf;
                const double fh = static_cast<double>(std::ranges::count(hi, 1)) / nf;
                table.monotonicity.push_back({kind, db, grid[i], grid[i + 1], fl, fh, m.p_greater, m.p_greater < significance});
            }
        }
        if (std::ranges::find(attacks, AttackKind::random) == attacks.end()) continue;
        for (AttackKind kind : attacks) {
            if (kind == AttackKind::random || kind == AttackKind::none) continue;
            for (double a : grid) {
                const auto& adv = errs[{kind, a}];
                const auto& rnd = errs[{AttackKind::random, a}];
                const auto m = mcnemar_exact(adv, rnd);
                const double gap = (static_cast<double>(std::ranges::count(adv, 1)) -
                                    static_cast<double>(std::ranges::count(rnd, 1))) /
                                   static_cast<double>(frames);
                table.random_gap.push_back({kind, db, a, gap, m.p_greater});
            }
        }
    }
    return table;
}

}  // namespace decrob
