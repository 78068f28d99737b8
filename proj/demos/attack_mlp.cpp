// Trains a small syndrome MLP on Hamming(7,4) and compares it with
// sum-product under white-box attacks of growing budget.

#include <cstdio>

#include "decrob/bp.hpp"
#include "decrob/harness.hpp"
#include "decrob/mlp.hpp"
#include "decrob/registry.hpp"

int main() {
    using namespace decrob;
    const auto code = make_code("hamming_7_4");
    auto model = MlpModel::create(*code, 64, 2, 1);
    TrainConfig tc;
    tc.steps = 3000;
    tc.learning_rate = 1e-2;
    train(model, *code, tc);
    const auto mlp = make_mlp_decoder(code, std::move(model));
    const auto sp = make_sum_product(code);

    const auto snr = SnrContext::from_ebno(4.0, code->rate());
    AttackPlan plan;
    plan.smoothing.samples = 32;
    const Decoder* targets[] = {mlp.get(), sp.get()};

    std::printf("%-8s %-6s %10s %10s\n", "attack", "alpha", "mlp FER", "sp FER");
    for (double alpha : {0.0, 0.05, 0.1, 0.2}) {
        for (AttackKind k : {AttackKind::random, AttackKind::fgm, AttackKind::pgd}) {
            if (alpha == 0 && k != AttackKind::random) continue;
            const auto setup = make_setup(k, alpha, nullptr, *code, snr, plan, 3);
            const auto run = simulate_paired(*code, snr, targets, setup, StopRule::fixed(2000), 3);
            std::printf("%-8s %-6.2f %10.4f %10.4f\n", alpha == 0 ? "clean" : to_string(k).c_str(), alpha,
                        run.stats[0].fer, run.stats[1].fer);
        }
    }
}
