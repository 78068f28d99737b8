// Crafts a UAP-PCA perturbation against sum-product on LDPC(49,24) (Stein
// gradients, since BP is not differentiated) and saves it as an artifact.
//
//   universal_pca [out.attack]

#include <cstdio>
#include <string>

#include "decrob/bp.hpp"
#include "decrob/harness.hpp"
#include "decrob/registry.hpp"

int main(int argc, char** argv) {
    using namespace decrob;
    const std::string out = argc > 1 ? argv[1] : "uap_pca_sp.attack";
    const auto code = make_code("ldpc_49_24");
    const auto sp = make_sum_product(code);
    const auto snr = SnrContext::from_ebno(3.0, code->rate());

    SmoothingConfig cfg;
    cfg.samples = 16;
    UniversalSetup setup;
    setup.train_frames = 200;
    const auto art = craft_universal(AttackKind::uap_pca, *sp, *code, snr, 0.05, cfg, setup, 5);
    art.save(out);
    std::printf("lambda1 %s  lambda2 %s  |delta| %.4f  eps %.4f\n", art.params.at("lambda1").c_str(),
                art.params.at("lambda2").c_str(), l2_norm(art.delta), art.budget.epsilon);

    AttackSetup attack{AttackKind::uap_pca, 0.05, sp.get(), cfg, {}, art.delta};
    AttackSetup noise{AttackKind::random, 0.05, nullptr, cfg, {}, {}};
    const auto a = estimate_fer(*sp, *code, snr, attack, StopRule::fixed(5000), 11);
    const auto r = estimate_fer(*sp, *code, snr, noise, StopRule::fixed(5000), 11);
    std::printf("FER under uap_pca %.4f, under random noise %.4f  (saved %s)\n", a.fer, r.fer, out.c_str());
}
