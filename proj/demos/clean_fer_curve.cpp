// Clean FER of the classical decoders on a bundled code across Eb/N0.
//
//   clean_fer_curve [code] [frames]

#include <cstdio>
#include <string>

#include "decrob/bp.hpp"
#include "decrob/harness.hpp"
#include "decrob/ml_oracle.hpp"
#include "decrob/registry.hpp"

int main(int argc, char** argv) {
    using namespace decrob;
    const std::string id = argc > 1 ? argv[1] : "hamming_7_4";
    const std::uint64_t frames = argc > 2 ? std::stoull(argv[2]) : 20000;
    const auto code = make_code(id);

    std::vector<DecoderHandle> decs{make_sum_product(code), make_min_sum(code)};
    if (code->k() <= kMaxOracleK) decs.push_back(make_ml_oracle(code));
    std::vector<const Decoder*> targets;
    for (const auto& d : decs) targets.push_back(d.get());

    std::printf("%-6s", "EbN0");
    for (const auto* d : targets) std::printf("  %14s", d->name().c_str());
    std::printf("\n");
    for (double db = 0; db <= 6; db += 1) {
        const auto run = simulate_paired(*code, SnrContext::from_ebno(db, code->rate()), targets, {},
                                         StopRule{frames, 200}, 1);
        std::printf("%-6.1f", db);
        for (const auto& s : run.stats) std::printf("  %14.3e", s.fer);
        std::printf("\n");
    }
}
