#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "decrob/bp.hpp"
#include "decrob/channel.hpp"
#include "decrob/ml_oracle.hpp"
#include "decrob/registry.hpp"
#include "decrob/sc.hpp"

using namespace decrob;

namespace {

struct Counts {
    std::size_t frames = 0;
    std::size_t errors = 0;
    double fer() const { return static_cast<double>(errors) / static_cast<double>(frames); }
};

/// Per-frame error indicators of several decoders on one shared frame set.
std::vector<std::vector<bool>> error_matrix(const std::vector<DecoderHandle>& decs, const LinearCode& code, double ebno,
                                            std::size_t frames, std::uint64_t seed) {
    const auto snr = SnrContext::from_ebno(ebno, code.rate());
    std::vector<std::vector<bool>> out(decs.size(), std::vector<bool>(frames));
    for (std::size_t i = 0; i < frames; ++i) {
        const auto f = transmit(code, snr, seed, i);
        for (std::size_t d = 0; d < decs.size(); ++d)
            out[d][i] = decs[d]->decode(f.received, snr.sigma2).bits_hat != f.codeword;
    }
    return out;
}

Counts count(const std::vector<bool>& e) {
    Counts c;
    c.frames = e.size();
    for (bool b : e) c.errors += b;
    return c;
}

}  // namespace

TEST(CheckUpdates, MinSumMagnitudeDominatesSumProduct) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 3.0);
    std::uniform_int_distribution<int> deg(2, 9);
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> in(static_cast<std::size_t>(deg(rng)));
        for (auto& v : in) v = g(rng);
        std::vector<double> sp(in.size()), ms(in.size());
        sum_product_check_update(in, sp);
        min_sum_check_update(in, ms);
        for (std::size_t j = 0; j < in.size(); ++j) {
            EXPECT_GE(std::abs(ms[j]) + 1e-12, std::abs(sp[j]));
            if (sp[j] != 0.0) {
                EXPECT_EQ(std::signbit(ms[j]), std::signbit(sp[j]));
            }
        }
    }
}

TEST(CheckUpdates, SumProductDegreeTwoPassesThrough) {
    std::vector<double> in{1.5, -0.7}, out(2);
    sum_product_check_update(in, out);
    EXPECT_NEAR(out[0], -0.7, 1e-12);
    EXPECT_NEAR(out[1], 1.5, 1e-12);
}

TEST(BeliefPropagation, NoiselessFramesConvergeImmediately) {
    const auto code = make_code("ldpc_49_24");
    const auto snr = SnrContext::from_sigma2(1e-12, code->rate());
    for (auto dec : {make_sum_product(code), make_min_sum(code)}) {
        for (std::uint64_t i = 0; i < 10; ++i) {
            const auto f = transmit(*code, snr, 3, i);
            const auto r = dec->decode(f.symbols, 0.5);
            EXPECT_EQ(r.bits_hat, f.codeword);
            EXPECT_TRUE(r.converged);
            EXPECT_LE(r.iterations_used, 1u);
        }
    }
}

TEST(BeliefPropagation, CorrectsSingleWeakFlippedBit) {
    const auto code = make_code("ldpc_49_24");
    const auto dec = make_sum_product(code);
    const auto ms = make_min_sum(code);
    const auto f = transmit(*code, SnrContext::from_sigma2(1e-12, code->rate()), 9, 0);
    for (std::size_t i = 0; i < code->n(); ++i) {
        auto y = f.symbols;
        y[i] = -0.2 * y[i];  // wrong sign, low reliability
        for (const auto& d : {dec, ms}) {
            const auto r = d->decode(y, 0.5);
            EXPECT_TRUE(r.converged);
            EXPECT_EQ(r.bits_hat, f.codeword) << d->name() << " bit " << i;
            EXPECT_TRUE(code->is_codeword(r.bits_hat));
        }
    }
}

TEST(BeliefPropagation, ConvergedImpliesZeroSyndromeAndIterationCap) {
    const auto code = make_code("ldpc_121_60");
    const auto dec = make_sum_product(code, BpConfig{7, 1.0});
    const auto snr = SnrContext::from_ebno(2.0, code->rate());
    for (std::uint64_t i = 0; i < 300; ++i) {
        const auto f = transmit(*code, snr, 4, i);
        const auto r = dec->decode(f.received, snr.sigma2);
        EXPECT_LE(r.iterations_used, 7u);
        EXPECT_EQ(r.converged, code->is_codeword(r.bits_hat));
        EXPECT_EQ(r.bits_hat, hard_decision(r.soft));
    }
}

TEST(BeliefPropagation, HammingSumProductCloseToMl) {
    const auto code = make_code("hamming_7_4");
    const auto m = error_matrix({make_sum_product(code), make_ml_oracle(code)}, *code, 5.0, 20000, 77);
    const auto sp = count(m[0]), ml = count(m[1]);
    ASSERT_GT(ml.errors, 20u);
    EXPECT_GE(sp.errors, ml.errors);
    EXPECT_LE(sp.fer(), 1.5 * ml.fer());
}

TEST(BeliefPropagation, MinSumNotBetterThanSumProductOnLdpc) {
    const auto code = make_code("ldpc_121_60");
    for (double ebno : {4.0, 5.0}) {
        const auto m = error_matrix({make_sum_product(code), make_min_sum(code)}, *code, ebno, 4000, 5);
        EXPECT_GE(count(m[1]).errors, count(m[0]).errors) << ebno;
    }
}

TEST(BeliefPropagation, FerDecreasesWithSnr) {
    const auto code = make_code("ldpc_49_24");
    const auto dec = make_sum_product(code);
    std::size_t prev = SIZE_MAX;
    for (double ebno : {2.0, 3.0, 4.0}) {
        const auto c = count(error_matrix({dec}, *code, ebno, 3000, 12)[0]);
        EXPECT_LT(c.errors, prev);
        prev = c.errors;
    }
}

TEST(SuccessiveCancellation, NoiselessFramesDecodeExactly) {
    const auto code = std::make_shared<LinearCode>(build_polar(64, 48));
    const auto dec = make_sc(code);
    const auto snr = SnrContext::from_sigma2(1e-12, code->rate());
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto f = transmit(*code, snr, 8, i);
        EXPECT_EQ(dec->decode(f.symbols, 0.5).bits_hat, f.codeword);
    }
}

TEST(SuccessiveCancellation, PolarTwoOneMatchesMl) {
    const auto code = std::make_shared<LinearCode>(build_polar(2, 1));
    const auto sc = make_sc(code);
    const auto ml = make_ml_oracle(code);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.5);
    for (int t = 0; t < 10000; ++t) {
        const std::vector<double> y{g(rng), g(rng)};
        if (y[0] + y[1] == 0.0) continue;
        EXPECT_EQ(sc->decode(y, 1.0).bits_hat, ml->decode(y, 1.0).bits_hat);
    }
}

TEST(SuccessiveCancellation, PolarFourTwoWithinTwiceMl) {
    const auto code = std::make_shared<LinearCode>(build_polar(4, 2));
    const auto m = error_matrix({make_sc(code), make_ml_oracle(code)}, *code, 4.0, 10000, 21);
    const auto sc = count(m[0]), ml = count(m[1]);
    ASSERT_GT(ml.errors, 0u);
    EXPECT_GE(sc.errors, ml.errors);
    EXPECT_LE(sc.fer(), 2.0 * ml.fer());
}

TEST(SuccessiveCancellation, RejectsNonPolarCodes) {
    EXPECT_THROW(ScDecoder(make_code("hamming_7_4")), InputError);
}

TEST(MlOracle, ReturnsTransmittedCodewordWithoutNoise) {
    const auto code = make_code("hamming_15_11");
    const auto dec = make_ml_oracle(code);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        BitVector m(code->k());
        for (auto& b : m) b = rng() & 1u;
        const auto c = code->encode(m);
        const auto r = dec->decode(modulate(c), 1.0);
        EXPECT_EQ(r.bits_hat, c);
        EXPECT_EQ(r.bits_hat, hard_decision(r.soft));
    }
}

TEST(MlOracle, TiesGoToLowerIndex) {
    const auto code = make_code("hamming_7_4");
    MlOracleDecoder dec(code);
    // Midpoint of codeword pairs: both endpoints have equal correlation.
    for (unsigned a = 0; a < 16; ++a)
        for (unsigned b = a + 1; b < 16; ++b) {
            BitVector ma(4), mb(4);
            for (unsigned j = 0; j < 4; ++j) {
                ma[j] = (a >> j) & 1u;
                mb[j] = (b >> j) & 1u;
            }
            const auto sa = modulate(code->encode(ma)), sb = modulate(code->encode(mb));
            std::vector<double> y(7);
            for (int i = 0; i < 7; ++i) y[i] = 0.5 * (sa[i] + sb[i]);
            // Brute-force oracle for the expected index.
            double best = -1e9;
            unsigned expect = 0;
            for (unsigned c = 0; c < 16; ++c) {
                BitVector mc(4);
                for (unsigned j = 0; j < 4; ++j) mc[j] = (c >> j) & 1u;
                const auto s = modulate(code->encode(mc));
                double corr = 0;
                for (int i = 0; i < 7; ++i) corr += y[i] * s[i];
                if (corr > best + 1e-12) {
                    best = corr;
                    expect = c;
                }
            }
            EXPECT_EQ(dec.best_index(y), expect);
            EXPECT_LE(expect, a);
            BitVector me(4);
            for (unsigned j = 0; j < 4; ++j) me[j] = (expect >> j) & 1u;
            const auto r = dec.decode(y, 1.0);
            EXPECT_EQ(r.bits_hat, code->encode(me));
            EXPECT_EQ(r.bits_hat, hard_decision(r.soft));
        }
}

TEST(MlOracle, AgreesWithSyndromeTableOnAllHardInputs) {
    const auto code = make_code("hamming_7_4");
    const auto dec = make_ml_oracle(code);
    // Syndrome table: the syndrome of a single error at i is column i of H.
    std::map<BitVector, std::size_t> table;
    for (std::size_t i = 0; i < 7; ++i) {
        BitVector e(7, 0);
        e[i] = 1;
        table[code->syndrome(e)] = i;
    }
    for (unsigned w = 0; w < 128; ++w) {
        BitVector y(7);
        for (unsigned i = 0; i < 7; ++i) y[i] = (w >> i) & 1u;
        auto corrected = y;
        const auto s = code->syndrome(y);
        if (code->is_codeword(y) == false) corrected[table.at(s)] ^= 1;
        EXPECT_EQ(dec->decode(modulate(y), 1.0).bits_hat, corrected) << w;
    }
}

TEST(MlOracle, RefusesLargeK) {
    EXPECT_THROW(MlOracleDecoder(make_code("ldpc_49_24")), RefusalError);
}

TEST(AllDecoders, MlLowerBoundsOthersOnSharedFrames) {
    const auto code = make_code("hamming_15_11");
    const auto m = error_matrix({make_ml_oracle(code), make_sum_product(code), make_min_sum(code)}, *code, 4.0, 5000, 31);
    const auto ml = count(m[0]);
    EXPECT_LE(ml.errors, count(m[1]).errors);
    EXPECT_LE(ml.errors, count(m[2]).errors);
}
