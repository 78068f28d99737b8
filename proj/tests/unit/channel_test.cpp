#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "decrob/channel.hpp"
#include "decrob/registry.hpp"

using namespace decrob;

TEST(Snr, FormulaValues) {
    EXPECT_DOUBLE_EQ(snr_to_sigma2(0.0, 0.5), 1.0);
    EXPECT_NEAR(snr_to_sigma2(6.0, 0.5), 0.251188643, 1e-9);
    EXPECT_NEAR(snr_to_sigma2(4.0, 60.0 / 121.0), 0.4014247303, 1e-9);
    EXPECT_THROW(snr_to_sigma2(4.0, 0.0), InputError);
    EXPECT_THROW(snr_to_sigma2(4.0, 1.0), InputError);
    const auto ctx = SnrContext::from_ebno(5.0, 0.5);
    EXPECT_NEAR(SnrContext::from_sigma2(ctx.sigma2, 0.5).ebno_db, 5.0, 1e-12);
}

TEST(Modulate, BpskMapping) {
    EXPECT_EQ(modulate(BitVector(7, 0)), std::vector<double>(7, 1.0));
    EXPECT_EQ(modulate(BitVector{1, 0, 1}), (std::vector<double>{-1.0, 1.0, -1.0}));
    const BitVector bits{1, 1, 0, 1, 0, 0, 1};
    EXPECT_EQ(hard_demodulate(modulate(bits)), bits);
}

TEST(Transmit, NoiselessLimitRecoversCodeword) {
    const auto code = make_code("ldpc_49_24");
    const auto snr = SnrContext::from_sigma2(1e-12, code->rate());
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto f = transmit(*code, snr, 1, i);
        EXPECT_EQ(hard_demodulate(f.received), f.codeword);
        EXPECT_TRUE(code->is_codeword(f.codeword));
        EXPECT_EQ(code->encode(f.message), f.codeword);
        for (std::size_t j = 0; j < code->n(); ++j) EXPECT_EQ(f.received[j], f.symbols[j] + f.noise[j]);
    }
}

TEST(Transmit, SameStreamIsBitIdentical) {
    const auto code = make_code("hamming_15_11");
    const auto snr = SnrContext::from_ebno(3.0, code->rate());
    const auto a = transmit(*code, snr, 42, 17);
    const auto b = transmit(*code, snr, 42, 17);
    EXPECT_EQ(a.received, b.received);
    EXPECT_EQ(a.message, b.message);
    const auto c = transmit(*code, snr, 42, 18);
    EXPECT_NE(a.received, c.received);
}

TEST(Transmit, AllZeroMode) {
    const auto code = make_code("hamming_7_4");
    const auto f = transmit(*code, SnrContext::from_ebno(4.0, code->rate()), 1, 0, MessageMode::all_zero);
    EXPECT_EQ(f.codeword, BitVector(7, 0));
}

TEST(Transmit, NoiseMomentsAndStreamIndependence) {
    // Collect 10^6 noise samples at sigma2 = 1 from 10^4 frames of n = 100.
    const auto code = build_repetition(100);
    const auto snr = SnrContext::from_sigma2(1.0, code.rate());
    constexpr std::size_t frames = 10000;
    double sum = 0.0, sumsq = 0.0, cross = 0.0;
    std::vector<double> prev;
    std::size_t cross_count = 0;
    for (std::size_t i = 0; i < frames; ++i) {
        const auto f = transmit(code, snr, 2024, i, MessageMode::all_zero);
        for (double z : f.noise) {
            sum += z;
            sumsq += z * z;
        }
        if (!prev.empty())
            for (std::size_t j = 0; j < f.noise.size(); ++j, ++cross_count) cross += prev[j] * f.noise[j];
        prev = f.noise;
    }
    const double count = frames * 100.0;
    const double mean = sum / count;
    const double var = sumsq / count - mean * mean;
    EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(count));
    EXPECT_GE(var, 0.99);
    EXPECT_LE(var, 1.01);
    EXPECT_LE(std::abs(cross / static_cast<double>(cross_count)), 5.0 / std::sqrt(static_cast<double>(cross_count)));
}
