#pragma once

// BPSK over AWGN with reproducible, individually addressable frames.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "decrob/code.hpp"
#include "decrob/errors.hpp"
#include "decrob/random.hpp"

namespace decrob {

/// Noise variance for a given Eb/N0 (dB) and code rate: (2·R·10^(snr/10))⁻¹.
inline double snr_to_sigma2(double ebno_db, double rate) {
    if (!(rate > 0.0 && rate < 1.0)) throw InputError("snr_to_sigma2: rate must lie in (0, 1)");
    return 1.0 / (2.0 * rate * std::pow(10.0, ebno_db / 10.0));
}

struct SnrContext {
    double ebno_db = 0.0;
    double rate = 0.5;
    double sigma2 = 1.0;

    static SnrContext from_ebno(double ebno_db, double rate) { return {ebno_db, rate, snr_to_sigma2(ebno_db, rate)}; }

    /// Explicit variance (e.g. the noiseless limit); ebno_db is back-computed.
    static SnrContext from_sigma2(double sigma2, double rate) {
        if (!(sigma2 > 0.0)) throw InputError("sigma2 must be positive");
        return {10.0 * std::log10(1.0 / (2.0 * rate * sigma2)), rate, sigma2};
    }
};

/// 0 -> +1, 1 -> -1.
inline std::vector<double> modulate(std::span<const std::uint8_t> bits) {
    std::vector<double> out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[i] = 1.0 - 2.0 * static_cast<double>(bits[i] & 1u);
    return out;
}

enum class MessageMode { uniform, all_zero };

struct ReceivedFrame {
    BitVector message;
    BitVector codeword;
    std::vector<double> symbols;
    std::vector<double> noise;
    std::vector<double> received;
    SnrContext snr;
    StreamId stream;
};

/// Draws one frame. Deterministic in (code, snr, stream, mode).
inline ReceivedFrame transmit(const LinearCode& code, const SnrContext& snr, StreamId stream,
                              MessageMode mode = MessageMode::uniform) {
    Engine eng = make_engine(stream);
    ReceivedFrame f;
    f.snr = snr;
    f.stream = stream;
    f.message.assign(code.k(), 0);
    if (mode == MessageMode::uniform) {
        std::bernoulli_distribution coin(0.5);
        for (auto& b : f.message) b = coin(eng) ? 1 : 0;
    }
    f.codeword = code.encode(f.message);
    f.symbols = modulate(f.codeword);
    std::normal_distribution<double> gauss(0.0, std::sqrt(snr.sigma2));
    f.noise.resize(code.n());
    f.received.resize(code.n());
    for (std::size_t i = 0; i < code.n(); ++i) {
        f.noise[i] = gauss(eng);
        f.received[i] = f.symbols[i] + f.noise[i];
    }
    return f;
}

inline ReceivedFrame transmit(const LinearCode& code, const SnrContext& snr, std::uint64_t seed,
                              std::uint64_t frame_index, MessageMode mode = MessageMode::uniform) {
    return transmit(code, snr, StreamId{seed, frame_index}, mode);
}

}  // namespace decrob
