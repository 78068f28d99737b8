#pragma once

// Exhaustive maximum-likelihood decoding for small codes.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "decrob/decoder.hpp"

namespace decrob {

inline constexpr std::size_t kMaxOracleK = 16;

/// Returns the codeword maximizing <y, 1 - 2c>; ties go to the lowest message
/// index (message bit j = bit j of the index). The soft output is the max-log
/// LLR, sign-adjusted so that its hard decision equals the chosen codeword.
class MlOracleDecoder final : public Decoder {
public:
    explicit MlOracleDecoder(std::shared_ptr<const LinearCode> code) : Decoder(std::move(code)) {
        const std::size_t k = this->code().k();
        if (k > kMaxOracleK) throw RefusalError("ML oracle refuses k > 16 (2^k enumeration)");
        const std::size_t count = std::size_t{1} << k;
        const std::size_t n = this->code().n();
        symbols_.resize(count * n);
        BitVector m(k);
        for (std::size_t idx = 0; idx < count; ++idx) {
            for (std::size_t j = 0; j < k; ++j) m[j] = (idx >> j) & 1u;
            const BitVector c = this->code().encode(m);
            for (std::size_t i = 0; i < n; ++i) symbols_[idx * n + i] = c[i] ? -1.0 : 1.0;
        }
    }

    std::string name() const override { return "ml_oracle"; }

    /// Index of the ML codeword.
    std::size_t best_index(std::span<const double> y) const {
        check_length(y);
        const std::size_t n = code().n(), count = symbols_.size() / n;
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t idx = 0; idx < count; ++idx) {
            double corr = 0.0;
            for (std::size_t i = 0; i < n; ++i) corr += y[i] * symbols_[idx * n + i];
            if (corr > best) {
                best = corr;
                arg = idx;
            }
        }
        return arg;
    }

    DecodeResult decode(std::span<const double> y, double sigma2) const override {
        check_length(y);
        const std::size_t n = code().n(), count = symbols_.size() / n;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> best0(n, -inf), best1(n, -inf);
        double best = -inf;
        std::size_t arg = 0;
        for (std::size_t idx = 0; idx < count; ++idx) {
            const double* s = &symbols_[idx * n];
            double corr = 0.0;
            for (std::size_t i = 0; i < n; ++i) corr += y[i] * s[i];
            if (corr > best) {
                best = corr;
                arg = idx;
            }
            for (std::size_t i = 0; i < n; ++i) {
                auto& slot = s[i] > 0 ? best0[i] : best1[i];
                slot = std::max(slot, corr);
            }
        }
        std::vector<double> soft(n);
        for (std::size_t i = 0; i < n; ++i) {
            double llr = (best0[i] - best1[i]) / sigma2;
            const bool bit_one = symbols_[arg * n + i] < 0;
            if (bit_one && !(llr < 0.0)) llr = -std::numeric_limits<double>::min();
            if (!bit_one && llr < 0.0) llr = 0.0;
            soft[i] = llr;
        }
        return finish(std::move(soft), 1);
    }

private:
    std::vector<double> symbols_;  ///< codeword-major BPSK symbols
};

inline DecoderHandle make_ml_oracle(std::shared_ptr<const LinearCode> code) {
    return std::make_shared<MlOracleDecoder>(std::move(code));
}

}  // namespace decrob
