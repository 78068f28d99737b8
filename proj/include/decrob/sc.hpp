#pragma once

// Successive cancellation decoding for codes built by build_polar.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "decrob/decoder.hpp"

namespace decrob {

namespace sc_detail {

/// Exact check-node combination in a numerically stable form.
inline double boxplus(double a, double b) noexcept {
    const double s = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
    return s * std::min(std::abs(a), std::abs(b)) + std::log1p(std::exp(-std::abs(a + b))) -
           std::log1p(std::exp(-std::abs(a - b)));
}

inline void decode(const double* llr, std::size_t len, const std::uint8_t* frozen, std::uint8_t* x_out) {
    if (len == 1) {
        x_out[0] = frozen[0] ? 0 : (llr[0] < 0.0 ? 1 : 0);
        return;
    }
    const std::size_t half = len / 2;
    std::vector<double> sub(half);
    std::vector<std::uint8_t> xa(half), xb(half);
    for (std::size_t i = 0; i < half; ++i) sub[i] = boxplus(llr[i], llr[i + half]);
    decode(sub.data(), half, frozen, xa.data());
    for (std::size_t i = 0; i < half; ++i) sub[i] = llr[i + half] + (xa[i] ? -llr[i] : llr[i]);
    decode(sub.data(), half, frozen + half, xb.data());
    for (std::size_t i = 0; i < half; ++i) {
        x_out[i] = xa[i] ^ xb[i];
        x_out[i + half] = xb[i];
    }
}

}  // namespace sc_detail

/// SC decoder; returns the re-encoded codeword estimate. The soft output carries
/// the decision sign with the channel LLR magnitude.
class ScDecoder final : public Decoder {
public:
    explicit ScDecoder(std::shared_ptr<const LinearCode> code) : Decoder(std::move(code)) {
        if (this->code().family() != CodeFamily::polar || !this->code().polar())
            throw InputError("sc_decode requires a polar code");
    }

    std::string name() const override { return "sc"; }

    DecodeResult decode(std::span<const double> y, double sigma2) const override {
        check_length(y);
        const std::size_t n = code().n();
        std::vector<double> llr(n);
        for (std::size_t i = 0; i < n; ++i) llr[i] = 2.0 * y[i] / sigma2;
        BitVector x(n);
        sc_detail::decode(llr.data(), n, code().polar()->frozen.data(), x.data());
        std::vector<double> soft(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::max(std::abs(llr[i]), std::numeric_limits<double>::min());
            soft[i] = x[i] ? -mag : mag;
        }
        return finish(std::move(soft), 1);
    }
};

inline DecoderHandle make_sc(std::shared_ptr<const LinearCode> code) {
    return std::make_shared<ScDecoder>(std::move(code));
}

}  // namespace decrob
