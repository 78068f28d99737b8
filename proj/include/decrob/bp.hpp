#pragma once

// Flooding belief propagation on the Tanner graph of H.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "decrob/decoder.hpp"

namespace decrob {

enum class CheckRule { sum_product, min_sum };

struct BpConfig {
    std::size_t max_iterations = 10;
    double min_sum_scale = 1.0;  ///< normalization for min-sum; 1.0 = plain
};

namespace bp_detail {
inline constexpr double kLlrClamp = 40.0;
}

/// Tanh-rule extrinsic messages: out[j] = 2·atanh(Π_{i≠j} tanh(in[i]/2)).
inline void sum_product_check_update(std::span<const double> in, std::span<double> out) {
    const std::size_t d = in.size();
    std::vector<double> t(d), fwd(d + 1, 1.0), bwd(d + 1, 1.0);
    for (std::size_t i = 0; i < d; ++i)
        t[i] = std::tanh(0.5 * std::clamp(in[i], -bp_detail::kLlrClamp, bp_detail::kLlrClamp));
    for (std::size_t i = 0; i < d; ++i) fwd[i + 1] = fwd[i] * t[i];
    for (std::size_t i = d; i-- > 0;) bwd[i] = bwd[i + 1] * t[i];
    constexpr double lim = 1.0 - 1e-15;
    for (std::size_t j = 0; j < d; ++j) {
        const double prod = std::clamp(fwd[j] * bwd[j + 1], -lim, lim);
        out[j] = 2.0 * std::atanh(prod);
    }
}

/// Min-sum extrinsic messages: sign product times smallest other magnitude.
inline void min_sum_check_update(std::span<const double> in, std::span<double> out, double scale = 1.0) {
    const std::size_t d = in.size();
    double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
    std::size_t argmin = 0;
    bool negative = false;
    for (std::size_t i = 0; i < d; ++i) {
        const double a = std::abs(in[i]);
        if (in[i] < 0.0) negative = !negative;
        if (a < min1) {
            min2 = min1;
            min1 = a;
            argmin = i;
        } else if (a < min2) {
            min2 = a;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double mag = (j == argmin ? min2 : min1) * scale;
        const bool neg = negative != (in[j] < 0.0);
        out[j] = neg ? -mag : mag;
    }
}

/// Sum-product or min-sum BP, LLRs λ = 2y/σ², early exit on zero syndrome.
class BeliefPropagationDecoder final : public Decoder {
public:
    BeliefPropagationDecoder(std::shared_ptr<const LinearCode> code, CheckRule rule, BpConfig cfg = {})
        : Decoder(std::move(code)), rule_(rule), cfg_(cfg) {
        const auto& checks = this->code().check_neighbors();
        check_offset_.push_back(0);
        for (const auto& nb : checks) {
            for (auto v : nb) edge_var_.push_back(v);
            check_offset_.push_back(edge_var_.size());
        }
        var_edges_.assign(this->code().n(), {});
        for (std::size_t e = 0; e < edge_var_.size(); ++e) var_edges_[edge_var_[e]].push_back(e);
    }

    std::string name() const override { return rule_ == CheckRule::sum_product ? "sum_product" : "min_sum"; }

    DecodeResult decode(std::span<const double> y, double sigma2) const override {
        check_length(y);
        const std::size_t n = code().n();
        std::vector<double> channel(n), posterior(n);
        for (std::size_t i = 0; i < n; ++i) channel[i] = 2.0 * y[i] / sigma2;
        posterior = channel;
        if (code().is_codeword(hard_decision(posterior))) return finish(std::move(posterior), 0);

        const std::size_t edges = edge_var_.size();
        std::vector<double> v2c(edges), c2v(edges, 0.0), in, out;
        for (std::size_t e = 0; e < edges; ++e) v2c[e] = channel[edge_var_[e]];

        std::size_t it = 0;
        while (it < cfg_.max_iterations) {
            ++it;
            for (std::size_t c = 0; c + 1 < check_offset_.size(); ++c) {
                const std::size_t b = check_offset_[c], d = check_offset_[c + 1] - b;
                in.assign(v2c.begin() + static_cast<std::ptrdiff_t>(b), v2c.begin() + static_cast<std::ptrdiff_t>(b + d));
                out.resize(d);
                if (rule_ == CheckRule::sum_product)
                    sum_product_check_update(in, out);
                else
                    min_sum_check_update(in, out, cfg_.min_sum_scale);
                std::copy(out.begin(), out.end(), c2v.begin() + static_cast<std::ptrdiff_t>(b));
            }
            for (std::size_t v = 0; v < n; ++v) {
                double total = channel[v];
                for (auto e : var_edges_[v]) total += c2v[e];
                posterior[v] = total;
                for (auto e : var_edges_[v])
                    v2c[e] = std::clamp(total - c2v[e], -bp_detail::kLlrClamp * 10, bp_detail::kLlrClamp * 10);
            }
            if (code().is_codeword(hard_decision(posterior))) break;
        }
        return finish(std::move(posterior), it);
    }

    CheckRule rule() const noexcept { return rule_; }

private:
    CheckRule rule_;
    BpConfig cfg_;
    std::vector<std::size_t> check_offset_;
    std::vector<std::uint32_t> edge_var_;
    std::vector<std::vector<std::size_t>> var_edges_;
};

inline DecoderHandle make_sum_product(std::shared_ptr<const LinearCode> code, BpConfig cfg = {}) {
    return std::make_shared<BeliefPropagationDecoder>(std::move(code), CheckRule::sum_product, cfg);
}

inline DecoderHandle make_min_sum(std::shared_ptr<const LinearCode> code, BpConfig cfg = {}) {
    return std::make_shared<BeliefPropagationDecoder>(std::move(code), CheckRule::min_sum, cfg);
}

}  // namespace decrob
