#pragma once

// Binary linear codes: representation, construction, encoding, syndromes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "decrob/errors.hpp"
#include "decrob/gf2.hpp"

namespace decrob {

enum class CodeFamily { hamming, ldpc, polar, repetition, custom };

inline const char* to_string(CodeFamily f) noexcept {
    switch (f) {
        case CodeFamily::hamming: return "hamming";
        case CodeFamily::ldpc: return "ldpc";
        case CodeFamily::polar: return "polar";
        case CodeFamily::repetition: return "repetition";
        case CodeFamily::custom: return "custom";
    }
    return "custom";
}

/// Polar construction data: frozen[i] = 1 for frozen u-index i.
struct PolarLayout {
    double design_snr_db = 0.0;
    std::vector<std::uint8_t> frozen;
    std::vector<double> bhattacharyya;
};

/// An (n, k) binary linear code. Immutable once built; safe to share.
///
/// Codes derived from a parity-check matrix get G from the null space of H,
/// which is systematic on H's non-pivot columns. No columns are reordered, so
/// the external bit order always matches the order of H's columns.
class LinearCode {
public:
    static LinearCode from_parity_check(BitMatrix h, CodeFamily family, std::string id) {
        if (h.cols() == 0) throw InputError("parity-check matrix has no columns");
        LinearCode code;
        code.family_ = family;
        code.id_ = std::move(id);
        code.n_ = h.cols();
        code.g_ = nullspace(h);
        code.k_ = code.g_.rows();
        code.h_ = std::move(h);
        code.finish();
        return code;
    }

    static LinearCode from_generator(BitMatrix g, CodeFamily family, std::string id) {
        if (g.cols() == 0) throw InputError("generator matrix has no columns");
        if (rank(g) != g.rows()) throw InputError("generator matrix rows are linearly dependent");
        LinearCode code;
        code.family_ = family;
        code.id_ = std::move(id);
        code.n_ = g.cols();
        code.k_ = g.rows();
        code.h_ = nullspace(g);
        code.g_ = std::move(g);
        code.finish();
        return code;
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }
    double rate() const noexcept { return static_cast<double>(k_) / static_cast<double>(n_); }
    const BitMatrix& generator() const noexcept { return g_; }
    const BitMatrix& parity_check() const noexcept { return h_; }
    CodeFamily family() const noexcept { return family_; }
    const std::string& id() const noexcept { return id_; }

    /// k codeword positions P with G[:,P] invertible; they determine the message.
    const std::vector<std::size_t>& message_positions() const noexcept { return msg_pos_; }

    /// Tanner graph adjacency derived from H.
    const std::vector<std::vector<std::uint32_t>>& check_neighbors() const noexcept { return check_adj_; }
    const std::vector<std::vector<std::uint32_t>>& variable_neighbors() const noexcept { return var_adj_; }

    const std::optional<PolarLayout>& polar() const noexcept { return polar_; }

    /// Stable 64-bit FNV-1a fingerprint of (n, k, H).
    std::uint64_t fingerprint() const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xffu;
                h *= 1099511628211ull;
            }
        };
        mix(n_);
        mix(k_);
        for (std::size_t r = 0; r < h_.rows(); ++r)
            for (auto w : h_.row(r)) mix(w);
        return h;
    }

    /// m·G over GF(2).
    BitVector encode(std::span<const std::uint8_t> message) const {
        if (message.size() != k_) throw InputError("encode: message length != k");
        std::vector<BitMatrix::Word> acc(g_.words_per_row(), 0);
        for (std::size_t j = 0; j < k_; ++j) {
            if (!message[j]) continue;
            const auto row = g_.row(j);
            for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= row[w];
        }
        BitVector out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = (acc[i / 64] >> (i % 64)) & 1u;
        return out;
    }

    /// H·y_bᵀ over GF(2).
    BitVector syndrome(std::span<const std::uint8_t> word) const {
        if (word.size() != n_) throw InputError("syndrome: word length != n");
        const auto packed = pack_bits(word);
        BitVector out(h_.rows());
        for (std::size_t r = 0; r < h_.rows(); ++r) out[r] = packed_dot(h_.row(r), packed);
        return out;
    }

    bool is_codeword(std::span<const std::uint8_t> word) const {
        const auto s = syndrome(word);
        return std::all_of(s.begin(), s.end(), [](std::uint8_t b) { return b == 0; });
    }

    /// Inverse of encode for codewords: m = c[P]·(G[:,P])⁻¹.
    BitVector message_of(std::span<const std::uint8_t> codeword) const {
        if (codeword.size() != n_) throw InputError("message_of: word length != n");
        BitVector m(k_, 0);
        for (std::size_t j = 0; j < k_; ++j) {
            int bit = 0;
            for (std::size_t i = 0; i < k_; ++i)
                if (codeword[msg_pos_[i]] && msg_inverse_.get(i, j)) bit ^= 1;
            m[j] = static_cast<std::uint8_t>(bit);
        }
        return m;
    }

    LinearCode with_polar_layout(PolarLayout layout) const {
        LinearCode c = *this;
        c.polar_ = std::move(layout);
        return c;
    }

private:
    LinearCode() = default;

    void finish() {
        if (k_ == 0 || k_ >= n_) throw InputError("code must satisfy 0 < k < n");
        // Rows of H beyond rank(H) are allowed (redundant checks); k = n - rank(H).
        if (rank(h_) != n_ - k_) throw InputError("rank(H) != n - k");
        if (!multiply_transposed(g_, h_).is_zero()) throw InputError("G·Hᵀ != 0");

        const RrefResult rg = rref(g_);
        msg_pos_ = rg.pivots;
        // (G[:,P])⁻¹ by Gauss-Jordan on [G_P | I].
        BitMatrix aug(k_, 2 * k_);
        for (std::size_t r = 0; r < k_; ++r) {
            for (std::size_t i = 0; i < k_; ++i) aug.set(r, i, g_.get(r, msg_pos_[i]));
            aug.set(r, k_ + r, true);
        }
        const RrefResult ra = rref(aug);
        msg_inverse_ = BitMatrix(k_, k_);
        for (std::size_t r = 0; r < k_; ++r)
            for (std::size_t c = 0; c < k_; ++c) msg_inverse_.set(r, c, ra.reduced.get(r, k_ + c));

        check_adj_.assign(h_.rows(), {});
        var_adj_.assign(n_, {});
        for (std::size_t r = 0; r < h_.rows(); ++r)
            for (std::size_t c = 0; c < n_; ++c)
                if (h_.get(r, c)) {
                    check_adj_[r].push_back(static_cast<std::uint32_t>(c));
                    var_adj_[c].push_back(static_cast<std::uint32_t>(r));
                }
    }

    std::size_t n_ = 0;
    std::size_t k_ = 0;
    BitMatrix g_;
    BitMatrix h_;
    CodeFamily family_ = CodeFamily::custom;
    std::string id_;
    std::vector<std::size_t> msg_pos_;
    BitMatrix msg_inverse_;
    std::vector<std::vector<std::uint32_t>> check_adj_;
    std::vector<std::vector<std::uint32_t>> var_adj_;
    std::optional<PolarLayout> polar_;
};

/// y_i >= 0 -> 0, y_i < 0 -> 1.
inline BitVector hard_demodulate(std::span<const double> y) {
    BitVector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] < 0.0 ? 1 : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Constructions

/// Hamming(2^r - 1, 2^r - 1 - r); column j of H is the binary expansion of j+1.
inline LinearCode build_hamming(unsigned r) {
    if (r < 2 || r > 10) throw InputError("build_hamming: r must be in [2, 10]");
    const std::size_t n = (std::size_t{1} << r) - 1;
    BitMatrix h(r, n);
    for (std::size_t c = 0; c < n; ++c)
        for (unsigned b = 0; b < r; ++b)
            if (((c + 1) >> b) & 1u) h.set(b, c, true);
    return LinearCode::from_parity_check(std::move(h), CodeFamily::hamming,
                                         "hamming_" + std::to_string(n) + "_" + std::to_string(n - r));
}

/// Repetition(n, 1); check i ties bit 0 to bit i+1.
inline LinearCode build_repetition(std::size_t n) {
    if (n < 2) throw InputError("build_repetition: n must be >= 2");
    BitMatrix h(n - 1, n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h.set(i, 0, true);
        h.set(i, i + 1, true);
    }
    return LinearCode::from_parity_check(std::move(h), CodeFamily::repetition,
                                         "repetition_" + std::to_string(n) + "_1");
}

/// Bhattacharyya parameters of the n synthesized channels of F^{⊗m} (no bit
/// reversal). Index i's first half/second half split at each stage matches the
/// successive-cancellation recursion: first half takes 2Z - Z², second half Z².
inline std::vector<double> polar_bhattacharyya(std::size_t n, double z0) {
    std::vector<double> z(n);
    auto rec = [&](auto&& self, std::size_t offset, std::size_t len, double zin) -> void {
        if (len == 1) {
            z[offset] = zin;
            return;
        }
        self(self, offset, len / 2, 2.0 * zin - zin * zin);
        self(self, offset + len / 2, len / 2, zin * zin);
    };
    rec(rec, 0, n, z0);
    return z;
}

inline bool is_power_of_two(std::size_t n) noexcept { return n >= 1 && (n & (n - 1)) == 0; }

/// Polar(n, k) with the n - k least reliable channels frozen.
/// Reliability uses the Bhattacharyya recursion from Z0 = exp(-R·10^(snr/10)).
inline LinearCode build_polar(std::size_t n, std::size_t k, double design_snr_db = 2.0) {
    if (!is_power_of_two(n) || n < 2) throw InputError("build_polar: n must be a power of two >= 2");
    if (k == 0 || k >= n) throw InputError("build_polar: need 0 < k < n");
    const double rate = static_cast<double>(k) / static_cast<double>(n);
    const double z0 = std::exp(-rate * std::pow(10.0, design_snr_db / 10.0));

    const std::vector<double> z = polar_bhattacharyya(n, z0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Least reliable first; ties freeze the lower index.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });
    std::vector<std::uint8_t> frozen(n, 0);
    for (std::size_t i = 0; i < n - k; ++i) frozen[order[i]] = 1;

    // Rows of F^{⊗m}: row i has a 1 at column j iff (j & i) == j.
    BitMatrix g(k, n);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (frozen[i]) continue;
        for (std::size_t j = 0; j < n; ++j)
            if ((j & i) == j) g.set(r, j, true);
        ++r;
    }
    auto code = LinearCode::from_generator(std::move(g), CodeFamily::polar,
                                           "polar_" + std::to_string(n) + "_" + std::to_string(k));
    return code.with_polar_layout(PolarLayout{design_snr_db, std::move(frozen), std::move(z)});
}

/// Progressive-edge-growth parity-check matrix with constant variable degree.
/// Each new edge goes to the lowest-degree check outside the current
/// neighbourhood tree of the variable (or at its deepest level when the tree
/// covers every check). Ties are broken by a seeded generator. Retries with the
/// next seed until H has full rank.
inline LinearCode build_peg_ldpc(std::size_t n, std::size_t m, std::size_t var_degree, std::uint64_t seed,
                                 std::string id = {}) {
    if (m == 0 || m >= n) throw InputError("build_peg_ldpc: need 0 < m < n");
    if (var_degree == 0 || var_degree > m) throw InputError("build_peg_ldpc: bad variable degree");
    if (id.empty()) id = "ldpc_" + std::to_string(n) + "_" + std::to_string(n - m);

    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        std::mt19937_64 rng(seed + attempt);
        std::vector<std::vector<std::size_t>> var_adj(n), chk_adj(m);

        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t e = 0; e < var_degree; ++e) {
                std::vector<std::uint8_t> reached(m, 0);
                std::vector<std::size_t> candidates;
                if (!var_adj[v].empty()) {
                    // Breadth-first expansion over the current graph.
                    std::vector<std::uint8_t> var_seen(n, 0);
                    var_seen[v] = 1;
                    std::vector<std::size_t> frontier_vars{v};
                    std::size_t reached_count = 0;
                    std::vector<std::size_t> last_level;
                    while (true) {
                        std::vector<std::size_t> new_checks;
                        for (auto fv : frontier_vars)
                            for (auto c : var_adj[fv])
                                if (!reached[c]) {
                                    reached[c] = 1;
                                    new_checks.push_back(c);
                                }
                        if (new_checks.empty()) break;  // tree stopped growing
                        reached_count += new_checks.size();
                        last_level = new_checks;
                        if (reached_count == m) break;
                        std::vector<std::size_t> next_vars;
                        for (auto c : new_checks)
                            for (auto nv : chk_adj[c])
                                if (!var_seen[nv]) {
                                    var_seen[nv] = 1;
                                    next_vars.push_back(nv);
                                }
                        frontier_vars = std::move(next_vars);
                    }
                    if (reached_count < m) {
                        for (std::size_t c = 0; c < m; ++c)
                            if (!reached[c]) candidates.push_back(c);
                    } else {
                        for (auto c : last_level)
                            if (std::find(var_adj[v].begin(), var_adj[v].end(), c) == var_adj[v].end())
                                candidates.push_back(c);
                    }
                }
                if (candidates.empty()) {
                    for (std::size_t c = 0; c < m; ++c)
                        if (std::find(var_adj[v].begin(), var_adj[v].end(), c) == var_adj[v].end())
                            candidates.push_back(c);
                }
                std::size_t best_deg = SIZE_MAX;
                for (auto c : candidates) best_deg = std::min(best_deg, chk_adj[c].size());
                std::vector<std::size_t> best;
                for (auto c : candidates)
                    if (chk_adj[c].size() == best_deg) best.push_back(c);
                const std::size_t pick = best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
                var_adj[v].push_back(pick);
                chk_adj[pick].push_back(v);
            }
        }

        BitMatrix h(m, n);
        for (std::size_t v = 0; v < n; ++v)
            for (auto c : var_adj[v]) h.set(c, v, true);
        if (rank(h) == m) return LinearCode::from_parity_check(std::move(h), CodeFamily::ldpc, id);
    }
    throw InputError("build_peg_ldpc: could not reach full rank");
}

}  // namespace decrob
