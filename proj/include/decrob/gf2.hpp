#pragma once

// Dense GF(2) linear algebra with rows packed into 64-bit words.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "decrob/errors.hpp"

namespace decrob {

/// One bit per element, values in {0,1}.
using BitVector = std::vector<std::uint8_t>;

class BitMatrix {
public:
    using Word = std::uint64_t;
    static constexpr std::size_t kWordBits = 64;

    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), words_per_row_((cols + kWordBits - 1) / kWordBits),
          data_(rows * words_per_row_, 0) {}

    static BitMatrix identity(std::size_t n) {
        BitMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
        return m;
    }

    static BitMatrix from_rows(const std::vector<BitVector>& rows) {
        if (rows.empty()) return {};
        BitMatrix m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) throw InputError("BitMatrix::from_rows: ragged rows");
            for (std::size_t c = 0; c < m.cols_; ++c) m.set(r, c, rows[r][c] != 0);
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return words_per_row_; }

    bool get(std::size_t r, std::size_t c) const noexcept {
        return (data_[r * words_per_row_ + c / kWordBits] >> (c % kWordBits)) & 1u;
    }

    void set(std::size_t r, std::size_t c, bool v) noexcept {
        Word& w = data_[r * words_per_row_ + c / kWordBits];
        const Word mask = Word{1} << (c % kWordBits);
        w = v ? (w | mask) : (w & ~mask);
    }

    void flip(std::size_t r, std::size_t c) noexcept {
        data_[r * words_per_row_ + c / kWordBits] ^= Word{1} << (c % kWordBits);
    }

    std::span<const Word> row(std::size_t r) const noexcept {
        return {data_.data() + r * words_per_row_, words_per_row_};
    }
    std::span<Word> row(std::size_t r) noexcept { return {data_.data() + r * words_per_row_, words_per_row_}; }

    void xor_row_into(std::size_t src, std::size_t dst) noexcept {
        for (std::size_t w = 0; w < words_per_row_; ++w)
            data_[dst * words_per_row_ + w] ^= data_[src * words_per_row_ + w];
    }

    void swap_rows(std::size_t a, std::size_t b) noexcept {
        if (a == b) return;
        for (std::size_t w = 0; w < words_per_row_; ++w)
            std::swap(data_[a * words_per_row_ + w], data_[b * words_per_row_ + w]);
    }

    BitVector row_bits(std::size_t r) const {
        BitVector out(cols_);
        for (std::size_t c = 0; c < cols_; ++c) out[c] = get(r, c);
        return out;
    }

    std::size_t row_weight(std::size_t r) const noexcept {
        std::size_t w = 0;
        for (Word x : row(r)) w += static_cast<std::size_t>(std::popcount(x));
        return w;
    }

    BitMatrix transposed() const {
        BitMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                if (get(r, c)) t.set(c, r, true);
        return t;
    }

    bool is_zero() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](Word w) { return w == 0; });
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_per_row_ = 0;
    std::vector<Word> data_;
};

/// Packs a bit vector into words (bit c of word c/64).
inline std::vector<BitMatrix::Word> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<BitMatrix::Word> out((bits.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 64] |= BitMatrix::Word{1} << (i % 64);
    return out;
}

/// A·Bᵀ over GF(2). Both operands must share the column count.
inline BitMatrix multiply_transposed(const BitMatrix& a, const BitMatrix& b) {
    if (a.cols() != b.cols()) throw InputError("multiply_transposed: column mismatch");
    BitMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ra = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto rb = b.row(j);
            int parity = 0;
            for (std::size_t w = 0; w < ra.size(); ++w) parity ^= std::popcount(ra[w] & rb[w]) & 1;
            if (parity) out.set(i, j, true);
        }
    }
    return out;
}

/// Parity of the inner product between a packed row and packed vector.
inline std::uint8_t packed_dot(std::span<const BitMatrix::Word> row, std::span<const BitMatrix::Word> v) noexcept {
    int parity = 0;
    for (std::size_t w = 0; w < row.size(); ++w) parity ^= std::popcount(row[w] & v[w]) & 1;
    return static_cast<std::uint8_t>(parity);
}

struct RrefResult {
    BitMatrix reduced;                 ///< reduced row echelon form; zero rows at the bottom
    std::vector<std::size_t> pivots;   ///< pivot column of row i, for i < rank
    std::size_t rank() const noexcept { return pivots.size(); }
};

/// Gauss-Jordan elimination over GF(2).
inline RrefResult rref(BitMatrix m) {
    RrefResult out;
    std::size_t lead = 0;
    for (std::size_t c = 0; c < m.cols() && lead < m.rows(); ++c) {
        std::size_t p = lead;
        while (p < m.rows() && !m.get(p, c)) ++p;
        if (p == m.rows()) continue;
        m.swap_rows(p, lead);
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (r != lead && m.get(r, c)) m.xor_row_into(lead, r);
        out.pivots.push_back(c);
        ++lead;
    }
    out.reduced = std::move(m);
    return out;
}

inline std::size_t rank(const BitMatrix& m) { return rref(m).rank(); }

/// Basis of {x : M xᵀ = 0}, one basis vector per row. Each basis vector has a
/// single 1 among the free (non-pivot) columns.
inline BitMatrix nullspace(const BitMatrix& m) {
    const RrefResult r = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : r.pivots) is_pivot[p] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < m.cols(); ++c)
        if (!is_pivot[c]) free_cols.push_back(c);

    BitMatrix basis(free_cols.size(), m.cols());
    for (std::size_t i = 0; i < free_cols.size(); ++i) {
        const std::size_t f = free_cols[i];
        basis.set(i, f, true);
        for (std::size_t row = 0; row < r.rank(); ++row)
            if (r.reduced.get(row, f)) basis.set(i, r.pivots[row], true);
    }
    return basis;
}

}  // namespace decrob
