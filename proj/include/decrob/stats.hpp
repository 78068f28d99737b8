#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "decrob/errors.hpp"

namespace decrob {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    if (k > n) throw InputError("wilson_interval: k > n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

struct FERStats {
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    double fer = 0.0;
    double fer_inverse = 0.0;  // frames when no error was seen (a lower bound)
    bool fer_inverse_is_bound = false;
    double ber = 0.0;
    Interval wilson_95;

    void finalize() {
        fer = frames ? static_cast<double>(frame_errors) / static_cast<double>(frames) : 0.0;
        ber = bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0;
        fer_inverse_is_bound = frame_errors == 0;
        fer_inverse = frame_errors ? 1.0 / fer : static_cast<double>(frames);
        wilson_95 = wilson_interval(frame_errors, frames);
    }

    std::string fer_inverse_text() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.6g", fer_inverse_is_bound ? ">" : "", fer_inverse);
        return buf;
    }
};

inline double log_binomial_pmf(std::uint64_t k, std::uint64_t n, double p) {
    const double kk = static_cast<double>(k), nn = static_cast<double>(n);
    return std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) + kk * std::log(p) +
           (nn - kk) * std::log1p(-p);
}

/// P(X >= k) for X ~ Bin(n, 1/2).
inline double binomial_half_upper_tail(std::uint64_t k, std::uint64_t n) {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    // Sum in log space from the far tail for accuracy.
    double acc = 0.0;
    double maxlog = -INFINITY;
    std::vector<double> terms;
    terms.reserve(n - k + 1);
    for (std::uint64_t i = k; i <= n; ++i) {
        terms.push_back(log_binomial_pmf(i, n, 0.5));
        maxlog = std::max(maxlog, terms.back());
    }
    for (double t : terms) acc += std::exp(t - maxlog);
    return std::min(1.0, std::exp(maxlog + std::log(acc)));
}

/// Exact McNemar test on paired binary outcomes.
/// b = #(A wrong, B right), c = #(A right, B wrong).
struct McNemar {
    std::uint64_t b = 0;
    std::uint64_t c = 0;
    double p_greater = 1.0;   // H1: A errs more often than B
    double p_two_sided = 1.0;
};

inline McNemar mcnemar_exact(std::uint64_t b, std::uint64_t c) {
    McNemar r{b, c, 1.0, 1.0};
    const std::uint64_t n = b + c;
    if (n == 0) return r;
    r.p_greater = binomial_half_upper_tail(b, n);
    const double p_less = binomial_half_upper_tail(c, n);
    r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_greater, p_less));
    return r;
}

/// McNemar on per-frame error indicators.
inline McNemar mcnemar_exact(std::span<const std::uint8_t> a_err, std::span<const std::uint8_t> b_err) {
    if (a_err.size() != b_err.size()) throw InputError("mcnemar: length mismatch");
    std::uint64_t b = 0, c = 0;
    for (std::size_t i = 0; i < a_err.size(); ++i) {
        b += a_err[i] && !b_err[i];
        c += !a_err[i] && b_err[i];
    }
    return mcnemar_exact(b, c);
}

/// Mean and standard error of paired differences.
struct PairedDifference {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;

    Interval ci(double z = 1.959963984540054) const {
        return {mean - z * standard_error, mean + z * standard_error};
    }
};

inline PairedDifference paired_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("paired_difference: length mismatch");
    PairedDifference d;
    d.count = a.size();
    if (a.empty()) return d;
    double mean = 0, m2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] - b[i];
        const double delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (x - mean);
    }
    d.mean = mean;
    if (a.size() > 1) d.standard_error = std::sqrt(m2 / static_cast<double>(a.size() - 1) / static_cast<double>(a.size()));
    return d;
}

}  // namespace decrob
