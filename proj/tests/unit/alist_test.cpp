#include <gtest/gtest.h>

#include "decrob/alist.hpp"
#include "decrob/registry.hpp"

using namespace decrob;

namespace {

// Standard Hamming(7,4) H (column j = binary of j+1, LSB in row 1), written by hand.
constexpr const char* kHamming74 =
    "7 3\n"
    "3 4\n"
    "1 1 2 1 2 2 3\n"
    "4 4 4\n"
    "1 0 0\n"
    "2 0 0\n"
    "1 2 0\n"
    "3 0 0\n"
    "1 3 0\n"
    "2 3 0\n"
    "1 2 3\n"
    "1 3 5 7\n"
    "2 3 6 7\n"
    "4 5 6 7\n";

}  // namespace

TEST(Alist, HandWrittenHammingRoundTrip) {
    const auto code = load_alist(kHamming74, "hamming_7_4", CodeFamily::hamming);
    EXPECT_EQ(code.n(), 7u);
    EXPECT_EQ(code.k(), 4u);
    EXPECT_TRUE(multiply_transposed(code.generator(), code.parity_check()).is_zero());
    EXPECT_EQ(code.parity_check(), build_hamming(3).parity_check());
    EXPECT_EQ(to_alist(code), kHamming74);
}

TEST(Alist, SerializationIsIdempotentOnBundledFiles) {
    for (const char* id : {"hamming_7_4", "hamming_15_11", "repetition_3_1", "ldpc_49_24", "ldpc_121_60"}) {
        const auto code = make_code(id);
        const std::string once = to_alist(*code);
        const std::string twice = to_alist(load_alist(once));
        EXPECT_EQ(once, twice) << id;
    }
}

TEST(Alist, LdpcDimensionsAfterParse) {
    const auto big = make_code("ldpc_121_60");
    EXPECT_EQ(big->n(), 121u);
    EXPECT_EQ(big->k(), 60u);
    const auto small = make_code("ldpc_49_24");
    EXPECT_EQ(small->n(), 49u);
    EXPECT_EQ(small->k(), 24u);
}

TEST(Alist, HeaderClaimingMoreColumnsThanListed) {
    // Claims n = 10 but only 9 column degrees are present.
    const char* text =
        "10 3\n3 4\n1 1 2 1 2 2 3 1 1\n4 4 4\n";
    try {
        load_alist(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Alist, MissingColumnLineIsReported) {
    // Degrees consistent with n = 7 but only 6 column lists: the first row list
    // is read as column 7 and the mismatch is caught.
    std::string text = kHamming74;
    const auto pos = text.find("1 2 3\n1 3 5 7");
    text.erase(pos, 6);
    EXPECT_THROW(load_alist(text), ParseError);
}

TEST(Alist, IndexOutOfRange) {
    std::string text = kHamming74;
    text.replace(text.find("1 2 3\n1 3 5 7"), 5, "1 2 9");
    try {
        load_alist(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 11u);
    }
}

TEST(Alist, InconsistentDegreeCounts) {
    std::string text = kHamming74;
    text.replace(text.find("4 4 4\n"), 6, "4 4 3\n");
    EXPECT_THROW(load_alist(text), ParseError);
}

TEST(Alist, GarbageToken) {
    EXPECT_THROW(load_alist("7 x\n"), ParseError);
}
