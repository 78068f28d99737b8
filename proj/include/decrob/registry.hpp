#pragma once

// Name-based lookup of the bundled codes.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "decrob/alist.hpp"
#include "decrob/code.hpp"

namespace decrob {

inline std::string default_data_dir() {
#ifdef DECROB_DATA_DIR
    return DECROB_DATA_DIR;
#else
    return "data";
#endif
}

/// Resolves a code id:
///   hamming_7_4, hamming_15_11, repetition_<n>_1, polar_<n>_<k>,
///   any <name> with <data_dir>/codes/<name>.alist (e.g. ldpc_49_24),
///   alist:<path> for an arbitrary parity-check file.
inline std::shared_ptr<const LinearCode> make_code(const std::string& id, const std::string& data_dir = default_data_dir()) {
    unsigned a = 0, b = 0;
    if (id.rfind("alist:", 0) == 0) {
        const std::string path = id.substr(6);
        return std::make_shared<LinearCode>(
            load_alist_file(path, std::filesystem::path(path).stem().string(), CodeFamily::custom));
    }
    if (std::sscanf(id.c_str(), "polar_%u_%u", &a, &b) == 2) return std::make_shared<LinearCode>(build_polar(a, b));
    if (std::sscanf(id.c_str(), "repetition_%u_%u", &a, &b) == 2 && b == 1)
        return std::make_shared<LinearCode>(build_repetition(a));
    if (id == "hamming_7_4") return std::make_shared<LinearCode>(build_hamming(3));
    if (id == "hamming_15_11") return std::make_shared<LinearCode>(build_hamming(4));

    const auto path = std::filesystem::path(data_dir) / "codes" / (id + ".alist");
    if (!std::filesystem::exists(path)) throw InputError("unknown code id: " + id);
    const CodeFamily family = id.rfind("ldpc", 0) == 0 ? CodeFamily::ldpc : CodeFamily::custom;
    return std::make_shared<LinearCode>(load_alist_file(path.string(), id, family));
}

}  // namespace decrob
