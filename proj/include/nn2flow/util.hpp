// Shared plumbing: error types, stable hashing, deterministic parallel loops.
#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace nn2flow {

inline constexpr const char* kToolVersion = "0.1.0";

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input documents (model files, CSVs, plans).
struct SchemaError : Error {
    using Error::Error;
};

// Values outside a declared domain (inputs, labels, widths).
struct DomainError : Error {
    using Error::Error;
};

// Exhaustive enumeration refused because the input grid is too large.
struct DomainTooLarge : Error {
    using Error::Error;
};

// Filesystem problems; surfaces as exit code 2 from the CLI.
struct IoError : Error {
    using Error::Error;
};

// Bad invocation or mismatched artifacts; surfaces as exit code 2.
struct UsageError : Error {
    using Error::Error;
};

// FNV-1a over bytes. Used for model/plan fingerprints embedded in artifacts,
// so it must stay stable across platforms and versions.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return "fnv1a:" + s;
}

// Runs fn(i) for i in [0, n). Results must be written to preallocated,
// disjoint slots so the outcome is identical for any job count.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = jobs;
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nn2flow
