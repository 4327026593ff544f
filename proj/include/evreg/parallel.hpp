#pragma once

#include <cstddef>

namespace evreg {

// Every parallel kernel has a serial twin used as a reference in tests.
enum class Exec { Serial, Parallel };

// Parallel reductions accumulate per fixed-size block and then sum blocks in
// index order, so results are bitwise identical for any thread count.
inline constexpr std::size_t kReduceBlock = 1024;

inline std::size_t block_count(std::size_t n, std::size_t block) {
    return (n + block - 1) / block;
}

} // namespace evreg
