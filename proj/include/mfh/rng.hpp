#pragma once

#include <array>
#include <cstdint>

namespace mfh {

// Philox4x32-10 counter-based generator (Salmon et al. constants).
// Stateless: every draw is a pure function of (key, counter), so the stream
// seen by a given (seed, neuron, step) triple does not depend on how work is
// partitioned across threads.
struct Philox4x32 {
    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              std::uint64_t ctr_lo,
                                              std::uint64_t ctr_hi) {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
        std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
        std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
        for (int round = 0; round < 10; ++round) {
            std::uint64_t pa = static_cast<std::uint64_t>(kMulA) * c0;
            std::uint64_t pb = static_cast<std::uint64_t>(kMulB) * c2;
            std::uint32_t hi_a = static_cast<std::uint32_t>(pa >> 32);
            std::uint32_t lo_a = static_cast<std::uint32_t>(pa);
            std::uint32_t hi_b = static_cast<std::uint32_t>(pb >> 32);
            std::uint32_t lo_b = static_cast<std::uint32_t>(pb);
            std::uint32_t n0 = hi_b ^ c1 ^ k0;
            std::uint32_t n1 = lo_b;
            std::uint32_t n2 = hi_a ^ c3 ^ k1;
            std::uint32_t n3 = lo_a;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += kWeylA;
            k1 += kWeylB;
        }
        return {c0, c1, c2, c3};
    }
};

// Uniform double in [0, 1) from a keyed counter draw.
inline double counter_u01(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t unit, std::uint64_t step) {
    auto b = Philox4x32::block(seed ^ (stream * 0x9E3779B97F4A7C15ull), unit, step);
    std::uint64_t x = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace mfh
