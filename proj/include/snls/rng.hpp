#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace snls {

// Philox4x32-10 keyed by the master seed. The 128-bit counter is split into a
// 64-bit stream id and a 64-bit block index, so streams never overlap and a
// stream's output does not depend on how many other streams were drawn.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t stream_id);

    // Child stream for a sub-task; derived from (stream id, child index).
    Stream split(std::uint64_t child) const;

    std::uint64_t operator()();
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    double uniform();      // in [0, 1)
    double uniform_pos();  // in (0, 1)
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t id() const { return id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

// Raw Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

} // namespace snls
