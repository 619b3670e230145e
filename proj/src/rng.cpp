#include "snls/rng.hpp"

#include <cmath>
#include <numbers>

namespace snls {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), id_(stream_id) {}

Stream Stream::split(std::uint64_t child) const {
    return Stream(seed_, mix64(id_ ^ mix64(child + 1)));
}

void Stream::refill() {
    std::array<std::uint32_t, 4> ctr = {std::uint32_t(block_), std::uint32_t(block_ >> 32),
                                        std::uint32_t(id_), std::uint32_t(id_ >> 32)};
    buf_ = philox4x32(ctr, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
    ++block_;
    pos_ = 0;
}

std::uint64_t Stream::operator()() {
    if (pos_ > 2) refill();
    std::uint64_t v = (std::uint64_t(buf_[pos_]) << 32) | buf_[pos_ + 1];
    pos_ += 2;
    return v;
}

double Stream::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

double Stream::uniform_pos() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

double Stream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

} // namespace snls
