#pragma once

#include <complex>
#include <memory>

namespace snls {

using cplx = std::complex<double>;

// Unnormalized complex DFT of fixed length backed by cached FFTW plans.
// Execution is thread-safe; plans are shared between instances.
class Fft {
public:
    explicit Fft(int n);

    int size() const { return n_; }
    // out_j = sum_k in_k exp(+2 pi i jk/n)
    void backward(const cplx* in, cplx* out) const;
    // out_k = sum_j in_j exp(-2 pi i jk/n)
    void forward(const cplx* in, cplx* out) const;

    struct Plans;

private:
    int n_;
    std::shared_ptr<const Plans> plans_;
};

// Long double variant for transforms repeated many times on one state, where
// the round trip's rounding in double precision drifts the norm.
using cplxl = std::complex<long double>;
class FftLong {
public:
    explicit FftLong(int n);

    int size() const { return n_; }
    void backward(const cplxl* in, cplxl* out) const;
    void forward(const cplxl* in, cplxl* out) const;

    struct Plans;

private:
    int n_;
    std::shared_ptr<const Plans> plans_;
};

bool is_power_of_two(long n);
long next_power_of_two(long n);

} // namespace snls
