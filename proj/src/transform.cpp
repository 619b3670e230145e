#include "snls/transform.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace snls {

struct Fft::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Plans() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::shared_ptr<const Fft::Plans> plans_for(int n) {
    static std::map<int, std::shared_ptr<Fft::Plans>> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto p = std::make_shared<Fft::Plans>();
    std::vector<cplx> a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p->fwd = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    p->bwd = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
    cache.emplace(n, p);
    return p;
}

} // namespace

Fft::Fft(int n) : n_(n), plans_(plans_for(n)) {}

void Fft::backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(plans_->bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void Fft::forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(plans_->fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

struct FftLong::Plans {
    fftwl_plan fwd = nullptr;
    fftwl_plan bwd = nullptr;
    ~Plans() {
        if (fwd) fftwl_destroy_plan(fwd);
        if (bwd) fftwl_destroy_plan(bwd);
    }
};

namespace {

std::shared_ptr<const FftLong::Plans> long_plans_for(int n) {
    static std::map<int, std::shared_ptr<FftLong::Plans>> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto p = std::make_shared<FftLong::Plans>();
    std::vector<cplxl> a(n), b(n);
    auto* in = reinterpret_cast<fftwl_complex*>(a.data());
    auto* out = reinterpret_cast<fftwl_complex*>(b.data());
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p->fwd = fftwl_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    p->bwd = fftwl_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
    cache.emplace(n, p);
    return p;
}

} // namespace

FftLong::FftLong(int n) : n_(n), plans_(long_plans_for(n)) {}

void FftLong::backward(const cplxl* in, cplxl* out) const {
    fftwl_execute_dft(plans_->bwd, reinterpret_cast<fftwl_complex*>(const_cast<cplxl*>(in)),
                      reinterpret_cast<fftwl_complex*>(out));
}

void FftLong::forward(const cplxl* in, cplxl* out) const {
    fftwl_execute_dft(plans_->fwd, reinterpret_cast<fftwl_complex*>(const_cast<cplxl*>(in)),
                      reinterpret_cast<fftwl_complex*>(out));
}

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

long next_power_of_two(long n) {
    long m = 1;
    while (m < n) m <<= 1;
    return m;
}

} // namespace snls
