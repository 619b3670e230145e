#include "snls/io.hpp"

#include "snls/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace snls {

namespace {

static_assert(std::endian::native == std::endian::little, "record I/O assumes a little-endian host");

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

bool get_u64(std::istream& is, std::uint64_t& v) {
    is.read(reinterpret_cast<char*>(&v), 8);
    return is.gcount() == 8;
}

} // namespace

void write_record(std::ostream& os, const SpectralField& f, int M) {
    put_u64(os, std::uint64_t(std::int64_t(f.K())));
    put_f64(os, f.L());
    put_u64(os, std::uint64_t(std::int64_t(M)));
    for (const auto& c : f.data()) {
        put_f64(os, c.real());
        put_f64(os, c.imag());
    }
}

bool read_record(std::istream& is, SpectralField& f, int& M) {
    std::uint64_t k, l, m;
    if (!get_u64(is, k)) {
        if (is.gcount() == 0) return false;
        throw NumericalError(FaultKind::Io, "truncated record header");
    }
    if (!get_u64(is, l) || !get_u64(is, m)) throw NumericalError(FaultKind::Io, "truncated record header");
    auto K = std::int64_t(k);
    if (K < 0 || K > (1 << 24)) throw NumericalError(FaultKind::Io, "implausible K in record");
    std::vector<cplx> c(2 * K + 1);
    for (auto& v : c) {
        std::uint64_t re, im;
        if (!get_u64(is, re) || !get_u64(is, im)) throw NumericalError(FaultKind::Io, "truncated record body");
        v = cplx(std::bit_cast<double>(re), std::bit_cast<double>(im));
    }
    f = SpectralField(int(K), std::bit_cast<double>(l), std::move(c));
    M = int(std::int64_t(m));
    return true;
}

void write_records(const std::string& path, const std::vector<SpectralField>& fs, int M) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NumericalError(FaultKind::Io, "cannot open " + path);
    for (const auto& f : fs) write_record(os, f, M);
}

std::vector<SpectralField> read_records(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NumericalError(FaultKind::Io, "cannot open " + path);
    std::vector<SpectralField> out;
    SpectralField f;
    int M;
    while (read_record(is, f, M)) out.push_back(f);
    return out;
}

void write_csv(std::ostream& os, const SpectralField& f) {
    os << "k,re,im\n" << std::setprecision(17);
    for (int k = -f.K(); k <= f.K(); ++k) os << k << ',' << f[k].real() << ',' << f[k].imag() << '\n';
}

} // namespace snls
