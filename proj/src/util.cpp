#include "morphrom/util.hpp"

#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "morphrom/errors.hpp"

namespace morphrom {

void Fnv1a::update_double(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    update_u64(bits);
}

void Fnv1a::update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    update(b, 8);
}

std::string Fnv1a::hex() const { return to_hex(h_); }

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

namespace {

// Explicit little-endian packing keeps files byte-stable across platforms.
void pack_le(double v, unsigned char out[8]) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
}

double unpack_le(const unsigned char in[8]) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_f64(const std::filesystem::path& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IntegrityError("cannot open for writing: " + path.string());
    std::vector<unsigned char> buf(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) pack_le(values[i], &buf[8 * i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IntegrityError("short write: " + path.string());
}

std::vector<double> read_f64(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot open for reading: " + path.string());
    in.seekg(0, std::ios::end);
    auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (size % 8 != 0) throw IntegrityError("truncated float block: " + path.string());
    std::vector<unsigned char> buf(size);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
    if (!in) throw IntegrityError("short read: " + path.string());
    std::vector<double> values(size / 8);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = unpack_le(&buf[8 * i]);
    return values;
}

std::string checksum_f64(const std::vector<double>& values) {
    Fnv1a h;
    for (double v : values) h.update_double(v);
    return h.hex();
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return std::string(shorter);
    }
    return std::string(buf);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::atomic<int> next{0};
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

}  // namespace morphrom
