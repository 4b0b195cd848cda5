#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace morphrom {

// FNV-1a 64-bit over a byte stream. Used for content checksums; not
// cryptographic, just a cheap deterministic fingerprint.
class Fnv1a {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void update_double(double v);
    void update_u64(std::uint64_t v);
    void update_string(const std::string& s) { update(s.data(), s.size()); }
    std::uint64_t digest() const { return h_; }
    std::string hex() const;

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

// Little-endian raw binary of 64-bit floats, no header. The checksum is the
// FNV-1a digest of the byte stream as written.
void write_f64(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_f64(const std::filesystem::path& path);
std::string checksum_f64(const std::vector<double>& values);

// Shortest text that round-trips a double, for canonical CSV/JSON output.
std::string fmt_double(double v);

// Uniform double in [0,1) from the generator's raw bits; avoids the
// implementation-defined std::uniform_real_distribution.
inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written to disjoint slots; iteration-to-thread assignment is not
// deterministic but the work per index is.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

void warn(const std::string& msg);

}  // namespace morphrom
