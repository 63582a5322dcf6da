#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "qrlab/expr.hpp"

namespace qrlab {

/// Axis-aligned rectangle used for sweeps and sampling plans.
struct Rect {
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(cplx z) const {
        return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
    }
};

/// Deterministic low-discrepancy point source (Halton, bases 2 and 3).
/// The seed offsets the start index so distinct plans decorrelate while
/// staying reproducible bit-for-bit.
class Halton {
public:
    explicit Halton(unsigned seed = 0) : index_(17 + 1009ULL * seed) {}

    /// Next point in the unit square.
    std::pair<double, double> next01();

    /// Next point in a rectangle.
    cplx next(const Rect& r);

private:
    static double radical_inverse(uint64_t i, uint32_t base);
    uint64_t index_;
};

/// Uniform half-open grid: n points per axis, x_i = x0 + i*w/n. Visits
/// row-major order.
inline void for_grid(const Rect& r, int n, const std::function<void(cplx)>& fn) {
    double hx = r.width() / n, hy = r.height() / n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            fn(cplx(r.x0 + i * hx, r.y0 + j * hy));
}

/// Chunk layout for parallel loops: fixed size, independent of worker count,
/// so per-chunk results always merge identically.
constexpr int kChunkSize = 4096;
inline int chunk_count(int n) { return (n + kChunkSize - 1) / kChunkSize; }

/// Chunked deterministic parallel loop over [0, n): results must be merged
/// by the caller in chunk order. jobs <= 1 runs inline.
void parallel_chunks(int n, int jobs, const std::function<void(int chunk, int begin, int end)>& fn,
                     int* out_chunks = nullptr);

} // namespace qrlab
