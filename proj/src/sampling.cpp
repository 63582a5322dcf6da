#include "qrlab/sampling.hpp"

#include <algorithm>
#include <atomic>

namespace qrlab {

double Halton::radical_inverse(uint64_t i, uint32_t base) {
    double inv = 1.0 / base, f = inv, x = 0.0;
    while (i > 0) {
        x += f * double(i % base);
        i /= base;
        f *= inv;
    }
    return x;
}

std::pair<double, double> Halton::next01() {
    uint64_t i = index_++;
    return {radical_inverse(i, 2), radical_inverse(i, 3)};
}

cplx Halton::next(const Rect& r) {
    auto [u, v] = next01();
    return cplx(r.x0 + u * r.width(), r.y0 + v * r.height());
}

void parallel_chunks(int n, int jobs, const std::function<void(int, int, int)>& fn,
                     int* out_chunks) {
    // Chunk layout depends only on n, never on the worker count, so
    // per-chunk results merge identically for any jobs value.
    const int chunk_size = kChunkSize;
    const int nchunks = chunk_count(n);
    if (out_chunks) *out_chunks = nchunks;
    if (jobs <= 1 || nchunks <= 1) {
        for (int c = 0; c < nchunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<int> next_chunk{0};
    int nw = std::min(jobs, nchunks);
    for (int w = 0; w < nw; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                int c = next_chunk.fetch_add(1);
                if (c >= nchunks) return;
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            }
        });
    }
    for (auto& t : workers) t.join();
}

} // namespace qrlab
