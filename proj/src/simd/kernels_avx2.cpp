#include <immintrin.h>

#include "nsv/simd.hpp"

namespace nsv::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// (w[m], w[m], w[m+1], w[m+1]) for two interleaved complex values
inline __m256d pair_weights(const double* w) {
    __m128d p = _mm_loadu_pd(w);
    return _mm256_permute4x64_pd(_mm256_castpd128_pd256(p), 0b01010000);
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, double* y) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t));
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void weighted_scale(std::size_t n, const double* w, const double* x, double* y) {
    std::size_t m = 0;
    for (; m + 2 <= n; m += 2)
        _mm256_storeu_pd(y + 2 * m, _mm256_mul_pd(pair_weights(w + m), _mm256_loadu_pd(x + 2 * m)));
    for (; m < n; ++m) {
        y[2 * m] = w[m] * x[2 * m];
        y[2 * m + 1] = w[m] * x[2 * m + 1];
    }
}

double weighted_norm2(std::size_t n, const double* w, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t m = 0;
    for (; m + 2 <= n; m += 2) {
        __m256d v = _mm256_loadu_pd(x + 2 * m);
        acc = _mm256_fmadd_pd(pair_weights(w + m), _mm256_mul_pd(v, v), acc);
    }
    double s = hsum(acc);
    for (; m < n; ++m) s += w[m] * (x[2 * m] * x[2 * m] + x[2 * m + 1] * x[2 * m + 1]);
    return s;
}

double weighted_dot(std::size_t n, const double* w, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t m = 0;
    for (; m + 2 <= n; m += 2) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + 2 * m), _mm256_loadu_pd(y + 2 * m));
        acc = _mm256_fmadd_pd(pair_weights(w + m), p, acc);
    }
    double s = hsum(acc);
    for (; m < n; ++m) s += w[m] * (x[2 * m] * y[2 * m] + x[2 * m + 1] * y[2 * m + 1]);
    return s;
}

void shift_blend(std::size_t n, double theta, const double* prev, double* cur, double sigma,
                 const double* src) {
    const double keep = 1.0 - theta;
    const __m256d vk = _mm256_set1_pd(keep), vt = _mm256_set1_pd(theta), vs = _mm256_set1_pd(sigma);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(vk, _mm256_loadu_pd(cur + i));
        r = _mm256_fmadd_pd(vt, _mm256_loadu_pd(prev + i), r);
        r = _mm256_fmadd_pd(vs, _mm256_loadu_pd(src + i), r);
        _mm256_storeu_pd(cur + i, r);
    }
    for (; i < n; ++i) cur[i] = keep * cur[i] + theta * prev[i] + sigma * src[i];
}

void mul_add(std::size_t n, const double* a, const double* b, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                                  _mm256_loadu_pd(out + i)));
    for (; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace

const Ops& avx2_table() {
    static const Ops ops{"avx2", axpy, axpby, weighted_scale, weighted_norm2,
                         weighted_dot, shift_blend, mul_add};
    return ops;
}

}  // namespace nsv::simd
