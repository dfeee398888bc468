#include "nsv/simd.hpp"

namespace nsv::simd {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void weighted_scale(std::size_t n, const double* w, const double* x, double* y) {
    for (std::size_t m = 0; m < n; ++m) {
        y[2 * m] = w[m] * x[2 * m];
        y[2 * m + 1] = w[m] * x[2 * m + 1];
    }
}

double weighted_norm2(std::size_t n, const double* w, const double* x) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m)
        s += w[m] * (x[2 * m] * x[2 * m] + x[2 * m + 1] * x[2 * m + 1]);
    return s;
}

double weighted_dot(std::size_t n, const double* w, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m)
        s += w[m] * (x[2 * m] * y[2 * m] + x[2 * m + 1] * y[2 * m + 1]);
    return s;
}

void shift_blend(std::size_t n, double theta, const double* prev, double* cur, double sigma,
                 const double* src) {
    const double keep = 1.0 - theta;
    for (std::size_t i = 0; i < n; ++i) cur[i] = keep * cur[i] + theta * prev[i] + sigma * src[i];
}

void mul_add(std::size_t n, const double* a, const double* b, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", axpy, axpby, weighted_scale, weighted_norm2,
                         weighted_dot, shift_blend, mul_add};
    return ops;
}

}  // namespace nsv::simd
