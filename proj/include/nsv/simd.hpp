#pragma once

#include <cstddef>

namespace nsv::simd {

// Complex arrays are passed as interleaved doubles (re, im). Counts are in
// complex elements unless the name says otherwise. Weights are one real per
// complex element.

using AxpyFn = void (*)(std::size_t n_real, double a, const double* x, double* y);
using AxpbyFn = void (*)(std::size_t n_real, double a, const double* x, double b, double* y);
using WeightedScaleFn = void (*)(std::size_t n, const double* w, const double* x, double* y);
using WeightedNorm2Fn = double (*)(std::size_t n, const double* w, const double* x);
using WeightedDotFn = double (*)(std::size_t n, const double* w, const double* x, const double* y);
using ShiftBlendFn = void (*)(std::size_t n_real, double theta, const double* prev, double* cur,
                              double sigma, const double* src);
using MulAddFn = void (*)(std::size_t n_real, const double* a, const double* b, double* out);

/// One implementation of every vector kernel.
struct Ops {
    const char* name;
    AxpyFn axpy;                     // y += a x
    AxpbyFn axpby;                   // y = a x + b y
    WeightedScaleFn weighted_scale;  // y[m] = w[m] x[m]
    WeightedNorm2Fn weighted_norm2;  // sum w[m] |x[m]|^2
    WeightedDotFn weighted_dot;      // sum w[m] Re(x[m] conj y[m])
    ShiftBlendFn shift_blend;        // cur = (1-theta) cur + theta prev + sigma src
    MulAddFn mul_add;                // out += a b (real arrays)
};

const Ops& scalar_ops();

/// AVX2+FMA table, or nullptr when not compiled in or unsupported by the CPU.
const Ops* avx2_ops();

/// Table used by the library. Chosen once; NSV_SIMD=scalar forces the reference path.
const Ops& active();

}  // namespace nsv::simd
