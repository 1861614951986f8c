#ifndef SCGAN_BLAS_HPP
#define SCGAN_BLAS_HPP

#include <cstdlib>
#include <dlfcn.h>
#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "scgan/common.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// GEMM via OpenBLAS, loaded lazily with dlopen.
//
// Two reasons not to just link -lopenblas:
//  * OpenBLAS picks its kernels in a load-time constructor. On this class of
//    machine the runtime CPU detection falls back to a generic (very slow)
//    kernel set, and the OPENBLAS_CORETYPE override must be in the
//    environment *before* the library initializes. Linking normally makes
//    that impossible from inside the program; dlopen defers initialization
//    until after we set the variable.
//  * The wrapper pins OpenBLAS to one thread; all parallelism decisions stay
//    with the caller.
// An existing OPENBLAS_CORETYPE in the environment is respected (setenv with
// overwrite=0).
// ---------------------------------------------------------------------------

namespace blas {

enum Transpose { no_trans = 111, trans = 112 };

namespace detail {

using SgemmFn = void (*)(int order, int trans_a, int trans_b, int m, int n,
                         int k, float alpha, const float* a, int lda,
                         const float* b, int ldb, float beta, float* c,
                         int ldc);
using DgemmFn = void (*)(int order, int trans_a, int trans_b, int m, int n,
                         int k, double alpha, const double* a, int lda,
                         const double* b, int ldb, double beta, double* c,
                         int ldc);

struct Backend {
    SgemmFn sgemm = nullptr;
    DgemmFn dgemm = nullptr;

    Backend() {
#if defined(__GLIBC__)
        // Large scratch blocks (im2col columns, Winograd tile matrices) churn
        // every call. By default glibc serves them with mmap and returns them
        // to the kernel on free, so each call pays page faults and zero-fills
        // for the same few hundred MB. Keep them on the heap freelist instead.
        ::mallopt(M_MMAP_THRESHOLD, 1 << 30);
        ::mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
#if defined(__x86_64__)
        if (__builtin_cpu_supports("avx512f")) {
            ::setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
        } else if (__builtin_cpu_supports("avx2")) {
            ::setenv("OPENBLAS_CORETYPE", "HASWELL", 0);
        }
#endif
        void* handle = ::dlopen("libopenblas.so.0", RTLD_NOW | RTLD_LOCAL);
        if (!handle) handle = ::dlopen("libopenblas.so", RTLD_NOW | RTLD_LOCAL);
        SCGAN_CHECK(handle != nullptr, IoError,
                    "failed to load libopenblas: ", ::dlerror());
        sgemm = reinterpret_cast<SgemmFn>(::dlsym(handle, "cblas_sgemm"));
        dgemm = reinterpret_cast<DgemmFn>(::dlsym(handle, "cblas_dgemm"));
        SCGAN_CHECK(sgemm && dgemm, IoError,
                    "libopenblas is missing cblas_sgemm/cblas_dgemm");
        using SetThreadsFn = void (*)(int);
        if (auto set_threads = reinterpret_cast<SetThreadsFn>(
                ::dlsym(handle, "openblas_set_num_threads"))) {
            set_threads(1);
        }
    }
};

inline const Backend& backend() {
    static const Backend instance;
    return instance;
}

constexpr int row_major = 101;

} // namespace detail

// C = alpha * op(A) * op(B) + beta * C, row-major. Dimensions are those of
// op(A) [m x k], op(B) [k x n], C [m x n]; leading dimensions are the row
// strides of the stored (untransposed) matrices.
inline void gemm(Transpose trans_a, Transpose trans_b, int m, int n, int k,
                 float alpha, const float* a, int lda, const float* b, int ldb,
                 float beta, float* c, int ldc) {
    detail::backend().sgemm(detail::row_major, trans_a, trans_b, m, n, k,
                            alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void gemm(Transpose trans_a, Transpose trans_b, int m, int n, int k,
                 double alpha, const double* a, int lda, const double* b,
                 int ldb, double beta, double* c, int ldc) {
    detail::backend().dgemm(detail::row_major, trans_a, trans_b, m, n, k,
                            alpha, a, lda, b, ldb, beta, c, ldc);
}

// Convenience form for dense row-major operands with natural strides.
template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int k, int n,
            bool transpose_a = false, bool transpose_b = false, T beta = T(0)) {
    gemm(transpose_a ? trans : no_trans, transpose_b ? trans : no_trans, m, n,
         k, T(1), a, transpose_a ? m : k, b, transpose_b ? k : n, beta, c, n);
}

} // namespace blas

} // namespace scgan

#endif
