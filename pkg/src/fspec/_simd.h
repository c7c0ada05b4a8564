/* Row reductions for the separable torus sums.  Kept in C so the compiler
   can vectorise the reduction (omp simd) without -ffast-math. */
#ifndef FSPEC_SIMD_H
#define FSPEC_SIMD_H

#include <stddef.h>

static inline double fspec_row_sum1(const double *x, const double *w,
                                    ptrdiff_t n, double a)
{
    double s = 0.0;
    ptrdiff_t m;
#pragma omp simd reduction(+:s)
    for (m = 0; m < n; m++) {
        s += w[m] / (a + x[m]);
    }
    return s;
}

static inline double fspec_row_sum2(const double *x, const double *w,
                                    ptrdiff_t n, double a)
{
    double s = 0.0;
    ptrdiff_t m;
#pragma omp simd reduction(+:s)
    for (m = 0; m < n; m++) {
        double d = a + x[m];
        s += w[m] / (d * d);
    }
    return s;
}

#endif
