# cython: language_level=3, boundscheck=False, wraparound=False
"""GMP-backed product-to-sum convolution of 2D trigonometric coefficient sets.

Compiled twin of :mod:`phi4wave._trigconv_py`; both expose ``trig_product``
with identical semantics.  Values are fixed-point Python integers and the
accumulation is exact, so the two backends agree bit for bit.
"""
from libc.stdlib cimport malloc, free

from gmpy2 cimport import_gmpy2, mpz, mpz_t, mpz_set, MPZ, GMPy_MPZ_New
import gmpy2

cdef extern from "gmp.h":
    void mpz_init(mpz_t x)
    void mpz_clear(mpz_t x)
    void mpz_mul(mpz_t rop, mpz_t a, mpz_t b)
    void mpz_add(mpz_t rop, mpz_t a, mpz_t b)
    void mpz_sub(mpz_t rop, mpz_t a, mpz_t b)
    int mpz_sgn(mpz_t x)

import_gmpy2()


cdef inline void _rule(int mode, long n, long m, long *r1, int *s1, long *r2, int *s2):
    # 0: cos*cos, 1: sin*sin, 2: sin*cos, 3: cos*sin; each term carries a factor 1/2
    cdef long d = n - m
    r1[0] = d if d >= 0 else -d
    r2[0] = n + m
    if mode == 0:
        s1[0] = 1
        s2[0] = 1
    elif mode == 1:
        s1[0] = 1
        s2[0] = -1
    elif mode == 2:
        s1[0] = (d > 0) - (d < 0)
        s2[0] = 1 if r2[0] > 0 else 0
    else:
        s1[0] = (d < 0) - (d > 0)
        s2[0] = 1 if r2[0] > 0 else 0


cdef long *_as_longs(seq) except NULL:
    cdef Py_ssize_t i, n = len(seq)
    cdef long *buf = <long *> malloc((n + 1) * sizeof(long))
    if buf == NULL:
        raise MemoryError()
    for i in range(n):
        buf[i] = seq[i]
    return buf


def trig_product(ux, ut, uval, vx, vt, vval, int mode_x, int mode_t,
                 long out_nx, long out_nt):
    """Return 4x the coefficients of the product of two sparse trig sets.

    Output is a dense row-major list of ints of length ``out_nx * out_nt``;
    harmonics at or beyond the output bounds are dropped.
    """
    cdef Py_ssize_t nu = len(uval), nv = len(vval)
    cdef Py_ssize_t size = out_nx * out_nt
    cdef Py_ssize_t a, b, i
    cdef long rx1, rx2, rt1, rt2, idx
    cdef int sx1, sx2, st1, st2, sg
    cdef long *cux = NULL
    cdef long *cut = NULL
    cdef long *cvx = NULL
    cdef long *cvt = NULL
    cdef mpz_t *acc = NULL
    cdef mpz_t tmp
    cdef mpz zu, zv, res

    us = [gmpy2.mpz(x) for x in uval]
    vs = [gmpy2.mpz(x) for x in vval]
    cux = _as_longs(ux)
    cut = _as_longs(ut)
    cvx = _as_longs(vx)
    cvt = _as_longs(vt)
    acc = <mpz_t *> malloc((size + 1) * sizeof(mpz_t))
    if acc == NULL:
        free(cux); free(cut); free(cvx); free(cvt)
        raise MemoryError()
    for i in range(size):
        mpz_init(acc[i])
    mpz_init(tmp)
    try:
        for a in range(nu):
            zu = <mpz> us[a]
            if mpz_sgn(zu.z) == 0:
                continue
            for b in range(nv):
                zv = <mpz> vs[b]
                if mpz_sgn(zv.z) == 0:
                    continue
                _rule(mode_x, cux[a], cvx[b], &rx1, &sx1, &rx2, &sx2)
                _rule(mode_t, cut[a], cvt[b], &rt1, &st1, &rt2, &st2)
                mpz_mul(tmp, zu.z, zv.z)
                if rx1 < out_nx:
                    if rt1 < out_nt:
                        sg = sx1 * st1
                        idx = rx1 * out_nt + rt1
                        if sg > 0:
                            mpz_add(acc[idx], acc[idx], tmp)
                        elif sg < 0:
                            mpz_sub(acc[idx], acc[idx], tmp)
                    if rt2 < out_nt:
                        sg = sx1 * st2
                        idx = rx1 * out_nt + rt2
                        if sg > 0:
                            mpz_add(acc[idx], acc[idx], tmp)
                        elif sg < 0:
                            mpz_sub(acc[idx], acc[idx], tmp)
                if rx2 < out_nx:
                    if rt1 < out_nt:
                        sg = sx2 * st1
                        idx = rx2 * out_nt + rt1
                        if sg > 0:
                            mpz_add(acc[idx], acc[idx], tmp)
                        elif sg < 0:
                            mpz_sub(acc[idx], acc[idx], tmp)
                    if rt2 < out_nt:
                        sg = sx2 * st2
                        idx = rx2 * out_nt + rt2
                        if sg > 0:
                            mpz_add(acc[idx], acc[idx], tmp)
                        elif sg < 0:
                            mpz_sub(acc[idx], acc[idx], tmp)
        out = [0] * size
        for i in range(size):
            if mpz_sgn(acc[i]) != 0:
                res = GMPy_MPZ_New(NULL)
                mpz_set(MPZ(res), acc[i])
                out[i] = int(res)
        return out
    finally:
        for i in range(size):
            mpz_clear(acc[i])
        mpz_clear(tmp)
        free(acc)
        free(cux); free(cut); free(cvx); free(cvt)
