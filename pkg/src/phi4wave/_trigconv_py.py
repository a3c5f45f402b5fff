"""Pure-Python product-to-sum convolution kernel (fallback for ``_trigconv``)."""


def _rule(mode, n, m):
    # 0: cos*cos, 1: sin*sin, 2: sin*cos, 3: cos*sin; each term carries a factor 1/2
    d = n - m
    r1, r2 = abs(d), n + m
    if mode == 0:
        return r1, 1, r2, 1
    if mode == 1:
        return r1, 1, r2, -1
    if mode == 2:
        return r1, (d > 0) - (d < 0), r2, 1 if r2 > 0 else 0
    return r1, (d < 0) - (d > 0), r2, 1 if r2 > 0 else 0


def trig_product(ux, ut, uval, vx, vt, vval, mode_x, mode_t, out_nx, out_nt):
    """Return 4x the coefficients of the product of two sparse trig sets.

    Output is a dense row-major list of ints of length ``out_nx * out_nt``;
    harmonics at or beyond the output bounds are dropped.
    """
    acc = [0] * (out_nx * out_nt)
    us = [(int(n), int(j), int(c)) for n, j, c in zip(ux, ut, uval) if c]
    vs = [(int(m), int(p), int(c)) for m, p, c in zip(vx, vt, vval) if c]
    xrule = {}
    trule = {}
    for n, j, cu in us:
        for m, p, cv in vs:
            kx = xrule.get((n, m))
            if kx is None:
                kx = xrule[(n, m)] = _rule(mode_x, n, m)
            kt = trule.get((j, p))
            if kt is None:
                kt = trule[(j, p)] = _rule(mode_t, j, p)
            rx1, sx1, rx2, sx2 = kx
            rt1, st1, rt2, st2 = kt
            prod = cu * cv
            for rx, sx in ((rx1, sx1), (rx2, sx2)):
                if not sx or rx >= out_nx:
                    continue
                base = rx * out_nt
                if st1 and rt1 < out_nt:
                    if sx * st1 > 0:
                        acc[base + rt1] += prod
                    else:
                        acc[base + rt1] -= prod
                if st2 and rt2 < out_nt:
                    if sx * st2 > 0:
                        acc[base + rt2] += prod
                    else:
                        acc[base + rt2] -= prod
    return acc
