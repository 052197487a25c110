"""Numba kernels for orbit generation, histograms and scan sums.

All circle coordinates travel as (hi, lo) pairs of uint64 making up a
raw/2^128 fraction; additions wrap exactly, so the base dynamics is free of
floating drift.  Fiber increments of skew products are evaluated in float64
through the product form

    phi(x) = sum_k  2 a_k sin(pi eps_k) cos(2 pi z_k + pi eps_k),
    z_k = q_k x mod 1,

(the ``coeff``/``coff`` arrays hold 2 a_k sin(pi eps_k) and pi eps_k), and
quantized back onto the lattice before being added to the fiber coordinate.
The z_k tracks advance by q_k alpha mod 1 exactly, so the evaluation stays
faithful even for q_k far beyond float range.

Histogram/scan conventions: sample n covers orbit point n (x_0 included),
flat cell index is sum_i cell_i * m^i, and scan sums at checkpoint N hold
sum_{n<N} f(orbit_n) with Kahan compensation.
"""

import numpy as np
from numba import njit

JIT = {"cache": True, "nogil": True}

_U1 = np.uint64(1)
_U32 = np.uint64(32)
_U64 = np.uint64(64)
_MASK32 = np.uint64(0xFFFFFFFF)
_TWO64 = 18446744073709551616.0
_TWO_PI = 2.0 * np.pi

name = "numba"


@njit(**JIT)
def _cell(hi, m):
    # floor(hi * m / 2^64) without 128-bit overflow, m < 2^32
    h1 = hi >> _U32
    h0 = hi & _MASK32
    return (h1 * m + ((h0 * m) >> _U32)) >> _U32


@njit(**JIT)
def _quantize(value):
    # fractional part of a float as a (hi, lo) lattice pair
    f = value - np.floor(value)
    t = f * _TWO64
    hi = np.uint64(t)
    r = t - np.floor(t)
    lo = np.uint64(r * _TWO64)
    return hi, lo


@njit(**JIT)
def rotation_histogram(ahi, alo, xhi, xlo, n, m, counts):
    d = ahi.shape[0]
    mm = np.uint64(m)
    h = xhi.copy()
    l = xlo.copy()
    for _ in range(n):
        flat = np.uint64(0)
        stride = np.uint64(1)
        for i in range(d):
            flat += _cell(h[i], mm) * stride
            stride *= mm
        counts[flat] += 1
        for i in range(d):
            nl = l[i] + alo[i]
            carry = _U1 if nl < alo[i] else np.uint64(0)
            h[i] = h[i] + ahi[i] + carry
            l[i] = nl
    return counts


@njit(**JIT)
def drift_char_scan(phi0, dhi, dlo, checkpoints, out_re, out_im):
    """Sums of e^(2 pi i phase_n), phase advancing by an exact lattice drift.

    phi0/dhi/dlo: (hi, lo) of the initial phase and of the drift.
    """
    ph_hi = phi0[0]
    ph_lo = phi0[1]
    sre = 0.0
    sim = 0.0
    cre = 0.0
    cim = 0.0
    cp = 0
    ncp = checkpoints.shape[0]
    n = checkpoints[ncp - 1]
    for step in range(n):
        ang = _TWO_PI * (ph_hi * 2.0 ** -64)
        # Kahan-compensated accumulation
        y = np.cos(ang) - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = np.sin(ang) - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
        nl = ph_lo + dlo
        carry = _U1 if nl < dlo else np.uint64(0)
        ph_hi = ph_hi + dhi + carry
        ph_lo = nl
        if step + 1 == checkpoints[cp]:
            out_re[cp] = sre
            out_im[cp] = sim
            cp += 1
            if cp == ncp:
                break
    return out_re, out_im


@njit(**JIT)
def skew_orbit(axhi, axlo, x0hi, x0lo, y0hi, y0lo, zhi, zlo, bhi, blo,
               coeff, coff, n, m, counts,
               m1, m2, checkpoints, out_re, out_im,
               values_re, values_im, record_values):
    """One pass over a skew-product orbit: histogram + character scan + values.

    counts: int64[m*m] cell counts of (x, y); m == 0 disables the histogram.
    checkpoints/out_*: Kahan partial sums of e^(2 pi i (m1 x + m2 y)); empty
    checkpoints disable the scan.  values_*: per-step f values when
    record_values is nonzero (arrays of length n).
    """
    K = zhi.shape[0]
    mm = np.uint64(m)
    xh = x0hi
    xl = x0lo
    yh = y0hi
    yl = y0lo
    zh = zhi.copy()
    zl = zlo.copy()
    sre = 0.0
    sim = 0.0
    cre = 0.0
    cim = 0.0
    cp = 0
    ncp = checkpoints.shape[0]
    do_scan = ncp > 0
    for step in range(n):
        if m > 0:
            flat = _cell(xh, mm) + _cell(yh, mm) * mm
            counts[flat] += 1
        if do_scan or record_values != 0:
            ang = _TWO_PI * (m1 * (xh * 2.0 ** -64) + m2 * (yh * 2.0 ** -64))
            fre = np.cos(ang)
            fim = np.sin(ang)
            if record_values != 0:
                values_re[step] = fre
                values_im[step] = fim
            if do_scan:
                y = fre - cre
                t = sre + y
                cre = (t - sre) - y
                sre = t
                y = fim - cim
                t = sim + y
                cim = (t - sim) - y
                sim = t
        # fiber increment at the current base point
        inc = 0.0
        for k in range(K):
            inc += coeff[k] * np.cos(_TWO_PI * (zh[k] * 2.0 ** -64) + coff[k])
        ihi, ilo = _quantize(inc)
        nl = yl + ilo
        carry = _U1 if nl < ilo else np.uint64(0)
        yh = yh + ihi + carry
        yl = nl
        # advance base and the z tracks
        nl = xl + axlo
        carry = _U1 if nl < axlo else np.uint64(0)
        xh = xh + axhi + carry
        xl = nl
        for k in range(K):
            nl = zl[k] + blo[k]
            carry = _U1 if nl < blo[k] else np.uint64(0)
            zh[k] = zh[k] + bhi[k] + carry
            zl[k] = nl
        if do_scan and step + 1 == checkpoints[cp]:
            out_re[cp] = sre
            out_im[cp] = sim
            cp += 1
            if cp == ncp:
                do_scan = False
    return xh, xl, yh, yl


@njit(**JIT)
def skew_backward_values(axhi, axlo, x0hi, x0lo, y0hi, y0lo, zhi, zlo, bhi, blo,
                         coeff, coff, n, m1, m2, values_re, values_im):
    """f values at orbit points -1, -2, ..., -n (inverse map iterated)."""
    K = zhi.shape[0]
    xh = x0hi
    xl = x0lo
    yh = y0hi
    yl = y0lo
    zh = zhi.copy()
    zl = zlo.copy()
    for step in range(n):
        # x_{-(j+1)} = x_{-j} - alpha, then the increment is evaluated there
        borrow = _U1 if xl < axlo else np.uint64(0)
        xl = xl - axlo
        xh = xh - axhi - borrow
        for k in range(K):
            borrow = _U1 if zl[k] < blo[k] else np.uint64(0)
            zl[k] = zl[k] - blo[k]
            zh[k] = zh[k] - bhi[k] - borrow
        inc = 0.0
        for k in range(K):
            inc += coeff[k] * np.cos(_TWO_PI * (zh[k] * 2.0 ** -64) + coff[k])
        ihi, ilo = _quantize(inc)
        borrow = _U1 if yl < ilo else np.uint64(0)
        yl = yl - ilo
        yh = yh - ihi - borrow
        ang = _TWO_PI * (m1 * (xh * 2.0 ** -64) + m2 * (yh * 2.0 ** -64))
        values_re[step] = np.cos(ang)
        values_im[step] = np.sin(ang)
    return xh, xl, yh, yl


@njit(**JIT)
def rp_fiber_search(zu_hi, zu_lo, zv_hi, zv_lo, bhi, blo, amps, dy, t_max, eps):
    """First time t <= t_max with ||dy + G(zu_t) - G(zu_0) - G(zv_t) + G(zv_0)|| < eps.

    G(z) = sum_k amps_k sin(2 pi z_k); returns -1 if no witness time exists.
    """
    K = zu_hi.shape[0]
    uh = zu_hi.copy()
    ul = zu_lo.copy()
    vh = zv_hi.copy()
    vl = zv_lo.copy()
    g0 = 0.0
    for k in range(K):
        g0 += amps[k] * (np.sin(_TWO_PI * (uh[k] * 2.0 ** -64))
                         - np.sin(_TWO_PI * (vh[k] * 2.0 ** -64)))
    for t in range(t_max + 1):
        gt = 0.0
        for k in range(K):
            gt += amps[k] * (np.sin(_TWO_PI * (uh[k] * 2.0 ** -64))
                             - np.sin(_TWO_PI * (vh[k] * 2.0 ** -64)))
        d = dy + gt - g0
        d = d - np.floor(d)
        if d > 0.5:
            d = 1.0 - d
        if d < eps:
            return t
        for k in range(K):
            nl = ul[k] + blo[k]
            carry = _U1 if nl < blo[k] else np.uint64(0)
            uh[k] = uh[k] + bhi[k] + carry
            ul[k] = nl
            nl = vl[k] + blo[k]
            carry = _U1 if nl < blo[k] else np.uint64(0)
            vh[k] = vh[k] + bhi[k] + carry
            vl[k] = nl
    return -1
