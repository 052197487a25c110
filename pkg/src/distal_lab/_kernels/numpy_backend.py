"""Pure-numpy fallback kernels, chunk-vectorized, exact on the 2^-128 lattice.

Same contracts as the numba backend.  State between chunks is held in Python
integers (exact mod 2^128); within a chunk, precomputed multiple tables of
the drift are added with explicit carry words, so the lattice arithmetic is
bit-identical to the sequential version.  Float evaluations may differ from
the numba backend by an ulp (different libm entry points), which is why
cross-backend tests compare with tolerances on fiber data and exactly on
base coordinates.
"""

import numpy as np

name = "numpy"

MOD = 1 << 128
MASK64 = (1 << 64) - 1
CHUNK = 1 << 15
_TWO64 = 18446744073709551616.0
_TWO_PI = 2.0 * np.pi
_U32 = np.uint64(32)
_MASK32 = np.uint64(0xFFFFFFFF)


def _multiples(raw: int, count: int):
    """(hi, lo) arrays of k*raw mod 2^128 for k in [0, count)."""
    H = np.zeros(count, dtype=np.uint64)
    L = np.zeros(count, dtype=np.uint64)
    if count > 1:
        H[1] = np.uint64((raw >> 64) & MASK64)
        L[1] = np.uint64(raw & MASK64)
    size = 2
    while size < count:
        take = min(size, count - size)
        base = (size * raw) % MOD
        bh = np.uint64(base >> 64)
        bl = np.uint64(base & MASK64)
        lo = L[:take] + bl
        carry = (lo < bl).astype(np.uint64)
        H[size:size + take] = H[:take] + bh + carry
        L[size:size + take] = lo
        size += take
    return H, L


def _add_base(base: int, H, L):
    bh = np.uint64((base >> 64) & MASK64)
    bl = np.uint64(base & MASK64)
    lo = L + bl
    carry = (lo < bl).astype(np.uint64)
    return H + bh + carry, lo


def _cells(hi, m):
    mm = np.uint64(m)
    h1 = hi >> _U32
    h0 = hi & _MASK32
    return (h1 * mm + ((h0 * mm) >> _U32)) >> _U32


def _quantize(values):
    f = values - np.floor(values)
    t = f * _TWO64
    hi = t.astype(np.uint64)
    r = t - np.floor(t)
    lo = (r * _TWO64).astype(np.uint64)
    return hi, lo


def _prefix128(ihi, ilo):
    """Running mod-2^128 sums of (hi, lo) increments (inclusive)."""
    clo = np.cumsum(ilo, dtype=np.uint64)
    prev = np.empty_like(clo)
    prev[0] = np.uint64(0)
    prev[1:] = clo[:-1]
    wraps = np.cumsum((clo < prev).astype(np.uint64), dtype=np.uint64)
    chi = np.cumsum(ihi, dtype=np.uint64) + wraps
    return chi, clo


def _pack(hi, lo) -> int:
    return (int(hi) << 64) | int(lo)


def rotation_histogram(ahi, alo, xhi, xlo, n, m, counts):
    d = ahi.shape[0]
    a_raws = [_pack(ahi[i], alo[i]) for i in range(d)]
    x = [_pack(xhi[i], xlo[i]) for i in range(d)]
    chunk = min(CHUNK, n)
    tables = [_multiples(a_raws[i], chunk) for i in range(d)]
    acc = np.zeros(m ** d, dtype=np.int64)
    done = 0
    while done < n:
        c = min(chunk, n - done)
        flat = np.zeros(c, dtype=np.uint64)
        stride = np.uint64(1)
        for i in range(d):
            hi, _lo = _add_base(x[i], tables[i][0][:c], tables[i][1][:c])
            flat += _cells(hi, m) * stride
            stride *= np.uint64(m)
            x[i] = (x[i] + c * a_raws[i]) % MOD
        acc += np.bincount(flat, minlength=m ** d)
        done += c
    counts += acc
    return counts


class _Kahan:
    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, v: float):
        y = v - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t


def drift_char_scan(phi0, dhi, dlo, checkpoints, out_re, out_im):
    d_raw = _pack(dhi, dlo)
    ph = _pack(phi0[0], phi0[1])
    n = int(checkpoints[-1])
    chunk = min(CHUNK, n)
    H, L = _multiples(d_raw, chunk)
    sre, sim = _Kahan(), _Kahan()
    cp = 0
    done = 0
    while done < n and cp < len(checkpoints):
        c = min(chunk, n - done)
        hi, _lo = _add_base(ph, H[:c], L[:c])
        ang = _TWO_PI * (hi * 2.0 ** -64)
        fre = np.cos(ang)
        fim = np.sin(ang)
        hits = [int(k) - done for k in checkpoints[cp:] if done < int(k) <= done + c]
        if hits:
            cre = np.cumsum(fre)
            cim = np.cumsum(fim)
            for h in hits:
                out_re[cp] = sre.s + cre[h - 1]
                out_im[cp] = sim.s + cim[h - 1]
                cp += 1
        sre.add(float(np.sum(fre)))
        sim.add(float(np.sum(fim)))
        ph = (ph + c * d_raw) % MOD
        done += c
    return out_re, out_im


def skew_orbit(axhi, axlo, x0hi, x0lo, y0hi, y0lo, zhi, zlo, bhi, blo,
               coeff, coff, n, m, counts,
               m1, m2, checkpoints, out_re, out_im,
               values_re, values_im, record_values):
    K = zhi.shape[0]
    a_raw = _pack(axhi, axlo)
    x = _pack(x0hi, x0lo)
    y = _pack(y0hi, y0lo)
    z = [_pack(zhi[k], zlo[k]) for k in range(K)]
    b_raws = [_pack(bhi[k], blo[k]) for k in range(K)]
    chunk = min(CHUNK, max(n, 1))
    x_tab = _multiples(a_raw, chunk)
    z_tabs = [_multiples(b_raws[k], chunk) for k in range(K)]
    acc = np.zeros(m * m, dtype=np.int64) if m > 0 else None
    sre, sim = _Kahan(), _Kahan()
    cp = 0
    ncp = len(checkpoints)
    done = 0
    while done < n:
        c = min(chunk, n - done)
        x_hi, _ = _add_base(x, x_tab[0][:c], x_tab[1][:c])
        inc = np.zeros(c, dtype=np.float64)
        z_his = []
        for k in range(K):
            z_hi, _ = _add_base(z[k], z_tabs[k][0][:c], z_tabs[k][1][:c])
            z_his.append(z_hi)
            inc += coeff[k] * np.cos(_TWO_PI * (z_hi * 2.0 ** -64) + coff[k])
        ihi, ilo = _quantize(inc)
        phi_cum_hi, phi_cum_lo = _prefix128(ihi, ilo)
        # y at point j is y_base plus the increments of points < j
        y_hi = np.empty(c, dtype=np.uint64)
        y_lo = np.empty(c, dtype=np.uint64)
        y_hi[0] = np.uint64((y >> 64) & MASK64)
        y_lo[0] = np.uint64(y & MASK64)
        if c > 1:
            bl = y_lo[0]
            lo = phi_cum_lo[:-1] + bl
            carry = (lo < bl).astype(np.uint64)
            y_hi[1:] = phi_cum_hi[:-1] + y_hi[0] + carry
            y_lo[1:] = lo
        if m > 0:
            flat = _cells(x_hi, m) + _cells(y_hi, m) * np.uint64(m)
            acc += np.bincount(flat, minlength=m * m)
        if ncp > 0 or record_values != 0:
            ang = _TWO_PI * (m1 * (x_hi * 2.0 ** -64) + m2 * (y_hi * 2.0 ** -64))
            fre = np.cos(ang)
            fim = np.sin(ang)
            if record_values != 0:
                values_re[done:done + c] = fre
                values_im[done:done + c] = fim
            if cp < ncp:
                hits = [int(k) - done for k in checkpoints[cp:] if done < int(k) <= done + c]
                if hits:
                    cre = np.cumsum(fre)
                    cim = np.cumsum(fim)
                    for h in hits:
                        out_re[cp] = sre.s + cre[h - 1]
                        out_im[cp] = sim.s + cim[h - 1]
                        cp += 1
                sre.add(float(np.sum(fre)))
                sim.add(float(np.sum(fim)))
        x = (x + c * a_raw) % MOD
        y = (y + _pack(phi_cum_hi[-1], phi_cum_lo[-1])) % MOD
        for k in range(K):
            z[k] = (z[k] + c * b_raws[k]) % MOD
        done += c
    if m > 0:
        counts += acc
    return (np.uint64(x >> 64), np.uint64(x & MASK64),
            np.uint64(y >> 64), np.uint64(y & MASK64))


def skew_backward_values(axhi, axlo, x0hi, x0lo, y0hi, y0lo, zhi, zlo, bhi, blo,
                         coeff, coff, n, m1, m2, values_re, values_im):
    K = zhi.shape[0]
    a_neg = (-_pack(axhi, axlo)) % MOD
    x = _pack(x0hi, x0lo)
    y = _pack(y0hi, y0lo)
    z = [_pack(zhi[k], zlo[k]) for k in range(K)]
    b_negs = [(-_pack(bhi[k], blo[k])) % MOD for k in range(K)]
    chunk = min(CHUNK, max(n, 1))
    x_tab = _multiples(a_neg, chunk)
    z_tabs = [_multiples(b_negs[k], chunk) for k in range(K)]
    done = 0
    while done < n:
        c = min(chunk, n - done)
        # backward point j in this block sits at x - (j+1) alpha
        x_hi, _ = _add_base((x + a_neg) % MOD, x_tab[0][:c], x_tab[1][:c])
        inc = np.zeros(c, dtype=np.float64)
        for k in range(K):
            z_hi, _ = _add_base((z[k] + b_negs[k]) % MOD, z_tabs[k][0][:c], z_tabs[k][1][:c])
            inc += coeff[k] * np.cos(_TWO_PI * (z_hi * 2.0 ** -64) + coff[k])
        ihi, ilo = _quantize(inc)
        phi_cum_hi, phi_cum_lo = _prefix128(ihi, ilo)
        # y - s as y + (2^128 - s): two's complement of the running sums
        neg_lo = (~phi_cum_lo) + np.uint64(1)
        neg_hi = (~phi_cum_hi) + (neg_lo == np.uint64(0)).astype(np.uint64)
        bl = np.uint64(y & MASK64)
        bh = np.uint64((y >> 64) & MASK64)
        lo = neg_lo + bl
        carry = (lo < bl).astype(np.uint64)
        y_hi = neg_hi + bh + carry
        y_lo = lo
        ang = _TWO_PI * (m1 * (x_hi * 2.0 ** -64) + m2 * (y_hi * 2.0 ** -64))
        values_re[done:done + c] = np.cos(ang)
        values_im[done:done + c] = np.sin(ang)
        x = (x + c * a_neg) % MOD
        y = (y - _pack(phi_cum_hi[-1], phi_cum_lo[-1])) % MOD
        for k in range(K):
            z[k] = (z[k] + c * b_negs[k]) % MOD
        done += c
    return (np.uint64(x >> 64), np.uint64(x & MASK64),
            np.uint64(y >> 64), np.uint64(y & MASK64))


def rp_fiber_search(zu_hi, zu_lo, zv_hi, zv_lo, bhi, blo, amps, dy, t_max, eps):
    K = zu_hi.shape[0]
    u = [_pack(zu_hi[k], zu_lo[k]) for k in range(K)]
    v = [_pack(zv_hi[k], zv_lo[k]) for k in range(K)]
    b_raws = [_pack(bhi[k], blo[k]) for k in range(K)]
    g0 = 0.0
    for k in range(K):
        g0 += amps[k] * (np.sin(_TWO_PI * ((u[k] >> 64) * 2.0 ** -64))
                         - np.sin(_TWO_PI * ((v[k] >> 64) * 2.0 ** -64)))
    chunk = min(CHUNK, t_max + 1)
    tabs = [_multiples(b_raws[k], chunk) for k in range(K)]
    done = 0
    while done <= t_max:
        c = min(chunk, t_max + 1 - done)
        diff = np.full(c, dy - g0, dtype=np.float64)
        for k in range(K):
            u_hi, _ = _add_base(u[k], tabs[k][0][:c], tabs[k][1][:c])
            v_hi, _ = _add_base(v[k], tabs[k][0][:c], tabs[k][1][:c])
            diff += amps[k] * (np.sin(_TWO_PI * (u_hi * 2.0 ** -64))
                               - np.sin(_TWO_PI * (v_hi * 2.0 ** -64)))
        d = diff - np.floor(diff)
        d = np.minimum(d, 1.0 - d)
        hit = np.nonzero(d < eps)[0]
        if hit.size:
            return done + int(hit[0])
        for k in range(K):
            u[k] = (u[k] + c * b_raws[k]) % MOD
            v[k] = (v[k] + c * b_raws[k]) % MOD
        done += c
    return -1
