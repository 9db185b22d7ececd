"""NumPy implementations of the inner loops, used when the extension is absent."""
import numpy as np

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
_CHUNK = 1 << 21


def nonlinear_phase(u, dt, lam, mu, dexp):
    r = u.real * u.real + u.imag * u.imag
    th = lam * r
    if mu != 0.0:
        th = th + mu * r ** (1.0 + dexp)
    u *= np.exp(-1j * dt * th)


def gaussian_moments(a, x0, dx, t, v, reach):
    a = np.asarray(a)
    v = np.asarray(v, dtype=float)
    n = a.shape[0]
    st = np.sqrt(t)
    m0 = np.zeros(v.size, dtype=np.complex128)
    m1 = np.zeros(v.size, dtype=np.complex128)
    width = int(np.floor(2 * reach * st / dx)) + 2
    offs = np.arange(width)
    for j0 in range(0, v.size, max(1, _CHUNK // width)):
        vs = v[j0:j0 + max(1, _CHUNK // width)]
        centre = vs * t
        lo = np.ceil((centre - reach * st - x0) / dx).astype(np.int64)
        hi = np.floor((centre + reach * st - x0) / dx).astype(np.int64)
        idx = lo[:, None] + offs[None, :]
        ok = (idx >= np.maximum(lo, 0)[:, None]) & (idx <= np.minimum(hi, n - 1)[:, None])
        idx_c = np.clip(idx, 0, n - 1)
        y = (x0 + idx_c * dx - centre[:, None]) / st
        w = np.where(ok, INV_SQRT_2PI * np.exp(-0.5 * y * y), 0.0)
        av = a[idx_c]
        m0[j0:j0 + vs.size] = np.sum(av * w, axis=1)
        m1[j0:j0 + vs.size] = np.sum(av * (w * y), axis=1)
    return m0, m1


def fourier_series(coef, k0, dk, p, sign):
    coef = np.asarray(coef)
    p = np.asarray(p, dtype=float)
    k = k0 + dk * np.arange(coef.size)
    out = np.empty(p.size, dtype=np.complex128)
    step = max(1, _CHUNK // max(coef.size, 1))
    for i in range(0, p.size, step):
        ph = np.exp(sign * 1j * np.outer(p[i:i + step], k))
        out[i:i + step] = ph @ coef
    return out
