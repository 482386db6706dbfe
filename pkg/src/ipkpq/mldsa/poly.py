"""Polynomial ring arithmetic for ML-DSA over Z_q[X]/(X^256 + 1).

All polynomials are numpy int64 arrays with canonical coefficients in
[0, q). Vectors stack polynomials along the leading axis: a length-k
vector has shape (k, 256) and the expanded matrix A has shape (k, l, 256).
The NTT butterflies are vectorized one level at a time, which keeps every
intermediate product below 2^49 so plain int64 arithmetic never overflows.
"""

from __future__ import annotations

import numpy as np

from .params import D, N, Q

_ROOT = 1753  # 512th root of unity mod q (FIPS 204 section 7.5)
_N_INV = pow(N, Q - 2, Q)


def _bitrev8(x: int) -> int:
    r = 0
    for _ in range(8):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


_ZETAS = np.array([pow(_ROOT, _bitrev8(i), Q) for i in range(N)], dtype=np.int64)


def _build_layers():
    fwd = []
    k = 1
    length = 128
    while length >= 1:
        nblocks = N // (2 * length)
        fwd.append((length, _ZETAS[k:k + nblocks].copy()))
        k += nblocks
        length >>= 1
    inv = []
    k = 255
    length = 1
    while length < N:
        nblocks = N // (2 * length)
        # consumed in decreasing index order, negated (Gentleman-Sande)
        zs = (Q - _ZETAS[k - np.arange(nblocks)]) % Q
        inv.append((length, zs))
        k -= nblocks
        length <<= 1
    return fwd, inv


_FWD_LAYERS, _INV_LAYERS = _build_layers()


def ntt(f: np.ndarray) -> np.ndarray:
    """Forward NTT (FIPS 204 Algorithm 41) over the trailing axis."""
    g = np.array(f, dtype=np.int64, copy=True)
    for length, zs in _FWD_LAYERS:
        v = g.reshape(g.shape[:-1] + (-1, 2, length))
        t = (zs[:, None] * v[..., 1, :]) % Q
        hi = (v[..., 0, :] - t) % Q
        lo = (v[..., 0, :] + t) % Q
        v[..., 0, :] = lo
        v[..., 1, :] = hi
    return g


def intt(f: np.ndarray) -> np.ndarray:
    """Inverse NTT (FIPS 204 Algorithm 42) over the trailing axis."""
    g = np.array(f, dtype=np.int64, copy=True)
    for length, zs in _INV_LAYERS:
        v = g.reshape(g.shape[:-1] + (-1, 2, length))
        lo = (v[..., 0, :] + v[..., 1, :]) % Q
        hi = ((v[..., 0, :] - v[..., 1, :]) * zs[:, None]) % Q
        v[..., 0, :] = lo
        v[..., 1, :] = hi
    return (g * _N_INV) % Q


def mul_ntt(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise product of NTT-domain operands."""
    return (a * b) % Q


def matvec_ntt(a_hat: np.ndarray, v_hat: np.ndarray) -> np.ndarray:
    """A_hat @ v_hat in the NTT domain: (k, l, 256) x (l, 256) -> (k, 256)."""
    return (a_hat * v_hat[None, :, :]).sum(axis=1) % Q


def power2round(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split r = r1 * 2^d + r0 with r0 in (-2^(d-1), 2^(d-1)] (Algorithm 35).

    Returns (r1, r0) with r0 as signed centered values.
    """
    r0 = r & ((1 << D) - 1)
    r0 = r0 - ((r0 > (1 << (D - 1))) << D)
    return (r - r0) >> D, r0


def decompose(r: np.ndarray, gamma2: int) -> tuple[np.ndarray, np.ndarray]:
    """Split r = r1 * 2*gamma2 + r0 with the q-1 wraparound case (Algorithm 36).

    Returns (r1 canonical, r0 signed centered).
    """
    two_g = 2 * gamma2
    r0 = r % two_g
    r0 = r0 - (r0 > gamma2) * two_g
    r1 = (r - r0) // two_g
    wrap = (r - r0) == (Q - 1)
    r1 = np.where(wrap, 0, r1)
    r0 = r0 - wrap
    return r1, r0


def high_bits(r: np.ndarray, gamma2: int) -> np.ndarray:
    return decompose(r, gamma2)[0]


def low_bits(r: np.ndarray, gamma2: int) -> np.ndarray:
    return decompose(r, gamma2)[1]


def make_hint(z: np.ndarray, r: np.ndarray, gamma2: int) -> np.ndarray:
    """Hint bits marking where adding z flips the high-order part (Algorithm 39)."""
    return (high_bits(r, gamma2) != high_bits((r + z) % Q, gamma2)).astype(np.int64)


def use_hint(h: np.ndarray, r: np.ndarray, gamma2: int) -> np.ndarray:
    """Recover the high-order part from hint bits (Algorithm 40)."""
    m = (Q - 1) // (2 * gamma2)
    r1, r0 = decompose(r, gamma2)
    adjusted = (r1 + np.where(r0 > 0, 1, -1)) % m
    return np.where(h == 1, adjusted, r1)


def inf_norm(x: np.ndarray) -> int:
    """Infinity norm over centered representatives of canonical coefficients."""
    return int(np.minimum(x, Q - x).max())
