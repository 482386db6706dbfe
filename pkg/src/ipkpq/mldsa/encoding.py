"""Bit-packing and key/signature byte encodings (FIPS 204 Algorithms 16-28)."""

from __future__ import annotations

import numpy as np

from ..errors import DecodeError, ParameterError
from .params import D, MlDsaLevel, N, Q


def bit_pack(coeffs: np.ndarray, bits: int) -> bytes:
    """SimpleBitPack: 256 coefficients in [0, 2^bits), LSB-first bit stream."""
    mat = ((coeffs[:, None] >> np.arange(bits)) & 1).astype(np.uint8)
    return np.packbits(mat.ravel(), bitorder="little").tobytes()


def bit_unpack(data: bytes, bits: int) -> np.ndarray:
    """Inverse of bit_pack; expects exactly 32*bits bytes."""
    raw = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    mat = raw.reshape(N, bits).astype(np.int64)
    return mat @ (np.int64(1) << np.arange(bits, dtype=np.int64))


def _pack_mapped(coeffs: np.ndarray, top: int, bits: int) -> bytes:
    # BitPack for ranges [-a, top]: store top - c in `bits` bits
    return bit_pack((top - coeffs) % Q, bits)


def _unpack_mapped(data: bytes, top: int, bits: int) -> np.ndarray:
    return (top - bit_unpack(data, bits)) % Q


def pk_encode(rho: bytes, t1: np.ndarray) -> bytes:
    out = bytearray(rho)
    for poly in t1:
        out += bit_pack(poly, 10)
    return bytes(out)


def pk_decode(pk: bytes, level: MlDsaLevel) -> tuple[bytes, np.ndarray]:
    if len(pk) != level.pk_len:
        raise DecodeError(f"public key must be {level.pk_len} bytes, got {len(pk)}")
    rho = pk[:32]
    step = N * 10 // 8
    t1 = np.stack([
        bit_unpack(pk[32 + i * step:32 + (i + 1) * step], 10) for i in range(level.k)
    ])
    return rho, t1


def sk_encode(rho: bytes, key: bytes, tr: bytes, s1: np.ndarray, s2: np.ndarray,
              t0: np.ndarray, level: MlDsaLevel) -> bytes:
    out = bytearray(rho + key + tr)
    for poly in s1:
        out += _pack_mapped(poly, level.eta, level.eta_bits)
    for poly in s2:
        out += _pack_mapped(poly, level.eta, level.eta_bits)
    half = 1 << (D - 1)
    for poly in t0 % Q:
        out += _pack_mapped(poly, half, D)
    return bytes(out)


def sk_decode(sk: bytes, level: MlDsaLevel):
    if len(sk) != level.sk_len:
        raise DecodeError(f"secret key must be {level.sk_len} bytes, got {len(sk)}")
    rho, key, tr = sk[:32], sk[32:64], sk[64:128]
    off = 128
    step = N * level.eta_bits // 8
    s1 = np.stack([
        _unpack_mapped(sk[off + i * step:off + (i + 1) * step], level.eta, level.eta_bits)
        for i in range(level.l)
    ])
    off += level.l * step
    s2 = np.stack([
        _unpack_mapped(sk[off + i * step:off + (i + 1) * step], level.eta, level.eta_bits)
        for i in range(level.k)
    ])
    off += level.k * step
    step = N * D // 8
    half = 1 << (D - 1)
    t0 = np.stack([
        _unpack_mapped(sk[off + i * step:off + (i + 1) * step], half, D)
        for i in range(level.k)
    ])
    return rho, key, tr, s1, s2, t0


def w1_encode(w1: np.ndarray, level: MlDsaLevel) -> bytes:
    out = bytearray()
    for poly in w1:
        out += bit_pack(poly, level.w1_bits)
    return bytes(out)


def hint_pack(h: np.ndarray, level: MlDsaLevel) -> bytes:
    """HintBitPack (Algorithm 20): omega index bytes plus k cumulative counts."""
    buf = bytearray(level.omega + level.k)
    idx = 0
    for i in range(level.k):
        ones = np.nonzero(h[i])[0]
        for j in ones:
            buf[idx] = int(j)
            idx += 1
        buf[level.omega + i] = idx
    return bytes(buf)


def hint_unpack(data: bytes, level: MlDsaLevel) -> np.ndarray | None:
    """HintBitUnpack (Algorithm 21); None on any malformed encoding."""
    h = np.zeros((level.k, N), dtype=np.int64)
    idx = 0
    for i in range(level.k):
        end = data[level.omega + i]
        if end < idx or end > level.omega:
            return None
        for j in range(idx, end):
            if j > idx and data[j] <= data[j - 1]:
                return None
            h[i][data[j]] = 1
        idx = end
    if any(data[j] != 0 for j in range(idx, level.omega)):
        return None
    return h


def sig_encode(ctilde: bytes, z: np.ndarray, h: np.ndarray, level: MlDsaLevel) -> bytes:
    out = bytearray(ctilde)
    for poly in z:
        out += _pack_mapped(poly, level.gamma1, level.z_bits)
    out += hint_pack(h, level)
    return bytes(out)


def sig_decode(sig: bytes, level: MlDsaLevel):
    """Returns (ctilde, z, h) or None when the hint region is malformed."""
    if len(sig) != level.sig_len:
        raise ParameterError(f"signature must be {level.sig_len} bytes, got {len(sig)}")
    ctilde = sig[:level.ctilde_bytes]
    off = level.ctilde_bytes
    step = N * level.z_bits // 8
    z = np.stack([
        _unpack_mapped(sig[off + i * step:off + (i + 1) * step], level.gamma1, level.z_bits)
        for i in range(level.l)
    ])
    off += level.l * step
    h = hint_unpack(sig[off:], level)
    if h is None:
        return None
    return ctilde, z, h
