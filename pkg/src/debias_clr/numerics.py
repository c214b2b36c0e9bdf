"""Deterministic dense-vector primitives shared by every module.

All arithmetic is 64-bit; nothing here allocates hidden global state. The
random source is a counter-based generator (SplitMix64) so that a seed fully
determines every draw sequence, independent of platform or call batching.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InsufficientData, ZeroNormInput

__all__ = [
    "RandomStream",
    "cosine_similarity",
    "cosine_similarity_matrix",
    "stable_log_softmax_denominator",
    "mean_and_sample_std",
    "sample_std",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_CHILD_SALT = np.uint64(0xD6E8FEB86659FD93)
_U64_MASK = (1 << 64) - 1
_INV_2_53 = float(2.0**-53)


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = x.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def _fnv1a(text: str) -> int:
    """64-bit FNV-1a hash, used to derive child-stream keys from labels."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _U64_MASK
    return h


class RandomStream:
    """Counter-based deterministic random stream.

    Draw ``k`` (zero-based) is ``mix64(seed + (k + 1) * GOLDEN)`` where
    ``mix64`` is the SplitMix64 finalizer and GOLDEN is 0x9E3779B97F4A7C15;
    all arithmetic is modulo 2**64. Because outputs depend only on
    ``(seed, k)``, identical seeds give identical sequences regardless of
    how draws are batched.

    Instances are single-owner: never share one across concurrent tasks.
    Derive independent child streams with :meth:`child` instead.
    """

    __slots__ = ("seed", "position")

    def __init__(self, seed: int, position: int = 0):
        self.seed = int(seed) & _U64_MASK
        self.position = int(position)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, position={self.position})"

    def _raw(self, n: int) -> np.ndarray:
        counters = np.uint64(self.seed) + (
            np.arange(self.position + 1, self.position + n + 1, dtype=np.uint64)
            * _GOLDEN
        )
        self.position += n
        return _mix64(counters)

    def uniform(self, n: int | None = None) -> np.ndarray | float:
        """Uniform float64 draws in [0, 1), 53 random mantissa bits each."""
        out = (self._raw(1 if n is None else n) >> np.uint64(11)) * _INV_2_53
        return float(out[0]) if n is None else out

    def normal(self, n: int) -> np.ndarray:
        """Standard normal draws via cosine Box-Muller.

        Consumes exactly 2n uniform positions: draw 2k feeds the radius,
        draw 2k+1 the angle. u1 is mapped into (0, 1] so the log is finite.
        """
        raw = self._raw(2 * n).reshape(n, 2)
        u1 = ((raw[:, 0] >> np.uint64(11)) + np.uint64(1)) * _INV_2_53
        u2 = (raw[:, 1] >> np.uint64(11)) * _INV_2_53
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def integers(self, bound: int, n: int | None = None) -> np.ndarray | int:
        """Draws in [0, bound) as floor(u * bound); bound must be positive."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        u = self.uniform(1 if n is None else n)
        out = np.minimum((u * bound).astype(np.int64), bound - 1)
        return int(out[0]) if n is None else out

    def permutation(self, n: int) -> np.ndarray:
        """Permutation of range(n) by sorting n uniform keys (stable ties)."""
        return np.argsort(self.uniform(n), kind="stable")

    def shuffle(self, values: Sequence) -> list:
        perm = self.permutation(len(values))
        return [values[i] for i in perm]

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        """Uniform k-subset of range(n): the indices holding the k smallest
        of n fresh uniform keys, returned in ascending index order."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot choose {k} of {n}")
        keys = self.uniform(n)
        if k == n:
            return np.arange(n)
        return np.sort(np.argpartition(keys, k)[:k])

    def child(self, key: int | str) -> "RandomStream":
        """Independent stream derived from this stream's seed and a key.

        Children depend only on (seed, key), not on the parent's position,
        so forking is reproducible no matter when it happens.
        """
        k = _fnv1a(key) if isinstance(key, str) else int(key) & _U64_MASK
        salted = np.array([self.seed], dtype=np.uint64) ^ _CHILD_SALT
        step = np.array([k], dtype=np.uint64) * _GOLDEN
        return RandomStream(int(_mix64(_mix64(salted) + step)[0]))


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two equal-length vectors.

    Raises ZeroNormInput when either norm is zero; callers that need a
    guarded variant (the trainer) clamp norms to an epsilon themselves.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        _raise_shape(u, v)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroNormInput("cosine similarity undefined for zero-norm input")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _raise_shape(u, v):
    raise DimensionMismatch(f"incompatible shapes {u.shape} and {v.shape}")


def cosine_similarity_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities between rows of A and rows of B.

    Returns an (len(A), len(B)) matrix, clipped into [-1, 1]. Any zero-norm
    row raises ZeroNormInput.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        _raise_shape(A, B)
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise ZeroNormInput("cosine similarity undefined for zero-norm input")
    sims = (A @ B.T) / np.outer(na, nb)
    return np.clip(sims, -1.0, 1.0)


def stable_log_softmax_denominator(scores) -> float:
    """log(sum(exp(scores))) with a max shift so large scores never overflow."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise EmptyInput("log-sum-exp of an empty score list")
    m = float(np.max(s))
    return m + float(np.log(np.sum(np.exp(s - m))))


def mean_and_sample_std(xs) -> tuple[float, float]:
    """Arithmetic mean and n-1 (sample) standard deviation.

    The sample denominator is used everywhere in this package, including the
    effect-size statistic, matching the Cohen's-d reading of that metric.
    """
    x = np.asarray(xs, dtype=np.float64)
    if x.size < 2:
        raise InsufficientData("sample standard deviation needs at least 2 values")
    mean = float(np.mean(x))
    var = float(np.sum((x - mean) ** 2) / (x.size - 1))
    return mean, float(np.sqrt(var))


def sample_std(xs) -> float:
    return mean_and_sample_std(xs)[1]
