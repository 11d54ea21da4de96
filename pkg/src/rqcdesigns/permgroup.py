"""Symmetric-group machinery and the permutation-state frame.

A permutation ``pi`` of ``t`` letters labels the vector

    |psi_pi> = (I (x) V_q(pi)) |Phi_q^t>,   |Phi_q^t> = q^{-t/2} sum_k |k, k>

living on ``(C^q)^{(x) t} (x) (C^q)^{(x) t}``.  These vectors are unit norm
and their overlaps depend only on the number of cycles of ``pi sigma^-1``:

    <psi_sigma | psi_pi> = q^{c(pi sigma^-1) - t}.

For ``t <= q`` they are linearly independent; for ``t > q`` the permutation
operators become linearly dependent and the Gram matrix loses rank.  All
spectral quantities in this package are built on the Gram matrix and its
pseudo-inverse (the dual frame coefficients) collected in :class:`FrameData`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import ParameterError

__all__ = [
    "MAX_T",
    "RANK_RTOL",
    "Permutation",
    "FrameData",
    "enumerate_group",
    "identity",
    "compose",
    "inverse",
    "cycle_count",
    "overlap",
    "build_frame",
    "tensor_power_gram",
    "column_sum",
    "column_sum_exact",
    "column_sum_bound",
    "ground_space_basis",
    "frame_operator_deviation",
    "frame_diagnostics",
]

MAX_T = 8
RANK_RTOL = 1e-10

# d^{tn} above this switches column_sum to log-space products
_LOG_SPACE_THRESHOLD = 300.0


@dataclass(frozen=True)
class Permutation:
    """A permutation in one-line form, ``images[i] = pi(i)`` (0-based)."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ParameterError(f"not a bijection on 0..{len(images) - 1}: {images}")
        object.__setattr__(self, "images", images)

    @property
    def t(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def inverse(self) -> "Permutation":
        return inverse(self)

    def cycle_count(self) -> int:
        return cycle_count(self)

    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.images))

    def __repr__(self):
        return f"Permutation({list(self.images)})"


def identity(t: int) -> Permutation:
    return Permutation(tuple(range(t)))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p o q``, i.e. ``i -> p(q(i))``."""
    if p.t != q.t:
        raise ParameterError(f"cannot compose permutations of {p.t} and {q.t} letters")
    return Permutation(tuple(p.images[j] for j in q.images))


def inverse(p: Permutation) -> Permutation:
    inv = [0] * p.t
    for i, j in enumerate(p.images):
        inv[j] = i
    return Permutation(tuple(inv))


def cycle_count(p: Permutation) -> int:
    """Number of cycles of ``p``, fixed points included."""
    seen = [False] * p.t
    cycles = 0
    for start in range(p.t):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = p.images[j]
    return cycles


def _check_t(t) -> int:
    if isinstance(t, bool) or int(t) != t:
        raise ParameterError(f"t must be an integer, got {t!r}")
    t = int(t)
    if not 1 <= t <= MAX_T:
        raise ParameterError(f"t must satisfy 1 <= t <= {MAX_T} (t! frame guard), got {t}")
    return t


@lru_cache(maxsize=None)
def _group(t: int) -> tuple[Permutation, ...]:
    return tuple(Permutation(p) for p in itertools.permutations(range(t)))


def enumerate_group(t: int) -> list[Permutation]:
    """All ``t!`` permutations in lexicographic one-line order.

    The identity comes first.  The order is fixed so that every matrix indexed
    by the group is reproducible.
    """
    return list(_group(_check_t(t)))


def overlap(pi: Permutation, sigma: Permutation, q: int) -> float:
    """Overlap ``<psi_sigma|psi_pi> = q^(c(pi sigma^-1) - t)`` at local dimension ``q``."""
    if pi.t != sigma.t:
        raise ParameterError(f"permutations act on {pi.t} and {sigma.t} letters")
    if q < 2:
        raise ParameterError(f"local dimension must be >= 2, got {q}")
    c = cycle_count(compose(pi, inverse(sigma)))
    return float(q) ** (c - pi.t)


@lru_cache(maxsize=None)
def _cycle_matrix(t: int) -> np.ndarray:
    """``t - c(pi sigma^-1)`` for all pairs, in group order."""
    perms = _group(t)
    out = np.empty((len(perms), len(perms)), dtype=np.int64)
    for a, pi in enumerate(perms):
        for b, sigma in enumerate(perms):
            out[a, b] = t - cycle_count(compose(pi, inverse(sigma)))
    out.setflags(write=False)
    return out


def tensor_power_gram(t: int, q: int, power: int = 1) -> np.ndarray:
    """Gram matrix of ``|psi_pi>^{(x) power}`` at local dimension ``q``.

    Entries are ``q^{power (c - t)}``, computed as ``exp(-power (t - c) log q)``
    so large powers underflow gracefully instead of overflowing.
    """
    t = _check_t(t)
    if q < 2:
        raise ParameterError(f"local dimension must be >= 2, got {q}")
    if power < 1:
        raise ParameterError(f"tensor power must be >= 1, got {power}")
    deficit = _cycle_matrix(t)
    return np.exp(-float(power) * deficit * math.log(q))


@dataclass(frozen=True, eq=False)
class FrameData:
    """Gram matrix and dual frame of the permutation states at dimension ``q``.

    Attributes
    ----------
    t : int
        Number of copies.
    q : int
        Local dimension whose permutation operators the frame represents
        (``q = d**2`` for a two-site block, ``q = N`` for a global twirl).
    gram : ndarray, shape (t!, t!)
        ``gram[a, b] = <psi_a | psi_b>``.
    dual : ndarray, shape (t!, t!)
        Moore-Penrose pseudo-inverse of ``gram``.
    rank : int
        Numerical rank of ``gram``.
    """

    t: int
    q: int
    gram: np.ndarray = field(repr=False)
    dual: np.ndarray = field(repr=False)
    rank: int

    @property
    def perms(self) -> list[Permutation]:
        return enumerate_group(self.t)

    @property
    def size(self) -> int:
        return self.gram.shape[0]


@lru_cache(maxsize=64)
def build_frame(t: int, q: int) -> FrameData:
    """Gram matrix, its pseudo-inverse and rank for ``S_t`` at dimension ``q``.

    Singular values below ``RANK_RTOL`` times the largest one are treated as
    zero; this matters once ``t > q``.
    """
    gram = tensor_power_gram(t, q)
    # gram is symmetric PSD, so eigh gives the SVD
    w, v = np.linalg.eigh(gram)
    keep = w > RANK_RTOL * w.max()
    dual = (v[:, keep] / w[keep]) @ v[:, keep].T
    dual = 0.5 * (dual + dual.T)
    gram.setflags(write=False)
    dual.setflags(write=False)
    return FrameData(t=t, q=q, gram=gram, dual=dual, rank=int(keep.sum()))


def _check_dn(d: int, n: int):
    if d < 2:
        raise ParameterError(f"local dimension d must be >= 2, got {d}")
    if n < 1:
        raise ParameterError(f"number of sites n must be >= 1, got {n}")


def column_sum(t: int, d: int, n: int) -> float:
    """``sum_pi |<psi_sigma|psi_pi>|^n = prod_{j<t} (d^n + j) / d^{tn}``.

    The sum does not depend on ``sigma``.  For large ``d^{tn}`` the product is
    evaluated term by term as ``prod (1 + j / d^n)`` in log space.
    """
    if t < 1:
        raise ParameterError(f"t must be >= 1, got {t}")
    _check_dn(d, n)
    if t * n * math.log10(d) <= _LOG_SPACE_THRESHOLD:
        dn = float(d) ** n
        out = 1.0
        for j in range(t):
            out *= (dn + j) / dn
        return out
    log_dn = n * math.log(d)
    return math.exp(sum(math.log1p(j * math.exp(-log_dn)) for j in range(t)))


def column_sum_exact(t: int, d: int, n: int) -> Fraction:
    """Exact rational value of :func:`column_sum`."""
    dn = d ** n
    num = math.prod(dn + j for j in range(t))
    return Fraction(num, dn ** t)


def column_sum_bound(t: int, d: int, n: int) -> float:
    """The quasi-orthogonality bound ``1 + t^2 / d^n``."""
    return 1.0 + t * t / float(d) ** n


def ground_space_basis(n: int, t: int, d: int) -> np.ndarray:
    """Coefficients of an orthonormal basis of span{|psi_pi>^{(x) n}}.

    Returns ``C`` of shape ``(rank, t!)`` such that the vectors
    ``sum_pi C[k, pi] |psi_pi>^{(x) n}`` are orthonormal.  When the tensor-power
    Gram matrix has full rank this is the symmetric (Loewdin) choice
    ``C = gram_n^{-1/2}``; otherwise the canonical ``Lambda^{-1/2} V^T``
    restricted to the nonzero eigenvalues.
    """
    _check_dn(d, n)
    gram_n = tensor_power_gram(t, d, n)
    w, v = np.linalg.eigh(gram_n)
    keep = w > RANK_RTOL * w.max()
    if keep.all():
        return (v / np.sqrt(w)) @ v.T
    return (v[:, keep] / np.sqrt(w[keep])).T


def frame_operator_deviation(n: int, t: int, d: int) -> float:
    """Operator-norm distance between ``sum_pi psi_pi^{(x) n}`` and its support projector.

    The frame operator and the Gram matrix share their nonzero spectrum, so
    this is ``max |lambda_k(gram_n) - 1|`` over the nonzero eigenvalues.
    """
    _check_dn(d, n)
    w = np.linalg.eigvalsh(tensor_power_gram(t, d, n))
    w = w[w > RANK_RTOL * w.max()]
    return float(np.max(np.abs(w - 1.0)))


def frame_diagnostics(n: int, t: int, d: int) -> dict:
    """Quasi-orthogonality numbers for one ``(n, t, d)`` with pass/fail flags.

    Bounds are only claimed when ``t^2 <= d^n``; otherwise the flags are
    ``None`` and ``precondition_met`` is false.
    """
    t = _check_t(t)
    _check_dn(d, n)
    precondition = t * t <= d ** n
    cs = column_sum(t, d, n)
    dev = frame_operator_deviation(n, t, d)
    bound_dev = t * t / float(d) ** n
    bound_cs = column_sum_bound(t, d, n)
    return {
        "n": n,
        "t": t,
        "d": d,
        "precondition_met": precondition,
        "column_sum": cs,
        "column_sum_bound": bound_cs,
        "column_sum_pass": (cs <= bound_cs) if precondition else None,
        "deviation": dev,
        "deviation_bound": bound_dev,
        "deviation_pass": (dev <= bound_dev) if precondition else None,
        "rank": int(np.linalg.matrix_rank(tensor_power_gram(t, d, n), rtol=RANK_RTOL)),
    }
