"""Matrix-free moment operators on ``(C^{d^{2t}})^{(x) n}``.

Amplitude layout
----------------
A state on ``n`` sites is a flat array of length ``D**n`` with ``D = d**(2t)``,
in C order over the shape ``(D,) * n``: site 1 is the slowest index.  Within a
site the ``2t`` qudit legs of dimension ``d`` are again in C order, forward
copies ``1..t`` first and conjugate copies ``1..t`` after them.  A trailing
batch axis is allowed, so every ``apply_*`` accepts arrays of shape
``(D**n,)`` or ``(D**n, k)``.

The two-site Haar projector is never formed.  With ``Psi_pi`` the permutation
states of the block and ``W`` the dual frame coefficients,

    P v = sum_{pi, sigma} W[pi, sigma] |Psi_pi> <Psi_sigma | v>,

which costs ``2 t! D**n`` multiply-adds per application.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import GuardError, ParameterError
from .permgroup import FrameData, build_frame, enumerate_group, ground_space_basis, inverse

__all__ = [
    "KINDS",
    "DEFAULT_DENSE_GUARD",
    "StateVector",
    "MatrixFreeOperator",
    "site_states",
    "block_states",
    "projector",
    "hamiltonian",
    "local_moment",
    "parallel_moment",
    "odd_product",
    "even_product",
    "apply",
    "apply_projector",
    "apply_hamiltonian",
    "apply_local_moment",
    "apply_parallel_moment",
    "dense_materialize",
    "ground_space_vectors",
    "random_state",
]

KINDS = ("projector", "hamiltonian", "local", "parallel", "odd", "even")
DEFAULT_DENSE_GUARD = 4096


@dataclass
class StateVector:
    """Amplitudes on ``n`` sites of ``t`` doubled copies of a ``d``-level system."""

    amplitudes: np.ndarray
    n: int
    t: int
    d: int
    _norm: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes)
        expected = self.d ** (2 * self.t * self.n)
        if self.amplitudes.shape[0] != expected:
            raise ParameterError(
                f"state has {self.amplitudes.shape[0]} amplitudes, expected d^(2tn) = {expected}")

    @property
    def shape(self):
        return (self.n, self.t, self.d)

    @property
    def norm(self) -> float:
        if self._norm is None:
            self._norm = float(np.linalg.norm(self.amplitudes))
        return self._norm

    def site_tensor(self) -> np.ndarray:
        """View with one axis per qudit leg, ``(d,) * (2 t n)``."""
        return self.amplitudes.reshape((self.d,) * (2 * self.t * self.n) + self.amplitudes.shape[1:])


@lru_cache(maxsize=None)
def site_states(t: int, d: int) -> np.ndarray:
    """Permutation states on one site, shape ``(t!, d**(2t))``.

    Row ``pi`` is ``d^{-t/2} sum_a |a> (x) |a_{pi^-1(1)}, ..., a_{pi^-1(t)}>``,
    the vectorisation of ``V_d(pi) / d^{t/2}``.
    """
    D = d ** (2 * t)
    perms = enumerate_group(t)
    out = np.zeros((len(perms), D))
    fwd = np.indices((d,) * t).reshape(t, -1).T  # all forward multi-indices a
    weights = d ** np.arange(2 * t - 1, -1, -1)
    for k, pi in enumerate(perms):
        pinv = inverse(pi).images
        conj = fwd[:, list(pinv)]
        idx = np.concatenate([fwd, conj], axis=1) @ weights
        out[k, idx] = 1.0
    out *= d ** (-t / 2)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def block_states(t: int, d: int) -> np.ndarray:
    """Permutation states of ``U(d^2)`` on two adjacent sites, ``(t!, d**(4t))``."""
    psi = site_states(t, d)
    out = np.einsum("pa,pb->pab", psi, psi).reshape(psi.shape[0], -1)
    out.setflags(write=False)
    return out


def _check_params(n, t, d):
    if n < 2:
        raise ParameterError(f"need at least two sites, got n={n}")
    if d < 2:
        raise ParameterError(f"local dimension d must be >= 2, got {d}")
    # enumerate_group validates t
    enumerate_group(t)


@dataclass(frozen=True, eq=False)
class MatrixFreeOperator:
    """A Hermitian moment operator applied without materialisation.

    ``kind`` is one of ``"projector"`` (single ``P_{i,i+1}``, ``site = i``),
    ``"hamiltonian"`` (``sum_i (I - P_{i,i+1})``), ``"local"`` (the local walk
    moment ``(n-1)^{-1} sum_i P_{i,i+1}``), ``"parallel"`` (``(P_odd + P_even)/2``),
    ``"odd"`` and ``"even"`` (the products of disjoint projectors).  ``power``
    repeats the operator, which models a ``power``-step walk.
    """

    kind: str
    n: int
    t: int
    d: int
    site: int | None = None
    power: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        _check_params(self.n, self.t, self.d)
        if self.kind == "projector":
            if self.site is None or not 1 <= self.site <= self.n - 1:
                raise ParameterError(f"projector site must be in 1..{self.n - 1}, got {self.site}")
        if self.kind in ("parallel", "odd", "even") and self.n % 2:
            raise ParameterError(f"parallel walk operators need even n, got n={self.n}")
        if self.power < 1:
            raise ParameterError(f"power must be >= 1, got {self.power}")

    @property
    def frame(self) -> FrameData:
        return build_frame(self.t, self.d ** 2)

    @property
    def local_dim(self) -> int:
        return self.d ** (2 * self.t)

    @property
    def dim(self) -> int:
        return self.local_dim ** self.n

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def dtype(self):
        return np.dtype(np.float64)

    def with_power(self, k: int) -> "MatrixFreeOperator":
        return MatrixFreeOperator(self.kind, self.n, self.t, self.d, self.site, self.power * k)

    def matvec(self, v):
        return apply(self, v)

    def __matmul__(self, v):
        return apply(self, v)

    def as_linear_operator(self):
        from scipy.sparse.linalg import LinearOperator
        return LinearOperator(self.shape, matvec=self.matvec, matmat=self.matvec,
                              rmatvec=self.matvec, dtype=np.float64)


def projector(n, t, d, site) -> MatrixFreeOperator:
    return MatrixFreeOperator("projector", n, t, d, site=site)


def hamiltonian(n, t, d) -> MatrixFreeOperator:
    return MatrixFreeOperator("hamiltonian", n, t, d)


def local_moment(n, t, d) -> MatrixFreeOperator:
    return MatrixFreeOperator("local", n, t, d)


def parallel_moment(n, t, d) -> MatrixFreeOperator:
    return MatrixFreeOperator("parallel", n, t, d)


def odd_product(n, t, d) -> MatrixFreeOperator:
    return MatrixFreeOperator("odd", n, t, d)


def even_product(n, t, d) -> MatrixFreeOperator:
    return MatrixFreeOperator("even", n, t, d)


def _as_array(op: MatrixFreeOperator, v):
    arr = v.amplitudes if isinstance(v, StateVector) else np.asarray(v)
    if arr.ndim not in (1, 2) or arr.shape[0] != op.dim:
        raise ParameterError(
            f"state of shape {arr.shape} does not match operator on n={op.n}, t={op.t}, "
            f"d={op.d} (dimension {op.dim})")
    return arr


def _wrap(v, out, op):
    if isinstance(v, StateVector):
        return StateVector(out, op.n, op.t, op.d)
    return out


def _block(x: np.ndarray, site: int, n: int, t: int, d: int) -> np.ndarray:
    """Apply ``P_{site, site+1}`` to ``x`` of shape ``(dim,)`` or ``(dim, k)``."""
    D = d ** (2 * t)
    psi = block_states(t, d)
    dual = build_frame(t, d * d).dual
    left = D ** (site - 1)
    right = (D ** (n - site - 1)) * (x.shape[1] if x.ndim == 2 else 1)
    xr = x.reshape(left, D * D, right)
    # coefficients <Psi_sigma| x> for every left/right slice
    coef = np.matmul(psi, xr)                      # (left, t!, right)
    coef = np.matmul(dual, coef)                   # (left, t!, right)
    out = np.matmul(psi.T, coef)                   # (left, D^2, right)
    return out.reshape(x.shape)


def _odd_pairs(n):
    return range(1, n, 2)


def _even_pairs(n):
    return range(2, n - 1, 2)


def _apply_once(op: MatrixFreeOperator, x: np.ndarray) -> np.ndarray:
    n, t, d = op.n, op.t, op.d
    if op.kind == "projector":
        return _block(x, op.site, n, t, d)
    if op.kind == "hamiltonian":
        acc = np.zeros_like(x, dtype=np.result_type(x, np.float64))
        for i in range(1, n):
            acc += x - _block(x, i, n, t, d)
        return acc
    if op.kind == "local":
        acc = np.zeros_like(x, dtype=np.result_type(x, np.float64))
        for i in range(1, n):
            acc += _block(x, i, n, t, d)
        return acc / (n - 1)
    if op.kind in ("odd", "even"):
        y = x
        for i in (_odd_pairs(n) if op.kind == "odd" else _even_pairs(n)):
            y = _block(y, i, n, t, d)
        return np.array(y, copy=True) if y is x else y
    # parallel
    y_odd = x
    for i in _odd_pairs(n):
        y_odd = _block(y_odd, i, n, t, d)
    y_even = x
    for i in _even_pairs(n):
        y_even = _block(y_even, i, n, t, d)
    return 0.5 * y_odd + 0.5 * y_even


def apply(op: MatrixFreeOperator, v):
    """Apply ``op`` (including its ``power``) to a state or array."""
    x = _as_array(op, v)
    out = x
    for _ in range(op.power):
        out = _apply_once(op, out)
    return _wrap(v, out, op)


def apply_projector(op: MatrixFreeOperator, v):
    if op.kind != "projector":
        raise ParameterError(f"expected a projector operator, got {op.kind!r}")
    return apply(op, v)


def apply_hamiltonian(op: MatrixFreeOperator, v):
    if op.kind != "hamiltonian":
        raise ParameterError(f"expected a hamiltonian operator, got {op.kind!r}")
    return apply(op, v)


def apply_local_moment(op: MatrixFreeOperator, v):
    if op.kind != "local":
        raise ParameterError(f"expected a local moment operator, got {op.kind!r}")
    return apply(op, v)


def apply_parallel_moment(op: MatrixFreeOperator, v):
    if op.kind != "parallel":
        raise ParameterError(f"expected a parallel moment operator, got {op.kind!r}")
    return apply(op, v)


def dense_materialize(op: MatrixFreeOperator, guard: int = DEFAULT_DENSE_GUARD,
                      chunk: int = 512) -> np.ndarray:
    """Explicit matrix of ``op``, built column block by column block.

    Refuses with :class:`GuardError` when the dimension exceeds ``guard``.
    """
    dim = op.dim
    if dim > guard:
        raise GuardError(f"dimension {dim} exceeds dense guard {guard}")
    out = np.empty((dim, dim))
    for start in range(0, dim, chunk):
        stop = min(dim, start + chunk)
        cols = np.zeros((dim, stop - start))
        cols[np.arange(start, stop), np.arange(stop - start)] = 1.0
        out[:, start:stop] = apply(op, cols)
    return out


def ground_space_vectors(n: int, t: int, d: int) -> np.ndarray:
    """Orthonormal basis of the common fixed space, shape ``(D**n, rank)``.

    Columns are ``sum_pi C[k, pi] |psi_pi>^{(x) n}`` with ``C`` from
    :func:`permgroup.ground_space_basis`.
    """
    psi = site_states(t, d)
    dim = psi.shape[1] ** n
    if dim > 1 << 28:
        raise GuardError(f"ground space vectors of dimension {dim} are too large")
    coef = ground_space_basis(n, t, d)
    powers = np.empty((psi.shape[0], dim))
    for k in range(psi.shape[0]):
        vec = psi[k]
        for _ in range(n - 1):
            vec = np.multiply.outer(vec, psi[k]).ravel()
        powers[k] = vec
    return (coef @ powers).T


def random_state(n: int, t: int, d: int, rng=None, dtype=np.float64) -> np.ndarray:
    """Normalised Gaussian random vector on the doubled space."""
    rng = np.random.default_rng(rng)
    dim = d ** (2 * t * n)
    v = rng.standard_normal(dim)
    if np.issubdtype(dtype, np.complexfloating):
        v = v + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def dimension(n: int, t: int, d: int) -> int:
    return d ** (2 * t * n)


def log2_dimension(n: int, t: int, d: int) -> float:
    return 2 * t * n * math.log2(d)
