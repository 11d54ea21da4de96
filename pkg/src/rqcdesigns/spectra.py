"""Deflated eigensolvers for walk moment operators.

The top eigenspace (eigenvalue 1) of every walk operator here is the span of
the permutation tensor powers, for which :mod:`permgroup` gives an exact
orthonormal basis.  Projecting that space out after every application turns the
second eigenvalue into the dominant one, so plain power iteration applies;
slow cases fall back to implicitly restarted Lanczos.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import moment_op as mo
from .exceptions import ConvergenceError, GuardError, ParameterError
from .permgroup import build_frame, enumerate_group

__all__ = [
    "QUANTITIES",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "LANCZOS_SWITCH",
    "SpectralReport",
    "second_eigenvalue",
    "tpe_value",
    "hamiltonian_gap",
    "detectability_norm",
    "rho_haar",
    "rho_haar_min_eig",
]

log = logging.getLogger(__name__)

QUANTITIES = ("g_local", "g_parallel", "gap_H", "detectability_norm", "rho_haar_min_eig")
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10 ** 6
LANCZOS_SWITCH = 10 ** 4
STAGNATION_WINDOW = 100
STAGNATION_RTOL = 1e-14
RHO_HAAR_GUARD = 4096


@dataclass(frozen=True)
class SpectralReport:
    quantity: str
    value: float
    residual: float
    iterations: int
    n: int
    t: int
    d: int
    deflation_rank: int
    method: str = "power"
    deflation_leak: float = 0.0

    @property
    def params(self):
        return (self.n, self.t, self.d)

    def to_dict(self) -> dict:
        return asdict(self)


class _Deflator:
    """Orthogonal projection onto the complement of an orthonormal basis ``Q``."""

    def __init__(self, Q):
        self.Q = Q
        self.leak = 0.0

    def __call__(self, v):
        if self.Q is None or self.Q.shape[1] == 0:
            return v
        n_in = np.linalg.norm(v)
        v = v - self.Q @ (self.Q.T @ v)
        # second pass keeps the residual overlap at rounding level
        v = v - self.Q @ (self.Q.T @ v)
        nv = np.linalg.norm(v)
        # a vector annihilated to rounding level has no meaningful direction
        if nv > 1e-6 * n_in:
            self.leak = max(self.leak, float(np.max(np.abs(self.Q.T @ v))) / nv)
        return v


def _random_start(dim, rng, deflate):
    v = deflate(rng.standard_normal(dim))
    return v / np.linalg.norm(v)


def _power(matvec, dim, deflate, tol, max_iter, switch_iter, rng):
    """Power iteration on the deflated operator.

    Returns ``(value, residual, iterations, vector, converged)``.
    """
    v = _random_start(dim, rng, deflate)
    lam = 0.0
    residual = math.inf
    last, flat, redrawn = None, 0, False
    it = 0
    while it < min(max_iter, switch_iter):
        it += 1
        w = deflate(matvec(v))
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= tol:
            return lam, residual, it, v, True
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, 0.0, it, v, True
        if last is not None and abs(lam - last) <= STAGNATION_RTOL * max(abs(lam), 1e-300):
            flat += 1
        else:
            flat = 0
        last = lam
        if flat >= STAGNATION_WINDOW:
            if redrawn:
                break
            log.debug("power iteration stagnated at it=%d, redrawing start vector", it)
            v = _random_start(dim, rng, deflate)
            flat, last, redrawn = 0, None, True
            continue
        v = w / nw
    return lam, residual, it, v, False


def _lanczos(matvec, dim, deflate, tol, max_iter, v0):
    from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

    def mv(x):
        x = np.asarray(x).reshape(-1)
        return deflate(matvec(deflate(x)))

    A = LinearOperator((dim, dim), matvec=mv, dtype=np.float64)
    ncv = min(dim - 1, 40)
    try:
        w, V = eigsh(A, k=1, which="LA", v0=v0, tol=tol * 1e-2, ncv=ncv,
                     maxiter=max(1, max_iter // ncv))
    except ArpackNoConvergence as exc:
        if exc.eigenvalues.size == 0:
            raise ConvergenceError("Lanczos did not converge", iterations=max_iter) from exc
        w, V = exc.eigenvalues, exc.eigenvectors
    v = deflate(V[:, 0].real)
    v /= np.linalg.norm(v)
    w1 = deflate(matvec(v))
    lam = float(v @ w1)
    return lam, float(np.linalg.norm(w1 - lam * v)), v


def _dominant(matvec, dim, Q, tol, max_iter, seed, switch_iter, method):
    deflate = _Deflator(Q)
    rng = np.random.default_rng(seed)
    if dim - (0 if Q is None else Q.shape[1]) <= 0:
        return 0.0, 0.0, 0, "trivial", 0.0
    if method not in ("auto", "power", "lanczos"):
        raise ParameterError(f"unknown eigensolver method {method!r}")
    if method == "lanczos" or dim <= 2:
        v0 = _random_start(dim, rng, deflate)
        lam, res, _ = _lanczos(matvec, dim, deflate, tol, max_iter, v0)
        used, its = "lanczos", 0
    else:
        limit = max_iter if method == "power" else switch_iter
        lam, res, its, v, ok = _power(matvec, dim, deflate, tol, max_iter, limit, rng)
        used = "power"
        if not ok and method == "auto" and its < max_iter:
            log.debug("switching to Lanczos after %d power iterations", its)
            lam, res, _ = _lanczos(matvec, dim, deflate, tol, max_iter - its, v)
            used = "power+lanczos"
    if not res <= tol:
        raise ConvergenceError(
            f"eigensolver stopped with residual {res:.3e} > tol {tol:.1e}",
            estimate=lam, residual=res, iterations=its)
    return lam, res, its, used, deflate.leak


def _check_dim(op, guard):
    if op.dim > guard:
        raise GuardError(f"dimension d^(2tn) = {op.dim} exceeds guard {guard}")


def second_eigenvalue(op: mo.MatrixFreeOperator, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER, seed: int = 0,
                      method: str = "auto", switch_iter: int = LANCZOS_SWITCH,
                      guard: int = 1 << 26) -> SpectralReport:
    """Second largest eigenvalue of a local or parallel walk operator.

    The eigenvalue-1 space is removed exactly using the permutation-state
    basis, so the returned value equals the tensor-product-expander value
    ``g`` of the corresponding walk (raised to ``op.power``).

    Raises
    ------
    ConvergenceError
        If the residual ``||A v - lambda v||`` does not reach ``tol``.
    """
    if op.kind not in ("local", "parallel"):
        raise ParameterError(f"second_eigenvalue needs a local or parallel walk, got {op.kind!r}")
    _check_dim(op, guard)
    Q = mo.ground_space_vectors(op.n, op.t, op.d)
    lam, res, its, used, leak = _dominant(
        lambda x: mo.apply(op, x), op.dim, Q, tol, max_iter, seed, switch_iter, method)
    quantity = "g_local" if op.kind == "local" else "g_parallel"
    # rounding can push an exact zero or one a hair outside [0, 1]
    lam = min(max(lam, 0.0), 1.0)
    return SpectralReport(quantity, lam, res, its, op.n, op.t, op.d, Q.shape[1], used, leak)


def tpe_value(n: int, t: int, d: int, model: str = "lr", **kw) -> SpectralReport:
    """``g`` of one step of the local (``"lr"``) or parallel (``"plr"``) walk."""
    model = model.lower()
    if model == "lr":
        op = mo.local_moment(n, t, d)
    elif model == "plr":
        op = mo.parallel_moment(n, t, d)
    else:
        raise ParameterError(f"model must be 'lr' or 'plr', got {model!r}")
    return second_eigenvalue(op, **kw)


def hamiltonian_gap(n: int, t: int, d: int, tol: float = DEFAULT_TOL, **kw) -> SpectralReport:
    """Spectral gap of ``H_{n,t}`` via ``Delta = (n - 1)(1 - lambda_2(local walk))``."""
    rep = second_eigenvalue(mo.local_moment(n, t, d), tol=tol / max(n - 1, 1), **kw)
    return SpectralReport("gap_H", (n - 1) * (1.0 - rep.value), (n - 1) * rep.residual,
                          rep.iterations, n, t, d, rep.deflation_rank, rep.method,
                          rep.deflation_leak)


def detectability_norm(n: int, t: int, d: int, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, seed: int = 0,
                       method: str = "auto", guard: int = 1 << 26) -> SpectralReport:
    """``||P_odd P_even - P_c||`` with ``P_c`` the projector onto the ground space.

    Computed as the square root of the top eigenvalue of
    ``P_even P_odd P_even`` on the complement of the ground space.  The
    reported residual is that of the sandwiched eigenproblem.
    """
    odd = mo.odd_product(n, t, d)
    even = mo.even_product(n, t, d)
    _check_dim(odd, guard)
    Q = mo.ground_space_vectors(n, t, d)

    def matvec(x):
        return mo.apply(even, mo.apply(odd, mo.apply(even, x)))

    lam, res, its, used, leak = _dominant(matvec, odd.dim, Q, tol, max_iter, seed,
                                          LANCZOS_SWITCH, method)
    return SpectralReport("detectability_norm", math.sqrt(min(max(lam, 0.0), 1.0)), res, its,
                          n, t, d, Q.shape[1], used, leak)


def rho_haar(N: int, t: int, guard: int = RHO_HAAR_GUARD) -> np.ndarray:
    """Choi-type state ``(Haar twirl (x) id)(Phi_N^{(x) t})`` as a dense matrix.

    The twirl of any operator is its projection onto the span of the
    permutation operators, which gives

        rho = N^{-2t} sum_{pi, sigma} W[pi, sigma] V(pi) (x) V(sigma)

    with ``W`` the dual frame at dimension ``N``.  System legs come first,
    reference legs after them.
    """
    if N < 2:
        raise ParameterError(f"N must be >= 2, got {N}")
    dim = N ** (2 * t)
    if dim > guard:
        raise GuardError(f"N^(2t) = {dim} exceeds guard {guard}")
    frame = build_frame(t, N)
    perms = enumerate_group(t)
    # V(pi)|l_1..l_t> = |l_{pi^-1(1)} .. l_{pi^-1(t)}>
    idx = np.indices((N,) * t).reshape(t, -1).T
    weights = N ** np.arange(t - 1, -1, -1)
    mats = []
    for pi in perms:
        inv = [0] * t
        for i, j in enumerate(pi.images):
            inv[j] = i
        rows = idx[:, inv] @ weights
        V = np.zeros((N ** t, N ** t))
        V[rows, np.arange(N ** t)] = 1.0
        mats.append(V)
    rho = np.zeros((dim, dim))
    for a, Va in enumerate(mats):
        for b, Vb in enumerate(mats):
            w = frame.dual[a, b]
            if w != 0.0:
                rho += w * np.kron(Va, Vb)
    return rho / N ** (2 * t)


def rho_haar_min_eig(N: int, t: int, guard: int = RHO_HAAR_GUARD) -> SpectralReport:
    """Smallest nonzero eigenvalue of the Haar Choi-type state on its support."""
    rho = rho_haar(N, t, guard)
    w = np.linalg.eigvalsh(rho)
    support = w > 1e-10 * w.max()
    value = float(w[support].min())
    return SpectralReport("rho_haar_min_eig", value, 0.0, 0, 1, t, N, int(support.sum()),
                          "dense")
