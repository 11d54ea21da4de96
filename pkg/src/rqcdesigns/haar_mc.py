"""Monte Carlo engine for random local circuits.

Three walk models are supported on a line of ``n`` qudits of dimension ``d``:

* ``"lr"``  - each step applies a Haar gate on ``U(d^2)`` to a uniformly chosen
  neighbouring pair ``(i, i+1)``;
* ``"plr"`` - each step applies, with probability 1/2 each, a layer of
  independent Haar gates on ``(1,2), (3,4), ...`` or on ``(2,3), (4,5), ...``
  (``n`` must be even);
* ``"gset"`` - like ``"lr"`` but the gate is drawn uniformly from a finite,
  user-supplied gate list.

Randomness is organised in per-sample streams: sample ``k`` of a run seeded
with ``seed`` always uses ``SeedSequence(seed, spawn_key=(k,))``, so estimates
do not depend on how samples are scheduled across workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import GuardError, ParameterError

__all__ = [
    "MODELS",
    "STATEVECTOR_GUARD",
    "UNITARY_LOG2_GUARD",
    "CircuitSample",
    "EstimatorResult",
    "TQORecord",
    "sample_stream",
    "sample_haar_gate",
    "sample_circuit",
    "apply_gate",
    "simulate_statevector",
    "circuit_unitary",
    "frame_potential",
    "haar_frame_potential",
    "reduced_density_matrix",
    "trace_norm",
    "tqo_experiment",
    "load_gate_set",
    "dump_gate_set",
]

MODELS = ("lr", "plr", "gset")
STATEVECTOR_GUARD = 1 << 26
UNITARY_LOG2_GUARD = 12
UNITARITY_TOL = 1e-12


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_haar_gate(q: int, rng) -> np.ndarray:
    """Haar-random ``q x q`` unitary.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved into
    ``Q`` so the result is exactly Haar distributed.
    """
    if q < 2:
        raise ParameterError(f"gate dimension must be >= 2, got {q}")
    z = (rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))) / math.sqrt(2.0)
    qm, r = np.linalg.qr(z)
    diag = np.diag(r)
    return qm * (diag / np.abs(diag))


@dataclass
class CircuitSample:
    """An explicit circuit: gates in application order.

    ``gates`` holds ``(site, U)`` pairs with ``site`` the 1-based left qudit of
    the pair the ``d^2 x d^2`` unitary ``U`` acts on.  ``layers`` records, for
    the parallel model, which parity each step used (1 = odd pairs).
    """

    model: str
    n: int
    d: int
    steps: int
    gates: list = field(default_factory=list, repr=False)
    seed: int | None = None
    layers: list = field(default_factory=list, repr=False)

    def sites(self) -> list[int]:
        return [s for s, _ in self.gates]


def _check_model(model, n, d):
    if model not in MODELS:
        raise ParameterError(f"model must be one of {MODELS}, got {model!r}")
    if n < 2:
        raise ParameterError(f"need at least two qudits, got n={n}")
    if d < 2:
        raise ParameterError(f"local dimension must be >= 2, got d={d}")
    if model == "plr" and n % 2:
        raise ParameterError(f"the parallel model is defined for even n only, got n={n}")


def sample_circuit(model: str, n: int, d: int, steps: int, rng=None, gate_set=None,
                   seed: int | None = None) -> CircuitSample:
    """Draw ``steps`` walk steps of ``model``.

    ``rng`` may be a Generator; if omitted one is built from ``seed``.
    """
    _check_model(model, n, d)
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    if model == "gset" and not gate_set:
        raise ParameterError("the gate-set model needs a non-empty gate list")
    q = d * d
    if model == "gset" and any(np.shape(U) != (q, q) for U in gate_set):
        raise ParameterError(f"gate-set matrices must be {q} x {q} for d={d}")
    if rng is None:
        rng = np.random.default_rng(seed)
    c = CircuitSample(model, n, d, steps, seed=seed)
    for _ in range(steps):
        if model == "lr":
            c.gates.append((int(rng.integers(1, n)), sample_haar_gate(q, rng)))
        elif model == "gset":
            site = int(rng.integers(1, n))
            c.gates.append((site, gate_set[int(rng.integers(len(gate_set)))]))
        else:
            odd = bool(rng.integers(2) == 0)
            c.layers.append(1 if odd else 0)
            for site in (range(1, n, 2) if odd else range(2, n - 1, 2)):
                c.gates.append((site, sample_haar_gate(q, rng)))
    return c


def apply_gate(psi: np.ndarray, U: np.ndarray, site: int, n: int, d: int) -> np.ndarray:
    """Apply a two-qudit gate to qudits ``(site, site+1)``.

    ``psi`` has shape ``(d**n,)`` or ``(d**n, k)``; qudit 1 is the most
    significant digit of the basis index.
    """
    batch = psi.shape[1] if psi.ndim == 2 else 1
    left = d ** (site - 1)
    right = d ** (n - site - 1) * batch
    x = psi.reshape(left, d * d, right)
    return np.matmul(U, x).reshape(psi.shape)


def simulate_statevector(c: CircuitSample, initial, guard: int = STATEVECTOR_GUARD) -> np.ndarray:
    """Run ``c`` on ``initial`` (shape ``(d**n,)`` or ``(d**n, k)``)."""
    dim = c.d ** c.n
    if dim > guard:
        raise GuardError(f"d^n = {dim} amplitudes exceed the statevector guard {guard}")
    psi = np.array(initial, dtype=np.complex128, copy=True)
    if psi.shape[0] != dim:
        raise ParameterError(f"initial state has {psi.shape[0]} amplitudes, expected {dim}")
    for site, U in c.gates:
        psi = apply_gate(psi, U, site, c.n, c.d)
    return psi


def _unitary_guard(n, d):
    if n * math.log2(d) > UNITARY_LOG2_GUARD:
        raise GuardError(
            f"n log2(d) = {n * math.log2(d):g} exceeds {UNITARY_LOG2_GUARD}; full unitaries "
            "are too large")


def circuit_unitary(c: CircuitSample) -> np.ndarray:
    """The full ``d^n x d^n`` unitary implemented by ``c``."""
    _unitary_guard(c.n, c.d)
    return simulate_statevector(c, np.eye(c.d ** c.n))


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    std_error: float
    samples: int
    seed: int
    params: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.estimate - value) <= sigmas * self.std_error


def haar_frame_potential(N: int, t: int) -> int:
    """Frame potential of the Haar measure on ``U(N)`` when ``N >= t``: ``t!``."""
    if N < t:
        raise ParameterError(f"closed form t! needs N >= t, got N={N}, t={t}")
    return math.factorial(t)


def _frame_sample(k, model, n, d, steps, t, seed, gate_set):
    rng = sample_stream(seed, k)
    U = circuit_unitary(sample_circuit(model, n, d, steps, rng, gate_set))
    V = circuit_unitary(sample_circuit(model, n, d, steps, rng, gate_set))
    overlap = np.vdot(U, V)  # tr(U^dag V)
    return abs(overlap) ** (2 * t)


def frame_potential(model: str, n: int, d: int, steps: int, t: int, samples: int,
                    seed: int = 0, gate_set=None, workers: int = 1) -> EstimatorResult:
    """Estimate ``E |tr(U^dag V)|^{2t}`` over independent circuit pairs.

    The standard error is the sample standard deviation over ``sqrt(samples)``.
    With ``steps = 0`` both circuits are the identity and the exact value
    ``d^{2tn}`` is returned.  Per-sample streams make the result identical for
    any ``workers``.
    """
    _check_model(model, n, d)
    _unitary_guard(n, d)
    if not 1 <= t <= 6:
        raise ParameterError(f"t must be in 1..6, got {t}")
    if samples < 2:
        raise ParameterError(f"need at least two samples, got {samples}")
    params = {"model": model, "n": n, "d": d, "steps": steps, "t": t}
    if steps == 0:
        return EstimatorResult(float(d ** (2 * t * n)), 0.0, samples, seed, params)
    args = (model, n, d, steps, t, seed, gate_set)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda k: _frame_sample(k, *args), range(samples)))
    else:
        values = [_frame_sample(k, *args) for k in range(samples)]
    values = np.asarray(values)
    est = float(np.mean(values))
    err = float(np.std(values, ddof=1) / math.sqrt(samples))
    return EstimatorResult(est, err, samples, seed, params)


def reduced_density_matrix(psi: np.ndarray, phi: np.ndarray, region, n: int, d: int) -> np.ndarray:
    """``tr_{not X} |psi><phi|`` for a set of 1-based qudit indices ``region``."""
    keep = sorted(int(r) - 1 for r in region)
    rest = [k for k in range(n) if k not in keep]
    a = psi.reshape((d,) * n).transpose(keep + rest).reshape(d ** len(keep), -1)
    b = phi.reshape((d,) * n).transpose(keep + rest).reshape(d ** len(keep), -1)
    return a @ b.conj().T


def trace_norm(M: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


@dataclass(frozen=True)
class TQORecord:
    """Worst-case local distinguishability of two evolved orthogonal states.

    ``dist0``/``dist1`` are the maxima over regions of
    ``||tr_{not X}(U psi U^dag) - tau_X||_1`` for the two states, ``cross`` the
    maximum of ``||tr_{not X}(U psi_0 psi_1^dag U^dag)||_1``; the ``*_region``
    fields name the maximising region.  ``bound`` is ``2^{-n/8}``.
    """

    n: int
    d: int
    steps: int
    l: int
    seed: int
    dist0: float
    dist1: float
    cross: float
    dist0_region: tuple
    dist1_region: tuple
    cross_region: tuple
    bound: float

    @property
    def passes(self) -> bool:
        return max(self.dist0, self.dist1, self.cross) <= self.bound

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passes"] = self.passes
        return out


def _basis_state(digit, n, d):
    v = np.zeros(d ** n, dtype=np.complex128)
    v[sum(digit * d ** k for k in range(n))] = 1.0
    return v


def tqo_experiment(n: int, d: int, steps: int, l: int, seed: int = 0, psi0=None, psi1=None,
                   guard: int = STATEVECTOR_GUARD) -> TQORecord:
    """Sample one parallel circuit and measure local indistinguishability.

    Every contiguous region of length ``1..l`` is examined.  Defaults for the
    two orthogonal states are ``|0...0>`` and ``|d-1 ... d-1>``.  ``steps``
    counts sampled layers.
    """
    _check_model("plr", n, d)
    if not 1 <= l <= n:
        raise ParameterError(f"region length must be in 1..n, got l={l}")
    psi0 = _basis_state(0, n, d) if psi0 is None else np.asarray(psi0, dtype=np.complex128)
    psi1 = _basis_state(d - 1, n, d) if psi1 is None else np.asarray(psi1, dtype=np.complex128)
    if abs(np.vdot(psi0, psi1)) > 1e-10:
        raise ParameterError("the two initial states must be orthogonal")
    c = sample_circuit("plr", n, d, steps, seed=seed)
    out = simulate_statevector(c, np.stack([psi0, psi1], axis=1), guard=guard)
    u0, u1 = out[:, 0], out[:, 1]
    best = {"dist0": (-1.0, ()), "dist1": (-1.0, ()), "cross": (-1.0, ())}
    for length in range(1, l + 1):
        tau = np.eye(d ** length) / d ** length
        for start in range(1, n - length + 2):
            region = tuple(range(start, start + length))
            vals = {
                "dist0": trace_norm(reduced_density_matrix(u0, u0, region, n, d) - tau),
                "dist1": trace_norm(reduced_density_matrix(u1, u1, region, n, d) - tau),
                "cross": trace_norm(reduced_density_matrix(u0, u1, region, n, d)),
            }
            for key, val in vals.items():
                if val > best[key][0]:
                    best[key] = (val, region)
    return TQORecord(n, d, steps, l, seed,
                     best["dist0"][0], best["dist1"][0], best["cross"][0],
                     best["dist0"][1], best["dist1"][1], best["cross"][1],
                     2.0 ** (-n / 8))


def load_gate_set(path) -> list[np.ndarray]:
    """Read a gate list from JSON.

    The file holds a JSON array; each entry is a flat, row-major list of
    ``q*q`` ``[re, im]`` pairs for a ``q x q`` unitary.  All gates must share
    ``q`` and be unitary to within ``1e-12``.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read gate file {path}: {exc}") from exc
    return parse_gate_set(raw)


def parse_gate_set(raw) -> list[np.ndarray]:
    if not isinstance(raw, list) or not raw:
        raise ParameterError("gate file must contain a non-empty JSON array of matrices")
    gates = []
    q = None
    for k, entry in enumerate(raw):
        try:
            arr = np.asarray(entry, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"gate {k}: entries must be [re, im] number pairs") from exc
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ParameterError(f"gate {k}: expected a list of [re, im] pairs, got shape {arr.shape}")
        side = math.isqrt(arr.shape[0])
        if side * side != arr.shape[0] or side < 2:
            raise ParameterError(f"gate {k}: {arr.shape[0]} entries is not a square matrix")
        if q is None:
            q = side
        elif side != q:
            raise ParameterError(f"gate {k}: dimension {side} differs from {q}")
        U = (arr[:, 0] + 1j * arr[:, 1]).reshape(q, q)
        err = np.abs(U.conj().T @ U - np.eye(q)).max()
        if err > UNITARITY_TOL:
            raise ParameterError(f"gate {k} is not unitary (max deviation {err:.2e})")
        gates.append(U)
    return gates


def dump_gate_set(gates, path=None):
    """Serialise gates in the format read by :func:`load_gate_set`."""
    raw = [[[float(z.real), float(z.imag)] for z in np.asarray(U).ravel()] for U in gates]
    if path is not None:
        Path(path).write_text(json.dumps(raw))
    return raw
