"""Closed-form calculators for the convergence bounds of random local circuits.

Every calculator returns a :class:`BoundReport`.  Values are carried as natural
logarithms internally, so bounds such as ``(r/delta)^(2 r d^4)`` never
overflow; ``value`` is filled in whenever it is representable.

Where a formula contains a ``log`` whose base is not pinned down, the report's
``value`` uses the natural log and ``alt_values["log2"]`` gives the base-2
variant.  Ratios such as ``log(t)/log(d)`` are base independent and carry no
alternative.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .exceptions import ParameterError

__all__ = [
    "BoundReport",
    "LOG_CONVENTIONS",
    "tpe_gap_bound",
    "design_length",
    "g_design_conversion",
    "diamond_conversion",
    "ham_gap_to_g",
    "gap_lower_bound",
    "small_chain_gap_bound",
    "nachtergaele_compose",
    "nachtergaele_chain",
    "path_coupling_contraction",
    "wasserstein_to_g",
    "detectability_bound",
    "parallel_from_detectability",
    "converse_lower_bound",
    "design_support_lb",
    "covering_size",
    "hiding_bound",
    "REGISTRY",
    "evaluate",
]

LOG_CONVENTIONS = {"ln": math.log, "log2": math.log2}

_MAX_LOG = math.log(1e300)


@dataclass
class BoundReport:
    """An evaluated bound.

    ``log_value`` is the natural log of ``value`` (``-inf`` for zero);
    ``value`` is ``None`` when it would exceed ``1e300``.  ``vacuous`` marks
    probability bounds ``>= 1`` and size/length lower bounds ``<= 1``.
    """

    name: str
    inputs: dict
    direction: str
    log_value: float
    value: float | None = None
    log10_value: float = field(init=False)
    preconditions_met: bool = True
    reasons: list = field(default_factory=list)
    vacuous: bool = False
    convention: str = "ln"
    alt_values: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        lv = self.log_value
        self.log10_value = lv / math.log(10) if math.isfinite(lv) else lv
        if self.value is None and lv <= _MAX_LOG:
            self.value = math.exp(lv) if lv > -math.inf else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _report(name, inputs, direction, value=None, log_value=None, **kw) -> BoundReport:
    if log_value is None:
        log_value = _log(value)
    return BoundReport(name, dict(inputs), direction, log_value, value=value, **kw)


def _require_t2(t):
    if t < 2:
        raise ParameterError(f"bound needs t >= 2 so that log(t) > 0, got t={t}")


def _require_model(model):
    model = model.lower()
    if model not in ("lr", "plr"):
        raise ParameterError(f"model must be 'lr' or 'plr', got {model!r}")
    return model


def tpe_gap_bound(n: int, t: int, d: int = 2, model: str = "lr") -> BoundReport:
    """Upper bound on ``g`` for one walk step: ``1 - 1/(n t^4 log t)`` (LR) or
    ``1 - 1/(12 t^4 log t)`` (PLR)."""
    _require_t2(t)
    model = _require_model(model)
    pref = n if model == "lr" else 12

    def at(logf):
        return 1.0 - 1.0 / (pref * t ** 4 * logf(t))

    return _report("tpe_gap", {"n": n, "t": t, "d": d, "model": model}, "upper", at(math.log),
                   alt_values={"log2": at(math.log2)})


def design_length(n: int, t: int, d: int, eps: float, model: str = "lr") -> BoundReport:
    """Circuit length that guarantees an ``eps``-approximate ``t``-design.

    ``log(t) t^4 n (2 n t log d + log(1/eps))`` for LR; the PLR length has
    ``12`` in place of the leading ``n``.
    """
    _require_t2(t)
    model = _require_model(model)
    if not 0 < eps <= 1:
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    pref = n if model == "lr" else 12

    def at(logf):
        return logf(t) * t ** 4 * pref * (2 * n * t * logf(d) + logf(1.0 / eps))

    v = at(math.log)
    return _report("design_length", {"n": n, "t": t, "d": d, "eps": eps, "model": model},
                   "upper", v, vacuous=False, alt_values={"log2": at(math.log2)})


def g_design_conversion(value: float, N: int, t: int, direction: str = "g_to_G") -> BoundReport:
    """Two-sided conversion between the TPE value ``g`` and the design error ``G``.

    ``g / (2 N^{t/2}) <= G <= N^{2t} g``.  With ``direction="g_to_G"`` the
    report gives the interval for ``G``; with ``"G_to_g"`` the interval for ``g``
    (``G / N^{2t} <= g <= 2 N^{t/2} G``).  ``value``/``log_value`` hold the
    upper end, ``extras["lower"]``/``extras["log_lower"]`` the lower end.
    """
    if value < 0:
        raise ParameterError(f"input must be >= 0, got {value}")
    lv = _log(value)
    log_n = math.log(N)
    if direction == "g_to_G":
        upper = lv + 2 * t * log_n
        lower = lv - math.log(2) - 0.5 * t * log_n
    elif direction == "G_to_g":
        upper = lv + math.log(2) + 0.5 * t * log_n
        lower = lv - 2 * t * log_n
    else:
        raise ParameterError(f"direction must be 'g_to_G' or 'G_to_g', got {direction!r}")
    low_val = math.exp(lower) if lower <= _MAX_LOG else None
    return _report("g_design_conversion", {"value": value, "N": N, "t": t, "direction": direction},
                   "upper", log_value=upper,
                   extras={"lower": low_val, "log_lower": lower})


def diamond_conversion(eps: float, N: int = 2, t: int = 1,
                       direction: str = "design_to_diamond") -> BoundReport:
    """Design error vs diamond-norm distance of the ``t``-fold channels.

    An ``eps``-approximate design has diamond distance ``<= 2 eps``; diamond
    distance ``eps`` gives an ``eps N^{2t}``-approximate design.
    """
    if eps < 0:
        raise ParameterError(f"eps must be >= 0, got {eps}")
    if direction == "design_to_diamond":
        lv = _log(eps) + math.log(2)
    elif direction == "diamond_to_design":
        lv = _log(eps) + 2 * t * math.log(N)
    else:
        raise ParameterError(f"unknown direction {direction!r}")
    return _report("diamond_conversion", {"eps": eps, "N": N, "t": t, "direction": direction},
                   "upper", log_value=lv)


def ham_gap_to_g(gap: float, n: int, normalization: str = "walk") -> BoundReport:
    """TPE value of one local-walk step from the gap of ``H_{n,t}``.

    ``"walk"`` gives the exact ``1 - gap/(n-1)`` for pairs drawn uniformly
    from the ``n - 1`` neighbours; ``"n_sites"`` gives ``1 - gap/n``, which
    upper-bounds it.
    """
    if gap < 0:
        raise ParameterError(f"gap must be >= 0, got {gap}")
    if normalization == "walk":
        v = 1.0 - gap / (n - 1)
    elif normalization == "n_sites":
        v = 1.0 - gap / n
    else:
        raise ParameterError(f"normalization must be 'walk' or 'n_sites', got {normalization!r}")
    return _report("ham_gap_to_g", {"gap": gap, "n": n, "normalization": normalization},
                   "upper", v)


def gap_lower_bound(t: int, d: int = 2) -> BoundReport:
    """``1/(t^4 log t)``, the ``n``-independent lower bound on ``Delta(H_{n,t})``.

    ``extras["composed"]`` holds the intermediate expression
    ``e^{-2 x} (d^2+1)^{-2 x} / (8 x)`` with ``x = log t / log d``.
    """
    _require_t2(t)
    x = math.log(t) / math.log(d)
    composed = math.exp(-2 * x - 2 * x * math.log(d * d + 1)) / (8 * x)
    return _report("gap_lower_bound", {"t": t, "d": d}, "lower", 1.0 / (t ** 4 * math.log(t)),
                   alt_values={"log2": 1.0 / (t ** 4 * math.log2(t))},
                   extras={"composed": composed})


def small_chain_gap_bound(m: int, d: int) -> BoundReport:
    """``m^{-2} e^{-m} (d^2+1)^{-m}``, the path-coupling gap bound for ``m`` sites."""
    lv = -2 * math.log(m) - m - m * math.log(d * d + 1)
    return _report("small_chain_gap", {"m": m, "d": d}, "lower", log_value=lv)


def nachtergaele_chain(t: int, d: int) -> int:
    """Chain length ``ceil(2 log t / log d)`` whose gap feeds the composition."""
    return max(2, math.ceil(2 * math.log(t) / math.log(d) - 1e-12))


def nachtergaele_compose(gap_small: float, t: int, d: int, n: int | None = None) -> BoundReport:
    """Lower bound on ``Delta(H_{n,t})`` for long chains from a short-chain gap.

    ``gap_small / (8 log t / log d)``, where ``gap_small`` should be the gap of
    the chain of length :func:`nachtergaele_chain`.  The premise on ``n``
    appears in two versions, ``n >= ceil(10 log t)`` and
    ``n >= ceil(2 t log t)``; both thresholds are reported under both log
    conventions and, when ``n`` is given, checked.
    """
    if gap_small < 0:
        raise ParameterError(f"gap must be >= 0, got {gap_small}")
    _require_t2(t)
    x = math.log(t) / math.log(d)
    thresholds = {
        "10logt_ln": math.ceil(10 * math.log(t)),
        "10logt_log2": math.ceil(10 * math.log2(t)),
        "2tlogt_ln": math.ceil(2 * t * math.log(t)),
        "2tlogt_log2": math.ceil(2 * t * math.log2(t)),
    }
    reasons = []
    met = True
    if n is not None:
        failing = [k for k, v in thresholds.items() if n < v]
        if failing:
            reasons.append(f"n={n} below thresholds {failing}")
            met = len(failing) < len(thresholds)
    return _report("nachtergaele", {"gap_small": gap_small, "t": t, "d": d, "n": n}, "lower",
                   gap_small / (8 * x), preconditions_met=met, reasons=reasons,
                   extras={"m": nachtergaele_chain(t, d), "thresholds": thresholds})


def path_coupling_contraction(n: int, d: int, k: float) -> BoundReport:
    """Wasserstein distance to Haar after ``(n-1) k`` local-walk steps.

    ``(1 - 1/(e^n (d^2+1)^{n-2}))^{k/(n-1)} sqrt(2) d^{n/2}``.
    ``extras["base"]`` is the per-exponent factor.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    log_inv = n + (n - 2) * math.log(d * d + 1)    # log of e^n (d^2+1)^{n-2}
    log_base = math.log1p(-math.exp(-log_inv))
    lv = (k / (n - 1)) * log_base + 0.5 * math.log(2) + 0.5 * n * math.log(d)
    return _report("path_coupling", {"n": n, "d": d, "k": k}, "upper", log_value=lv,
                   extras={"base": math.exp(log_base)})


def wasserstein_to_g(W: float, t: int) -> BoundReport:
    """``g <= 2 t W``: the moment map is ``2t``-Lipschitz in the Frobenius norm."""
    if W < 0:
        raise ParameterError(f"W must be >= 0, got {W}")
    return _report("wasserstein_to_g", {"W": W, "t": t}, "upper", 2.0 * t * W)


def detectability_bound(gap: float) -> BoundReport:
    """``||P_odd P_even - P_c|| <= (1 + gap/2)^{-1/3}``."""
    if gap < 0:
        raise ParameterError(f"gap must be >= 0, got {gap}")
    return _report("detectability", {"gap": gap}, "upper", (1.0 + gap / 2.0) ** (-1.0 / 3.0))


def parallel_from_detectability(norm: float) -> BoundReport:
    """``lambda_2(M) <= 1/2 + norm/2`` with ``norm = ||P_odd P_even - P_c||``."""
    return _report("parallel_from_detectability", {"norm": norm}, "upper", 0.5 + 0.5 * norm)


def converse_lower_bound(n: int, t: int, d: int, eps: float = 0.25) -> BoundReport:
    """Minimum circuit size ``n t / (5 d^4 ln(n t))`` of any approximate design.

    Preconditions ``eps <= 1/4`` and ``t <= d^{n/2}`` are checked and
    reported, not enforced.
    """
    reasons = []
    if eps > 0.25:
        reasons.append(f"eps={eps} > 1/4")
    if math.log(t) > 0.5 * n * math.log(d):
        reasons.append(f"t={t} > d^(n/2)")
    if n * t < 2:
        raise ParameterError("n t must be >= 2 so that ln(n t) > 0")
    v = n * t / (5 * d ** 4 * math.log(n * t))
    return _report("converse", {"n": n, "t": t, "d": d, "eps": eps}, "lower", v,
                   preconditions_met=not reasons, reasons=reasons, vacuous=v <= 1.0)


def design_support_lb(N: int, t: int, eps: float) -> BoundReport:
    """``(1 - eps) binom(N + t - 1, t)^2`` points are needed in any design's support."""
    if not 0 <= eps <= 1:
        raise ParameterError(f"eps must lie in [0, 1], got {eps}")
    log_binom = math.lgamma(N + t) - math.lgamma(t + 1) - math.lgamma(N)
    lv = _log(1.0 - eps) + 2 * log_binom
    exact = None
    if lv <= _MAX_LOG and N + t < 10 ** 6:
        exact = (1.0 - eps) * math.comb(N + t - 1, t) ** 2
    return _report("design_support", {"N": N, "t": t, "eps": eps}, "lower", exact,
                   log_value=lv, vacuous=lv <= 0.0)


def covering_size(n: int, r: int, d: int, eps: float) -> BoundReport:
    """Log of ``binom(n, 2)^r (10 r/eps)^{r d^4}``, a diamond-norm net size."""
    if r < 1 or eps <= 0:
        raise ParameterError(f"need r >= 1 and eps > 0, got r={r}, eps={eps}")
    lv = r * _log(math.comb(n, 2)) + r * d ** 4 * math.log(10 * r / eps)
    return _report("covering_size", {"n": n, "r": r, "d": d, "eps": eps}, "upper",
                   log_value=lv)


def hiding_bound(n: int, d: int, s: float, r: int, delta: float) -> BoundReport:
    """Probability that some size-``r`` measurement distinguishes the state.

    ``(r/delta)^{2 r d^4} * 3 (560 t/(d^n delta^2))^{t/4}`` with
    ``t = (s/(n^3 log d log s))^{1/6}``.  Evaluated in log space; a value
    ``>= 1`` is flagged vacuous.  ``alt_values["log2"]`` uses base-2 logs in
    the formula for ``t``.
    """
    if delta <= 0:
        return _report("hiding", {"n": n, "d": d, "s": s, "r": r, "delta": delta}, "upper",
                       log_value=math.inf, vacuous=True, reasons=["delta <= 0"])

    def log_bound(logf):
        tt = (s / (n ** 3 * logf(d) * logf(s))) ** (1.0 / 6.0)
        lv = (2 * r * d ** 4 * math.log(r / delta) + math.log(3)
              + (tt / 4.0) * (math.log(560 * tt) - n * math.log(d) - 2 * math.log(delta)))
        return tt, lv

    t_ln, lv = log_bound(math.log)
    t_l2, lv2 = log_bound(math.log2)
    met = t_ln >= 1
    reasons = [] if met else [f"t={t_ln:.4g} < 1"]
    alt = {"log2": math.exp(lv2) if lv2 <= _MAX_LOG else None, "log2_log_value": lv2}
    return _report("hiding", {"n": n, "d": d, "s": s, "r": r, "delta": delta}, "upper",
                   log_value=lv, preconditions_met=met, reasons=reasons,
                   vacuous=lv >= 0.0, alt_values=alt, extras={"t": t_ln, "t_log2": t_l2})


REGISTRY = {
    "tpe": tpe_gap_bound,
    "design-length": design_length,
    "g-design": g_design_conversion,
    "diamond": diamond_conversion,
    "ham-gap": ham_gap_to_g,
    "gap-lower": gap_lower_bound,
    "small-chain": small_chain_gap_bound,
    "nachtergaele": nachtergaele_compose,
    "path-coupling": path_coupling_contraction,
    "wasserstein": wasserstein_to_g,
    "detectability": detectability_bound,
    "parallel-detect": parallel_from_detectability,
    "converse": converse_lower_bound,
    "support": design_support_lb,
    "covering": covering_size,
    "hiding": hiding_bound,
}


def evaluate(name: str, **params) -> BoundReport:
    """Look up a calculator by its short name and evaluate it."""
    try:
        fn = REGISTRY[name]
    except KeyError:
        raise ParameterError(f"unknown bound {name!r}; choose from {sorted(REGISTRY)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for bound {name!r}: {exc}") from None
