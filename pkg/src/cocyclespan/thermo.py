"""Potentials, two-sided pressure brackets, and dimension root solvers.

Upper pressure bounds come from subadditivity: P <= (1/n) log Z_n. Lower
bounds iterate the connector supermultiplicativity Z_{n+k+m} >= C Z_n Z_m
(each pair (I, J) contributes the distinct word IKJ), which telescopes to
P >= (log Z_n + log C)/(n + k) whenever a positive constant C is available.
Root searches therefore return intervals, not point estimates: uncertainty
is structural. Conformal systems (all generators scalar multiples of
orthogonal matrices) have exactly multiplicative partition sums, so they get
the exact input k = 0, C = 1 and zero-width brackets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .hypotheses import HypothesisReport, check_hypotheses
from .kernels import word_singvals
from .quasimult import GammaResult, gamma_minimax, qm_constant_phi
from .systems import GeneratorSystem
from .wordspace import DEFAULT_BUDGET, Word, check_budget, product, validate_word, word_str

S_MAX = 4.0          # root searches live on [0, S_MAX]
ROOT_TOL = 1e-6

KINDS = ("norm_s", "sv_s", "sv_s_squared")


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    s: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown potential kind {self.kind!r}")
        if self.s < 0:
            raise InputError("s must be nonnegative")

    def requires_d2(self) -> bool:
        return self.kind != "norm_s"


def _log_phi(logs1: np.ndarray, logs2: np.ndarray | None, s: float) -> np.ndarray:
    """log of the singular value function phi^s from per-word log singular values."""
    if s < 1.0:
        return s * logs1
    if s < 2.0:
        return logs1 + (s - 1.0) * logs2
    return (s / 2.0) * (logs1 + logs2)


def log_potential(logs1: np.ndarray, logs2: np.ndarray | None, spec: PotentialSpec) -> np.ndarray:
    if spec.kind == "norm_s":
        return spec.s * logs1
    if logs2 is None:
        raise InputError("singular value potentials need d = 2 data")
    base = _log_phi(logs1, logs2, spec.s)
    return 2.0 * base if spec.kind == "sv_s_squared" else base


def _phi_piece(l1: float, l2: float, s: float, piece: str) -> float:
    if piece == "low":
        return s * l1
    if piece == "mid":
        return l1 + (s - 1.0) * l2
    return (s / 2.0) * (l1 + l2)


def potential_value(A, spec: PotentialSpec) -> float:
    """phi-type potential of a single matrix; piece boundaries are cross-checked."""
    A = np.asarray(A, dtype=float)
    if spec.requires_d2() and A.shape != (2, 2):
        raise InputError(f"{spec.kind} is defined for 2x2 matrices only")
    sv = np.linalg.svd(A, compute_uv=False)
    l1 = math.log(sv[0])
    if spec.kind == "norm_s":
        return math.exp(spec.s * l1)
    l2 = math.log(sv[-1])
    if spec.s in (1.0, 2.0):
        below = _phi_piece(l1, l2, spec.s, "low" if spec.s == 1.0 else "mid")
        here = _phi_piece(l1, l2, spec.s, "mid" if spec.s == 1.0 else "high")
        if abs(below - here) > 1e-12 * max(1.0, abs(here)):
            raise AssertionError("potential pieces disagree at a boundary")
    val = _log_phi(np.array([l1]), np.array([l2]), spec.s)[0]
    return math.exp(2.0 * val if spec.kind == "sv_s_squared" else val)


@dataclass(frozen=True)
class QMInput:
    """Supermultiplicativity input: Z_{n+k+m} >= C Z_n Z_m for the summed potential."""

    k: int
    C: float

    def __post_init__(self):
        if self.k < 0 or not self.C > 0:
            raise InputError("qm input needs k >= 0 and C > 0")


def conformal_qm_input(system: GeneratorSystem) -> QMInput | None:
    """Exact k = 0, C = 1 input for conformal systems, else None."""
    return QMInput(k=0, C=1.0) if system.is_conformal() else None


@dataclass(frozen=True)
class PressureBracket:
    spec: PotentialSpec
    n: int
    lower: float
    upper: float
    lower_valid: bool
    log_zn: float
    qm: QMInput | None = None
    negated: bool = False  # True for the square-pressure sign convention

    def __post_init__(self):
        if self.lower_valid and self.lower > self.upper + 1e-9:
            raise AssertionError(
                f"bracket inverted: lower {self.lower} > upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower if self.lower_valid else math.inf

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper) if self.lower_valid else self.upper


class _LevelData:
    """Cached per-word log singular values at one level, reusable across s."""

    def __init__(self, system: GeneratorSystem, n: int, *, threads: int = 1,
                 budget: int = DEFAULT_BUDGET):
        if n < 1:
            raise InputError("level n must be >= 1")
        check_budget(system.ell**n, budget)
        self.n = n
        self.logs1, self.logs2 = word_singvals(system.stacked(), n, threads=threads)

    def log_z(self, spec: PotentialSpec) -> float:
        w = log_potential(self.logs1, self.logs2, spec)
        m = float(np.max(w))
        return m + math.log(float(np.sum(np.exp(w - m))))


def _bracket_from_logz(spec: PotentialSpec, n: int, log_zn: float,
                       qm: QMInput | None) -> PressureBracket:
    upper = log_zn / n
    if qm is not None:
        lower = (log_zn + math.log(qm.C)) / (n + qm.k)
        return PressureBracket(spec=spec, n=n, lower=lower, upper=upper,
                               lower_valid=True, log_zn=log_zn, qm=qm)
    return PressureBracket(spec=spec, n=n, lower=-math.inf, upper=upper,
                           lower_valid=False, log_zn=log_zn, qm=None)


def pressure_bracket(system: GeneratorSystem, spec: PotentialSpec, n: int,
                     qm_input: QMInput | None = None, *, threads: int = 1,
                     budget: int = DEFAULT_BUDGET) -> PressureBracket:
    """Two-sided bracket for the subadditive pressure of the chosen potential."""
    if spec.requires_d2() and system.dim != 2:
        raise InputError(f"{spec.kind} needs a 2x2 system")
    data = _LevelData(system, n, threads=threads, budget=budget)
    return _bracket_from_logz(spec, n, data.log_z(spec), qm_input)


def square_pressure(system: GeneratorSystem, s: float, n: int,
                    qm_input: QMInput | None = None, *, threads: int = 1,
                    budget: int = DEFAULT_BUDGET) -> PressureBracket:
    """Square-pressure bracket: P2 = -lim (1/n) log sum (phi^s)^2.

    `qm_input.C` is the phi-level constant; the squared potential inherits C^2.
    The raw bracket ends are negated and swapped, so `lower` is always valid
    (it comes from plain submultiplicativity) and `upper` needs the constant.
    """
    if system.dim != 2:
        raise InputError("square pressure needs d = 2")
    spec = PotentialSpec("sv_s_squared", s)
    data = _LevelData(system, n, threads=threads, budget=budget)
    log_q = data.log_z(spec)
    qm2 = QMInput(k=qm_input.k, C=qm_input.C**2) if qm_input is not None else None
    raw = _bracket_from_logz(spec, n, log_q, qm2)
    if qm2 is not None:
        return PressureBracket(spec=spec, n=n, lower=-raw.upper, upper=-raw.lower,
                               lower_valid=True, log_zn=log_q, qm=qm2, negated=True)
    return PressureBracket(spec=spec, n=n, lower=-raw.upper, upper=math.inf,
                           lower_valid=True, log_zn=log_q, qm=None, negated=True)


@dataclass(frozen=True)
class TargetSequence:
    """Finite prefix (J_1, ..., J_T) of a target cylinder sequence."""

    words: tuple[Word, ...]
    tail_start: int = 1

    def __post_init__(self):
        if not self.words:
            raise InputError("target sequence is empty")
        if any(len(w) == 0 for w in self.words):
            raise InputError("target words must be nonempty")
        if not 1 <= self.tail_start <= len(self.words):
            raise InputError("tail_start outside the target list")

    def validate(self, ell: int) -> list[str]:
        warnings = []
        for w in self.words:
            validate_word(w, ell)
        lengths = [len(w) for w in self.words]
        if any(b < a for a, b in zip(lengths, lengths[1:])):
            warnings.append("target lengths are not nondecreasing")
        return warnings


def all_ones_targets(count: int, tail_start: int = 1) -> TargetSequence:
    return TargetSequence(words=tuple(tuple([1] * k) for k in range(1, count + 1)),
                          tail_start=tail_start)


class _TargetData:
    def __init__(self, system: GeneratorSystem, targets: TargetSequence):
        self.lengths = np.array([len(w) for w in targets.words], dtype=float)
        l1, l2 = [], []
        for w in targets.words:
            sp = product(system, w)
            sv = np.linalg.svd(sp.unit, compute_uv=False)
            l1.append(sp.logscale + math.log(sv[0]))
            l2.append(sp.logscale + math.log(sv[-1]))
        self.logs1 = np.array(l1)
        self.logs2 = np.array(l2)
        self.tail = targets.tail_start - 1

    def alpha(self, s: float) -> float:
        logphi = _log_phi(self.logs1, self.logs2, s)
        vals = -logphi / self.lengths
        return float(np.min(vals[self.tail:]))


def alpha_hat(system: GeneratorSystem, targets: TargetSequence, s: float) -> float:
    """Tail-minimum proxy of the inverse lower pressure of the target sequence."""
    if system.dim != 2:
        raise InputError("alpha_hat needs d = 2")
    targets.validate(system.ell)
    return _TargetData(system, targets).alpha(s)


@dataclass(frozen=True)
class BetaEstimate:
    value: float
    explicit: bool
    tail_start: int | None = None
    warnings: tuple[str, ...] = ()


def beta_hat(psi_table=None, beta: float | None = None,
             tail_start: int | None = None) -> BetaEstimate:
    """Tail-minimum proxy for liminf psi(n)/n, or a passthrough explicit beta."""
    if beta is not None:
        if beta < 0:
            raise InputError("beta must be nonnegative")
        warn = () if beta < 1 else ("recurrence dimension needs beta < 1",)
        return BetaEstimate(value=float(beta), explicit=True, warnings=warn)
    if not psi_table:
        raise InputError("provide either a psi table or an explicit beta")
    pairs = sorted((int(n), float(v)) for n, v in psi_table)
    if any(n <= 0 for n, _ in pairs):
        raise InputError("psi table needs positive n")
    if tail_start is None:
        tail_start = pairs[max(0, len(pairs) // 2)][0]
    tail = [(n, v) for n, v in pairs if n >= tail_start]
    if not tail:
        raise InputError("tail_start leaves an empty tail")
    ratios = [v / n for n, v in tail]
    value = min(ratios)
    warnings = []
    n_hi = pairs[-1][0]
    quart = [v / n for n, v in pairs if n >= n_hi - (n_hi - pairs[0][0]) / 4]
    if len(quart) >= 2 and max(quart) - min(quart) > 0.01:
        warnings.append("liminf proxy unstable: last-quartile spread above 0.01")
    if value >= 1:
        warnings.append("recurrence dimension needs beta < 1")
    return BetaEstimate(value=float(value), explicit=False, tail_start=tail_start,
                        warnings=tuple(warnings))


@dataclass(frozen=True)
class DimensionReport:
    kind: str  # shrinking_target | recurrence | affinity
    interval: tuple[float, float]
    dimension: tuple[float, float]  # interval clamped at 2
    clamped: bool
    boundary: str | None = None
    hypothesis_report: HypothesisReport | None = None
    warnings: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]


def _bisect_decreasing(g, lo: float, hi: float, tol: float = ROOT_TOL):
    """Root of a decreasing function on [lo, hi]; boundary tag when no sign change."""
    if g(lo) <= 0:
        return lo, "at_lower"
    if g(hi) > 0:
        return hi, "at_upper"
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if g(mid) > 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b), None


class QMInputProvider:
    """C(s) source for lower pressure bounds: conformal exactness or gamma-based.

    For the singular value function the constant follows the piecewise Lemma
    4.2 formulas on [0, 2] and the exact determinant power beyond; the norm
    potential uses gamma^s at every s.
    """

    def __init__(self, system: GeneratorSystem, k_qm: int, seed: int = 42,
                 budget: int = DEFAULT_BUDGET):
        self.conformal = system.is_conformal()
        self.k = 0 if self.conformal else k_qm
        self.gamma: GammaResult | None = None
        self.min_det = None
        if not self.conformal:
            self.gamma = gamma_minimax(system, k_qm, seed=seed, budget=budget)
            if system.dim == 2:
                c0 = qm_constant_phi(system, k_qm, 1.0, gamma=self.gamma, budget=budget)
                self.min_det = c0.min_det

    def qm_input(self, s: float, kind: str = "sv_s") -> QMInput | None:
        if self.conformal:
            return QMInput(k=0, C=1.0)
        g = self.gamma.value
        if g <= 0.0:
            return None
        if kind == "norm_s":
            return QMInput(k=self.k, C=g**s)
        if self.min_det is None:
            return None
        if s <= 1.0:
            c = g**s
        elif s <= 2.0:
            c = self.min_det ** (s - 1.0) * g ** (2.0 - s)
        else:
            # phi^s is a pure determinant power: exactly multiplicative up to
            # the connector determinant factor
            c = self.min_det ** (s / 2.0)
        return QMInput(k=self.k, C=c)

    def describe(self) -> dict:
        if self.conformal:
            return {"mode": "conformal", "k": 0, "C": 1.0}
        return {"mode": "gamma_minimax", "k": self.k, "gamma": self.gamma.value,
                "gamma_certified": self.gamma.certified, "min_det": self.min_det}


def _monotone_warnings(samples: list[tuple[float, float]], label: str,
                       decreasing: bool) -> list[str]:
    samples = sorted(samples)
    vals = [v for _s, v in samples]
    for a, b in zip(vals, vals[1:]):
        if decreasing and b > a + 1e-9:
            return [f"{label} not monotone along the bisection samples"]
        if not decreasing and b < a - 1e-9:
            return [f"{label} not monotone along the bisection samples"]
    return []


def s0_interval(system: GeneratorSystem, targets: TargetSequence, n: int, k_qm: int,
                *, seed: int = 42, threads: int = 1,
                budget: int = DEFAULT_BUDGET) -> DimensionReport:
    """Interval for s0 = inf{s > 0 : P(s) <= alpha(s)}, clamped at 2."""
    if system.dim != 2:
        raise InputError("shrinking-target dimension needs d = 2")
    warnings = list(targets.validate(system.ell))
    hyp = check_hypotheses(system, "corollary_4_3", seed=seed, budget=budget)
    data = _LevelData(system, n, threads=threads, budget=budget)
    tdata = _TargetData(system, targets)
    prov = QMInputProvider(system, k_qm, seed=seed, budget=budget)
    p_samples: list[tuple[float, float]] = []
    a_samples: list[tuple[float, float]] = []

    def g_up(s: float) -> float:
        up = data.log_z(PotentialSpec("sv_s", s)) / n
        al = tdata.alpha(s)
        p_samples.append((s, up))
        a_samples.append((s, al))
        return up - al

    def g_lo(s: float) -> float:
        qm = prov.qm_input(s)
        if qm is None:
            return -math.inf
        lz = data.log_z(PotentialSpec("sv_s", s))
        return (lz + math.log(qm.C)) / (n + qm.k) - tdata.alpha(s)

    s_hi, b_hi = _bisect_decreasing(g_up, 0.0, S_MAX)
    s_lo, b_lo = _bisect_decreasing(g_lo, 0.0, S_MAX)
    warnings += _monotone_warnings(p_samples, "upper pressure", decreasing=True)
    warnings += _monotone_warnings(a_samples, "alpha proxy", decreasing=False)
    if not prov.conformal and prov.gamma.value <= 0:
        warnings.append("no positive QM constant: lower root defaulted to 0")
    boundary = b_hi or b_lo
    interval = (min(s_lo, s_hi), s_hi)
    dim = (min(2.0, interval[0]), min(2.0, interval[1]))
    return DimensionReport(
        kind="shrinking_target", interval=interval, dimension=dim,
        clamped=interval[1] > 2.0, boundary=boundary, hypothesis_report=hyp,
        warnings=tuple(warnings),
        details={"n": n, "qm": prov.describe(), "tail_start": targets.tail_start,
                 "targets": [word_str(w, system.ell) for w in targets.words],
                 "proxy": "tail minimum of -(1/|J_k|) log phi^s(A_{J_k})"})


def r0_interval(system: GeneratorSystem, beta: float, n: int, k_qm: int, *,
                seed: int = 42, threads: int = 1,
                budget: int = DEFAULT_BUDGET) -> DimensionReport:
    """Interval for the root of (1 - beta) P(r) = beta P2(r), clamped at 2."""
    if system.dim != 2:
        raise InputError("recurrence dimension needs d = 2")
    if not 0.0 <= beta < 1.0:
        raise InputError("beta must lie in [0, 1)")
    hyp = check_hypotheses(system, "corollary_4_3", seed=seed, budget=budget)
    data = _LevelData(system, n, threads=threads, budget=budget)
    prov = QMInputProvider(system, k_qm, seed=seed, budget=budget)

    def h_up(r: float) -> float:
        # max of h: upper P, lower P2 (the always-valid subadditive end)
        up_p = data.log_z(PotentialSpec("sv_s", r)) / n
        p2_lo = -data.log_z(PotentialSpec("sv_s_squared", r)) / n
        return (1.0 - beta) * up_p - beta * p2_lo

    def h_lo(r: float) -> float:
        qm = prov.qm_input(r)
        if qm is None:
            return -math.inf
        lz = data.log_z(PotentialSpec("sv_s", r))
        lo_p = (lz + math.log(qm.C)) / (n + qm.k)
        lq = data.log_z(PotentialSpec("sv_s_squared", r))
        p2_up = -(lq + 2.0 * math.log(qm.C)) / (n + qm.k)
        return (1.0 - beta) * lo_p - beta * p2_up

    r_hi, b_hi = _bisect_decreasing(h_up, 0.0, S_MAX)
    r_lo, b_lo = _bisect_decreasing(h_lo, 0.0, S_MAX)
    warnings = []
    if not prov.conformal and prov.gamma.value <= 0:
        warnings.append("no positive QM constant: lower root defaulted to 0")
    interval = (min(r_lo, r_hi), r_hi)
    dim = (min(2.0, interval[0]), min(2.0, interval[1]))
    return DimensionReport(
        kind="recurrence", interval=interval, dimension=dim,
        clamped=interval[1] > 2.0, boundary=b_hi or b_lo, hypothesis_report=hyp,
        warnings=tuple(warnings),
        details={"n": n, "beta": beta, "qm": prov.describe()})


def affinity_dimension(system: GeneratorSystem, n: int, k_qm: int, *, seed: int = 42,
                       threads: int = 1, budget: int = DEFAULT_BUDGET) -> DimensionReport:
    """Interval for the root of P(s) = 0 (candidate attractor dimension)."""
    if system.dim != 2:
        raise InputError("affinity dimension needs d = 2")
    hyp = check_hypotheses(system, "corollary_4_3", seed=seed, budget=budget)
    data = _LevelData(system, n, threads=threads, budget=budget)
    prov = QMInputProvider(system, k_qm, seed=seed, budget=budget)

    def g_up(s: float) -> float:
        return data.log_z(PotentialSpec("sv_s", s)) / n

    def g_lo(s: float) -> float:
        qm = prov.qm_input(s)
        if qm is None:
            return -math.inf
        return (data.log_z(PotentialSpec("sv_s", s)) + math.log(qm.C)) / (n + qm.k)

    s_hi, b_hi = _bisect_decreasing(g_up, 0.0, S_MAX)
    s_lo, b_lo = _bisect_decreasing(g_lo, 0.0, S_MAX)
    warnings = []
    if not prov.conformal and prov.gamma.value <= 0:
        warnings.append("no positive QM constant: lower root defaulted to 0")
    interval = (min(s_lo, s_hi), s_hi)
    dim = (min(2.0, interval[0]), min(2.0, interval[1]))
    return DimensionReport(
        kind="affinity", interval=interval, dimension=dim,
        clamped=interval[1] > 2.0, boundary=b_hi or b_lo, hypothesis_report=hyp,
        warnings=tuple(warnings), details={"n": n, "qm": prov.describe()})
