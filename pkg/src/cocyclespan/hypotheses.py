"""Irreducibility verdicts, power/wedge cocycles, and hypothesis checkers.

The decision cascade for a verdict:

* d = 2: exact path. A 2x2 tuple is reducible iff the line quadratics
  det(u | A_i u) share a real projective root; decided in rational arithmetic
  (tolerance-based float twin for systems flagged inexact).
* any d: if the unital algebra generated by the tuple has dimension d^2 there
  is no invariant subspace even over C (Burnside), hence none over R.
* any d: randomized falsification; orbit spans seeded at real eigenvectors of
  short products. Finding a low-dimensional invariant orbit span certifies
  reducibility; not finding one leaves the verdict Inconclusive for d >= 3.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .linalg import (SubspaceBasis, invariance_residual, matrices_span_basis,
                     span_basis, wedge_power)
from .rational2 import (ProjPoint, common_projective_root,
                        common_projective_root_float, line_quadratic_exact)
from .systems import GeneratorSystem
from .wordspace import DEFAULT_BUDGET, check_budget, enumerate_words, product

IRREDUCIBLE = "IrreducibleCertified"
REDUCIBLE = "ReducibleWitness"
INCONCLUSIVE = "Inconclusive"

WITNESS_TOL = 1e-8


@dataclass(frozen=True)
class IrreducibilityVerdict:
    status: str
    method: str
    witness: SubspaceBasis | None = None
    residual: float = 0.0
    notes: tuple[str, ...] = ()

    @property
    def reducible(self) -> bool:
        return self.status == REDUCIBLE


def power_system(system: GeneratorSystem, t: int, *, budget: int = DEFAULT_BUDGET) -> GeneratorSystem:
    """The cocycle generated by all length-t products, in lexicographic word order."""
    if t < 1:
        raise InputError("power exponent must be >= 1")
    check_budget(system.ell**t, budget)
    gens = []
    for word in enumerate_words(system.ell, t):
        gens.append(product(system, word).matrix)
    return GeneratorSystem(tuple(gens), exact=system.exact)


def wedge_system(system: GeneratorSystem, m: int) -> GeneratorSystem:
    """Generators replaced by their m-th compound matrices."""
    if m == 1:
        return system
    return GeneratorSystem(tuple(wedge_power(A, m) for A in system.generators),
                           exact=False)


def orbit_span(system: GeneratorSystem, v) -> SubspaceBasis:
    """Smallest subspace containing v invariant under every generator.

    Words of length <= d-1 suffice: the span dimension grows by at least one
    per level until it stabilizes, and once stable it is invariant.
    """
    v = np.asarray(v, dtype=float).ravel()
    if np.linalg.norm(v) == 0:
        raise InputError("orbit span needs a nonzero vector")
    d = system.dim
    basis = span_basis([v], ambient=d)
    for _ in range(d - 1):
        imgs = [A @ basis.basis[:, j] for A in system.generators for j in range(basis.dim)]
        new = span_basis([basis.basis[:, j] for j in range(basis.dim)] + imgs, ambient=d)
        if new.dim == basis.dim:
            break
        basis = new
        if basis.dim == d:
            break
    return basis


@dataclass(frozen=True)
class AlgebraDimension:
    dim: int
    certified: bool  # True iff dim == d^2, a sufficient irreducibility certificate


def algebra_dimension(system: GeneratorSystem) -> AlgebraDimension:
    """Dimension of the span of {A_I} with the identity, by incremental rank growth.

    The level-j span equals span of all words of length <= j plus the identity;
    once a level adds nothing the span is invariant and the iteration stops
    (at most d^2 growing levels).
    """
    d = system.dim
    basis_mats = [np.eye(d)]
    basis = matrices_span_basis(basis_mats)
    while basis.dim < d * d:
        imgs = [A @ basis.basis[:, j].reshape(d, d)
                for A in system.generators for j in range(basis.dim)]
        new = span_basis([basis.basis[:, j] for j in range(basis.dim)]
                         + [M.ravel() for M in imgs], ambient=d * d)
        if new.dim == basis.dim:
            break
        basis = new
    return AlgebraDimension(dim=basis.dim, certified=basis.dim == d * d)


def _witness_from_line(system: GeneratorSystem, u: np.ndarray, method: str) -> IrreducibilityVerdict:
    W = span_basis([u], ambient=system.dim)
    res = invariance_residual(system.generators, W)
    if res > WITNESS_TOL:
        return IrreducibilityVerdict(
            status=INCONCLUSIVE, method=method, residual=res,
            notes=(f"candidate line failed invariance check ({res:.2e})",))
    return IrreducibilityVerdict(status=REDUCIBLE, method=method, witness=W, residual=res)


def _verdict_d2(system: GeneratorSystem) -> IrreducibilityVerdict:
    quads = [line_quadratic_exact(A) for A in system.generators]
    if system.exact:
        root = common_projective_root(quads)
        method = "d2_exact"
    else:
        root = common_projective_root_float(quads)
        method = "d2_float"
    if root is None:
        return IrreducibilityVerdict(status=IRREDUCIBLE, method=method)
    if isinstance(root, str):  # 'all': every line invariant (scalar family)
        return _witness_from_line(system, np.array([1.0, 0.0]), method)
    u = root.vector() if isinstance(root, ProjPoint) else np.asarray(root)
    return _witness_from_line(system, u, method)


def _real_eigenvectors(M: np.ndarray) -> list[np.ndarray]:
    vals, vecs = np.linalg.eig(M)
    out = []
    for i, lam in enumerate(vals):
        if abs(lam.imag) <= 1e-10 * max(1.0, abs(lam)):
            v = vecs[:, i].real
            nrm = np.linalg.norm(v)
            if nrm > 1e-12:
                out.append(v / nrm)
    return out


def _verdict_randomized(system: GeneratorSystem, seed: int, multistarts: int) -> IrreducibilityVerdict:
    rng = np.random.default_rng(seed)
    d = system.dim
    for _ in range(multistarts):
        length = int(rng.integers(1, d + 1))
        word = tuple(int(s) for s in rng.integers(1, system.ell + 1, size=length))
        seeds = _real_eigenvectors(product(system, word).unit)
        if not seeds:
            v = rng.standard_normal(d)
            seeds = [v / np.linalg.norm(v)]
        for v in seeds:
            W = orbit_span(system, v)
            if 0 < W.dim < d:
                res = invariance_residual(system.generators, W)
                if res <= WITNESS_TOL:
                    return IrreducibilityVerdict(status=REDUCIBLE, method="random_orbit",
                                                 witness=W, residual=res)
    return IrreducibilityVerdict(status=INCONCLUSIVE, method="random_orbit",
                                 notes=("no invariant subspace found",))


def irreducibility_verdict(system: GeneratorSystem, *, method: str = "auto",
                           seed: int = 42, multistarts: int = 64) -> IrreducibilityVerdict:
    if method not in ("auto", "d2", "algebra_random"):
        raise InputError(f"unknown method {method!r}")
    if method in ("auto", "d2") and system.dim == 2:
        return _verdict_d2(system)
    if method == "d2":
        raise InputError("d2 method needs a 2x2 system")
    alg = algebra_dimension(system)
    if alg.certified:
        return IrreducibilityVerdict(status=IRREDUCIBLE, method="algebra_dimension",
                                     residual=float(alg.dim))
    return _verdict_randomized(system, seed, multistarts)


@dataclass(frozen=True)
class SubCheck:
    label: str
    verdict: IrreducibilityVerdict | None = None
    passed: bool = True
    detail: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    mode: str
    overall: str  # Pass | Fail | Inconclusive
    checks: tuple[SubCheck, ...]
    warnings: tuple[str, ...] = ()
    witness: SubspaceBasis | None = None
    failed_at: str | None = None

    @property
    def passed(self) -> bool:
        return self.overall == "Pass"


def _divisors(d: int) -> list[int]:
    return [t for t in range(1, d + 1) if d % t == 0]


def check_hypotheses(system: GeneratorSystem, mode: str, *, seed: int = 42,
                     budget: int = DEFAULT_BUDGET) -> HypothesisReport:
    """Hypothesis checkers for the spannability theorem and the dimension corollaries.

    theorem_1_1: the power cocycle for every divisor t of d and every wedge
    cocycle (m = 1..d-1) must be irreducible. corollary_4_3: d = 2, the tuple
    and its square irreducible, every generator norm < 1/2.
    """
    if mode == "theorem_1_1":
        checks = []
        witness = None
        failed_at = None
        for t in _divisors(system.dim):
            sub = power_system(system, t, budget=budget)
            v = irreducibility_verdict(sub, seed=seed)
            checks.append(SubCheck(label=f"power t={t}", verdict=v, passed=not v.reducible))
            if v.reducible and failed_at is None:
                failed_at, witness = f"power t={t}", v.witness
        for m in range(1, system.dim):
            sub = wedge_system(system, m)
            v = irreducibility_verdict(sub, seed=seed)
            checks.append(SubCheck(label=f"wedge m={m}", verdict=v, passed=not v.reducible))
            if v.reducible and failed_at is None:
                failed_at, witness = f"wedge m={m}", v.witness
        if failed_at is not None:
            overall = "Fail"
        elif any(c.verdict.status == INCONCLUSIVE for c in checks):
            overall = "Inconclusive"
        else:
            overall = "Pass"
        return HypothesisReport(mode=mode, overall=overall, checks=tuple(checks),
                                witness=witness, failed_at=failed_at)

    if mode == "corollary_4_3":
        if system.dim != 2:
            raise InputError("corollary_4_3 mode needs d = 2")
        warnings = []
        if system.translations is None:
            warnings.append("translations absent: the dimension statement concerns "
                            "Lebesgue-a.e. translation vectors, matrix hypotheses only")
        checks = []
        witness = None
        failed_at = None
        for label, sub in (("cocycle", system), ("square", power_system(system, 2, budget=budget))):
            v = irreducibility_verdict(sub, seed=seed)
            checks.append(SubCheck(label=f"irreducible {label}", verdict=v, passed=not v.reducible))
            if v.reducible and failed_at is None:
                failed_at, witness = f"irreducible {label}", v.witness
        norms = system.norms()
        ok = all(nv < 0.5 for nv in norms)
        checks.append(SubCheck(label="norms < 1/2", passed=ok,
                               detail=", ".join(f"{nv:.6g}" for nv in norms)))
        if not ok and failed_at is None:
            failed_at = "norms < 1/2"
        if failed_at is not None:
            overall = "Fail"
        elif any(c.verdict is not None and c.verdict.status == INCONCLUSIVE for c in checks):
            overall = "Inconclusive"
        else:
            overall = "Pass"
        return HypothesisReport(mode=mode, overall=overall, checks=tuple(checks),
                                warnings=tuple(warnings), witness=witness, failed_at=failed_at)

    raise InputError(f"unknown hypothesis mode {mode!r}")
