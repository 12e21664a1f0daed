"""Quantified k-quasi-multiplicativity.

The connector bound rests on an exact singular-value inequality: with
u = v_{A_I,2} and w = v_{A_J,1},

    |A_J A_K A_I| >= |A_I| |A_J| |w^T A_K u|,

so gamma = min over unit (u, w) of max over |K| = k of |w^T A_K u| is a true
uniform lower bound for every connector ratio. For d = 2 the (u, w) torus is
swept by a product grid with a Lipschitz certificate; d >= 3 falls back to
seeded multistarts and is reported uncertified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .kernels import minimax_grid2, opnorm_batch, products_level_numpy, qm_scan
from .systems import GeneratorSystem
from .wordspace import DEFAULT_BUDGET, Word, check_budget, enumerate_words

GRID_ANGLES = 2000  # angles per circle for the d = 2 certificate grid


@dataclass(frozen=True)
class GammaResult:
    value: float          # certified lower bound (d = 2) or best found value
    certified: bool
    k: int
    raw_grid_min: float | None = None
    argmin: tuple[np.ndarray, np.ndarray] | None = None  # (w, u)

    def __float__(self) -> float:
        return self.value


def _dense_connectors(system: GeneratorSystem, k: int, budget: int) -> np.ndarray:
    check_budget(system.ell**k, budget)
    units, logs = products_level_numpy(system.stacked(), k)
    return units * np.exp(logs)[:, None, None]


def gamma_minimax(system: GeneratorSystem, k: int, *, seed: int = 42,
                  budget: int = DEFAULT_BUDGET) -> GammaResult:
    """min over unit (u, w) of max over |K| = k of |w^T A_K u|, with certificate."""
    if k < 1:
        raise InputError("connector length k must be >= 1")
    kmats = _dense_connectors(system, k, budget)
    d = system.dim
    if d == 2:
        raw, iw, iu = minimax_grid2(kmats, GRID_ANGLES)
        lip = float(sum(opnorm_batch(kmats)))  # per-variable Lipschitz constant
        h = 2.0 * np.pi / GRID_ANGLES
        value = max(0.0, raw - lip * h)
        tw, tu = 2.0 * np.pi * iw / GRID_ANGLES, 2.0 * np.pi * iu / GRID_ANGLES
        arg = (np.array([math.cos(tw), math.sin(tw)]),
               np.array([math.cos(tu), math.sin(tu)]))
        return GammaResult(value=value, certified=True, k=k, raw_grid_min=raw, argmin=arg)
    rng = np.random.default_rng(seed)
    best = np.inf
    arg = None
    for _ in range(128):
        u = rng.standard_normal(d)
        w = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        w /= np.linalg.norm(w)
        val, u, w = _descend_pair(kmats, u, w)
        if val < best:
            best, arg = val, (w, u)
    return GammaResult(value=float(max(best, 0.0)), certified=False, k=k, argmin=arg)


def _descend_pair(kmats: np.ndarray, u: np.ndarray, w: np.ndarray, iters: int = 100):
    step = 0.2
    def val_grad(u, w):
        scores = np.einsum("a,mab,b->m", w, kmats, u)
        m = int(np.argmax(np.abs(scores)))
        s = math.copysign(1.0, scores[m])
        return abs(scores[m]), s * (kmats[m].T @ w), s * (kmats[m] @ u)
    f, gu, gw = val_grad(u, w)
    for _ in range(iters):
        cu = u - step * gu
        cw = w - step * gw
        nu, nw = np.linalg.norm(cu), np.linalg.norm(cw)
        if nu == 0 or nw == 0:
            break
        cu /= nu
        cw /= nw
        fc, cgu, cgw = val_grad(cu, cw)
        if fc < f:
            u, w, f, gu, gw = cu, cw, fc, cgu, cgw
            step *= 1.1
        else:
            step *= 0.5
            if step < 1e-10:
                break
    return f, u, w


@dataclass(frozen=True)
class QMReport:
    k: int
    gamma: GammaResult
    empirical_c: dict[int, float] = field(default_factory=dict)
    witnesses: dict[int, tuple[Word, Word, Word]] = field(default_factory=dict)

    @property
    def min_ratio(self) -> float:
        return min(self.empirical_c.values())


def empirical_qm(system: GeneratorSystem, k: int, n_max: int, *, seed: int = 42,
                 budget: int = DEFAULT_BUDGET) -> QMReport:
    """Exact minimum over I, J in Lambda(n) of the best length-k connector ratio.

    Per word length n <= n_max; the min over lengths <= n follows by taking the
    table minimum. Witnesses record the worst pair and its best connector.
    """
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    ell = system.ell
    gamma = gamma_minimax(system, k, seed=seed, budget=budget)
    kunits, klogs = products_level_numpy(system.stacked(), k)
    empirical: dict[int, float] = {}
    witnesses: dict[int, tuple[Word, Word, Word]] = {}
    words_k = list(enumerate_words(ell, k))
    for n in range(1, n_max + 1):
        check_budget(float(ell) ** (2 * n) * ell**k, budget)
        units, logs = products_level_numpy(system.stacked(), n)
        best, bi, bj, bm = qm_scan(units, logs, kunits, klogs)
        words_n = list(enumerate_words(ell, n))
        empirical[n] = math.exp(best)
        witnesses[n] = (words_n[bi], words_k[bm], words_n[bj])
        ratio = empirical[n]
        if ratio < gamma.value - 1e-9:
            raise AssertionError(
                f"empirical ratio {ratio} fell below the certified bound {gamma.value}")
    return QMReport(k=k, gamma=gamma, empirical_c=empirical, witnesses=witnesses)


@dataclass(frozen=True)
class QMConstant:
    """Piecewise constant C(s) for the singular value function (d = 2).

    C(s) = gamma^s on [0, 1] and (min_K |det A_K|)^(s-1) gamma^(2-s) on (1, 2],
    continuous at s = 1. `has_bound` is False when gamma vanished.
    """

    s: float
    value: float
    gamma: float
    min_det: float
    has_bound: bool


def qm_constant_phi(system: GeneratorSystem, k: int, s: float, *,
                    gamma: GammaResult | float | None = None, seed: int = 42,
                    budget: int = DEFAULT_BUDGET) -> QMConstant:
    if system.dim != 2:
        raise InputError("the singular value constant is defined for d = 2")
    if not 0.0 <= s <= 2.0:
        raise InputError("s must lie in [0, 2]")
    if gamma is None:
        gamma = gamma_minimax(system, k, seed=seed, budget=budget)
    g = float(gamma)
    kmats = _dense_connectors(system, k, budget)
    min_det = float(np.min(np.abs(np.linalg.det(kmats))))
    if g <= 0.0:
        return QMConstant(s=s, value=0.0, gamma=g, min_det=min_det, has_bound=False)
    if s <= 1.0:
        value = g**s
    else:
        value = min_det ** (s - 1.0) * g ** (2.0 - s)
    return QMConstant(s=s, value=value, gamma=g, min_det=min_det, has_bound=True)
