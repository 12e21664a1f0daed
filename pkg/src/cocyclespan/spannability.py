"""k-uniform spannability: M_k spans, certificates, minimal k, failure diagnosis.

Spannability of a word length k asks that the images {A_I u : |I| = k} span
R^d for every nonzero u. Testing goes through M_k = span{A_I : |I| = k}: the
image space V_{u,k} equals M_k u, which collapses ell^k images into at most
d^2 basis elements and turns "for all u" into a minimax over one sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractViolation, InputError
from .kernels import products_level_numpy, stack_min_grid2, stack_min_grid3
from .linalg import (SubspaceBasis, operator_norm, span_basis, subspace_distance,
                     wedge_index_sets, wedge_power)
from .rational2 import ProjPoint, common_projective_root, common_projective_root_float
from .systems import GeneratorSystem
from .wordspace import DEFAULT_BUDGET, check_budget

from .hypotheses import IrreducibilityVerdict, irreducibility_verdict, power_system

TAU_SPAN = 1e-8          # threshold on the squared smallest stack singular value
EXACT_PRODUCT_CAP = 4096  # pair quadratics use raw products up to this many words

SPANNABLE = "Spannable"
NOT_SPANNABLE = "NotSpannable"
INCONCLUSIVE = "Inconclusive"


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(float(x))


class _RationalSpan:
    """Echelon basis over Q for membership tests and exact M_k bases."""

    def __init__(self, length: int):
        self.length = length
        self.rows: list[tuple[int, list[Fraction]]] = []  # (pivot, row) sorted by pivot

    def _reduce(self, v: list[Fraction]) -> list[Fraction]:
        for pivot, row in self.rows:
            if v[pivot] != 0:
                c = v[pivot]
                v = [vi - c * ri for vi, ri in zip(v, row)]
        return v

    def add(self, vec) -> bool:
        v = self._reduce([_fr(x) for x in vec])
        for i, x in enumerate(v):
            if x != 0:
                inv = 1 / x
                row = [xi * inv for xi in v]
                self.rows.append((i, row))
                self.rows.sort(key=lambda pr: pr[0])
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)

    def matrices(self, d: int) -> list[list[list[Fraction]]]:
        return [[row[i * d:(i + 1) * d] for i in range(d)] for _, row in self.rows]


@dataclass(frozen=True)
class MkBasis:
    """Orthonormal basis of M_k = span{A_I : |I| = k}, matrices as d^2-vectors."""

    k: int
    dim: int
    basis: np.ndarray  # (dim, d, d)
    rational: tuple | None = None  # echelon rows over Q, same span

    @property
    def d(self) -> int:
        return self.basis.shape[1]


def mk_basis(system: GeneratorSystem, k: int, *, budget: int = DEFAULT_BUDGET) -> MkBasis:
    """Incremental M_k: M_1 = span generators, M_{j+1} = span{A_i B}; exits at dim d^2."""
    if k < 1:
        raise InputError("k must be >= 1")
    check_budget(system.ell * system.dim**2 * k, budget)
    d = system.dim
    full = d * d

    rat = _RationalSpan(full)
    for A in system.generators:
        rat.add(A.ravel())
    floats = span_basis([A.ravel() for A in system.generators], ambient=full)
    for _ in range(k - 1):
        if rat.rank == full:
            break
        nxt = _RationalSpan(full)
        frs = rat.matrices(d)
        for A in system.generators:
            Af = [[_fr(x) for x in row] for row in A]
            for B in frs:
                prod = [[sum(Af[i][c] * B[c][j] for c in range(d)) for j in range(d)]
                        for i in range(d)]
                nxt.add([prod[i][j] for i in range(d) for j in range(d)])
        rat = nxt
        mats = [np.array([[float(x) for x in row] for row in M]) for M in rat.matrices(d)]
        floats = span_basis([M.ravel() for M in mats], ambient=full)
    if floats.dim != rat.rank:
        # trust the exact rank; rebuild the float basis from the rational rows
        mats = [np.array([[float(x) for x in row] for row in M]) for M in rat.matrices(d)]
        floats = span_basis([M.ravel() for M in mats], tol=1e-13, ambient=full)
    basis = np.stack([floats.basis[:, j].reshape(d, d) for j in range(floats.dim)]) \
        if floats.dim else np.zeros((0, d, d))
    return MkBasis(k=k, dim=floats.dim, basis=basis,
                   rational=tuple(rat.rows) if system.exact else None)


@dataclass(frozen=True)
class SpannabilityCertificate:
    k: int
    status: str
    margin: float
    exact: bool
    method: str
    witness: np.ndarray | None = None
    witness_residual: float | None = None
    margin_certified: bool = False
    notes: tuple[str, ...] = ()

    @property
    def spannable(self) -> bool:
        return self.status == SPANNABLE


def _pair_quadratic(A, B):
    a0, b0, c0, d0 = _fr(A[0][0]), _fr(A[0][1]), _fr(A[1][0]), _fr(A[1][1])
    a1, b1, c1, d1 = _fr(B[0][0]), _fr(B[0][1]), _fr(B[1][0]), _fr(B[1][1])
    q20 = a0 * c1 - c0 * a1
    q11 = a0 * d1 + b0 * c1 - c0 * b1 - d0 * a1
    q02 = b0 * d1 - d0 * b1
    return (q20, q11, q02)


def _quad_circle_min_abs(q) -> float:
    """min over the unit circle of |q(u)| for one quadratic form, by eigenvalues."""
    q20, q11, q02 = (float(x) for x in q)
    M = np.array([[q20, 0.5 * q11], [0.5 * q11, q02]])
    lam = np.linalg.eigvalsh(M)
    if lam[0] * lam[-1] <= 0:
        return 0.0
    return float(min(abs(lam[0]), abs(lam[-1])))


def _products_dense(system: GeneratorSystem, k: int) -> np.ndarray:
    units, logs = products_level_numpy(system.stacked(), k)
    return units * np.exp(logs)[:, None, None]


def _stack_f(B: np.ndarray, u: np.ndarray) -> float:
    img = np.einsum("rab,b->ra", B, u)
    g = img.T @ img
    return float(np.linalg.eigvalsh(g)[0])


def _golden_polish(f, lo: float, hi: float, iters: int = 70) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = c if fc < fd else d
    return x, min(fc, fd)


def _stack_f_circle(B: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    U = np.stack([np.cos(thetas), np.sin(thetas)])
    img = np.einsum("rab,bG->raG", B, U)
    g00 = np.einsum("rG,rG->G", img[:, 0], img[:, 0])
    g01 = np.einsum("rG,rG->G", img[:, 0], img[:, 1])
    g11 = np.einsum("rG,rG->G", img[:, 1], img[:, 1])
    return 0.5 * ((g00 + g11) - np.sqrt((g00 - g11) ** 2 + 4.0 * g01**2))


def _bnb_certify_circle(B: np.ndarray, tau: float, G: int):
    """Branch-and-bound floor for min f over the projective circle.

    Starts from the uniform grid and splits only cells whose Lipschitz lower
    bound cannot clear tau. Returns (floor, None) when every cell is certified
    above tau, else (None, theta of an unresolved cell).
    """
    lip = 2.0 * B.shape[0]
    th = np.pi * np.arange(G + 1) / G
    fs = _stack_f_circle(B, th)
    work = [(th[i], th[i + 1], fs[i], fs[i + 1]) for i in range(G)]
    floor = math.inf
    evals = 0
    while work:
        a, b, fa, fb = work.pop()
        bound = 0.5 * (fa + fb) - 0.5 * lip * (b - a)
        if bound > tau:
            floor = min(floor, bound)
            continue
        if b - a < 1e-11 or evals > 200_000:
            return None, 0.5 * (a + b)
        m = 0.5 * (a + b)
        fm = _stack_f(B, np.array([math.cos(m), math.sin(m)]))
        evals += 1
        work.append((a, m, fa, fm))
        work.append((m, b, fm, fb))
    return floor, None


def _numeric_certificate(system: GeneratorSystem, mk: MkBasis, *, seed: int = 42) -> SpannabilityCertificate:
    d = system.dim
    if mk.dim == 0:
        raise InputError("empty M_k")
    B = np.stack([M / operator_norm(M) for M in mk.basis])
    r = B.shape[0]
    notes: list[str] = []
    if d == 2:
        G = int(np.ceil(np.pi / 1e-3))
        raw, u0 = stack_min_grid2(B, G)
        th0 = math.atan2(u0[1], u0[0])
        h = np.pi / G
        fn = lambda t: _stack_f(B, np.array([math.cos(t), math.sin(t)]))
        t_star, f_star = _golden_polish(fn, th0 - h, th0 + h)
        u_star = np.array([math.cos(t_star), math.sin(t_star)])
        if f_star > TAU_SPAN:
            floor, unresolved = _bnb_certify_circle(B, TAU_SPAN, G)
            if floor is not None:
                cert = floor
            else:
                t2, f2 = _golden_polish(fn, unresolved - h, unresolved + h)
                if f2 < f_star:
                    f_star = f2
                    u_star = np.array([math.cos(t2), math.sin(t2)])
                cert = -math.inf
        else:
            cert = -math.inf
    elif d == 3:
        raw, u0 = stack_min_grid3(B, 1e-3)
        lip = 2.0 * r
        cert = raw - lip * 1e-3
        th0, ph0 = math.acos(np.clip(u0[2], -1, 1)), math.atan2(u0[1], u0[0])

        def sph(th, ph):
            return np.array([math.sin(th) * math.cos(ph),
                             math.sin(th) * math.sin(ph), math.cos(th)])

        th_c, ph_c, f_star = th0, ph0, raw
        for _ in range(6):
            th_c, f_star = _golden_polish(lambda t: _stack_f(B, sph(t, ph_c)),
                                          th_c - 2e-3, th_c + 2e-3, iters=40)
            ph_c, f_star = _golden_polish(lambda p: _stack_f(B, sph(th_c, p)),
                                          ph_c - 2e-3, ph_c + 2e-3, iters=40)
        u_star = sph(th_c, ph_c)
    else:
        rng = np.random.default_rng(seed)
        best_f, best_u = np.inf, None
        for _ in range(64):
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            f, u = _project_descend(B, u)
            if f < best_f:
                best_f, best_u = f, u
        raw, u_star, f_star = best_f, best_u, best_f
        cert = -np.inf
        notes.append("d >= 4: multistart search only, no grid certificate")

    if cert > TAU_SPAN:
        return SpannabilityCertificate(
            k=mk.k, status=SPANNABLE, margin=float(cert), exact=False,
            method="grid_certified", margin_certified=True, notes=tuple(notes))
    if f_star <= TAU_SPAN:
        u_star = _canonical_sign(u_star)
        return SpannabilityCertificate(
            k=mk.k, status=NOT_SPANNABLE, margin=0.0, exact=False,
            method="numeric_minimizer", witness=u_star, witness_residual=float(f_star),
            notes=tuple(notes))
    return SpannabilityCertificate(
        k=mk.k, status=INCONCLUSIVE, margin=max(float(cert), 0.0), exact=False,
        method="numeric", notes=tuple(notes) + (
            f"minimum {f_star:.3e} above tau but certificate {cert:.3e} below",))


def _project_descend(B: np.ndarray, u: np.ndarray, iters: int = 120) -> tuple[float, np.ndarray]:
    step = 0.1
    f = _stack_f(B, u)
    for _ in range(iters):
        img = np.einsum("rab,b->ra", B, u)
        g = img.T @ img
        _, V = np.linalg.eigh(g)
        q = V[:, 0]
        # f(u) = min eigenvalue of sum (B_j u)(B_j u)^T; grad = 2 sum (q.B_j u) B_j^T q
        grad = 2.0 * np.einsum("r,rab,a->b", img @ q, B, q)
        cand = u - step * grad
        nrm = np.linalg.norm(cand)
        if nrm == 0:
            break
        cand /= nrm
        fc = _stack_f(B, cand)
        if fc < f:
            u, f = cand, fc
            step *= 1.2
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return f, u


def _canonical_sign(u: np.ndarray) -> np.ndarray:
    for x in u:
        if abs(x) > 1e-12:
            return u if x > 0 else -u
    return u


def _exact_certificate(system: GeneratorSystem, mk: MkBasis) -> SpannabilityCertificate:
    d = system.dim
    if mk.dim < d:
        w = _canonical_sign(np.eye(d)[:, 0])
        return SpannabilityCertificate(
            k=mk.k, status=NOT_SPANNABLE, margin=0.0, exact=True, method="d2_exact",
            witness=w, witness_residual=_witness_residual(mk, w),
            notes=(f"dim M_k = {mk.dim} < d",))
    if mk.rational is not None:
        rows = [row for _p, row in mk.rational]
        mats = [[row[i * d:(i + 1) * d] for i in range(d)] for row in rows]
    else:
        mats = [mk.basis[j] for j in range(mk.dim)]
    quads = [_pair_quadratic(mats[i], mats[j])
             for i in range(len(mats)) for j in range(i + 1, len(mats))]
    if system.exact and mk.rational is not None:
        root = common_projective_root(quads)
        method = "d2_exact"
    else:
        root = common_projective_root_float(quads)
        method = "d2_float"
    if root is not None:
        if isinstance(root, str):
            u = np.eye(d)[:, 0]
        elif isinstance(root, ProjPoint):
            u = root.vector()
        else:
            u = np.asarray(root)
        u = _canonical_sign(u)
        return SpannabilityCertificate(
            k=mk.k, status=NOT_SPANNABLE, margin=0.0, exact=True, method=method,
            witness=u, witness_residual=_witness_residual(mk, u))
    margin, certified, note = _exact_margin(system, mk)
    return SpannabilityCertificate(
        k=mk.k, status=SPANNABLE, margin=margin, exact=True, method=method,
        margin_certified=certified, notes=(note,) if note else ())


def _exact_margin(system: GeneratorSystem, mk: MkBasis) -> tuple[float, bool, str | None]:
    """Analytic lower bound for min_u max over pairs |det(B_i u | B_j u)|.

    The best single pair already bounds the minimax from below; when every
    single pair is indefinite the bound degenerates and a Lipschitz grid on the
    full max takes over.
    """
    if system.ell**mk.k <= EXACT_PRODUCT_CAP:
        mats = list(_products_dense(system, mk.k))
        note = None
    else:
        mats = [mk.basis[j] for j in range(mk.dim)]
        note = "margin quadratics use the reduced basis (word count above cap)"
    best = 0.0
    quads = []
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            q = _pair_quadratic(mats[i], mats[j])
            quads.append(q)
            best = max(best, _quad_circle_min_abs(q))
    if best > 0.0:
        return best, True, note
    fq = [tuple(float(x) for x in q) for q in quads]
    G = int(np.ceil(np.pi / 1e-3))
    th = np.pi * np.arange(G) / G
    x, y = np.cos(th), np.sin(th)
    acc = np.full(G, -np.inf)
    lip = 0.0
    for a, b, c in fq:
        acc = np.maximum(acc, np.abs(a * x * x + b * x * y + c * y * y))
        lip = max(lip, 2.0 * operator_norm(np.array([[a, b / 2], [b / 2, c]])))
    cert = float(acc.min() - lip * (np.pi / G) / 2.0)
    return max(cert, 0.0), cert > 0.0, note or "margin from Lipschitz grid over pair quadratics"


def _witness_residual(mk: MkBasis, u: np.ndarray) -> float:
    if mk.dim == 0:
        return 0.0
    B = np.stack([M / operator_norm(M) for M in mk.basis])
    return _stack_f(B, u)


def spannable_at(system: GeneratorSystem, k: int, *, method: str = "auto",
                 seed: int = 42, budget: int = DEFAULT_BUDGET) -> SpannabilityCertificate:
    """Certificate for k-uniform spannability.

    auto: saturated M_k (dim d^2) is immediately spannable; otherwise the d=2
    polynomial path decides exactly, and the certified sphere minimization
    handles d >= 3. `method` can force 'exact' (d=2 only) or 'numeric'.
    """
    if method not in ("auto", "exact", "numeric"):
        raise InputError(f"unknown method {method!r}")
    mk = mk_basis(system, k, budget=budget)
    d = system.dim
    if method == "auto" and mk.dim == d * d:
        sample = _coarse_sample_margin(mk)
        return SpannabilityCertificate(
            k=k, status=SPANNABLE, margin=sample, exact=False, method="full_algebra",
            margin_certified=False, notes=("M_k saturates the matrix space",))
    if method == "exact" and d != 2:
        raise InputError("exact method needs d = 2")
    if method in ("auto", "exact") and d == 2:
        return _exact_certificate(system, mk)
    if mk.dim < d:
        w = _canonical_sign(np.eye(d)[:, 0])
        return SpannabilityCertificate(
            k=k, status=NOT_SPANNABLE, margin=0.0, exact=False, method="rank_deficit",
            witness=w, witness_residual=_witness_residual(mk, w),
            notes=(f"dim M_k = {mk.dim} < d",))
    return _numeric_certificate(system, mk, seed=seed)


def _coarse_sample_margin(mk: MkBasis, count: int = 256) -> float:
    d = mk.d
    B = np.stack([M / operator_norm(M) for M in mk.basis])
    if d == 2:
        th = np.pi * np.arange(count) / count
        us = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        rng = np.random.default_rng(0)  # fixed sample, not run-seed dependent
        us = rng.standard_normal((count, d))
        us /= np.linalg.norm(us, axis=1, keepdims=True)
    return float(min(_stack_f(B, u) for u in us))


@dataclass(frozen=True)
class SpannabilitySearch:
    found: int | None
    k_max: int
    certificates: tuple[SpannabilityCertificate, ...]

    @property
    def not_found(self) -> bool:
        return self.found is None

    @property
    def inconclusive_ks(self) -> tuple[int, ...]:
        return tuple(c.k for c in self.certificates if c.status == INCONCLUSIVE)


def minimal_spannable_k(system: GeneratorSystem, k_max: int, *, method: str = "auto",
                        seed: int = 42, budget: int = DEFAULT_BUDGET) -> SpannabilitySearch:
    """Least spannable k <= k_max; monotone, so the first success wins."""
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    certs = []
    for k in range(1, k_max + 1):
        cert = spannable_at(system, k, method=method, seed=seed, budget=budget)
        certs.append(cert)
        if cert.spannable:
            return SpannabilitySearch(found=k, k_max=k_max, certificates=tuple(certs))
    return SpannabilitySearch(found=None, k_max=k_max, certificates=tuple(certs))


@dataclass(frozen=True)
class FailureDiagnosis:
    witness: np.ndarray
    dims: tuple[int, ...]
    chain: tuple[SubspaceBasis, ...]
    case: str  # PeriodicSubspaces | WedgeEigenStructure | Undetermined
    period: int | None = None
    span_w: SubspaceBasis | None = None
    cross_check: IrreducibilityVerdict | None = None
    cross_check_consistent: bool | None = None
    wedge_order: int | None = None
    wedge_pair: tuple[int, int] | None = None
    eigenvalues: tuple[complex, ...] = ()
    eigen_residual: float | None = None
    notes: tuple[str, ...] = ()


def _plucker(W: SubspaceBasis) -> np.ndarray:
    m = W.dim
    sets = wedge_index_sets(W.ambient, m) if 0 < m < W.ambient else None
    if sets is None:
        raise InputError("wedge coordinates need 0 < dim < ambient")
    out = np.array([np.linalg.det(W.basis[list(rows), :]) for rows in sets])
    nrm = np.linalg.norm(out)
    return out / nrm if nrm > 0 else out


def diagnose_failure(system: GeneratorSystem, k_max: int, *, seed: int = 42,
                     budget: int = DEFAULT_BUDGET) -> FailureDiagnosis:
    """Classify a persistent spannability failure along the two proof cases.

    Case 1 detects a periodic chain of image subspaces V_k = M_k u and
    cross-checks that the matching power cocycle is reducible; Case 2 exhibits
    the eigen-structure of a non-scalar wedge quotient acting on the chain.
    The classification is heuristic evidence, certified only where stated.
    """
    search = minimal_spannable_k(system, k_max, seed=seed, budget=budget)
    if not search.not_found:
        raise ContractViolation(f"system is spannable at k = {search.found}")
    witness = None
    for cert in reversed(search.certificates):
        if cert.status == NOT_SPANNABLE and cert.witness is not None:
            witness = np.asarray(cert.witness, dtype=float)
            break
    notes: list[str] = []
    if witness is None:
        return FailureDiagnosis(
            witness=np.zeros(system.dim), dims=(), chain=(), case="Undetermined",
            notes=("no NotSpannable witness available (all checks inconclusive)",))

    chain = []
    dims = []
    for k in range(1, k_max + 1):
        mk = mk_basis(system, k, budget=budget)
        V = span_basis([mk.basis[j] @ witness for j in range(mk.dim)], ambient=system.dim)
        chain.append(V)
        dims.append(V.dim)

    # Case 1: V_{k+t} = V_k along the whole chain
    for t in range(1, k_max):
        ok = all(
            dims[k] == dims[k + t] and subspace_distance(chain[k], chain[k + t]) <= 1e-6
            for k in range(k_max - t)
        )
        if ok:
            vecs = []
            for V in chain[:t]:
                vecs.extend(V.basis[:, j] for j in range(V.dim))
            W = span_basis(vecs, ambient=system.dim)
            cross = irreducibility_verdict(power_system(system, t, budget=budget), seed=seed)
            return FailureDiagnosis(
                witness=witness, dims=tuple(dims), chain=tuple(chain),
                case="PeriodicSubspaces", period=t, span_w=W, cross_check=cross,
                cross_check_consistent=cross.reducible,
                notes=tuple(notes))

    # Case 2: stabilized dimension, eigen-structure of a non-scalar wedge quotient
    gamma = dims[-1]
    if len(dims) < 3 or dims[-2] != gamma or dims[-3] != gamma or not 0 < gamma < system.dim:
        return FailureDiagnosis(
            witness=witness, dims=tuple(dims), chain=tuple(chain), case="Undetermined",
            notes=tuple(notes) + ("chain dimension did not stabilize below d",))
    stabilized = [V for V, dim in zip(chain, dims) if dim == gamma]
    wv = [_plucker(V) for V in stabilized]
    N = wv[0].size
    pair = None
    B = None
    for i in range(system.ell):
        for j in range(system.ell):
            if i == j:
                continue
            Wi = wedge_power(system.generators[i], gamma) if gamma > 1 else system.generators[i]
            Wj = wedge_power(system.generators[j], gamma) if gamma > 1 else system.generators[j]
            cand = np.linalg.solve(Wi, Wj)
            dev = np.abs(cand - (np.trace(cand) / N) * np.eye(N)).max()
            if dev > 1e-9 * max(1.0, np.abs(cand).max()):
                pair, B = (i + 1, j + 1), cand
                break
        if pair:
            break
    if pair is None:
        return FailureDiagnosis(
            witness=witness, dims=tuple(dims), chain=tuple(chain), case="Undetermined",
            notes=tuple(notes) + ("every wedge quotient is scalar",))
    vals = np.linalg.eigvals(B)
    resid = 0.0
    for w in wv:
        r = min(np.linalg.norm(B @ w - lam.real * w) for lam in vals)
        resid = max(resid, r)
    return FailureDiagnosis(
        witness=witness, dims=tuple(dims), chain=tuple(chain),
        case="WedgeEigenStructure", wedge_order=gamma, wedge_pair=pair,
        eigenvalues=tuple(complex(v) for v in vals), eigen_residual=float(resid),
        notes=tuple(notes))
