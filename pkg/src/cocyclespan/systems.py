"""Generator tuples (A_1, ..., A_ell) with optional IFS translations."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError
from .linalg import as_matrix, is_invertible, operator_norm


@dataclass(frozen=True)
class GeneratorSystem:
    """An invertible matrix tuple generating a locally constant cocycle.

    Symbols are 1-based. ``exact`` records whether the stored doubles faithfully
    represent the user's decimal input; exact-arithmetic decision paths treat
    the stored doubles as binary rationals either way, the flag only selects
    between the exact and the tolerance-based 2x2 decision procedures.
    """

    generators: tuple[np.ndarray, ...]
    translations: tuple[np.ndarray, ...] | None = None
    exact: bool = True

    def __post_init__(self):
        if not self.generators:
            raise InputError("a system needs at least one generator")
        gens = []
        d = None
        for i, A in enumerate(self.generators, start=1):
            M = as_matrix(A)
            if d is None:
                d = M.shape[0]
            elif M.shape[0] != d:
                raise InputError("generators have mixed dimensions")
            if not is_invertible(M):
                raise InputError(f"generator {i} not invertible")
            M = M.copy()
            M.flags.writeable = False
            gens.append(M)
        object.__setattr__(self, "generators", tuple(gens))
        if self.translations is not None:
            if len(self.translations) != len(gens):
                raise InputError("translations must match the generator count")
            ts = []
            for t in self.translations:
                v = np.asarray(t, dtype=float).ravel()
                if v.size != d or not np.isfinite(v).all():
                    raise InputError("translation has wrong size or non-finite entries")
                v = v.copy()
                v.flags.writeable = False
                ts.append(v)
            object.__setattr__(self, "translations", tuple(ts))

    @property
    def ell(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def generator(self, symbol: int) -> np.ndarray:
        if not 1 <= symbol <= self.ell:
            raise InputError(f"symbol {symbol} outside 1..{self.ell}")
        return self.generators[symbol - 1]

    def stacked(self) -> np.ndarray:
        return np.ascontiguousarray(np.stack(self.generators))

    def norms(self) -> list[float]:
        return [operator_norm(A) for A in self.generators]

    def is_conformal(self, tol: float = 1e-12) -> bool:
        """True when every generator is a scalar multiple of an orthogonal matrix.

        For such systems singular values multiply exactly along products, so
        partition sums are exactly multiplicative (connector length 0, C = 1).
        """
        for A in self.generators:
            G = A.T @ A
            scale = np.trace(G) / self.dim
            if np.abs(G - scale * np.eye(self.dim)).max() > tol * max(scale, 1.0):
                return False
        return True

    def entry_fractions(self) -> list[list[list[Fraction]]]:
        return [[[Fraction(float(x)) for x in row] for row in A] for A in self.generators]
