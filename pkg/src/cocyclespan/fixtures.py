"""Canonical example systems used across tests, docs and the shipped configs."""
from __future__ import annotations

import numpy as np

from .systems import GeneratorSystem

ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])
HYPERBOLIC = np.array([[2.0, 0.0], [0.0, 0.5]])


def E1() -> GeneratorSystem:
    """Single rotation by 90 degrees: irreducible, but its square is -I."""
    return GeneratorSystem((ROT90,))


def E2() -> GeneratorSystem:
    """Hyperbolic + rotation pair; spannable already at k = 1."""
    return GeneratorSystem((HYPERBOLIC, ROT90))


def E3() -> GeneratorSystem:
    """Contracting pair (diagonal + scaled rotation) with norms below 1/2."""
    return GeneratorSystem((
        np.array([[0.4, 0.0], [0.0, 0.1]]),
        np.array([[0.0, -0.3], [0.3, 0.0]]),
    ))


def E4() -> GeneratorSystem:
    """Two copies of 0.4*I with translations (0,0), (0.6,0): conformal IFS oracle."""
    return GeneratorSystem(
        (0.4 * np.eye(2), 0.4 * np.eye(2)),
        translations=(np.array([0.0, 0.0]), np.array([0.6, 0.0])),
    )


def E5() -> GeneratorSystem:
    """Scalar pair 0.4*I, 0.2*I: norms multiply exactly, weights are Bernoulli."""
    return GeneratorSystem((0.4 * np.eye(2), 0.2 * np.eye(2)))
