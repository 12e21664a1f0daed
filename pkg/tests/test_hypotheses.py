import numpy as np
import pytest

from cocyclespan import E1, E2, E3, GeneratorSystem
from cocyclespan.errors import InputError
from cocyclespan.fixtures import ROT90
from cocyclespan.hypotheses import (IRREDUCIBLE, REDUCIBLE,
                                    algebra_dimension, check_hypotheses,
                                    irreducibility_verdict, orbit_span,
                                    power_system, wedge_system)
from cocyclespan.linalg import invariance_residual

from _helpers import random_2x2_system, random_reducible_system

DIAG_PAIR = GeneratorSystem((np.diag([2.0, 3.0]), np.diag([1.0, 4.0])))


class TestPowerAndWedge:
    def test_rotation_square(self):
        ps = power_system(E1(), 2)
        assert ps.ell == 1
        assert np.allclose(ps.generators[0], -np.eye(2))

    def test_power_one_is_identity_map(self):
        ps = power_system(E2(), 1)
        for A, B in zip(ps.generators, E2().generators):
            assert np.allclose(A, B)

    def test_power_two_lexicographic(self):
        H, R = E2().generators
        ps = power_system(E2(), 2)
        expect = [H @ H, R @ H, H @ R, R @ R]  # words 11, 12, 21, 22
        for A, B in zip(ps.generators, expect):
            assert np.allclose(A, B)

    def test_power_composition(self):
        base = power_system(E2(), 2)
        via_two = sorted(power_system(base, 2).generators, key=lambda m: tuple(m.ravel()))
        direct = sorted(power_system(E2(), 4).generators, key=lambda m: tuple(m.ravel()))
        for A, B in zip(via_two, direct):
            assert np.abs(A - B).max() <= 1e-10 * max(1.0, np.abs(B).max())

    def test_wedge_system_d2(self):
        ws = wedge_system(E2(), 1)
        for A, B in zip(ws.generators, E2().generators):
            assert np.allclose(A, B)

    def test_wedge_of_power_commutes(self):
        sys3 = GeneratorSystem((
            np.array([[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 5.0]]),
            np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),
        ))
        a = wedge_system(power_system(sys3, 2), 2)
        b = power_system(wedge_system(sys3, 2), 2)
        for A, B in zip(a.generators, b.generators):
            assert np.abs(A - B).max() <= 1e-10 * max(1.0, np.abs(B).max())


class TestOrbitSpan:
    def test_invariant_line(self):
        b = orbit_span(GeneratorSystem((np.diag([2.0, 3.0]),)), np.array([1.0, 0.0]))
        assert b.dim == 1

    def test_rotation_fills_plane(self):
        assert orbit_span(E2(), np.array([1.0, 0.0])).dim == 2
        assert orbit_span(E1(), np.array([1.0, 1.0])).dim == 2

    def test_result_is_invariant(self):
        rng = np.random.default_rng(3)
        sys = random_reducible_system(rng)
        v = np.array([1.0, 0.3])
        W = orbit_span(sys, v)
        assert invariance_residual(sys.generators, W) <= 1e-8


class TestAlgebraDimension:
    def test_identity_alone(self):
        out = algebra_dimension(GeneratorSystem((np.eye(2),)))
        assert out.dim == 1 and not out.certified

    def test_e2_saturates(self):
        out = algebra_dimension(E2())
        assert out.dim == 4 and out.certified

    def test_rotation_only_sufficient(self):
        # {R} is irreducible over R, yet the algebra test alone cannot see it
        out = algebra_dimension(E1())
        assert out.dim == 2 and not out.certified


class TestVerdicts:
    def test_identity_reducible(self):
        v = irreducibility_verdict(GeneratorSystem((np.eye(2),)))
        assert v.status == REDUCIBLE
        assert np.allclose(np.abs(v.witness.basis.ravel()), [1, 0])

    def test_rotation_irreducible_exact(self):
        v = irreducibility_verdict(E1())
        assert v.status == IRREDUCIBLE and v.method == "d2_exact"

    def test_diag_pair_reducible(self):
        v = irreducibility_verdict(DIAG_PAIR)
        assert v.status == REDUCIBLE
        assert np.allclose(np.abs(v.witness.basis.ravel()), [1, 0])

    def test_witness_invariance_residual(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            sys = random_reducible_system(rng)
            v = irreducibility_verdict(sys)
            assert v.status == REDUCIBLE
            assert invariance_residual(sys.generators, v.witness) <= 1e-8

    def test_algebra_certificate_not_contradicted(self):
        v = irreducibility_verdict(E2(), method="algebra_random", multistarts=256 + 64)
        assert v.status == IRREDUCIBLE and v.method == "algebra_dimension"

    def test_exact_vs_randomized_agreement_200(self):
        rng = np.random.default_rng(404)
        contradictions = 0
        for i in range(200):
            if i % 2:
                sys = random_reducible_system(rng)
            else:
                sys = random_2x2_system(rng)
            exact = irreducibility_verdict(sys, method="d2")
            rand = irreducibility_verdict(sys, method="algebra_random", seed=9)
            if {exact.status, rand.status} == {IRREDUCIBLE, REDUCIBLE}:
                contradictions += 1
        assert contradictions == 0


class TestCheckHypotheses:
    def test_e1_fails_at_power_two(self):
        rep = check_hypotheses(E1(), "theorem_1_1")
        assert rep.overall == "Fail"
        assert rep.failed_at == "power t=2"
        assert rep.witness is not None and rep.witness.dim == 1

    def test_e2_passes(self):
        rep = check_hypotheses(E2(), "theorem_1_1")
        assert rep.overall == "Pass"
        labels = [c.label for c in rep.checks]
        assert labels == ["power t=1", "power t=2", "wedge m=1"]

    def test_diag_pair_fails_at_t1(self):
        rep = check_hypotheses(DIAG_PAIR, "theorem_1_1")
        assert rep.overall == "Fail" and rep.failed_at == "power t=1"
        assert np.allclose(np.abs(rep.witness.basis.ravel()), [1, 0])

    def test_e3_corollary_passes(self):
        rep = check_hypotheses(E3(), "corollary_4_3")
        assert rep.overall == "Pass"
        assert any("translations absent" in w for w in rep.warnings)

    def test_corollary_norm_gate(self):
        rep = check_hypotheses(E2(), "corollary_4_3")
        assert rep.overall == "Fail" and rep.failed_at == "norms < 1/2"

    def test_corollary_needs_d2(self):
        sys3 = GeneratorSystem((np.eye(3) * 0.4,))
        with pytest.raises(InputError):
            check_hypotheses(sys3, "corollary_4_3")

    def test_scaled_rotation_family_inconclusive_free(self):
        # scalar multiple of a rotation: exact path still decides irreducible
        sys = GeneratorSystem((0.3 * ROT90,))
        rep = check_hypotheses(sys, "theorem_1_1")
        assert rep.overall == "Fail"  # square is a negative scalar: reducible
