import math

import numpy as np
import pytest

from cocyclespan import E3, E4, E5, GeneratorSystem
from cocyclespan.errors import InputError
from cocyclespan.thermo import (PotentialSpec, QMInput, TargetSequence,
                                affinity_dimension, all_ones_targets, alpha_hat,
                                beta_hat, conformal_qm_input, potential_value,
                                pressure_bracket, r0_interval, s0_interval,
                                square_pressure)

LOG2 = math.log(2.0)
LOG04 = math.log(0.4)
LOG25 = math.log(2.5)


class TestPotential:
    def test_sv_pieces_hand_values(self):
        A = np.diag([0.4, 0.1])
        assert abs(potential_value(A, PotentialSpec("sv_s", 0.5)) - 0.4**0.5) <= 1e-14
        # |A^-1| = 10: phi^1.5 = 0.4 * 10^{-0.5}
        assert abs(potential_value(A, PotentialSpec("sv_s", 1.5)) - 0.4 * 10**-0.5) <= 1e-14
        assert abs(potential_value(A, PotentialSpec("sv_s", 2.0)) - 0.04) <= 1e-12

    def test_piece_agreement_at_boundaries_100(self):
        rng = np.random.default_rng(61)
        for _ in range(100):
            A = rng.standard_normal((2, 2))
            if abs(np.linalg.det(A)) < 1e-6:
                continue
            s1, s2 = np.linalg.svd(A, compute_uv=False)
            # s = 1: |A|^s vs |A| |A^-1|^{-(s-1)}
            assert abs(s1**1.0 - s1 * (s2 / 1.0) ** 0.0) <= 1e-12 * s1
            # s = 2: |A||A^-1|^{-1} vs |det|
            lhs = s1 * s2
            rhs = abs(np.linalg.det(A))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)
            for s in (1.0, 2.0):
                potential_value(A, PotentialSpec("sv_s", s))  # internal assert

    def test_submultiplicative_500(self):
        rng = np.random.default_rng(67)
        for _ in range(500):
            A = rng.standard_normal((2, 2))
            B = rng.standard_normal((2, 2))
            if min(abs(np.linalg.det(A)), abs(np.linalg.det(B))) < 1e-6:
                continue
            s = float(rng.choice([0.3, 1.0, 1.5, 2.5]))
            spec = PotentialSpec("sv_s", s)
            lhs = potential_value(A @ B, spec)
            rhs = potential_value(A, spec) * potential_value(B, spec)
            assert lhs <= rhs * (1 + 1e-12)

    def test_norm_potential_any_d(self):
        A = np.diag([2.0, 3.0, 5.0])
        assert abs(potential_value(A, PotentialSpec("norm_s", 2.0)) - 25.0) <= 1e-12

    def test_sv_requires_d2(self):
        with pytest.raises(InputError):
            potential_value(np.eye(3), PotentialSpec("sv_s", 1.0))


class TestPressure:
    def test_counting_pressure_exact(self):
        for sys in (E3(), E4()):
            br = pressure_bracket(sys, PotentialSpec("norm_s", 0.0), 8,
                                  QMInput(k=0, C=1.0) if sys.is_conformal() else None)
            assert abs(br.upper - LOG2) <= 1e-12

    def test_e4_counting_lower_bound(self):
        br = pressure_bracket(E4(), PotentialSpec("norm_s", 0.0), 8, QMInput(k=1, C=1.0))
        assert br.lower_valid
        assert abs(br.lower - 8 * LOG2 / 9) <= 1e-12
        assert br.lower <= LOG2 <= br.upper + 1e-12

    def test_e4_conformal_oracle(self):
        qm = conformal_qm_input(E4())
        assert qm == QMInput(k=0, C=1.0)
        for s in (0.25, 0.5, 0.75):
            br = pressure_bracket(E4(), PotentialSpec("sv_s", s), 8, qm)
            target = LOG2 + s * LOG04
            assert br.lower - 1e-9 <= target <= br.upper + 1e-9
            assert br.width <= 1e-2

    def test_square_pressure_counting(self):
        for sys in (E3(), E4()):
            qm = conformal_qm_input(sys)
            br = square_pressure(sys, 0.0, 8, qm)
            assert abs(br.lower + LOG2) <= 1e-12

    def test_e4_square_pressure_conformal(self):
        br = square_pressure(E4(), 0.5, 8, conformal_qm_input(E4()))
        target = -(LOG2 + 2 * 0.5 * LOG04)
        assert abs(br.lower - target) <= 1e-9
        assert abs(br.upper - target) <= 1e-9

    def test_e3_bracket_narrows(self):
        gamma = None
        from cocyclespan.quasimult import gamma_minimax, qm_constant_phi
        g = gamma_minimax(E3(), 1)
        checks = {}
        for n in (5, 10):
            c = qm_constant_phi(E3(), 1, 1.0, gamma=g)
            br = pressure_bracket(E3(), PotentialSpec("sv_s", 1.0), n,
                                  QMInput(k=1, C=c.value))
            checks[n] = br
            assert br.lower <= br.upper
        assert checks[10].width < checks[5].width

    def test_qm_provider_valid_beyond_two(self):
        # for s > 2 the sv potential is a pure determinant power; the provider's
        # constant must stay a true lower bound (cross-check vs a deeper level)
        from cocyclespan.thermo import QMInputProvider
        prov = QMInputProvider(E3(), 1)
        for s in (2.5, 3.0):
            br = pressure_bracket(E3(), PotentialSpec("sv_s", s), 8, prov.qm_input(s))
            deeper = pressure_bracket(E3(), PotentialSpec("sv_s", s), 14)
            assert br.lower <= deeper.upper
        for s in (0.5, 2.5):
            qm = prov.qm_input(s, "norm_s")
            br = pressure_bracket(E3(), PotentialSpec("norm_s", s), 8, qm)
            deeper = pressure_bracket(E3(), PotentialSpec("norm_s", s), 14)
            assert br.lower <= deeper.upper

    def test_fekete_upper_monotone(self):
        from cocyclespan.thermo import _LevelData
        for sys in (E3(), E5()):
            for spec in (PotentialSpec("norm_s", 1.0), PotentialSpec("sv_s", 0.7),
                         PotentialSpec("sv_s_squared", 0.7)):
                up_n = pressure_bracket(sys, spec, 4).upper
                up_2n = pressure_bracket(sys, spec, 8).upper
                assert up_2n <= up_n + 1e-12


class TestAlphaBeta:
    def test_e4_constant_targets(self):
        val = alpha_hat(E4(), all_ones_targets(8), 0.5)
        assert abs(val - 0.5 * LOG25) <= 1e-12

    def test_s_zero(self):
        assert alpha_hat(E3(), all_ones_targets(5), 0.0) == 0.0

    def test_e3_alternating_targets_cross_check(self):
        words = tuple(tuple(1 + (i % 2) for i in range(k)) for k in range(1, 7))
        targets = TargetSequence(words=words, tail_start=2)
        from cocyclespan.wordspace import product
        expect = min(-math.log(product(E3(), w).norm()) / len(w) for w in words[1:])
        assert abs(alpha_hat(E3(), targets, 1.0) - expect) <= 1e-12

    def test_empty_targets_rejected(self):
        with pytest.raises(InputError):
            TargetSequence(words=())
        with pytest.raises(InputError):
            TargetSequence(words=((),))

    def test_beta_table_floor_half(self):
        table = [(n, n // 2) for n in range(1, 101)]
        est = beta_hat(psi_table=table, tail_start=50)
        assert 0.49 <= est.value <= 0.5
        assert not est.warnings

    def test_beta_explicit(self):
        assert beta_hat(beta=0.3).value == 0.3
        est = beta_hat(psi_table=[(n, n) for n in range(1, 50)], tail_start=10)
        assert est.value == 1.0
        assert any("beta < 1" in w for w in est.warnings)


class TestDimensionReports:
    def test_e4_shrinking_target(self):
        rep = s0_interval(E4(), all_ones_targets(10), 10, 1)
        target = LOG2 / math.log(6.25)
        assert rep.interval[0] - 1e-3 <= target <= rep.interval[1] + 1e-3
        assert rep.width <= 1e-3
        assert rep.dimension[1] <= 2.0
        assert rep.details["qm"]["mode"] == "conformal"

    def test_e4_recurrence(self):
        rep = r0_interval(E4(), 0.5, 10, 1)
        target = 2 * LOG2 / (3 * LOG25)
        assert abs(0.5 * (rep.interval[0] + rep.interval[1]) - target) <= 1e-3

    def test_beta_zero_degenerates_to_affinity(self):
        r0 = r0_interval(E4(), 0.0, 10, 1)
        aff = affinity_dimension(E4(), 10, 1)
        assert abs(r0.interval[1] - aff.interval[1]) <= 1e-5

    def test_e4_affinity(self):
        rep = affinity_dimension(E4(), 10, 1)
        target = LOG2 / LOG25
        assert abs(rep.interval[1] - target) <= 1e-3

    def test_single_contraction_boundary(self):
        sys = GeneratorSystem((np.diag([0.4, 0.4]),))
        rep = affinity_dimension(sys, 6, 1)
        assert rep.boundary == "at_lower"
        assert rep.interval[1] == 0.0

    def test_beta_range_checked(self):
        with pytest.raises(InputError):
            r0_interval(E4(), 1.0, 8, 1)

    def test_e3_s0_width_and_grid_cross_check(self):
        targets = all_ones_targets(12)
        rep = s0_interval(E3(), targets, 10, 1)
        assert rep.width <= 0.05
        # dense s-grid on the upper pressure curve must cross inside the interval
        from cocyclespan.thermo import _LevelData, _TargetData
        data = _LevelData(E3(), 10)
        tdata = _TargetData(E3(), targets)
        grid = np.linspace(0.0, 1.0, 401)
        vals = [data.log_z(PotentialSpec("sv_s", s)) / 10 - tdata.alpha(s) for s in grid]
        crossings = [s for s, a, b in zip(grid[1:], vals, vals[1:]) if a > 0 >= b]
        assert len(crossings) == 1
        assert rep.interval[0] - 1e-6 <= crossings[0] <= rep.interval[1] + 5e-3

    def test_e3_r0_and_affinity_intervals(self):
        rr = r0_interval(E3(), 0.5, 10, 1)
        assert rr.interval[0] < rr.interval[1]
        assert rr.width <= 0.08
        rr8 = r0_interval(E3(), 0.5, 8, 1)
        assert rr8.interval[0] - 1e-12 <= rr.interval[0]
        assert rr.interval[1] <= rr8.interval[1] + 1e-12
        ra10 = affinity_dimension(E3(), 10, 1)
        ra8 = affinity_dimension(E3(), 8, 1)
        assert ra10.width <= 0.12
        # intervals nest as n grows
        assert ra8.interval[0] - 1e-12 <= ra10.interval[0]
        assert ra10.interval[1] <= ra8.interval[1] + 1e-12

    def test_e3_s0_nesting(self):
        targets = all_ones_targets(12)
        r8 = s0_interval(E3(), targets, 8, 1)
        r10 = s0_interval(E3(), targets, 10, 1)
        assert r8.interval[0] - 1e-12 <= r10.interval[0]
        assert r10.interval[1] <= r8.interval[1] + 1e-12
