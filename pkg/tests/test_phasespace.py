import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sagnac_pmdd import fock
from sagnac_pmdd import phasespace as ps
from sagnac_pmdd.model import PhysicalParams, gamma_decay, phi1

CFG = fock.FockConfig(24, 24)


def oracle_segment(state, params, t, sign=+1):
    ops = fock.build_operators(CFG)
    h = fock.hamiltonian_plus(params, ops) if sign > 0 else fock.hamiltonian_minus(params, ops)
    # single-vector action: the sparse path avoids a dense diagonalisation per call
    return fock.propagate_static(state, fock.Propagator(h, dense_limit=0), t)


def amplitudes(max_abs):
    part = st.floats(min_value=-max_abs, max_value=max_abs, allow_nan=False)
    return st.builds(complex, part, part)


class TestPrimitives:
    def test_initial_state(self):
        s = ps.initial_state()
        assert s.c_up == s.c_down == pytest.approx(1 / math.sqrt(2))
        assert ps.spin_coherence(s) == pytest.approx(0.5)

    def test_normalisation_enforced(self):
        with pytest.raises(ValueError):
            ps.HybridState(1.0, 1.0, ps.CoherentBranch(), ps.CoherentBranch())

    def test_displacement_composition_phase(self):
        # D(mu) D(nu) = exp(i Im(mu conj(nu))) D(mu + nu)
        mu, nu = 0.3 + 0.1j, -0.2 + 0.4j
        br = ps.displace(ps.displace(ps.CoherentBranch(), "a", nu), "a", mu)
        assert br.amp_a == pytest.approx(mu + nu)
        assert br.phase == pytest.approx((mu * nu.conjugate()).imag)

    def test_rotation_is_orthogonal(self):
        br = ps.rotate_modes(ps.CoherentBranch(0.3 + 0.2j, -0.4j), 1.1)
        assert abs(br.amp_a) ** 2 + abs(br.amp_b) ** 2 == pytest.approx(0.13 + 0.16)
        back = ps.rotate_modes(br, -1.1)
        assert back.amp_a == pytest.approx(0.3 + 0.2j)

    def test_phase_shift_modes(self):
        br = ps.CoherentBranch(0.5, 0.25j)
        assert ps.phase_shift(br, "a", math.pi).amp_a == pytest.approx(-0.5)
        assert ps.phase_shift(br, "n", math.pi).amp_b == pytest.approx(-0.25j)
        with pytest.raises(ValueError):
            ps.phase_shift(br, "z", 1.0)

    def test_negative_duration(self):
        with pytest.raises(ValueError):
            ps.evolve_segment(ps.initial_state(), 1.0, 1.0, 1.0, -0.1)


class TestAgainstOracle:
    """The analytic engine must reproduce exp(+iHt) on coherent inputs exactly."""

    @pytest.mark.parametrize("omega", [0.0, 1e-7, 0.3, 1.7, -0.9])
    @pytest.mark.parametrize("sign", [+1, -1])
    def test_segment(self, omega, sign):
        params = PhysicalParams(omega_rot=omega, alpha=0.4, beta=0.3)
        init = ps.initial_state(0.3 + 0.2j, -0.4 + 0.1j)
        apply = ps.apply_u_plus if sign > 0 else ps.apply_u_minus
        analytic = ps.to_fock(apply(init, params, 0.9), CFG)
        oracle = oracle_segment(ps.to_fock(init, CFG), params, 0.9, sign)
        # compare amplitudes, not just fidelity, so global and relative phases are checked
        assert np.max(np.abs(analytic.vector - oracle.vector)) < 1e-10

    def test_phi1_calibration(self):
        # relative spin phase of one segment from vacuum is twice model.phi1
        params = PhysicalParams(omega_rot=0.8, alpha=0.5, beta=0.25)
        oracle = oracle_segment(ps.to_fock(ps.initial_state(), CFG), params, 1.0)
        analytic = ps.apply_u_plus(ps.initial_state(), params)
        rel = analytic.branch_up.phase - analytic.branch_down.phase
        assert rel == pytest.approx(2 * phi1(params), abs=1e-14)
        # the branch phases are only meaningful if the full state agrees with the oracle
        assert np.max(np.abs(ps.to_fock(analytic, CFG).vector - oracle.vector)) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(
        amp_a=amplitudes(0.6),
        amp_b=amplitudes(0.6),
        omega=st.floats(min_value=-2.0, max_value=2.0),
        t=st.floats(min_value=0.01, max_value=1.0),
    )
    def test_random_segments(self, amp_a, amp_b, omega, t):
        params = PhysicalParams(omega_rot=omega, alpha=0.3, beta=0.2)
        init = ps.initial_state(amp_a, amp_b)
        analytic = ps.to_fock(ps.apply_u_plus(init, params, t), CFG)
        oracle = oracle_segment(ps.to_fock(init, CFG), params, t)
        assert np.max(np.abs(analytic.vector - oracle.vector)) < 1e-9


class TestDiagnostics:
    @given(st.floats(min_value=0.05, max_value=12.0))
    def test_overlap_is_exp_minus_gamma(self, theta):
        alpha, omega = 0.7, 0.9
        t = theta / omega
        s = ps.apply_u_plus(ps.initial_state(), PhysicalParams(omega_rot=omega, alpha=alpha, beta=0.4), t)
        v = abs(ps.branch_overlap(s.branch_down, s.branch_up))
        assert v == pytest.approx(math.exp(-gamma_decay(alpha, omega, theta)), rel=1e-10, abs=1e-300)

    def test_spin_entropy_bounds(self):
        s = ps.apply_u_plus(ps.initial_state(), PhysicalParams(omega_rot=0.5, alpha=3.0), 2.0)
        assert 0 < ps.spin_entropy(s) <= math.log(2) + 1e-12
        assert ps.spin_entropy(ps.initial_state()) == pytest.approx(0.0, abs=1e-14)

    def test_reduced_matrix_trace(self):
        s = ps.apply_u_plus(ps.initial_state(), PhysicalParams(omega_rot=0.5, alpha=1.0, beta=1.0))
        rho = ps.reduced_spin_matrix(s)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.allclose(rho, rho.conj().T)

    def test_large_amplitudes_cost_nothing(self):
        # cat sizes far beyond any Fock cutoff
        s = ps.apply_u_plus(ps.initial_state(), PhysicalParams(omega_rot=1e-3, alpha=1e4, beta=5e3), 0.1)
        assert s.max_amplitude > 100
        assert cmath.isfinite(ps.spin_coherence(s))

    def test_to_fock_truncation(self):
        with pytest.raises(fock.TruncationError) as err:
            ps.to_fock(ps.initial_state(3.0, 0.0), (10, 10))
        assert err.value.leakage > 1e-10

    def test_to_fock_accepts_tuple(self):
        state = ps.to_fock(ps.initial_state(0.1j, 0.2), (15, 15))
        assert state.norm() == pytest.approx(1.0, abs=1e-12)
