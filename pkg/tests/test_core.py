import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from enantiosep.core import (
    LevelSystem,
    Method,
    NormalizationError,
    PropagationConfig,
    QuantumState,
    ResonanceError,
    assemble_hamiltonian,
    propagate,
    step_unitary,
)
from enantiosep.pulses import (
    ChiralitySignMap,
    PulseEnvelope,
    PulseSchedule,
    Shape,
    Transition,
    fig3_perfect,
)

L, R = ChiralitySignMap.left(), ChiralitySignMap.right()


def random_hermitian(rng, scale=1.0):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return scale * (a + a.conj().T) / 2


# -- types -----------------------------------------------------------------


def test_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        QuantumState([1, 1, 0])
    QuantumState([1 / math.sqrt(2), 1j / math.sqrt(2), 0])


def test_level_system_detunings():
    ls = LevelSystem(energies=(0.0, 2.0, 5.0), drive_frequencies=(2.0, 4.5, 3.0))
    assert ls.detunings == (0.5, 0.0, 0.0)
    with pytest.raises(ResonanceError):
        ls.validate_resonant()
    LevelSystem((0.0, 2.0, 5.0), (2.0, 5.0, 3.0)).validate_resonant()


def test_propagation_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(t_start=1.0, t_end=1.0)
    with pytest.raises(ValueError):
        PropagationConfig(dt=0.0)
    with pytest.raises(ValueError):
        PropagationConfig(t_end=0.5, dt=1.0)
    assert PropagationConfig().n_steps == 12000


# -- Hamiltonian -------------------------------------------------------------


def test_single_real_12_coupling():
    s = PulseSchedule((PulseEnvelope(Transition.T12, 0.37, 0.0, 1.0),))
    H = assemble_hamiltonian(s, L, 0.0)
    expected = np.zeros((3, 3), complex)
    expected[1, 0] = expected[0, 1] = 0.37
    np.testing.assert_array_equal(H, expected)


def test_empty_schedule_zero():
    np.testing.assert_array_equal(assemble_hamiltonian(PulseSchedule(), R, 4.2), np.zeros((3, 3)))


def test_step2_right_matches_bright_state_expansion():
    s = fig3_perfect()
    H = assemble_hamiltonian(s, R, 9.0)
    omega0 = math.sqrt(math.pi / 2) / 2
    omega_prime = math.sqrt(2) * omega0
    phi = np.array([1j, 1, 0]) / math.sqrt(2)
    three = np.array([0, 0, 1])
    expected = omega_prime * (np.outer(three, phi.conj()) + np.outer(phi, three.conj()))
    # the 1-2 tail at t = 9 is exp(-36) times its peak
    expected[1, 0] = expected[0, 1] = math.sqrt(math.pi) / 4 * math.exp(-36)
    np.testing.assert_allclose(H, expected, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0, 3), min_size=3, max_size=3),
    st.lists(st.floats(-math.pi, math.pi), min_size=3, max_size=3),
    st.floats(-5, 15),
    st.tuples(*(st.sampled_from([1, -1]),) * 3),
)
def test_hamiltonian_hermitian_bitwise(amps, phases, t, signs):
    s = PulseSchedule(
        tuple(PulseEnvelope(tr, a, 3.0, 1.5, ph) for tr, a, ph in zip(Transition, amps, phases))
    )
    H = assemble_hamiltonian(s, ChiralitySignMap(*signs), t)
    assert np.array_equal(H, H.conj().T)
    assert np.all(np.diag(H) == 0)


# -- step unitary ------------------------------------------------------------


def test_zero_hamiltonian_identity():
    np.testing.assert_array_equal(step_unitary(np.zeros((3, 3), complex), 0.3), np.eye(3))


def test_two_level_rabi_block():
    x, dt = 0.83, 0.41
    H = np.zeros((3, 3), complex)
    H[0, 1] = H[1, 0] = x
    expected = np.array(
        [
            [math.cos(x * dt), -1j * math.sin(x * dt), 0],
            [-1j * math.sin(x * dt), math.cos(x * dt), 0],
            [0, 0, 1],
        ]
    )
    np.testing.assert_allclose(step_unitary(H, dt), expected, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-4, 2.0))
def test_step_unitary_random_hermitian(seed, dt):
    H = random_hermitian(np.random.default_rng(seed))
    U = step_unitary(H, dt)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(np.abs(np.linalg.eigvals(U)), 1.0, atol=1e-12)
    np.testing.assert_allclose(U, expm(-1j * H * dt), atol=1e-12)


def test_step_unitary_batched():
    rng = np.random.default_rng(3)
    Hs = np.stack([random_hermitian(rng) for _ in range(5)])
    U = step_unitary(Hs, 0.2)
    for k in range(5):
        np.testing.assert_allclose(U[k], step_unitary(Hs[k], 0.2), atol=1e-14)


# -- propagation -------------------------------------------------------------


@pytest.mark.parametrize("method", list(Method))
def test_empty_schedule_keeps_state(method):
    psi = QuantumState([0.6, 0.8j, 0])
    tr = propagate(psi, PulseSchedule(), L, PropagationConfig(t_end=1.0, dt=0.01, method=method))
    assert tr.final_state == psi


def test_trace_sampling():
    cfg = PropagationConfig(t_end=1.0, dt=0.01, record_stride=7)
    tr = propagate(QuantumState.ground(), fig3_perfect(), L, cfg)
    # t=0, every 7 steps, plus the final step
    assert len(tr.times) == 1 + 100 // 7 + 1
    assert tr.times[0] == 0.0 and tr.times[-1] == pytest.approx(1.0)
    assert tr.populations.shape == (len(tr.times), 3)


@pytest.mark.parametrize("method", list(Method))
def test_fig3_perfect_left_trapped(method):
    tr = propagate(QuantumState.ground(), fig3_perfect(), L, PropagationConfig(method=method))
    np.testing.assert_allclose(tr.final_populations, [0.5, 0.5, 0.0], atol=1e-3)


@pytest.mark.parametrize("method", list(Method))
def test_fig3_perfect_right_pumped(method):
    tr = propagate(QuantumState.ground(), fig3_perfect(), R, PropagationConfig(method=method))
    assert tr.final_populations[2] == pytest.approx(1.0, abs=1e-3)


def test_step1_matches_two_level_formula():
    # A lone 1-2 pulse of area pi/4 + d; compare amplitudes with cos/sin of the area.
    p = PulseEnvelope(Transition.T12, math.sqrt(math.pi) / 4, 3.0, 1.1)
    # window wide enough that the truncated Gaussian tails are below 1e-12
    tr = propagate(QuantumState.ground(), PulseSchedule((p,)), L, PropagationConfig(t_start=-6.0, t_end=12.0))
    area = math.sqrt(math.pi) / 4 * 1.1 * math.sqrt(math.pi)
    np.testing.assert_allclose(
        tr.final_state.amplitudes, [math.cos(area), -1j * math.sin(area), 0], atol=1e-8
    )


def test_norm_drift_aborts():
    # Huge drive with a coarse RK4 step blows up the norm.
    p = PulseEnvelope(Transition.T12, 50.0, 0.5, 1.0, shape=Shape.RECTANGULAR)
    cfg = PropagationConfig(t_end=1.0, dt=0.1, method=Method.RK4)
    with pytest.raises(NormalizationError, match="norm drift"):
        propagate(QuantumState.ground(), PulseSchedule((p,)), L, cfg)


def random_schedule(rng):
    pulses = []
    for tr in Transition:
        if rng.random() < 0.8:
            pulses.append(
                PulseEnvelope(
                    tr,
                    amplitude=float(rng.uniform(0, 2)),
                    center=float(rng.uniform(0, 4)),
                    width=float(rng.uniform(0.2, 1.5)),
                    phase=float(rng.uniform(-math.pi, math.pi)),
                    shape=Shape.GAUSSIAN if rng.random() < 0.7 else Shape.RECTANGULAR,
                )
            )
    return PulseSchedule(tuple(pulses))


def random_state(rng):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    return QuantumState(v / np.linalg.norm(v))


@pytest.mark.parametrize("seed", range(10))
def test_rk4_norm_preservation(seed):
    rng = np.random.default_rng(seed)
    cfg = PropagationConfig(t_end=4.0, dt=1e-3, method=Method.RK4, record_stride=1)
    tr = propagate(random_state(rng), random_schedule(rng), L, cfg)
    assert np.max(np.abs(tr.populations.sum(axis=1) - 1)) <= 1e-7


@pytest.mark.parametrize("seed", range(5))
def test_methods_agree_on_random_schedules(seed):
    rng = np.random.default_rng(100 + seed)
    sched, psi = random_schedule(rng), random_state(rng)
    # only smooth pulses: rectangle edges inside a step degrade both methods
    sched = PulseSchedule(tuple(p for p in sched if p.shape is Shape.GAUSSIAN))
    a = propagate(psi, sched, R, PropagationConfig(t_end=4.0, method=Method.RK4))
    b = propagate(psi, sched, R, PropagationConfig(t_end=4.0, method=Method.EXPONENTIAL))
    np.testing.assert_allclose(a.final_populations, b.final_populations, atol=1e-5)
