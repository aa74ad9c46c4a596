"""Chain dynamics: forces, integrator, conservation, wave transport."""

import math

import numpy as np
import pytest

import chainwaves as cw


@pytest.fixture(scope="module")
def wave(model1, grid1):
    return cw.solve_wave(model1, grid1, cw.SolveConfig(epsilon=0.2))


def dispersion_sq(model, kappa):
    # frequency of the linearized chain: omega^2 = sum_m 4 alpha_m sin^2(m kappa / 2)
    return sum(
        4.0 * a * math.sin(m * kappa / 2.0) ** 2 for m, a in enumerate(model.alpha, 1)
    )


def test_acceleration_zero_state(model1):
    state = cw.LatticeState(model1, np.zeros(16), np.zeros(16))
    assert np.all(cw.acceleration(state) == 0.0)


def test_acceleration_uniform_stretch_interior(model2):
    J = 24
    stretch = 0.05
    state = cw.LatticeState(model2, stretch * np.arange(J), np.zeros(J))
    accel = cw.acceleration(state)
    M = model2.neighbor_range
    np.testing.assert_allclose(accel[M:-M], 0.0, atol=1e-14)
    assert abs(accel[0]) > 0  # free ends feel the missing partner


def test_acceleration_plane_wave_dispersion(model2):
    J = 64
    kappa = 0.7
    amplitude = 1e-3
    j = np.arange(J)
    state = cw.LatticeState(model2, amplitude * np.cos(kappa * j), np.zeros(J))
    accel = cw.acceleration(state, linear_only=True)
    expected = -dispersion_sq(model2, kappa) * state.positions
    M = model2.neighbor_range
    np.testing.assert_allclose(accel[M:-M], expected[M:-M], atol=1e-10)


def test_state_validation(model2):
    with pytest.raises(ValueError):
        cw.LatticeState(model2, np.zeros(5), np.zeros(5))  # below 2M+2
    with pytest.raises(ValueError):
        cw.LatticeState(model2, np.full(16, np.nan), np.zeros(16))


def test_step_zero_state_and_guard(model1):
    state = cw.LatticeState(model1, np.zeros(16), np.zeros(16))
    after = cw.step(state, 0.05)
    assert np.all(after.positions == 0.0) and np.all(after.velocities == 0.0)
    assert after.time == pytest.approx(0.05)
    with pytest.raises(ValueError):
        cw.step(state, 0.2)  # above 0.1/c0
    with pytest.raises(ValueError):
        cw.step(state, 0.0)


def test_step_harmonic_frequency(model1):
    # free-boundary normal mode; velocity Verlet frequency error is O(dt^2)
    J = 32
    mode = 3
    kappa = math.pi * mode / J
    omega = math.sqrt(dispersion_sq(model1, kappa))
    shape = np.cos(kappa * (np.arange(J) + 0.5))
    dt = 0.02
    state = cw.LatticeState(model1, 1e-8 * shape, np.zeros(J))
    previous = float(shape @ state.positions)
    crossing = None
    for n in range(1, 20000):
        state = cw.step(state, dt, linear_only=True)
        current = float(shape @ state.positions)
        if previous > 0 >= current:
            crossing = state.time - dt * current / (current - previous)
            break
        previous = current
    assert crossing is not None
    measured = (math.pi / 2.0) / crossing
    assert abs(measured - omega) / omega <= omega**2 * dt**2 / 4.0


def test_total_energy_single_bond(model1):
    positions = np.array([0.0, 0.3, 0.3, 0.3])
    state = cw.LatticeState(model1, positions, np.zeros(4))
    expected = 0.5 * 0.3**2 + 0.3**3 / 3.0
    assert cw.total_energy(state) == pytest.approx(expected, rel=1e-14)
    zero = cw.LatticeState(model1, np.zeros(4), np.zeros(4))
    assert cw.total_energy(zero) == 0.0


def test_energy_drift_standing_mode(model1):
    # bounded low-mode motion, guard step, ten thousand steps
    J = 80
    kappa = math.pi * 2 / J
    state = cw.LatticeState(
        model1, 0.01 * np.cos(kappa * (np.arange(J) + 0.5)), np.zeros(J)
    )
    guard = 0.1 / math.sqrt(model1.sound_speed_sq)
    energies = [cw.total_energy(state)]
    for n in range(10000):
        state = cw.step(state, guard)
        if n % 10 == 9:
            energies.append(cw.total_energy(state))
    assert cw.energy_drift_rate(energies, 10 * guard) <= 1e-6


def test_wave_initial_data_shape(wave):
    J = 80
    state = cw.wave_initial_data(wave, J)
    assert np.all(state.velocities <= 1e-15)
    assert np.sum(np.diff(np.signbit(-state.velocities + 1e-300))) <= 2
    eps, speed = wave.epsilon, wave.wave_speed
    expected_peak = eps**2 * speed * cw.sup_norm(wave.w)
    assert float(np.max(np.abs(state.velocities))) == pytest.approx(
        expected_peak, abs=1e-9
    )
    # midpoint particle sits at the wave crest
    assert int(np.argmax(-state.velocities)) == J // 2


def test_wave_initial_data_rejects(wave, model1):
    with pytest.raises(ValueError):
        cw.wave_initial_data(wave, 3)
    with pytest.raises(cw.WindowOverflowError):
        cw.wave_initial_data(wave, 10_000)


def test_transport_zero_horizon(wave):
    assert cw.transport_error(wave, 80, 0.0, 0.02) <= 1e-10


def test_transport_error_defaults(wave, model1):
    c0 = math.sqrt(model1.sound_speed_sq)
    horizon = 5.0 / wave.wave_speed  # five sites of travel
    report = cw.run_transport(wave, 80, horizon, 0.02 / c0)
    assert report.transport_error <= 0.02
    assert report.energy_drift <= 1e-6
    assert report.momentum_drift_per_step <= 1e-12
    # halving dt cuts the dt-limited error about fourfold
    finer = cw.run_transport(wave, 80, horizon, 0.01 / c0)
    assert report.transport_error / finer.transport_error == pytest.approx(4.0, rel=0.3)


def test_transport_window_overflow(wave):
    with pytest.raises(cw.WindowOverflowError):
        cw.run_transport(wave, 80, 200.0, 0.02)


def test_momentum_conserved_through_steps(wave):
    state = cw.wave_initial_data(wave, 80)
    start = cw.total_momentum(state)
    for _ in range(100):
        state = cw.step(state, 0.05)
    assert abs(cw.total_momentum(state) - start) / 100 <= 1e-12
