import numpy as np
import pytest
from numpy.testing import assert_allclose

from cubicwave import BlowupDetected, BracketError, ConfigError, DomainError, NonConvergedFit
from cubicwave.discretization import make_grid
from cubicwave.evolution import (TRACE_COLUMNS, EvolutionConfig, EvolutionTrace, Evolver, Modulator,
                                 Perturbation, envelope_check, evolve, extract_modulation, fit_decay_rate,
                                 ode_blowup_check, prepare_initial_data, shoot_blowup_time, step, summarize)
from cubicwave.operators import profile
from cubicwave.spectral import eigenfunctions

SQRT2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def grid():
    return make_grid(d=5, n_r=24, n_theta=8)


@pytest.fixture(scope="module")
def evolver(grid):
    return Evolver(grid)


@pytest.fixture(scope="module")
def modulator(evolver):
    return Modulator(evolver.basis)


def test_prepare_unperturbed(grid):
    psi = prepare_initial_data(None, 1.0, grid)
    assert_allclose(psi.first.values, SQRT2, rtol=1e-15)
    assert_allclose(psi.second.values, SQRT2, rtol=1e-15)
    psi = prepare_initial_data(Perturbation(kind="none"), 1.1, grid, delta=0.2)
    assert_allclose(psi.first.values, 1.1 * SQRT2, rtol=1e-15)
    assert_allclose(psi.second.values, 1.21 * SQRT2, rtol=1e-15)


def test_prepare_perturbed(grid):
    pert = Perturbation(kind="radial", eps=1e-3, width=0.5)
    psi = prepare_initial_data(pert, 1.0, grid)
    bump = 1e-3 * np.exp(-grid.R**2 / 0.25)
    assert_allclose(psi.first.values, SQRT2 + bump, rtol=1e-15)
    assert_allclose(psi.second.values, SQRT2, rtol=1e-15)


def test_prepare_rejects_far_T(grid):
    with pytest.raises(DomainError):
        prepare_initial_data(None, 1.1, grid, delta=0.1)
    with pytest.raises(DomainError):
        prepare_initial_data(None, 0.85, grid)


def test_config_validation():
    with pytest.raises(ConfigError):
        EvolutionConfig(tau_max=-1)
    with pytest.raises(ConfigError):
        EvolutionConfig(bracket=(1.01, 0.99))
    with pytest.raises(ConfigError):
        Perturbation(kind="spiral")


def test_time_step_rule(evolver):
    assert evolver.dtau <= 1e-2
    # inside the RK4 real-axis stability interval
    assert evolver.dtau * evolver.spectral_radius <= 2.785


def test_static_profile_is_fixed_point(grid, evolver):
    psi0 = profile(grid, 0.0)
    out = step(psi0, 0.0, 1e-3, evolver)
    assert (out - psi0).max_abs() <= 1e-12


@pytest.mark.parametrize("a", [-0.15, 0.05, 0.15])
def test_boosted_profile_is_fixed_point(grid, evolver, a):
    psi = profile(grid, a)
    out = step(psi, a, 1e-3, evolver)
    assert (out - psi).max_abs() <= 1e-10


@pytest.fixture(scope="module")
def generic_state(grid, evolver):
    pert = Perturbation(kind="mixed", eps=0.05, width=0.5, second_slot=0.5)
    return evolver.coeffs(prepare_initial_data(pert, 1.0, grid))


def test_global_error_order(evolver, generic_state):
    # error at fixed tau falls by 2^4 when the step is halved
    def run(h, tau=0.4):
        c = generic_state.copy()
        for _ in range(int(round(tau / h))):
            c = evolver.step(c, h)
        return c

    ref = run(0.01 / 16)
    e = [np.abs(run(h) - ref).max() for h in (0.01, 0.005, 0.0025)]
    assert 14 <= e[0] / e[1] <= 18
    assert 14 <= e[1] / e[2] <= 18


def test_one_step_error_order(evolver, generic_state):
    # a single step carries the local error, one order higher
    def fine(h):
        c = generic_state.copy()
        for _ in range(64):
            c = evolver.step(c, h / 64)
        return c

    e = [np.abs(evolver.step(generic_state, h) - fine(h)).max() for h in (0.02, 0.01, 0.005)]
    assert 28 <= e[0] / e[1] <= 34
    assert 28 <= e[1] / e[2] <= 34


def test_blowup_guard(grid):
    ev = Evolver(grid, guard=2.0)
    c = ev.coeffs(profile(grid, 0.0)) * 1.5
    with pytest.raises(BlowupDetected):
        ev.step(c)


@pytest.mark.parametrize("a", [0.05, -0.15, 0.15])
def test_modulation_recovers_profile(grid, modulator, a):
    alpha, phi, p, q = extract_modulation(profile(grid, a), 0.0, modulator)
    assert abs(alpha - a) <= 1e-8
    assert phi.max_abs() <= 1e-8


def test_modulation_unstable_direction(grid, modulator):
    eps = 1e-4
    psi = profile(grid, 0.0) + eigenfunctions(grid, 0.0, "g") * eps
    alpha, phi, p, q = extract_modulation(psi, 0.0, modulator)
    assert abs(alpha) <= 1e-8
    assert_allclose(p, eps, rtol=1e-8)
    assert abs(q) <= 1e-12


def test_modulation_kernel_direction(grid, modulator):
    eps = 1e-4
    psi = profile(grid, 0.0) + eigenfunctions(grid, 0.0, "h") * eps
    alpha, phi, p, q = extract_modulation(psi, 0.0, modulator)
    # h = d_alpha Psi_alpha, so alpha moves by eps up to second order
    assert abs(alpha - eps) <= 10 * eps**2
    assert phi.max_abs() <= 10 * eps**2
    assert abs(q) <= 1e-12


def test_evolution_keeps_q_small(grid, evolver, modulator):
    pert = Perturbation(kind="mixed", eps=1e-3)
    trace, _ = evolve(evolver, prepare_initial_data(pert, 1.0, grid), 1.0, record_every=0.1,
                      modulator=modulator, seminorms=False)
    assert trace.event == "completed"
    assert len(trace) == 11
    assert np.max(np.abs(trace.array("q"))) <= 1e-8
    assert np.all(np.diff(trace.array("tau")) > 0)


def test_unperturbed_shooting():
    g = make_grid(d=5, n_r=16, n_theta=4)
    res = shoot_blowup_time(Perturbation(kind="none"), (0.99, 1.01), tol=1e-9, grid=g)
    assert abs(res.T - 1) <= 1e-6
    assert res.width() <= 1e-6


def test_bracket_error():
    g = make_grid(d=5, n_r=16, n_theta=4)
    with pytest.raises(BracketError):
        shoot_blowup_time(Perturbation(kind="none"), (1.001, 1.002), grid=g)
    with pytest.raises(BracketError):
        shoot_blowup_time(Perturbation(kind="none"), (0.8, 1.01), grid=g)


def _synthetic(rate=-0.5, n=201, tau_end=10.0):
    tr = EvolutionTrace()
    for t in np.linspace(0, tau_end, n):
        v = np.exp(rate * t)
        tr.append(tau=t, energy_norm_Phi=v, H0=v, H1=2 * v, H2=3 * v, H3=4 * v, alpha=0.1 + v, p=0.0, q=0.0)
    return tr


def test_fit_synthetic():
    tr = _synthetic()
    rate, resid = fit_decay_rate(tr, (2, 8))
    assert abs(rate + 0.5) <= 1e-12
    assert resid <= 1e-12


def test_fit_alpha_tail():
    # the last sample stands in for alpha_inf; a long trace makes that proxy exact to ~e^-20
    tr = _synthetic(n=801, tau_end=40.0)
    rate, _ = fit_decay_rate(tr, (2, 8), "alpha")
    assert abs(rate + 0.5) <= 1e-6


def test_fit_rejects_bad_data():
    tr = EvolutionTrace()
    rng = np.random.default_rng(0)
    for t in np.linspace(0, 10, 101):
        tr.append(tau=t, energy_norm_Phi=np.exp(rng.normal(0, 2)))
    with pytest.raises(NonConvergedFit):
        fit_decay_rate(tr, (2, 8))
    with pytest.raises(NonConvergedFit):
        fit_decay_rate(tr, (20, 30))


def test_envelope():
    tr = _synthetic()
    env = envelope_check(tr, (2, 8))
    assert_allclose(list(env.values()), 1.0, rtol=1e-12)
    slow = _synthetic(rate=-0.3)
    assert max(envelope_check(slow, (2, 8)).values()) > 2
    with pytest.raises(NonConvergedFit):
        envelope_check(tr, (20, 30))
    s = summarize(tr, (2, 8), T=1.0)
    assert abs(s["rate_energy_norm_Phi"] + 0.5) <= 1e-12


def test_trace_round_trip(tmp_path):
    tr = _synthetic(n=21)
    path = tmp_path / "trace.csv"
    tr.write_csv(path)
    assert path.read_text().splitlines()[1] == ",".join(TRACE_COLUMNS)
    back = EvolutionTrace.read_csv(path)
    for k in TRACE_COLUMNS:
        assert np.array_equal(back.array(k), tr.array(k))
    with pytest.raises(ValueError):
        tr.append(tau=0.0)
    bad = tmp_path / "bad.csv"
    bad.write_text("# other/9\ntau\n")
    with pytest.raises(ConfigError):
        EvolutionTrace.read_csv(bad)


def test_ode_blowup():
    ts, vals, exact, err = ode_blowup_check(T_frame=1.2, t_max=0.9)
    assert ts[-1] == pytest.approx(0.9)
    assert err <= 1e-6
    assert_allclose(vals, SQRT2 / (1 - ts), rtol=1e-6)
