import numpy as np
import pytest
from hypothesis import given, strategies as st

from homsim.coincidence import analytic_rate
from homsim.elements import apply_mask, apply_mirror, pixel_mask, step_mask
from homsim.state import (
    BiphotonState,
    MomentumLabel,
    TwoModeState,
    build_grid,
    exchange,
    exchange_expectation,
    post_select,
    spdc_state,
)
from oracles import exchange_expectation_symbolic
import sympy as sp


def test_grid_3x3_contents():
    g = build_grid(3, 1.0)
    labels = {tuple(k) for k in g.labels()}
    assert len(labels) == 9
    assert (0, 0) in labels
    for k in [(1, 0), (0, 1), (1, 1), (1, -1)]:
        assert k in labels and (-k[0], -k[1]) in labels


@pytest.mark.parametrize("n, k_max", [(64, 1.0), (4, 1.0), (1, 1.0), (3, 0.0), (3, -2.0)])
def test_grid_rejects_bad_input(n, k_max):
    with pytest.raises(ValueError):
        build_grid(n, k_max)


def test_grid_101():
    g = build_grid(101, 2.0)
    assert g.size == 10201
    assert g.size % 2 == 1
    assert len(g.labels()) == 10201
    assert g.physical((50, -50)) == (2.0, -2.0)


@given(st.integers(1, 40))
def test_grid_closed_under_negation(h):
    g = build_grid(2 * h + 1, 1.0)
    labels = g.labels()
    idx = g.index(-labels)
    assert sorted(idx) == list(range(g.size))
    assert np.array_equal(g.index(labels), np.arange(g.size))


def test_spdc_uniform_amplitudes(grid3):
    s = spdc_state(grid3)
    assert len(s) == 9
    assert np.allclose(s.amplitudes, 1 / 3, atol=0, rtol=1e-15)
    for ks, ki in zip(s.signal, s.idler):
        assert np.array_equal(ks, -ki)
    assert (MomentumLabel(0, 0), MomentumLabel(0, 0)) in s.as_dict()


def test_spdc_symmetric_and_normalized(grid5):
    s = spdc_state(grid5)
    assert exchange(s).as_dict() == s.as_dict()
    assert abs(s.inner(s) - 1) < 1e-12


def test_spdc_envelope_normalized(grid5):
    s = spdc_state(grid5, envelope_width=0.7)
    assert abs(s.norm() - 1) < 1e-12
    assert abs(s.amplitude((0, 0), (0, 0))) > abs(s.amplitude((2, 2), (-2, -2)))


def test_state_rejects_unnormalized(grid3):
    with pytest.raises(ValueError, match="normalized"):
        BiphotonState(grid3, [[1, 0]], [[-1, 0]], [0.5])
    with pytest.raises(ValueError, match="finite"):
        BiphotonState(grid3, [[1, 0]], [[-1, 0]], [np.nan])


def test_post_select_raw_spdc(spdc3):
    t = post_select(spdc3, (1, 0))
    assert t.c_plus == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert t.c_minus == pytest.approx(1 / np.sqrt(2), abs=1e-15)


def test_post_select_after_pi_mask(spdc3, grid3):
    s = apply_mask(spdc3, step_mask(np.pi, grid3), "idler")
    t = post_select(s, (1, 0))
    assert t.c_minus / t.c_plus == pytest.approx(-1, abs=1e-15)


def test_post_select_removes_global_phase(spdc3, grid3):
    s = apply_mask(spdc3, pixel_mask(np.full((3, 3), 0.7), grid3), "signal")
    t = post_select(s, (0, 1))
    assert t.c_plus.imag == 0 and t.c_plus.real > 0


def test_post_select_errors(spdc3):
    with pytest.raises(ValueError, match="k0 = 0"):
        post_select(spdc3, (0, 0))
    flipped = apply_mirror(spdc3, "idler")  # support now (k, k)
    with pytest.raises(ValueError, match="zero weight"):
        post_select(flipped, (1, 0))


def test_exchange_involution(spdc3, grid3):
    rng = np.random.default_rng(3)
    s = apply_mask(spdc3, pixel_mask(rng.uniform(0, 6, (3, 3)), grid3), "idler")
    s = apply_mirror(s, "signal")
    assert exchange(exchange(s)).as_dict() == s.as_dict()
    assert exchange(exchange(s)).arms == s.arms
    assert exchange(s).norm() == pytest.approx(1, abs=1e-12)


def test_exchange_expectation_matches_symbolic_oracle():
    phi, expr = exchange_expectation_symbolic()
    assert sp.simplify(expr - sp.cos(phi)) == 0
    f = sp.lambdify(phi, expr)
    for value in np.linspace(0, 2 * np.pi, 25):
        t = TwoModeState.from_phase((1, 0), value)
        assert exchange_expectation(t) == pytest.approx(f(value), abs=1e-12)


def test_antisymmetric_state():
    t = TwoModeState.from_phase((1, 1), np.pi)
    assert exchange_expectation(t).real == pytest.approx(-1, abs=1e-15)


def test_exchange_expectation_invariant(spdc3, grid3):
    """<Psi_phi|X|Psi_phi> = cos(phi) = 1 - C(phi) on 25 phases."""
    for phi in np.linspace(0, 2 * np.pi, 25):
        s = apply_mask(spdc3, step_mask(phi, grid3), "idler")
        t = post_select(s, (1, 0))
        x = exchange_expectation(t)
        assert abs(x.imag) < 1e-15
        assert abs(x.real - np.cos(phi)) < 1e-12
        assert abs(x.real - (1 - analytic_rate(phi))) < 1e-12
        # the full biphoton state agrees with the two-mode form on this pair
        full = t.to_biphoton(grid3)
        assert abs(exchange_expectation(full) - x) < 1e-12


def test_intermediate_phase_is_not_exchange_eigenstate():
    t = TwoModeState.from_phase((1, 0), np.pi / 3)
    x = exchange(t)
    # exchange maps Psi_phi to e^{i phi} Psi_{-phi}
    expected = TwoModeState.from_phase((1, 0), -np.pi / 3)
    assert x.c_plus == pytest.approx(np.exp(1j * np.pi / 3) * expected.c_plus)
    assert x.c_minus == pytest.approx(np.exp(1j * np.pi / 3) * expected.c_minus)
    assert abs(exchange_expectation(t)) < 1 - 1e-3


def test_two_mode_normalization_enforced():
    with pytest.raises(ValueError):
        TwoModeState(MomentumLabel(1, 0), 1.0, 1.0)
