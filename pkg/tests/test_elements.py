import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from homsim.elements import (
    HOM_COHERENCE_CONSTANT,
    CoherenceModel,
    apply_mask,
    apply_mirror,
    coherence_from_filter,
    gamma,
    pixel_mask,
    relative_phase,
    set_delay,
    step_mask,
    wrap_phase,
    zero_mask,
)
from homsim.state import build_grid, post_select, spdc_state
from oracles import filter_overlap, hom_constant

finite = st.floats(-20, 20, allow_nan=False)


def test_step_mask_pi(grid5):
    m = step_mask(np.pi, grid5)
    for k in grid5.labels():
        if k[0] > 0:
            assert relative_phase(m, k) == pytest.approx(np.pi)


def test_step_mask_zero_is_identity(grid3):
    assert np.array_equal(step_mask(0.0, grid3).phase, np.zeros((3, 3)))


def test_step_mask_half_pi(grid5):
    m = step_mask(np.pi / 2, grid5)
    for k in grid5.labels():
        if k[0] > 0:
            assert relative_phase(m, k) == pytest.approx(np.pi / 2)
        elif k[0] < 0:
            assert relative_phase(m, k) == pytest.approx(-np.pi / 2)
        elif k[1] != 0:
            assert relative_phase(m, k) == 0.0


def test_step_mask_midline_value(grid3):
    m = step_mask(1.2, grid3)
    assert m.at(np.array([0, 1])) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        step_mask(np.inf, grid3)


def test_pixel_mask_checkerboard(grid5):
    labels = grid5.labels()
    values = (np.pi * ((labels[:, 0] + labels[:, 1]) % 2)).reshape(5, 5)
    m = pixel_mask(values, grid5)
    # oracle: explicit pairwise difference, wrapped by hand
    for k in labels:
        if not k.any():
            continue
        a = np.pi * ((k[0] + k[1]) % 2)
        b = np.pi * ((-k[0] - k[1]) % 2)
        d = a - b
        d = d + 2 * np.pi if d <= -np.pi else d
        assert relative_phase(m, k) == pytest.approx(d)
    # opposite pixels always share parity on a checkerboard: no pair is flipped
    assert all(relative_phase(m, k) == 0 for k in labels if k.any())


def test_pixel_mask_checkerboard_shifted_rows(grid5):
    labels = grid5.labels()
    values = (np.pi * (labels[:, 0] > 0) + np.pi * ((labels[:, 0] + labels[:, 1]) % 2)).reshape(5, 5)
    m = pixel_mask(values, grid5)
    for k in labels:
        if k[0] > 0:
            assert abs(relative_phase(m, k)) == pytest.approx(np.pi)


def test_pixel_mask_validation(grid3):
    assert np.array_equal(pixel_mask(np.zeros(9), grid3).phase, np.zeros((3, 3)))
    bad = np.zeros((3, 3))
    bad[1, 2] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        pixel_mask(bad, grid3)
    with pytest.raises(ValueError, match="values"):
        pixel_mask(np.zeros(10), grid3)


@given(arrays(float, (5, 5), elements=finite), st.integers(-2, 2), st.integers(-2, 2))
def test_relative_phase_antisymmetric(values, ix, iy):
    assume((ix, iy) != (0, 0))
    m = pixel_mask(values, build_grid(5, 1.0))
    a = relative_phase(m, (ix, iy))
    b = relative_phase(m, (-ix, -iy))
    assert -np.pi < a <= np.pi
    assert np.cos(a + b) == pytest.approx(1.0, abs=1e-9)


@given(finite, st.integers(1, 2), st.integers(-2, 2))
def test_step_relative_phase_sums_to_zero_off_line(jump, ix, iy):
    m = step_mask(jump, build_grid(5, 1.0))
    total = relative_phase(m, (ix, iy)) + relative_phase(m, (-ix, -iy))
    assert abs(wrap_phase(total)) < 1e-9 or abs(abs(wrap_phase(total)) - 2 * np.pi) < 1e-9


@given(finite)
def test_uniform_mask_has_no_relative_phase(c):
    g = build_grid(3, 1.0)
    m = pixel_mask(np.full((3, 3), c), g)
    for k in g.labels():
        if k.any():
            assert relative_phase(m, k) == 0.0


def test_relative_phase_rejects_origin(grid3):
    with pytest.raises(ValueError):
        relative_phase(zero_mask(grid3), (0, 0))


def test_apply_zero_mask_exact(spdc3, grid3):
    out = apply_mask(spdc3, zero_mask(grid3), "idler")
    assert np.array_equal(out.amplitudes, spdc3.amplitudes)


def test_apply_pi_mask_then_post_select(spdc3, grid3):
    out = apply_mask(spdc3, step_mask(np.pi, grid3), "idler")
    t = post_select(out, (1, 1))
    assert t.c_minus / t.c_plus == pytest.approx(-1)
    assert abs(out.norm() - spdc3.norm()) < 1e-12


def test_apply_mask_grid_mismatch(spdc3):
    with pytest.raises(ValueError, match="grid mismatch"):
        apply_mask(spdc3, zero_mask(build_grid(5, 1.0)), "idler")


def test_two_mirrors_identity(spdc3, grid3):
    s = apply_mask(spdc3, step_mask(0.4, grid3), "signal")
    twice = apply_mirror(apply_mirror(s, "idler"), "idler")
    assert twice.as_dict() == s.as_dict()
    assert twice.arm("idler").mirror_count == 2
    assert twice.arm("signal").mirror_count == 0


def test_one_mirror_makes_support_correlated(spdc3, grid3):
    out = apply_mirror(spdc3, "idler")
    support = set(out.as_dict())
    expected = {(tuple(k), tuple(k)) for k in grid3.labels()}
    assert {(tuple(a), tuple(b)) for a, b in support} == expected
    assert abs(out.norm() - 1) < 1e-12


def test_mask_and_mirror_commute_on_different_arms(grid5):
    s = spdc_state(grid5)
    m = pixel_mask(np.random.default_rng(1).uniform(-3, 3, (5, 5)), grid5)
    a = apply_mirror(apply_mask(s, m, "idler"), "signal")
    b = apply_mask(apply_mirror(s, "signal"), m, "idler")
    assert a.same_amplitudes(b, atol=1e-15)


def test_set_delay_overwrites(spdc3):
    s = set_delay(set_delay(spdc3, "idler", 1e-5), "idler", 3e-5)
    assert s.arm("idler").delay == 3e-5
    assert s.arm("signal").delay == 0.0
    with pytest.raises(ValueError):
        set_delay(spdc3, "idler", np.nan)


def test_gamma_examples():
    m = CoherenceModel(4e-5)
    assert gamma(m, 0.0) == 1.0
    assert gamma(m, 4e-5) == pytest.approx(np.exp(-0.5), rel=1e-15)
    assert gamma(m, 10 * 4e-5) < 1e-10
    with pytest.raises(ValueError):
        CoherenceModel(0.0)


@given(st.floats(1e-6, 50), st.floats(1e-7, 1e-2))
def test_gamma_even_bounded_monotone(x, ell):
    m = CoherenceModel(ell)
    dl = x * ell
    assert gamma(m, dl) == gamma(m, -dl)
    assert 0.0 <= gamma(m, dl) < 1.0
    assert gamma(m, 1.5 * dl) <= gamma(m, dl)


def test_coherence_constant_matches_fourier_oracle():
    assert HOM_COHERENCE_CONSTANT == pytest.approx(hom_constant(810e-9, 3e-9), rel=1e-9)
    assert HOM_COHERENCE_CONSTANT == pytest.approx(np.sqrt(2 * np.log(2)) / (2 * np.pi), rel=1e-4)


def test_coherence_from_filter_value():
    ell = coherence_from_filter(810e-9, 3e-9).coherence_length
    assert (810e-9) ** 2 / 3e-9 == pytest.approx(2.187e-4, rel=1e-3)
    assert ell == pytest.approx(HOM_COHERENCE_CONSTANT * 2.187e-4, rel=1e-3)
    # the Gaussian model tracks the numerical overlap closely
    delays = np.linspace(-4, 4, 33) * ell
    model = CoherenceModel(ell).gamma(delays)
    assert np.max(np.abs(model - filter_overlap(delays, 810e-9, 3e-9))) < 1e-3


def test_coherence_scaling_and_validation():
    a = coherence_from_filter(810e-9, 3e-9).coherence_length
    b = coherence_from_filter(810e-9, 6e-9).coherence_length
    assert b == pytest.approx(a / 2, rel=1e-15)
    with pytest.raises(ValueError):
        coherence_from_filter(810e-9, 810e-9)
    with pytest.raises(ValueError):
        coherence_from_filter(810e-9, -1e-9)
