import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointreality.bloch import (
    MEASUREMENTS,
    PREPARATION_PULSES,
    BlochVector,
    Observable,
    dephase,
    ensemble_quartet,
    expectation,
    family_parameters,
    intersection_weight,
    prepare_from_pulse,
    rotate,
)

# theta = pi/3 family values, frozen from 50-digit arithmetic
M_PLUS_PI3 = 0.91143782776614764763
M_MINUS_PI3 = -0.41143782776614764763
T_PI3 = 0.68898223650461361360

unit = st.floats(-1.0, 1.0, allow_nan=False)
mus = st.floats(0.0, 1.0, allow_nan=False)
thetas = st.floats(0.0, math.pi / 2, allow_nan=False)


@st.composite
def physical(draw):
    v = np.array([draw(unit), draw(unit), draw(unit)])
    n = np.linalg.norm(v)
    if n > 1.0:
        v /= n
    return BlochVector.from_array(v)


def test_expectation_examples():
    assert expectation(BlochVector(0, 0, 1), Observable.B) == 1.0
    s = 1 / math.sqrt(2)
    assert expectation(BlochVector(s, 0, s), Observable.A) == pytest.approx(0.70710678, abs=1e-8)
    eps_plus = ensemble_quartet(math.pi / 3).eps_plus
    assert expectation(eps_plus, Observable.A) == pytest.approx(0.41143783, abs=1e-8)


def test_expectation_tolerates_rounding_within_tol():
    assert expectation(BlochVector(0.0, 0.0, 1.0 + 4e-10), Observable.B) == 1.0


def test_expectation_rejects_unphysical():
    with pytest.raises(ValueError):
        expectation(BlochVector(1, 1, 0), Observable.A)


def test_observable_axes_exact():
    for obs in MEASUREMENTS:
        assert sum(a * a for a in obs.axis) == 1.0
    assert Observable.from_label("z") is Observable.B


def test_dephase_examples():
    assert dephase(BlochVector(1, 0, 0), 1.0).as_array() == pytest.approx([0, 0, 0])
    assert dephase(BlochVector(0.3, 0.4, 0.5), 0.0) == BlochVector(0.3, 0.4, 0.5)
    s = 1 / math.sqrt(2)
    out = dephase(BlochVector(s, 0, s), 0.5)
    assert out.as_array() == pytest.approx([0.35355339, 0, 0.70710678], abs=1e-8)


@pytest.mark.parametrize("mu", [-0.01, 1.01, math.nan])
def test_dephase_rejects_bad_mu(mu):
    with pytest.raises(ValueError):
        dephase(BlochVector(0, 0, 1), mu)


@given(physical(), mus, mus)
def test_dephase_semigroup(n, mu1, mu2):
    lhs = dephase(dephase(n, mu1), mu2).as_array()
    rhs = dephase(n, 1 - (1 - mu1) * (1 - mu2)).as_array()
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@given(physical(), mus)
def test_dephase_contractive_and_keeps_z(n, mu):
    out = dephase(n, mu)
    assert out.norm() <= n.norm() + 1e-15
    assert out.z == n.z


def test_rotation_examples():
    assert rotate(BlochVector(0, 0, 1), 0.0, 1.234) == BlochVector(0, 0, 1)
    assert rotate(BlochVector(0, 0, 1), math.pi, math.pi / 2).as_array() == pytest.approx([0, 0, -1], abs=1e-15)
    a = 0.134967 * math.pi
    out = rotate(BlochVector(0, 0, 1), a, math.pi / 2).as_array()
    assert out == pytest.approx([math.sin(a), 0, math.cos(a)], abs=1e-15)
    # six-digit pulse angle: agrees with the eps_+ vector to about 1e-5
    assert out == pytest.approx([0.41143, 0, 0.91144], abs=2e-5)


def test_rotation_preserves_norm_1000_draws():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        v = rng.normal(size=3)
        v *= rng.uniform() / np.linalg.norm(v)
        n = BlochVector.from_array(v)
        out = rotate(n, rng.uniform(-10, 10), rng.uniform(-10, 10))
        assert abs(out.norm() - n.norm()) <= 1e-9


def test_pulse_table_prepares_family():
    q = ensemble_quartet(math.pi / 3)
    for name, state in zip(("eps_plus", "eps_minus", "eps_prime_plus", "eps_prime_minus"), q.states):
        prepared = prepare_from_pulse(*PREPARATION_PULSES[name])
        # the pulse angles carry six significant digits
        assert np.max(np.abs(prepared.as_array() - state.as_array())) < 5e-5


def test_quartet_pi3_values():
    q = ensemble_quartet(math.pi / 3)
    assert q.eps_plus.as_array() == pytest.approx([0.41143783, 0, 0.91143783], abs=1e-8)
    assert q.eps_minus.as_array() == pytest.approx([-0.91143783, 0, -0.41143783], abs=1e-8)
    assert q.eps_prime_plus.as_array() == pytest.approx([0.91143783, 0, -0.41143783], abs=1e-8)
    assert q.eps_prime_minus.as_array() == pytest.approx([-0.41143783, 0, 0.91143783], abs=1e-8)
    m_plus, m_minus, delta = family_parameters(math.pi / 3)
    assert m_plus == pytest.approx(M_PLUS_PI3, abs=1e-15)
    assert m_minus == pytest.approx(M_MINUS_PI3, abs=1e-15)
    assert delta == pytest.approx(math.sqrt(7) / 2, abs=1e-15)
    assert q.t == pytest.approx(T_PI3, abs=1e-15)
    assert q.t == pytest.approx((math.sqrt(7) + 1) / (2 * math.sqrt(7)), abs=1e-15)
    assert q.t == pytest.approx(0.68898, abs=1e-5)


def test_quartet_pi2_values():
    q = ensemble_quartet(math.pi / 2)
    s = math.sqrt(2) / 2
    m_plus, m_minus, _ = family_parameters(math.pi / 2)
    assert (m_plus, m_minus) == pytest.approx((s, -s), abs=1e-15)
    assert q.eps_plus.as_array() == pytest.approx([s, 0, s])
    assert q.eps_minus.as_array() == pytest.approx([-s, 0, -s])
    assert q.eps_prime_plus.as_array() == pytest.approx([s, 0, -s])
    assert q.eps_prime_minus.as_array() == pytest.approx([-s, 0, s])
    assert q.t == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("theta", [-1e-3, math.pi / 2 + 1e-3])
def test_quartet_rejects_theta(theta):
    with pytest.raises(ValueError):
        ensemble_quartet(theta)


@given(thetas)
def test_pure_family_identity(theta):
    m_plus, m_minus, _ = family_parameters(theta)
    assert abs(m_plus ** 2 + m_minus ** 2 - 1.0) <= 1e-12
    q = ensemble_quartet(theta)
    for s in q.states:
        assert abs(s.norm() - 1.0) <= 1e-9
        assert s.y == 0.0


@given(thetas)
def test_intersection_identity(theta):
    q = ensemble_quartet(theta)
    assert q.mixture_gap() <= 1e-9
    # t -> 1 only in the degenerate theta = 0 limit, where eps_+ = eps'_-
    assert 0.5 - 1e-15 <= q.t <= 1.0
    if theta > 1e-6:
        assert q.t < 1.0
    assert q.t == intersection_weight(theta)


@settings(max_examples=50)
@given(thetas, mus)
def test_dephased_quartet_keeps_intersection(theta, mu):
    # dephasing is linear, so the intersection weight does not move
    assert ensemble_quartet(theta).dephased(mu).mixture_gap() <= 1e-9
