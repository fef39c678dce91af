import cmath
import math

import numpy as np
import mpmath
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from tdslambert.errors import DomainError
from tdslambert.lambertw import EXP_M1, cc_full, w_ccmatrix, w_complex, w_real, w_scaled
from tdslambert.linalg import mat_exp


def residual(w, z):
    return abs(w * cmath.exp(w) - z)


@pytest.mark.parametrize("x, w", [(0.0, 0.0), (math.e, 1.0), (-EXP_M1, -1.0), (1.0, 0.5671432904097838)])
def test_principal_known_values(x, w):
    assert w_real(0, x) == pytest.approx(w, abs=1e-12)


def test_lower_branch_known_values():
    assert w_real(-1, -2 * math.exp(-2)) == pytest.approx(-2.0, abs=1e-12)
    assert w_real(-1, -EXP_M1) == pytest.approx(-1.0, abs=1e-7)


def test_real_domain_errors():
    with pytest.raises(DomainError):
        w_real(0, -0.5)
    with pytest.raises(DomainError):
        w_real(-1, 0.1)
    with pytest.raises(DomainError):
        w_real(-1, 0.0)
    with pytest.raises(DomainError):
        w_real(2, 1.0)


# x e^x is flat at x = -1, so x is recoverable from it to ~1e-10 only when
# |x + 1| is well above sqrt(machine epsilon); the identity test covers the rest
@settings(max_examples=300, deadline=None)
@given(st.floats(-1.0 + 1e-4, 700.0))
def test_round_trip_principal(x):
    z = x * math.exp(x)
    assert w_real(0, z) == pytest.approx(x, abs=1e-10 * max(1.0, abs(x)))


@settings(max_examples=300, deadline=None)
@given(st.floats(-700.0, -1.0 - 1e-4))
def test_round_trip_lower(x):
    z = x * math.exp(x)
    if z == 0.0:
        return
    assert w_real(-1, z) == pytest.approx(x, abs=1e-10 * max(1.0, abs(x)))


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.0 - 1e-4, -1.0 + 1e-4))
def test_identity_at_branch_point(x):
    z = max(x * math.exp(x), -EXP_M1)
    k = 0 if x >= -1.0 else -1
    w = w_real(k, z)
    assert abs(w * math.exp(w) - z) <= 1e-10
    assert abs(w - x) <= 1e-7


@settings(max_examples=300, deadline=None)
@given(st.floats(-EXP_M1, 1e6))
def test_branch_range_principal(x):
    assert w_real(0, x) >= -1.0


@settings(max_examples=300, deadline=None)
@given(st.floats(-EXP_M1, -1e-300))
def test_branch_range_lower(x):
    assert w_real(-1, x) <= -1.0


def test_near_branch_point_series_continuous():
    for eps in [1e-4, 1e-7, 1e-9, 1e-12]:
        x = -EXP_M1 + eps
        for k in (0, -1):
            w = w_real(k, x)
            assert abs(w * math.exp(w) - x) <= 1e-10
        assert w_real(0, x) > w_real(-1, x)


@pytest.mark.parametrize("k", [-3, -1, 0, 1, 2])
def test_complex_matches_scipy(k):
    rng = np.random.default_rng(7 + k)
    zs = np.concatenate([
        rng.normal(scale=1.0, size=300) + 1j * rng.normal(scale=1.0, size=300),
        rng.normal(scale=100.0, size=300) + 1j * rng.normal(scale=100.0, size=300),
        -EXP_M1 + 1e-3 * (rng.normal(size=100) + 1j * rng.normal(size=100)),
        -rng.uniform(0, 5, size=50) + 0j,
    ])
    for z in zs:
        if z == 0:
            continue
        ours = w_complex(k, z)
        ref = complex(scipy.special.lambertw(z, k))
        assert abs(ours - ref) <= 1e-9 * max(1.0, abs(ref)), (k, z, ours, ref)


def test_complex_zero():
    assert w_complex(0, 0) == 0
    with pytest.raises(DomainError):
        w_complex(-1, 0)


def test_complex_agrees_with_real_path():
    for x in [-0.3, -0.01, 0.5, 10.0]:
        assert w_complex(0, x).real == pytest.approx(w_real(0, x), abs=1e-13)
    for x in [-0.3, -0.01]:
        assert w_complex(-1, x).real == pytest.approx(w_real(-1, x), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(-4, 4), st.complex_numbers(max_magnitude=1e4, allow_nan=False, allow_infinity=False))
def test_defining_identity(k, z):
    if z == 0:
        return
    w = w_complex(k, z)
    assert residual(w, z) <= 1e-10 * max(1.0, abs(z))


def test_w_scaled_limit():
    assert w_scaled(0, 0.0) == 1.0
    assert w_scaled(0, 1e-9) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("k, row", [(0, [1.0, -2.0, 0.5]), (0, [0.3, 0.2, 4.0]), (-1, [0.5, 1.0, -0.2])])
def test_ccmatrix_identity(k, row):
    W = cc_full(w_ccmatrix(k, row))
    assert np.allclose(W @ mat_exp(W), cc_full(row), atol=1e-8)


def test_ccmatrix_case2():
    row = [0.4, -1.3, 0.0]
    assert np.array_equal(w_ccmatrix(0, row), row)


def test_ccmatrix_rejects_other_branches():
    with pytest.raises(DomainError):
        w_ccmatrix(1, [0.0, 1.0])


@pytest.mark.parametrize("k", [-2, -1, 1, 3])
@pytest.mark.parametrize("z", [5e-324, -5e-324, 1e-300j, 1e-260 - 1e-260j])
def test_subnormal_argument(k, z):
    # scipy returns inf+nanj at 5e-324, so mpmath is the oracle here
    w = w_complex(k, z)
    assert w == pytest.approx(complex(mpmath.lambertw(mpmath.mpc(z), k)), rel=1e-12)


@pytest.mark.parametrize("x", [-5e-324, -1e-300, -2e-251])
def test_real_lower_tiny_argument(x):
    assert w_real(-1, x) == pytest.approx(float(mpmath.lambertw(x, -1).real), rel=1e-14)
