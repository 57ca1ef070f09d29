"""Half-space laws: closed forms against their defining integrals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from prbm import halfspace as hs
from prbm.errors import InvalidParam, SlowConvergence

EULER_GAMMA = 0.5772156649015329


def test_quadrature_config_guards():
    hs.QuadratureConfig()
    with pytest.raises(InvalidParam):
        hs.QuadratureConfig(rel_tol=0.0)
    with pytest.raises(InvalidParam):
        hs.QuadratureConfig(max_subdivisions=5)
    with pytest.raises(InvalidParam):
        hs.QuadratureConfig(cutoff=3.0)  # e^-3 dwarfs the default rel_tol


def test_transport_params_guards():
    p = hs.TransportParams(0.0)
    assert p.D == 1.0 and p.C0 == 1.0
    with pytest.raises(InvalidParam):
        hs.TransportParams(-1.0)
    with pytest.raises(InvalidParam):
        hs.TransportParams(1.0, D=0.0)
    with pytest.raises(InvalidParam):
        hs.TransportParams(1.0, C0=-2.0)


def test_stopping_time_density_routes_agree():
    """The closed erfcx form tracks the defining quadrature over six decades."""
    ts = np.geomspace(1e-3, 1e3, 13)
    for lam in (0.5, 2.0):
        closed = hs.stopping_time_density(ts, lam)
        by_quad = np.array(
            [hs.stopping_time_density(float(t), lam, method="integral") for t in ts]
        )
        assert np.max(np.abs(closed - by_quad) / closed) < 1e-10


def test_stopping_time_cdf_integrates_density():
    for lam, horizon in ((0.7, 2.0), (1.5, 30.0)):
        mass, _ = integrate.quad(
            lambda t: hs.stopping_time_density(t, lam), 0, horizon, limit=200
        )
        assert abs(mass - hs.stopping_time_cdf(horizon, lam)) < 1e-10


def test_stopping_time_asymptotics():
    lam = 0.9
    # short times: the reflected walk has barely accrued local time, so the
    # density matches the first-touch rate 1/(lam sqrt(2 pi t))
    t = 1e-10
    assert hs.stopping_time_density(t, lam) == pytest.approx(
        1.0 / (lam * math.sqrt(2.0 * math.pi * t)), rel=1e-4
    )
    # long times: universal t^{-3/2} tail independent of the switch point
    t = 1e9
    tau = t / (2 * lam * lam)
    assert hs.stopping_time_density(t, lam) == pytest.approx(
        1.0 / (4 * lam * lam * math.sqrt(math.pi) * tau**1.5), rel=1e-6
    )


def test_stopping_time_tail_switch_is_seamless():
    lam = 1.0
    t_switch = 2.0 * lam * lam * 1e4
    below = hs.stopping_time_density(t_switch * (1 - 1e-9), lam)
    above = hs.stopping_time_density(t_switch * (1 + 1e-9), lam)
    assert abs(above - below) / below < 1e-7


def test_stopping_time_validation():
    with pytest.raises(InvalidParam):
        hs.stopping_time_density(1.0, 0.0)
    with pytest.raises(InvalidParam):
        hs.stopping_time_density(-1.0, 1.0)
    with pytest.raises(InvalidParam):
        hs.stopping_time_density(1.0, 1.0, method="guess")
    with pytest.raises(InvalidParam):
        hs.stopping_time_cdf(-0.5, 1.0)
    assert hs.stopping_time_cdf(0.0, 2.0) == 0.0


def test_eta_reference_asymptotics():
    # z -> 0: planar divergence -ln z - gamma + O(z), 3d divergence 1/z
    z = 1e-6
    assert hs.eta(z, 2) == pytest.approx(-math.log(z) - EULER_GAMMA, abs=5e-6)
    assert hs.eta(1e-4, 3) * 1e-4 == pytest.approx(1.0, abs=2e-3)
    # z -> infinity: the kernel degenerates to plain harmonic measure
    assert hs.eta(1e3, 2) == pytest.approx(1.0, abs=1e-4)
    assert hs.eta(1e3, 3) == pytest.approx(1.0, abs=1e-4)


def test_eta_dips_below_one_then_recovers():
    """eta is not monotone: it crosses 1, bottoms out near z ~ 2, returns to 1.

    This pins the shape so a quadrature regression that flattens the dip
    would fail loudly rather than shifting absorption probabilities quietly.
    """
    for d in (2, 3):
        zs = np.geomspace(1e-2, 80.0, 60)
        vals = np.array([hs.eta(z, d) for z in zs])
        assert np.all(vals > 0)
        k = int(np.argmin(vals))
        assert 0 < k < len(zs) - 1
        assert vals[k] < 1.0 < vals[0]
        assert 1.0 <= zs[k] <= 4.0
        # decreasing before the minimum, increasing after
        assert np.all(np.diff(vals[: k + 1]) < 0)
        assert np.all(np.diff(vals[k:]) > 0)


def test_eta_validation():
    with pytest.raises(InvalidParam):
        hs.eta(0.0, 2)
    with pytest.raises(InvalidParam):
        hs.eta(1.0, 1)


def test_spread_kernel_factorizes_through_eta():
    """t_Lambda(s) equals eta(|s|/Lambda) times the height-Lambda Poisson kernel.

    The two sides run through different quadratures (or none at all on the
    harmonic side), so agreement here checks the kernel's shape, not just
    its normalization.
    """
    for d in (2, 3):
        for lam in (0.3, 1.0, 4.0):
            for s_mag in (0.05, 0.5, 2.0, 10.0):
                s = [s_mag] if d == 2 else [s_mag, 0.0]
                x = [0.0] * (d - 1) + [lam]
                expected = hs.eta(s_mag / lam, d) * hs.harmonic_density_halfspace(x, s, d)
                assert hs.spread_kernel_t(s, lam, d) == pytest.approx(expected, rel=1e-12)


def test_spread_kernel_center_diverges():
    assert hs.spread_kernel_t(0.0, 1.0, 2) == math.inf
    assert hs.spread_kernel_t([0.0, 0.0], 1.0, 3) == math.inf


def test_spread_kernel_even_in_s():
    assert hs.spread_kernel_t(-1.3, 0.7, 2) == hs.spread_kernel_t(1.3, 0.7, 2)


@given(
    c=st.floats(0.1, 10.0),
    lam=st.floats(0.05, 5.0),
    s=st.floats(0.01, 10.0),
    d=st.sampled_from([2, 3]),
)
@settings(max_examples=30, deadline=None)
def test_spread_kernel_scale_covariance(c, lam, s, d):
    """Rescaling lengths by c scales the density by c^{1-d}; no other knob exists."""
    v = hs.spread_kernel_t(s, lam, d)
    assert hs.spread_kernel_t(c * s, c * lam, d) * c ** (d - 1) == pytest.approx(
        v, rel=1e-8
    )


def test_absorption_probability_against_kernel_mass():
    """Radial CDF by incomplete beta versus direct integration of the kernel."""
    lam, r = 1.3, 0.9
    flat, _ = integrate.quad(
        lambda s: hs.spread_kernel_t(s, lam, 2), -r, r, points=[0.0], limit=200
    )
    assert hs.absorption_probability_disk(r, lam, 2) == pytest.approx(flat, abs=1e-10)
    radial, _ = integrate.quad(
        lambda s: 2 * math.pi * s * hs.spread_kernel_t(s, lam, 3),
        1e-12, r, points=[1e-6, 1e-3], limit=400,
    )
    assert hs.absorption_probability_disk(r, lam, 3) == pytest.approx(radial, abs=1e-9)


def test_absorption_probability_shape():
    assert hs.absorption_probability_disk(0.0, 1.0, 2) == 0.0
    rs = np.linspace(0.1, 40.0, 25)
    ps = [hs.absorption_probability_disk(r, 1.0, 2) for r in rs]
    assert all(b > a for a, b in zip(ps, ps[1:]))
    assert ps[-1] > 0.9
    # depends on r/Lambda only
    assert hs.absorption_probability_disk(3.0, 2.0, 3) == pytest.approx(
        hs.absorption_probability_disk(1.5, 1.0, 3), rel=1e-10
    )
    with pytest.raises(InvalidParam):
        hs.absorption_probability_disk(-1.0, 1.0, 2)


def test_harmonic_density_normalization_and_errors():
    x = [0.4, 0.8]
    mass, _ = integrate.quad(
        lambda s: hs.harmonic_density_halfspace(x, s), -np.inf, np.inf
    )
    assert mass == pytest.approx(1.0, abs=1e-9)
    # the planar half-space law is the Cauchy density centered on x[0]
    assert hs.harmonic_density_halfspace(x, 0.4) == pytest.approx(
        1.0 / (math.pi * 0.8), rel=1e-12
    )
    with pytest.raises(InvalidParam):
        hs.harmonic_density_halfspace([0.0, -1.0], 0.0)
    with pytest.raises(InvalidParam):
        hs.harmonic_density_halfspace([0.0, 0.0, 1.0], 0.0)  # s must be a 2-vector
    with pytest.raises(InvalidParam):
        hs.harmonic_density_halfspace([1.0], 0.0)


def test_spread_density_reduces_to_harmonic_at_zero():
    x = [0.3, 0.7]
    for s in (-1.0, 0.3, 2.5):
        assert hs.spread_density_halfspace(x, s, 0.0) == hs.harmonic_density_halfspace(x, s)


def test_spread_density_symmetry_and_continuity():
    x = [0.5, 1.1]
    lam = 0.8
    left = hs.spread_density_halfspace(x, 0.5 - 0.9, lam)
    right = hs.spread_density_halfspace(x, 0.5 + 0.9, lam)
    assert left == pytest.approx(right, rel=1e-10)
    # the u = 0 branch (plain Laplace integral) meets the oscillatory branch
    center = hs.spread_density_halfspace(x, 0.5, lam)
    near = hs.spread_density_halfspace(x, 0.5 + 1e-7, lam)
    assert center == pytest.approx(near, rel=1e-5)


def test_spread_density_mass_and_spreading():
    x = [0.0, 0.6]
    lam = 0.9
    mass, _ = integrate.quad(
        lambda s: hs.spread_density_halfspace(x, s, lam), -np.inf, np.inf
    )
    assert mass == pytest.approx(1.0, abs=1e-7)
    # partial reflection spreads mass away from the nearest point
    assert hs.spread_density_halfspace(x, 0.0, lam) < hs.harmonic_density_halfspace(x, 0.0)


def test_spread_density_guards():
    with pytest.raises(SlowConvergence):
        hs.spread_density_halfspace([0.0, 1e-9], 0.0, 1.0)
    with pytest.raises(InvalidParam):
        hs.spread_density_halfspace([0.0, 0.0, 1.0], 0.0, 1.0)
    with pytest.raises(InvalidParam):
        hs.spread_density_halfspace([0.0, -0.1], 0.0, 1.0)
    with pytest.raises(InvalidParam):
        hs.spread_density_halfspace([0.0, 1.0], 0.0, -1.0)
