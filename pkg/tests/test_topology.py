import numpy as np
import pytest

from nonabelian_qgt.errors import GapClosed, GaugeError, MonopoleProximity, ResolutionError, ValidationError
from nonabelian_qgt.models import ModelSpec
from nonabelian_qgt.topology import (WilsonResult, chern_number, default_masses, euler_class, monopole_charge,
                                     phase_sweep, transition_angle, transitions, wilson_loop, wilson_spectrum,
                                     winding_number)


@pytest.mark.parametrize("n", [1, 2])
def test_chern_routes_agree(n):
    spec = ModelSpec("cp_lattice", n=n)
    vals = [chern_number(spec, 0.0, 81, m).value for m in ("curvature_sum", "metric_sign", "plaquette_oracle")]
    assert np.allclose(vals, -2 * n, atol=0.05)


def test_plaquette_is_integer_even_on_coarse_grid():
    res = chern_number(ModelSpec("cp_lattice", n=2), 0.3, 15, "plaquette_oracle")
    assert abs(res.value - round(res.value)) < 1e-10
    assert res.rounded == -4


def test_trivial_phase():
    assert chern_number(ModelSpec("cp_lattice", mass=4.0), 0.0, 41).rounded == 0
    assert euler_class(ModelSpec("c2t_lattice", mass=4.0), 0.0, 41).rounded == 0


def test_gapless_slice_raises():
    # M = 3 closes the gap at k = 0, which the odd half-offset grid samples exactly
    with pytest.raises(MonopoleProximity):
        chern_number(ModelSpec("cp_lattice", mass=3.0), 0.0, 21)
    # just off the transition the gap is finite but below the invariant threshold
    with pytest.raises(GapClosed):
        chern_number(ModelSpec("cp_lattice", mass=3.0 + 1e-5), 0.0, 21, "plaquette_oracle")


def test_euler_class_values():
    for n in (1, 2):
        spec = ModelSpec("c2t_lattice", n=n)
        for m in ("curvature_sum", "metric_sign"):
            assert euler_class(spec, 0.0, 81, m).value == pytest.approx(n, abs=0.05)


def test_euler_needs_c2t():
    with pytest.raises(GaugeError):
        euler_class(ModelSpec("cp_lattice"))
    with pytest.raises(ValidationError):
        chern_number(ModelSpec("cp_sphere_plus"))


@pytest.mark.parametrize("family,sign", [("cp_sphere_plus", -2), ("cp_sphere_minus", 2),
                                         ("c2t_sphere_plus", 1), ("c2t_sphere_minus", -1)])
def test_monopole_charges(family, sign):
    for n in (1, 2):
        spec = ModelSpec(family, n=n)
        assert monopole_charge(spec, (60, 120)).value == pytest.approx(sign * n, abs=0.01)
        flipped = spec.replace(alpha=(1, 1, -1))
        assert monopole_charge(flipped, (60, 120), "metric_sign").value == pytest.approx(-sign * n, abs=0.01)


def test_wilson_loop_unitary_and_real():
    w = wilson_loop(ModelSpec("cp_lattice"), 0.0, 0.7, 200)
    assert abs(abs(np.linalg.det(w)) - 1) < 1e-12
    r = wilson_loop(ModelSpec("c2t_lattice"), 0.0, 0.7, 200)
    assert r.dtype.kind == "f"
    assert np.allclose(r.T @ r, np.eye(2), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
    th = transition_angle(r)
    assert np.allclose(r, [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]], atol=1e-12)


def test_real_wilson_needs_c2t():
    with pytest.raises(GaugeError):
        wilson_loop(ModelSpec("cp_lattice"), 0.0, 0.1, 50, real_gauge=True)


@pytest.mark.parametrize("family,n,expected", [("cp_lattice", 1, -1), ("c2t_lattice", 1, 1), ("c2t_lattice", 2, 2)])
def test_windings(family, n, expected):
    res = wilson_spectrum(ModelSpec(family, n=n), 0.0, 121, 200)
    assert res.winding == expected


def test_winding_needs_samples():
    res = WilsonResult(np.linspace(-np.pi, np.pi, 50), np.zeros((50, 2)), 0)
    with pytest.raises(ResolutionError):
        winding_number(res)


def test_winding_rejects_large_jumps():
    kx = np.linspace(-np.pi, np.pi, 120)
    theta = np.where(kx > 0, 2.0, 0.0)
    with pytest.raises(ResolutionError):
        winding_number(WilsonResult(kx, np.zeros((120, 2)), 0, theta))


def test_default_masses_avoid_integers():
    m = default_masses()
    assert np.min(np.abs(m - np.round(m))) == pytest.approx(0.05)
    assert m[0] > -4 and m[-1] < 4


def test_sweep_transitions():
    rows = phase_sweep(ModelSpec("cp_lattice"), default_masses(-2.0, 4.0, 0.5), grid=41)
    assert transitions(rows) == pytest.approx([-1.0, 1.0, 3.0])
    assert {r[2] for r in rows if abs(r[0]) > 3.1} == {0}
