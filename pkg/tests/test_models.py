import json

import numpy as np
import pytest

from conftest import random_k
from nonabelian_qgt.errors import ValidationError
from nonabelian_qgt.models import (FAMILIES, ModelSpec, SphereCoords, atomic_equivalence, bloch_vector,
                                   d_hamiltonian, dispersion, hamiltonian, monopole_positions,
                                   sphere_embed, sphere_momentum)
from nonabelian_qgt.clifford import CP_GAMMAS


def test_spec_validation():
    for bad in ({"family": "nope"}, {"family": "cp_lattice", "n": 0}, {"family": "cp_lattice", "alpha": (1, 2, 1)},
                {"family": "cp_lattice", "n": 1.5}, {"family": "cp_sphere_plus", "radius": 0.0}):
        with pytest.raises(ValidationError):
            ModelSpec(**bad)


def test_spec_json_roundtrip():
    spec = ModelSpec("c2t_lattice", n=2, alpha=(1, -1, 1), mass=-2.0)
    text = spec.to_json()
    assert json.loads(text)["family"] == "c2t_lattice"
    assert ModelSpec.from_json(text) == spec


def test_monopole_points_are_gapless():
    cp = ModelSpec("cp_lattice", mass=2.0)
    assert np.max(np.abs(hamiltonian(cp, (0.0, 0.0, np.pi / 2)))) < 1e-15
    assert np.max(np.abs(hamiltonian(cp.replace(mass=0.0), (np.pi, 0.0, np.pi / 2)))) < 1e-15
    assert np.max(np.abs(hamiltonian(ModelSpec("cp_lattice", mass=3.0), (0.0, 0.0, 0.0)))) < 1e-15
    c2t = ModelSpec("c2t_lattice", mass=-2.0)
    assert np.max(np.abs(hamiltonian(c2t, (np.pi, np.pi, -np.pi / 2)))) < 1e-15


def test_velocity_at_gamma_is_gamma_x():
    spec = ModelSpec("cp_lattice", mass=3.0)
    assert np.allclose(d_hamiltonian(spec, (0.0, 0.0, 0.0), "kx"), CP_GAMMAS[0], atol=1e-15)


def test_dispersion_identity(lattice_spec, rng):
    ks = rng.uniform(-np.pi, np.pi, (1000, 3))
    e = np.linalg.eigvalsh(hamiltonian(lattice_spec, ks))
    ref = dispersion(lattice_spec, ks)
    assert np.max(np.abs(e[:, 2] - ref)) < 1e-10
    assert np.max(np.abs(e[:, 0] + ref)) < 1e-10
    assert np.max(np.abs(e[:, 1] - e[:, 0])) < 1e-10


@pytest.mark.parametrize("family", FAMILIES)
def test_gradient_is_analytic(family, rng):
    spec = ModelSpec(family, n=2, alpha=(1, -1, 1))
    npar = len(spec.param_names)
    pt = rng.uniform(0.3, 1.2, 3)[:npar] if spec.is_sphere else rng.uniform(-np.pi, np.pi, 3)
    grad = bloch_vector(spec, pt).grad
    errs = []
    for eps in (1e-2, 1e-3):
        fd = np.zeros_like(grad)
        for m in range(npar):
            s = np.zeros(npar)
            s[m] = eps
            fd[:, m] = (bloch_vector(spec, pt + s).d - bloch_vector(spec, pt - s).d) / (2 * eps)
        errs.append(np.max(np.abs(fd - grad)))
    if errs[0] > 1e-12:
        assert np.log10(errs[0] / errs[1]) >= 1.9


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_cp_effective_matches_lattice_expansion(branch):
    lat = ModelSpec("cp_lattice", mass=2.0)
    eff = ModelSpec(f"cp_effective_{branch}")
    k0 = np.array([0.0, 0.0, np.pi / 2 if branch == "plus" else -np.pi / 2])
    q = np.array([0.3, -0.2, 0.25])
    errs = [np.max(np.abs(hamiltonian(lat, k0 + s * q) - hamiltonian(eff, k0 + s * q))) for s in (1e-2, 1e-3)]
    # the remainder is quadratic in |q|
    assert errs[0] / errs[1] == pytest.approx(100.0, rel=0.05)


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_c2t_effective_matches_lattice_expansion(branch):
    lat = ModelSpec("c2t_lattice", mass=-2.0)
    eff = ModelSpec(f"c2t_effective_{branch}")
    k0 = np.array([np.pi, np.pi, np.pi / 2 if branch == "plus" else -np.pi / 2])
    q = np.array([0.3, -0.2, 0.25])
    errs = [np.max(np.abs(hamiltonian(lat, k0 + s * q) - hamiltonian(eff, k0 + s * q))) for s in (1e-2, 1e-3)]
    assert errs[0] / errs[1] == pytest.approx(100.0, rel=0.05)


def test_sphere_direction_independent_of_radius():
    spec = ModelSpec("cp_sphere_plus", n=2)
    a = sphere_embed(spec, SphereCoords(0.7, 1.1, q=0.1)).unit()
    b = sphere_embed(spec, SphereCoords(0.7, 1.1, q=2.5)).unit()
    assert np.allclose(a, b, atol=1e-15)
    assert sphere_embed(spec, SphereCoords(0.7, 1.1, q=0.1)).norm == pytest.approx(0.1)


def test_sphere_matches_effective_model_on_literal_sphere():
    """The n = 1 sphere family is the effective Hamiltonian on |q| = q0, up to d_hat."""
    eff = ModelSpec("cp_effective_plus")
    sph = ModelSpec("cp_sphere_plus")
    for th, ph in ((0.4, 0.3), (1.3, 2.2), (2.7, 5.0)):
        qx, qy, qz = sphere_momentum(th, ph, 0.1, 1)
        d_eff = bloch_vector(eff, (qx, qy, qz + np.pi / 2)).unit()
        assert np.allclose(d_eff, bloch_vector(sph, (th, ph)).unit(), atol=1e-12)


def test_sphere_coords_validation():
    for bad in ((0.0, 1.0), (4.0, 1.0), (1.0, 1.0, -1.0)):
        with pytest.raises(ValidationError):
            SphereCoords(*bad)


def test_monopole_catalog_m1():
    pts = monopole_positions(1.0)
    assert len(pts) == 3
    spec = ModelSpec("cp_lattice", mass=1.0)
    for p in pts:
        assert np.max(np.abs(hamiltonian(spec, p))) < 1e-12


def test_monopole_catalog_on_grid():
    """Gap minima of a coarse scan sit next to the catalogued points."""
    spec = ModelSpec("cp_lattice", mass=2.0)
    ax = np.linspace(-np.pi, np.pi, 41)
    kx, ky, kz = np.meshgrid(ax, ax, ax, indexing="ij")
    e = dispersion(spec, np.stack([kx, ky, kz], axis=-1))
    bound = 2 * np.pi / 40 * 2.0
    for p in monopole_positions(2.0):
        idx = np.unravel_index(np.argmin(e + 10 * (np.abs(kz - p[2]) > 0.3)), e.shape)
        assert e[idx] < bound


def test_atomic_c2t_matches(rng):
    for d in rng.normal(size=(20, 3)):
        assert atomic_equivalence(d, "c2t")[0] < 1e-12


def test_atomic_cp_matches_with_flipped_y_sign(rng):
    assert atomic_equivalence((1.0, 0.0, 0.0), "cp")[0] < 1e-12
    for d in rng.normal(size=(20, 3)):
        assert atomic_equivalence(d, "cp", alpha=(1, -1, 1))[0] < 1e-12


def test_atomic_kind_validation():
    with pytest.raises(ValidationError):
        atomic_equivalence((1, 0, 0), "xyz")


def test_hamiltonian_is_hermitian_everywhere(lattice_spec, rng):
    h = hamiltonian(lattice_spec, random_k(rng, 200))
    assert np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) == 0.0
