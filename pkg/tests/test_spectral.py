import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_k
from nonabelian_qgt.clifford import C2T_ORIENTATION, CP_GAMMAS
from nonabelian_qgt.errors import GaugeError, MonopoleProximity, ValidationError
from nonabelian_qgt.models import ModelSpec, hamiltonian
from nonabelian_qgt.spectral import batch_eigensystem, dense_eigh, eigensystem, fix_gauge

angles = st.floats(-np.pi, np.pi, allow_nan=False)


def test_projector_of_single_gamma():
    sub = eigensystem(CP_GAMMAS[2])
    assert np.allclose(sub.projector, (np.eye(4) - CP_GAMMAS[2]) / 2, atol=1e-15)
    assert sub.e_minus == -1.0 and sub.e_plus == 1.0


def test_monopole_point_raises():
    spec = ModelSpec("cp_lattice")
    with pytest.raises(MonopoleProximity):
        eigensystem(hamiltonian(spec, (0.0, 0.0, np.pi / 2)))


def test_non_clifford_spectrum_rejected():
    with pytest.raises(ValidationError):
        eigensystem(np.diag([-1.0, -0.5, 0.5, 1.0]))


def test_real_gauge_on_complex_subspace_raises():
    sub = eigensystem(hamiltonian(ModelSpec("cp_lattice"), (0.3, 0.4, 0.1)))
    with pytest.raises(GaugeError):
        fix_gauge(sub, "real_orthogonal")


def test_unknown_gauge():
    sub = eigensystem(CP_GAMMAS[0])
    with pytest.raises(ValidationError):
        fix_gauge(sub, "axial")


@settings(max_examples=60, deadline=None)
@given(angles, angles, st.floats(-1.2, 1.2))
def test_ground_frame_orthonormal_and_in_subspace(kx, ky, kz):
    for fam in ("cp_lattice", "c2t_lattice"):
        spec = ModelSpec(fam, n=2)
        h = hamiltonian(spec, (kx, ky, kz))
        sub = eigensystem(h)
        v = sub.ground
        assert np.allclose(np.conj(v.T) @ v, np.eye(2), atol=1e-12)
        assert np.allclose(h @ v, sub.e_minus * v, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(angles, angles, st.floats(-1.2, 1.2))
def test_real_gauge_is_real_and_oriented(kx, ky, kz):
    spec = ModelSpec("c2t_lattice")
    sub = fix_gauge(eigensystem(hamiltonian(spec, (kx, ky, kz))), "real_orthogonal", C2T_ORIENTATION)
    v = sub.ground
    assert np.max(np.abs(v.imag)) == 0.0
    assert np.allclose(v[:, 1].real, C2T_ORIENTATION @ v[:, 0].real, atol=1e-12)


def test_gauge_fixing_is_deterministic(rng):
    spec = ModelSpec("cp_lattice", n=2)
    h = hamiltonian(spec, random_k(rng, 50))
    a = batch_eigensystem(h)[1]
    b = np.array([eigensystem(m).ground for m in h])
    assert np.array_equal(a, b)
    sub = eigensystem(h[0])
    assert np.array_equal(fix_gauge(sub, "complex_phase").ground, fix_gauge(sub, "complex_phase").ground)


def test_frame_changes_only_by_rotation_along_a_path():
    """Between neighbours the frame may jump at pivot switches, but only within SO(2)."""
    spec = ModelSpec("c2t_lattice")
    ks = np.stack([np.linspace(-0.5, 0.5, 201), np.full(201, 0.4), np.zeros(201)], axis=-1)
    _, v, _, _ = batch_eigensystem(hamiltonian(spec, ks), "real_orthogonal", C2T_ORIENTATION)
    links = np.einsum("kai,kaj->kij", v[:-1].real, v[1:].real)
    assert np.allclose(np.linalg.det(links), 1.0, atol=1e-3)


def test_dense_eigh_against_reference(rng):
    a = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
    m = a + np.conj(a.T)
    e, v = dense_eigh(m)
    assert np.all(np.diff(e) >= 0)
    assert np.allclose(m @ v, v * e, atol=1e-10)
    assert np.allclose(np.conj(v.T) @ v, np.eye(40), atol=1e-12)


def test_dense_eigh_guards():
    with pytest.raises(ValidationError):
        dense_eigh(np.triu(np.ones((3, 3))))
    with pytest.raises(ValidationError):
        dense_eigh(np.eye(8), max_dim=4)
    with pytest.raises(ValidationError):
        dense_eigh(np.ones((2, 3)))
