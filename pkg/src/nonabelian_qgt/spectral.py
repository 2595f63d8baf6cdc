"""Degenerate eigensystems, deterministic gauge fixing, and a dense eigensolver.

Ground and excited pairs come from the spectral projectors
P_-+ = (1 -+ H/e) / 2 with e = sqrt(Tr H^2 / 4), followed by
column-pivoted Gram-Schmidt. Everything is vectorized over leading
batch axes; the single-point functions call the batched ones so the two
paths are bitwise identical.
"""
from dataclasses import dataclass, replace

import numpy as np

from .clifford import hermiticity_residual
from .errors import GaugeError, MonopoleProximity, ValidationError

GAP_FLOOR = 1e-9
REAL_TOL = 1e-12
# Sign s in psi_2 = s J psi_1; fixed so the + branch C2T monopole has q = +n.
ORIENTATION_SIGN = 1.0
GAUGES = ("complex_phase", "real_orthogonal")


@dataclass(frozen=True)
class DegenerateSubspace:
    e_minus: float
    e_plus: float
    ground: np.ndarray  # (4, 2), columns psi_1, psi_2
    excited: np.ndarray  # (4, 2)
    projector: np.ndarray  # (4, 4), ground-state projector
    gauge: str = "complex_phase"


def half_gap(h):
    """e = sqrt(Tr H^2 / 4) over a batch of 4x4 matrices."""
    h = np.asarray(h)
    return np.sqrt(np.einsum("...ij,...ji->...", h, h).real / 4.0)


def projectors(h, e):
    eye = np.eye(h.shape[-1])
    hn = h / e[..., None, None]
    return 0.5 * (eye - hn), 0.5 * (eye + hn)


def _take_column(p, j):
    idx = np.broadcast_to(j[..., None, None], p.shape[:-1] + (1,))
    return np.take_along_axis(p, idx, axis=-1)[..., 0]


def _take(v, j):
    return np.take_along_axis(v, j[..., None], axis=-1)[..., 0]


def _pivot_pair(p):
    """Two orthonormal columns spanning a rank-2 projector, column pivoted."""
    d1 = np.einsum("...ii->...i", p).real
    j1 = np.argmax(d1, axis=-1)
    v1 = _take_column(p, j1) / np.sqrt(_take(d1, j1))[..., None]
    p2 = p - v1[..., :, None] * np.conj(v1[..., None, :])
    d2 = np.einsum("...ii->...i", p2).real
    j2 = np.argmax(d2, axis=-1)
    v2 = _take_column(p2, j2) / np.sqrt(np.maximum(_take(d2, j2), 1e-300))[..., None]
    return v1, v2, j1, j2


def _phase_fix(v):
    """Make the largest-modulus component real-positive (lowest index on ties)."""
    j = np.argmax(np.abs(v), axis=-1)
    c = _take(v, j)
    return v * (np.abs(c) / c)[..., None]


def _sign_fix(v):
    j = np.argmax(np.abs(v), axis=-1)
    return v * np.sign(_take(v, j))[..., None]


def frame_from_projector(p, gauge="complex_phase", orientation=None):
    """Gauge-fixed orthonormal pair (..., 4, 2) spanning projector ``p``."""
    if gauge not in GAUGES:
        raise ValidationError(f"unknown gauge {gauge!r}; expected one of {GAUGES}")
    p = np.asarray(p)
    if gauge == "complex_phase":
        v1, v2, _, _ = _pivot_pair(p)
        return np.stack([_phase_fix(v1), _phase_fix(v2)], axis=-1)
    if np.max(np.abs(p.imag), initial=0.0) > 1e-10:
        raise GaugeError("real_orthogonal gauge requested for a complex subspace")
    pr = np.ascontiguousarray(p.real)
    v1, v2, j1, j2 = _pivot_pair(pr)
    v1 = _sign_fix(v1)
    if orientation is not None:
        v2 = ORIENTATION_SIGN * (v1 @ np.asarray(orientation).T)
        leak = np.max(np.abs(np.einsum("...ij,...j->...i", pr, v2) - v2), initial=0.0)
        if leak > 1e-8:
            raise GaugeError("orientation form does not preserve the ground plane")
    else:
        v2 = _sign_fix(v2)
        minor = _take(v1, j1) * _take(v2, j2) - _take(v1, j2) * _take(v2, j1)
        v2 = v2 * np.where(minor < 0, -1.0, 1.0)[..., None]
    return np.stack([v1, v2], axis=-1).astype(complex)


def batch_eigensystem(h, gauge="complex_phase", orientation=None, gap_floor=GAP_FLOOR):
    """Batched ground data: (e, ground frames (...,4,2), P_-, P_+).

    Raises ``MonopoleProximity`` if any e falls below ``gap_floor``.
    """
    h = np.asarray(h, dtype=complex)
    e = half_gap(h)
    if np.any(e < gap_floor):
        raise MonopoleProximity(f"gap {2 * np.min(e):.3e} below floor; state undefined at a band touching")
    pm, pp = projectors(h, e)
    return e, frame_from_projector(pm, gauge, orientation), pm, pp


def eigensystem(h, gap_floor=GAP_FLOOR, gauge="complex_phase", orientation=None):
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise ValidationError("eigensystem expects a single 4x4 matrix")
    e = float(half_gap(h))
    if e < gap_floor:
        raise MonopoleProximity(f"half gap {e:.3e} below floor {gap_floor:.1e}")
    flat = float(np.max(np.abs(h @ h - e * e * np.eye(4))))
    if flat > 1e-8 * max(1.0, e * e):
        raise ValidationError("spectrum is not of the form {-e, -e, +e, +e}")
    pm, pp = projectors(h, np.asarray(e))
    ground = frame_from_projector(pm, gauge, orientation)
    excited = frame_from_projector(pp, "complex_phase")
    return DegenerateSubspace(-e, e, ground, excited, pm, gauge)


def fix_gauge(sub, mode, orientation=None):
    """Rebuild the ground frame of ``sub`` in gauge ``mode``.

    The frame is a pure function of the projector, so repeated calls are
    bitwise identical. ``orientation`` (a real antisymmetric form commuting
    with H) sets psi_2 = J psi_1 in the real gauge; without it the pivot
    2x2 minor is made positive.
    """
    ground = frame_from_projector(sub.projector, mode, orientation)
    excited = sub.excited
    if mode == "real_orthogonal":
        excited = frame_from_projector(np.eye(4) - sub.projector, mode)
    return replace(sub, ground=ground, excited=excited, gauge=mode)


def dense_eigh(m, herm_tol=1e-10, max_dim=1024):
    """Ascending eigenvalues and eigenvectors of a Hermitian matrix (LAPACK)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("dense_eigh expects a square matrix")
    if m.shape[0] > max_dim:
        raise ValidationError(f"dimension {m.shape[0]} exceeds cap {max_dim}")
    if hermiticity_residual(m) > herm_tol * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise ValidationError("matrix is not Hermitian")
    return np.linalg.eigh(m)
