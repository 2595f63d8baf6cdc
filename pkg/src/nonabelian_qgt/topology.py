"""Integer invariants of the degenerate doublet: Chern number, Euler class,
monopole charge, Wilson loops with their windings, and mass sweeps.

Riemann sums run on half-cell-offset grids, so samples never land on the
high-symmetry momenta or on the sphere poles. The link-overlap (plaquette)
construction serves as an exactly quantized oracle.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import GapClosed, GaugeError, ResolutionError, ValidationError
from .models import hamiltonian
from .qgt import bz_axis, geometry_grid, resolve_gauge
from .spectral import batch_eigensystem

GAP_MIN = 1e-3
SIGN_ZERO = 1e-12
WINDING_RESIDUAL = 0.1
UNWRAP_LIMIT = 0.5 * np.pi
CHERN_METHODS = ("curvature_sum", "metric_sign", "plaquette_oracle")
EULER_METHODS = ("curvature_sum", "metric_sign")


@dataclass(frozen=True)
class InvariantResult:
    value: float
    grid: tuple
    method: str
    rounded: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rounded", int(np.round(self.value)))


@dataclass(frozen=True)
class WilsonResult:
    kx_samples: np.ndarray
    eigenphases: np.ndarray  # (N, 2), each in (-pi, pi]
    winding: int
    transition: np.ndarray = None  # theta(kx) for real-gauge loops


def _signed(x):
    return np.where(np.abs(x) < SIGN_ZERO, 0.0, np.sign(x))


def _slice(kz, n):
    ks = bz_axis(n)
    kx, ky = np.meshgrid(ks, ks, indexing="ij")
    return np.stack([kx, ky, np.full_like(kx, kz)], axis=-1)


def _require_gap(e, what):
    gap = 2.0 * float(np.min(e))
    if gap < GAP_MIN:
        raise GapClosed(f"{what} is not gapped (minimum gap {gap:.2e} < {GAP_MIN:.0e})")


def _lattice(spec):
    if spec.is_sphere:
        raise ValidationError(f"{spec.family} is sphere-parametrized; use monopole_charge")


def _link_det(a, b):
    """det(a^dag b) for frames (..., 4, 2)."""
    return np.linalg.det(np.einsum("...ai,...aj->...ij", np.conj(a), b))


def plaquette_flux(frames):
    """Sum of plaquette phases of a periodic (N, N, 4, 2) frame field.

    Returns the total flux divided by -2 pi, which equals the curvature
    integral (1/2 pi) sum Tr F in this package's sign convention.
    """
    ux = _link_det(frames, np.roll(frames, -1, axis=0))
    uy = _link_det(frames, np.roll(frames, -1, axis=1))
    loop = ux * np.roll(uy, -1, axis=0) * np.conj(np.roll(ux, -1, axis=1)) * np.conj(uy)
    return -float(np.sum(np.angle(loop))) / (2 * np.pi)


def chern_number(spec, kz=0.0, grid=201, method="curvature_sum"):
    """First Chern number of the (kx, ky) slice at ``kz``."""
    _lattice(spec)
    if method not in CHERN_METHODS:
        raise ValidationError(f"method must be one of {CHERN_METHODS}")
    n = int(grid)
    pts = _slice(kz, n)
    cell = (2 * np.pi / n) ** 2
    if method == "plaquette_oracle":
        e, frames, _, _ = batch_eigensystem(hamiltonian(spec, pts))
        _require_gap(e, "slice")
        return InvariantResult(plaquette_flux(frames), (n, n), method)
    geo = geometry_grid(spec, pts, 0, 1)
    _require_gap(geo["e"], "slice")
    if method == "curvature_sum":
        dens = geo["tr_f"]
    else:
        dens = _signed(geo["tr_f"]) * np.sqrt(np.maximum(geo["det_g_mat"], 0.0))
    return InvariantResult(float(np.sum(dens) * cell / (2 * np.pi)), (n, n), method)


def euler_class(spec, kz=0.0, grid=201, method="curvature_sum"):
    """Euler class of the real C2T doublet on the (kx, ky) slice."""
    _lattice(spec)
    if not spec.is_c2t:
        raise GaugeError("Euler class needs a real (C2T) doublet")
    if method not in EULER_METHODS:
        raise ValidationError(f"method must be one of {EULER_METHODS}")
    n = int(grid)
    geo = geometry_grid(spec, _slice(kz, n), 0, 1, "real_orthogonal")
    _require_gap(geo["e"], "slice")
    if method == "curvature_sum":
        dens = geo["eu"]
    else:
        dens = _signed(geo["eu"]) * np.sqrt(np.maximum(geo["det_g_mat"], 0.0)) / 2.0
    cell = (2 * np.pi / n) ** 2
    return InvariantResult(float(np.sum(dens) * cell / (2 * np.pi)), (n, n), method)


def sphere_grid(nt, nphi):
    th = (np.arange(nt) + 0.5) * np.pi / nt
    ph = (np.arange(nphi) + 0.5) * 2 * np.pi / nphi
    a, b = np.meshgrid(th, ph, indexing="ij")
    return np.stack([a, b], axis=-1)


def monopole_charge(spec, grid=(200, 400), method="curvature_sum"):
    """Chern charge (CP) or Euler charge (C2T) on the sphere of a sphere family."""
    if not spec.is_sphere:
        raise ValidationError(f"{spec.family} is not sphere-parametrized")
    if method not in EULER_METHODS:
        raise ValidationError(f"method must be one of {EULER_METHODS}")
    nt, nphi = grid
    geo = geometry_grid(spec, sphere_grid(nt, nphi), 0, 1)
    root = np.sqrt(np.maximum(geo["det_g_mat"], 0.0))
    if spec.is_c2t:
        dens = geo["eu"] if method == "curvature_sum" else _signed(geo["eu"]) * root / 2.0
    else:
        dens = geo["tr_f"] if method == "curvature_sum" else _signed(geo["tr_f"]) * root
    cell = (np.pi / nt) * (2 * np.pi / nphi)
    return InvariantResult(float(np.sum(dens) * cell / (2 * np.pi)), (nt, nphi), method)


def _polar(m):
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def wilson_loop(spec, kz, kx, n_ky=400, real_gauge=None):
    """Path-ordered product W = M_0 M_1 ... M_{N-1} of unitarized links along ky."""
    _lattice(spec)
    if real_gauge is None:
        real_gauge = spec.is_c2t
    gauge = "real_orthogonal" if real_gauge else "complex_phase"
    gauge, orientation = resolve_gauge(spec, gauge)
    if real_gauge and not spec.is_c2t:
        raise GaugeError("real-gauge Wilson loop needs a C2T model")
    n = int(n_ky)
    ky = -np.pi + np.arange(n) * (2 * np.pi / n)
    pts = np.stack([np.full(n, kx), ky, np.full(n, kz)], axis=-1)
    e, frames, _, _ = batch_eigensystem(hamiltonian(spec, pts), gauge, orientation)
    _require_gap(e, "Wilson path")
    nxt = np.roll(frames, -1, axis=0)
    links = _polar(np.einsum("lai,laj->lij", np.conj(frames), nxt))
    w = np.eye(2, dtype=complex)
    for m in links:
        w = w @ m
    if real_gauge:
        w = w.real
    return w


def transition_angle(w):
    """theta with W = exp(-i sigma_2 theta) = [[cos, -sin], [sin, cos]]."""
    return float(np.arctan2(w[1, 0], w[0, 0]))


def _unwrap_checked(phases):
    jumps = np.angle(np.exp(1j * np.diff(phases)))
    if np.any(np.abs(jumps) > UNWRAP_LIMIT):
        raise ResolutionError("Wilson phase jumps too large between neighbors; increase kx sampling")
    return np.concatenate([[phases[0]], phases[0] + np.cumsum(jumps)])


def _track(eig):
    """Order the two eigenphases of each sample to follow continuous branches."""
    out = eig.copy()
    for i in range(1, len(out)):
        prev = out[i - 1]
        cur = out[i]
        keep = np.sum(np.abs(np.angle(np.exp(1j * (cur - prev)))))
        swap = np.sum(np.abs(np.angle(np.exp(1j * (cur[::-1] - prev)))))
        if swap < keep:
            out[i] = cur[::-1]
    return out


def wilson_spectrum(spec, kz=0.0, n_kx=121, n_ky=400, real_gauge=None):
    """Wilson-loop eigenphases over kx in [-pi, pi] with their winding."""
    if real_gauge is None:
        real_gauge = spec.is_c2t
    kxs = np.linspace(-np.pi, np.pi, int(n_kx))
    loops = [wilson_loop(spec, kz, kx, n_ky, real_gauge) for kx in kxs]
    eig = np.array([np.sort(np.angle(np.linalg.eigvals(w))) for w in loops])
    theta = np.array([transition_angle(w) for w in loops]) if real_gauge else None
    res = WilsonResult(kxs, _track(eig), 0, theta)
    return WilsonResult(kxs, res.eigenphases, winding_number(res), theta)


def winding_number(w):
    """Net winding of the Wannier-center phase -arg(lambda_W) over the kx cycle.

    Real-gauge loops use the transition angle theta(kx) (W = exp(-i sigma_2
    theta), so the Wannier phases are -+theta); complex loops use a
    continuously tracked eigenphase branch. The total is rounded and
    rejected when it is further than 0.1 from an integer. With the
    Wannier-center sign, CP windings equal C/2 and C2T windings equal chi.
    """
    if len(w.kx_samples) < 100:
        raise ResolutionError("at least 100 kx samples are needed for a reliable winding")
    if w.transition is not None:
        total = _unwrap_checked(np.asarray(w.transition))
        raw = -(total[-1] - total[0]) / (2 * np.pi)
    else:
        branches = [_unwrap_checked(w.eigenphases[:, b]) for b in range(2)]
        per = [(b[-1] - b[0]) / (2 * np.pi) for b in branches]
        if abs(per[0] - per[1]) > WINDING_RESIDUAL:
            raise ResolutionError(f"eigenphase branches wind differently: {per}")
        raw = -0.5 * (per[0] + per[1])
    k = int(np.round(raw))
    if abs(raw - k) > WINDING_RESIDUAL:
        raise ResolutionError(f"winding {raw:.3f} is not close to an integer")
    return k


def default_masses(lo=-4.0, hi=4.0, step=0.1):
    """Masses on a step grid offset by half a step from the integers."""
    return np.round(np.arange(lo + 0.5 * step, hi, step), 10)


def phase_sweep(spec, masses=None, kz=0.0, grid=101):
    """Invariant versus mass: Chern plaquette value (CP) or Euler sum (C2T)."""
    _lattice(spec)
    masses = default_masses() if masses is None else np.asarray(masses, dtype=float)
    rows = []
    for m in masses:
        s = spec.replace(mass=float(m))
        res = euler_class(s, kz, grid) if spec.is_c2t else chern_number(s, kz, grid, "plaquette_oracle")
        rows.append((float(m), res.value, res.rounded))
    return rows


def transitions(rows):
    """Mass midpoints where the rounded invariant changes between neighbors."""
    out = []
    for (m0, _, r0), (m1, _, r1) in zip(rows, rows[1:]):
        if r0 != r1:
            out.append(0.5 * (m0 + m1))
    return out
