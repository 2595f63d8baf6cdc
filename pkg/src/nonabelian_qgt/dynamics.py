"""Non-adiabatic extraction of the QGT from simulated quadratic ramps.

A ramp moves the ramped parameters as lambda(t) = start + v^2 t^2 / 2 pi
for 0 <= t <= t_f = pi / v, so the velocity grows linearly from zero to v
and the total travel is v^2 t_f^2 / 2 pi = pi / 2 whatever v is. Ramps are
placed so that they land on the target point at t_f.

At t_f the generalized force M_nu = <d_nu H> deviates from its adiabatic
value by v F_{mu nu}^{ii}, and the energy variance equals
sum_ab g_ab lambda_dot_a lambda_dot_b to leading order. Units: hbar = 1,
i d_t psi = H psi.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import StepSizeError, ValidationError
from .models import d_hamiltonian, hamiltonian
from .qgt import bz_axis, qgt_tensor, resolve_gauge, split_qgt
from .spectral import batch_eigensystem

DEFAULT_DT = 1e-3
NORM_BUDGET = 1e-8
RAMP_TRAVEL = 0.5 * np.pi
STATES = ("1", "2", "m", "n")
_STATE_ALIASES = {
    1: "1", 2: "2", "1": "1", "2": "2", "m": "m", "n": "n",
    "plus_superposition": "m", "i_superposition": "n",
}
_COEFFS = {
    "1": np.array([1.0, 0.0], dtype=complex),
    "2": np.array([0.0, 1.0], dtype=complex),
    "m": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "n": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
}
COMPONENTS = ("11", "22", "12", "21", "mm", "nn")
DYNAMICS_CSV_HEADER = ["kx", "ky", "component", "analytic", "dynamic", "gap"]


def _state_name(which):
    try:
        return _STATE_ALIASES[which]
    except (KeyError, TypeError):
        raise ValidationError(f"unknown initial state {which!r}; expected 1, 2, m or n") from None


@dataclass(frozen=True)
class RampSchedule:
    start: tuple
    directions: tuple
    v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValidationError("ramp velocity must be positive")
        if len(self.directions) == 0:
            raise ValidationError("a ramp needs at least one direction")
        object.__setattr__(self, "start", tuple(float(x) for x in self.start))
        object.__setattr__(self, "directions", tuple(sorted({int(d) for d in self.directions})))
        if any(not 0 <= d < len(self.start) for d in self.directions):
            raise ValidationError("ramp direction outside the parameter vector")

    @property
    def t_final(self):
        return np.pi / self.v

    @property
    def unit(self):
        e = np.zeros(len(self.start))
        e[list(self.directions)] = 1.0
        return e

    def point(self, t):
        return np.asarray(self.start) + self.unit * (self.v ** 2 * t ** 2 / (2 * np.pi))

    def velocity(self, t):
        return self.unit * (self.v ** 2 * t / np.pi)

    @property
    def target(self):
        return self.point(self.t_final)

    @classmethod
    def landing_at(cls, target, directions, v):
        """Schedule that reaches ``target`` at t_f with final speed v."""
        target = np.asarray(target, dtype=float)
        start = target.copy()
        for d in set(int(x) for x in directions):
            start[d] -= RAMP_TRAVEL
        return cls(tuple(start), tuple(directions), v)


@dataclass(frozen=True)
class EvolvedState:
    psi: np.ndarray
    t: float
    norm_drift: float


@dataclass(frozen=True)
class DynamicMap:
    """Per-point dynamic and analytic values of one tensor component."""
    points: np.ndarray
    quantity: str  # "F" or "g"
    component: str
    mu: int
    nu: int
    v: float
    dt: float
    dynamic: np.ndarray  # complex
    analytic: np.ndarray  # complex
    gap: np.ndarray
    meta: dict = field(default_factory=dict)


def _pad3(points):
    points = np.asarray(points, dtype=float)
    if points.shape[-1] == 3:
        return points
    out = np.zeros(points.shape[:-1] + (3,))
    out[..., : points.shape[-1]] = points
    return out


def _initial_states(spec, points, which, gauge=None):
    gauge, orientation = resolve_gauge(spec, gauge)
    _, ground, _, _ = batch_eigensystem(hamiltonian(spec, points), gauge, orientation)
    return ground @ _COEFFS[_state_name(which)]


def prepare_initial(spec, point, which, gauge=None):
    """Gauge-fixed ground state 1 or 2, or the superpositions m = (1+2)/sqrt2, n = (1+i2)/sqrt2."""
    psi = _initial_states(spec, np.asarray(point, dtype=float), which, gauge)
    return psi / np.linalg.norm(psi)


def _nsteps(t_final, dt):
    if not 0 < dt <= 1e-3 * (1 + 1e-12):
        raise ValidationError("dt must lie in (0, 1e-3]")
    return max(1, int(math.ceil(t_final / dt - 1e-9)))


def _run(spec, starts, unit, psi0, v, dt):
    """Batched integration; every trajectory shares v and the ramp unit vector."""
    starts = _pad3(np.atleast_2d(starts))
    dirs = np.broadcast_to(_pad3(np.asarray(unit, dtype=float)), starts.shape)
    t_final = np.pi / v
    nsteps = _nsteps(t_final, dt)
    psi = _kernels.evolve_batch(spec.kernel_args, spec.gammas, starts, dirs,
                                np.atleast_2d(psi0), v, nsteps, t_final)
    drift = np.abs(np.linalg.norm(psi, axis=-1) - 1.0)
    worst = float(np.max(drift, initial=0.0))
    if worst > NORM_BUDGET:
        raise StepSizeError(f"norm drift {worst:.2e} exceeds {NORM_BUDGET:.0e}; reduce dt")
    return psi, drift, t_final


def evolve(spec, schedule, psi0, dt=DEFAULT_DT):
    """Fixed-step RK4 solution of i d_t psi = H(lambda(t)) psi over the ramp."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (4,):
        raise ValidationError("psi0 must be a 4-vector")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValidationError("psi0 must be normalized")
    npar = len(spec.param_names)
    if len(schedule.start) != npar:
        raise ValidationError(f"schedule start must have {npar} parameters")
    psi, drift, t_final = _run(spec, np.asarray(schedule.start), schedule.unit, psi0[None], schedule.v, dt)
    return EvolvedState(psi=psi[0], t=t_final, norm_drift=float(drift[0]))


def generalized_force(spec, point, psi, nu):
    """<psi|d_nu H|psi> / <psi|psi>, vectorized over leading axes."""
    dh = d_hamiltonian(spec, point, nu)
    num = np.einsum("...i,...ij,...j->...", np.conj(psi), dh, psi).real
    return num / np.einsum("...i,...i->...", np.conj(psi), psi).real


def adiabatic_force(spec, point, nu):
    """Ground-state force M^0 = Tr(P_- d_nu H) / 2 (identical for every ground state)."""
    h = hamiltonian(spec, point)
    _, _, pm, _ = batch_eigensystem(h)
    dh = d_hamiltonian(spec, point, nu)
    return 0.5 * np.einsum("...ij,...ji->...", pm, dh).real


def energy_fluctuation(spec, point, psi):
    """<H^2> - <H>^2 evaluated as ||(H - <H>) psi||^2 / <psi|psi>."""
    h = hamiltonian(spec, point)
    norm2 = np.einsum("...i,...i->...", np.conj(psi), psi).real
    hpsi = np.einsum("...ij,...j->...i", h, psi)
    mean = np.einsum("...i,...i->...", np.conj(psi), hpsi).real / norm2
    r = hpsi - mean[..., None] * psi
    return np.einsum("...i,...i->...", np.conj(r), r).real / norm2


def ground_population(spec, point, psi):
    _, _, pm, _ = batch_eigensystem(hamiltonian(spec, point))
    return np.einsum("...i,...ij,...j->...", np.conj(psi), pm, psi).real


def _final_states(spec, targets, directions, which, v, dt, gauge):
    targets = np.asarray(targets, dtype=float)
    unit = np.zeros(targets.shape[-1])
    unit[list(directions)] = 1.0
    starts = targets - RAMP_TRAVEL * unit
    psi0 = _initial_states(spec, starts, which, gauge)
    flat_starts = starts.reshape(-1, targets.shape[-1])
    psi, _, _ = _run(spec, flat_starts, unit, psi0.reshape(-1, 4), v, dt)
    return psi.reshape(targets.shape[:-1] + (4,))


def berry_diagonal(spec, targets, mu, nu, which, v, dt=DEFAULT_DT, gauge=None):
    """F_{mu nu}^{ww} = (M_nu - M_nu^0) / v from a ramp along mu."""
    psi = _final_states(spec, targets, (mu,), which, v, dt, gauge)
    return (generalized_force(spec, targets, psi, nu) - adiabatic_force(spec, targets, nu)) / v


def metric_diagonal(spec, targets, mu, nu, which, v, dt=DEFAULT_DT, gauge=None, cache=None):
    """g_{mu nu}^{ww} from energy fluctuations of single and double ramps."""
    cache = {} if cache is None else cache

    def fluct(dirs):
        key = (dirs, which)
        if key not in cache:
            psi = _final_states(spec, targets, dirs, which, v, dt, gauge)
            cache[key] = energy_fluctuation(spec, targets, psi)
        return cache[key]

    if mu == nu:
        return fluct((mu,)) / v ** 2
    g_mm = fluct((mu,)) / v ** 2
    g_nn = fluct((nu,)) / v ** 2
    both = fluct(tuple(sorted((mu, nu))))
    return (both - g_mm * v ** 2 - g_nn * v ** 2) / (2 * v ** 2)


def off_diagonal(x11, x22, xmm, xnn):
    """X^{12} from the diagonal elements in states 1, 2, m and n."""
    return (2j * xmm + 2 * xnn - (1 + 1j) * (x11 + x22)) / 2j


def _component(measure, component):
    if component not in COMPONENTS:
        raise ValidationError(f"component must be one of {COMPONENTS}")
    if component in ("11", "22", "mm", "nn"):
        return measure(component[0]).astype(complex)
    diag = {w: measure(w) for w in STATES}
    x12 = off_diagonal(diag["1"], diag["2"], diag["m"], diag["n"])
    if component == "12":
        return x12
    # X^{21} = conj(X^{12}) for Hermitian blocks
    return np.conj(x12)


def _analytic(spec, targets, mu, nu, quantity, component, gauge):
    q, e, _ = qgt_tensor(spec, targets, gauge)
    g, f = split_qgt(q[..., mu, nu, :, :])
    block = f if quantity == "F" else g
    if component in ("mm", "nn"):
        c = _COEFFS[component[0]]
        val = np.einsum("i,...ij,j->...", np.conj(c), block, c)
    else:
        val = block[..., int(component[0]) - 1, int(component[1]) - 1]
    return val, 2.0 * e


def slice_points(spec, kz=0.0, grid=41):
    """Target points: a half-cell-offset (kx, ky) grid at kz, or a (theta, phi) grid."""
    if spec.is_sphere:
        nt, nphi = (grid, 2 * grid) if np.isscalar(grid) else grid
        th = (np.arange(nt) + 0.5) * np.pi / nt
        ph = (np.arange(nphi) + 0.5) * 2 * np.pi / nphi
        a, b = np.meshgrid(th, ph, indexing="ij")
        return np.stack([a, b], axis=-1)
    n = int(grid)
    ks = bz_axis(n)
    kx, ky = np.meshgrid(ks, ks, indexing="ij")
    return np.stack([kx, ky, np.full_like(kx, kz)], axis=-1)


def extract_berry(spec, kz=0.0, grid=41, v=0.1, component="11", mu=0, nu=1,
                  dt=DEFAULT_DT, gauge=None, points=None):
    """Dynamic F_{mu nu} component on a grid, paired with its analytic value."""
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    pts = slice_points(spec, kz, grid) if points is None else np.asarray(points, dtype=float)
    dyn = _component(lambda w: berry_diagonal(spec, pts, mu, nu, w, v, dt, gauge), component)
    ana, gap = _analytic(spec, pts, mu, nu, "F", component, gauge)
    return DynamicMap(pts, "F", component, mu, nu, v, dt, dyn, ana, gap,
                      {"gauge": resolve_gauge(spec, gauge)[0]})


def extract_metric(spec, kz=0.0, grid=41, v=0.1, component="11", mu=0, nu=1,
                   dt=DEFAULT_DT, gauge=None, points=None):
    """Dynamic g_{mu nu} component on a grid, paired with its analytic value."""
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    pts = slice_points(spec, kz, grid) if points is None else np.asarray(points, dtype=float)
    cache = {}
    dyn = _component(lambda w: metric_diagonal(spec, pts, mu, nu, w, v, dt, gauge, cache), component)
    ana, gap = _analytic(spec, pts, mu, nu, "g", component, gauge)
    return DynamicMap(pts, "g", component, mu, nu, v, dt, dyn, ana, gap,
                      {"gauge": resolve_gauge(spec, gauge)[0]})


@dataclass(frozen=True)
class DynamicInvariant:
    value: float
    grid: tuple
    method: str
    rounded: int
    observable: str
    v: float
    density: np.ndarray  # per (theta, phi) cell, before the 1/2pi factor


def dynamic_invariant(spec, grid=(24, 6), v=None, observable="berry", dt=DEFAULT_DT, radius=1.0):
    """Chern number (CP) or Euler class (C2T) of a sphere family from ramp dynamics.

    ``berry`` integrates the dynamic Tr F_{theta phi} (CP) or Im F^{12}
    (C2T); ``metric`` integrates sqrt(det G) from energy fluctuations, with
    the sign of the analytic curvature. ``radius`` sets the sphere radius used
    for the simulation (``None`` keeps the spec's).
    """
    if not spec.is_sphere:
        raise ValidationError("dynamic invariants need a sphere-parametrized family")
    if observable not in ("berry", "metric"):
        raise ValidationError("observable must be 'berry' or 'metric'")
    if v is None:
        v = 0.1 if observable == "berry" else 0.01
    if radius is not None:
        spec = spec.replace(radius=float(radius))
    nt, nphi = grid
    pts = slice_points(spec, grid=(nt, nphi))
    cell = (np.pi / nt) * (2 * np.pi / nphi)
    if observable == "berry":
        if spec.is_c2t:
            dens = _component(lambda w: berry_diagonal(spec, pts, 0, 1, w, v, dt), "12").imag
        else:
            dens = berry_diagonal(spec, pts, 0, 1, "1", v, dt) + berry_diagonal(spec, pts, 0, 1, "2", v, dt)
        value = float(np.sum(dens) * cell / (2 * np.pi))
    else:
        cache1, cache2 = {}, {}
        tr = {}
        for key, (m, n) in {"tt": (0, 0), "tp": (0, 1), "pp": (1, 1)}.items():
            tr[key] = (metric_diagonal(spec, pts, m, n, "1", v, dt, cache=cache1)
                       + metric_diagonal(spec, pts, m, n, "2", v, dt, cache=cache2))
        det = 4.0 * (tr["tt"] * tr["pp"] - tr["tp"] ** 2)
        q, _, _ = qgt_tensor(spec, pts)
        _, f = split_qgt(q[..., 0, 1, :, :])
        sign_src = f[..., 0, 1].imag if spec.is_c2t else np.einsum("...ii->...", f).real
        dens = np.sign(sign_src) * np.sqrt(np.maximum(det, 0.0))
        norm = 4 * np.pi if spec.is_c2t else 2 * np.pi
        value = float(np.sum(dens) * cell / norm)
    return DynamicInvariant(value, (nt, nphi), "dynamic", int(round(value)), observable, v, dens)


def map_rows(dmap, part=None):
    """CSV rows (kx, ky, component, analytic, dynamic, gap) for a dynamic map.

    ``part`` picks "re" or "im"; by default the imaginary part is reported
    for off-diagonal Berry components and the real part otherwise.
    """
    if part is None:
        part = "im" if dmap.quantity == "F" and dmap.component in ("12", "21") else "re"
    take = np.imag if part == "im" else np.real
    label = f"{'Im' if part == 'im' else 'Re'} {dmap.quantity}_{dmap.mu}{dmap.nu}^{dmap.component}"
    pts = dmap.points.reshape(-1, dmap.points.shape[-1])
    ana = take(dmap.analytic).reshape(-1)
    dyn = take(dmap.dynamic).reshape(-1)
    gap = dmap.gap.reshape(-1)
    return [[float(p[0]), float(p[1]), label, float(a), float(d), float(g)]
            for p, a, d, g in zip(pts, ana, dyn, gap)]


def write_map_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DYNAMICS_CSV_HEADER)
        for r in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in r])


def map_agreement(dmap, part=None, gap_min=0.5, rel=0.05, floor=1e-3):
    """(all_ok, worst excess ratio, count) over points with gap > gap_min.

    A point passes when |dyn - ana| <= max(rel |ana|, floor).
    """
    if part is None:
        part = "im" if dmap.quantity == "F" and dmap.component in ("12", "21") else "re"
    take = np.imag if part == "im" else np.real
    mask = dmap.gap > gap_min
    a, d = take(dmap.analytic)[mask], take(dmap.dynamic)[mask]
    allowed = np.maximum(rel * np.abs(a), floor)
    ratio = np.abs(d - a) / allowed
    worst = float(np.max(ratio, initial=0.0))
    return worst <= 1.0, worst, int(mask.sum())
