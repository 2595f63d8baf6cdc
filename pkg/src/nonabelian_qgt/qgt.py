"""Non-Abelian quantum geometric tensor of the degenerate ground doublet.

The primary route is the sum over excited states,

    Q_mn^{ij} = sum_e <psi_i|d_m H|e><e|d_n H|psi_j> / (2e)^2,

with g = (Q + Q^dag)/2 and F = i (Q - Q^dag) per 2x2 block. The
state-derivative definition <d_m psi_i|(1 - P)|d_n psi_j> is kept only as
an oracle (``qgt_from_frames``).
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import GaugeError, NumericalError, ValidationError
from .models import bloch_arrays, hamiltonian
from .spectral import batch_eigensystem, eigensystem, fix_gauge, frame_from_projector

FD_STEP = 1e-5


@dataclass(frozen=True)
class QGTBlock:
    q: np.ndarray  # (2, 2) complex
    g: np.ndarray
    f: np.ndarray
    mu: int
    nu: int


@dataclass(frozen=True)
class GeometryScalars:
    tr_g: tuple  # (Tr g_mm, Tr g_mn, Tr g_nn)
    det_g_mat: float
    solid_angle_density: float
    tr_f: float
    eu: float


def split_qgt(q):
    """(g, F) from Q over the last two (band) axes."""
    qd = np.conj(np.swapaxes(q, -1, -2))
    return 0.5 * (q + qd), 1j * (q - qd)


def resolve_gauge(spec, gauge):
    gauge = gauge or spec.default_gauge
    orientation = spec.orientation if gauge == "real_orthogonal" else None
    return gauge, orientation


def qgt_tensor(spec, points, gauge=None):
    """Full tensor Q[..., m, n, i, j] over all parameter pairs, plus e and frames.

    Vectorized over the leading axes of ``points``.
    """
    gauge, orientation = resolve_gauge(spec, gauge)
    points = np.asarray(points, dtype=float)
    h = hamiltonian(spec, points)
    e, ground, _, pp = batch_eigensystem(h, gauge, orientation)
    excited = frame_from_projector(pp, "complex_phase")
    d, grad = bloch_arrays(spec, points)
    dh = np.einsum("...rm,rij->...mij", grad.astype(complex), spec.gammas)
    # A[..., m, e, i] = <excited_e| d_m H |ground_i>
    a = np.einsum("...ae,...mab,...bi->...mei", np.conj(excited), dh, ground)
    q = np.einsum("...mei,...nej->...mnij", np.conj(a), a) / (4.0 * e ** 2)[..., None, None, None, None]
    return q, e, ground


def qgt_block(spec, point, mu, nu, gauge=None):
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    q, _, _ = qgt_tensor(spec, point, gauge)
    qmn = q[mu, nu]
    g, f = split_qgt(qmn)
    return QGTBlock(q=qmn, g=g, f=f, mu=mu, nu=nu)


def solid_angle_density(spec, points, mu, nu):
    """d_hat . (d_mu d_hat x d_nu d_hat), analytic from the Bloch vector."""
    d, grad = bloch_arrays(spec, np.asarray(points, dtype=float))
    norm = np.linalg.norm(d, axis=-1)
    dhat = d / norm[..., None]
    gu = (grad - dhat[..., :, None] * np.einsum("...r,...rm->...m", dhat, grad)[..., None, :]) / norm[..., None, None]
    return np.einsum("...a,...a->...", dhat, np.cross(gu[..., :, mu], gu[..., :, nu]))


def unit_metric(spec, points, mu, nu):
    """(1/2) d_mu d_hat . d_nu d_hat, analytic from the Bloch vector."""
    d, grad = bloch_arrays(spec, np.asarray(points, dtype=float))
    norm = np.linalg.norm(d, axis=-1)
    dhat = d / norm[..., None]
    gu = (grad - dhat[..., :, None] * np.einsum("...r,...rm->...m", dhat, grad)[..., None, :]) / norm[..., None, None]
    return 0.5 * np.einsum("...a,...a->...", gu[..., :, mu], gu[..., :, nu])


def geometry_grid(spec, points, mu, nu, gauge=None):
    """All per-point geometry for the (mu, nu) pair, vectorized.

    Returns a dict with g, f (..., 2, 2), tr_g (..., 3), tr_f, det_g_mat,
    solid, eu (Im F^{12}; meaningful in the real gauge), and e.
    """
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    q, e, ground = qgt_tensor(spec, points, gauge)
    g_mn, f_mn = split_qgt(q[..., mu, nu, :, :])
    g_mm, _ = split_qgt(q[..., mu, mu, :, :])
    g_nn, _ = split_qgt(q[..., nu, nu, :, :])
    tr = lambda m: np.einsum("...ii->...", m).real  # noqa: E731
    tr_g = np.stack([tr(g_mm), tr(g_mn), tr(g_nn)], axis=-1)
    det_g = 4.0 * (tr_g[..., 0] * tr_g[..., 2] - tr_g[..., 1] ** 2)
    return {
        "g": g_mn,
        "f": f_mn,
        "tr_g": tr_g,
        "tr_f": tr(f_mn),
        "det_g_mat": det_g,
        "solid": solid_angle_density(spec, points, mu, nu),
        "eu": f_mn[..., 0, 1].imag,
        "e": e,
        "ground": ground,
    }


def geometry_scalars(spec, point, mu, nu, gauge=None):
    geo = geometry_grid(spec, point, mu, nu, gauge)
    eu = float(geo["eu"]) if spec.is_c2t else 0.0
    return GeometryScalars(
        tr_g=tuple(float(x) for x in geo["tr_g"]),
        det_g_mat=float(geo["det_g_mat"]),
        solid_angle_density=float(geo["solid"]),
        tr_f=float(geo["tr_f"]),
        eu=eu,
    )


def trace_metric(spec, point, mu, nu):
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    eigensystem(hamiltonian(spec, point))  # gap check
    return float(unit_metric(spec, point, mu, nu))


def det_relation(spec, point, mu, nu):
    """(sqrt det G from the QGT traces, |solid-angle density| from d_hat)."""
    geo = geometry_grid(spec, point, mu, nu)
    lhs = float(np.sqrt(max(float(geo["det_g_mat"]), 0.0)))
    return lhs, abs(float(geo["solid"]))


def _frame(spec, point, gauge, orientation):
    sub = eigensystem(hamiltonian(spec, point))
    return fix_gauge(sub, gauge, orientation).ground


def _align(frame, ref):
    """Rotate ``frame`` within its span to best match ``ref`` (polar factor)."""
    u, _, vh = np.linalg.svd(np.conj(frame.T) @ ref)
    return frame @ (u @ vh)


def frame_derivatives(spec, point, gauge=None, step=FD_STEP):
    """Central-difference derivatives of the locally aligned ground frame."""
    gauge, orientation = resolve_gauge(spec, gauge)
    point = np.asarray(point, dtype=float)
    center = _frame(spec, point, gauge, orientation)
    npar = len(spec.param_names)
    derivs = []
    for m in range(npar):
        shift = np.zeros_like(point)
        shift[m] = step
        fp = _align(_frame(spec, point + shift, gauge, orientation), center)
        fm = _align(_frame(spec, point - shift, gauge, orientation), center)
        derivs.append((fp - fm) / (2 * step))
    return center, np.array(derivs)


def qgt_from_frames(spec, point, mu, nu, gauge=None, step=FD_STEP):
    """Oracle: Q^{ij} = <d_mu psi_i|(1 - P)|d_nu psi_j> from finite differences."""
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    center, derivs = frame_derivatives(spec, point, gauge, step)
    proj = center @ np.conj(center.T)
    comp = np.eye(4) - proj
    return np.conj(derivs[mu].T) @ comp @ derivs[nu]


def euler_curvature(spec, point, mu=0, nu=1, tol=1e-6):
    """Euler curvature of the real ground frame, checked two ways.

    (a) <d_mu psi_1|d_nu psi_2> - <d_nu psi_1|d_mu psi_2> from aligned
    finite-difference frames; (b) +-|solid angle|/2 with the sign of
    Im F^{12}. Returns (b) after asserting |a - b| <= tol.
    """
    if not spec.is_c2t:
        raise GaugeError("Euler curvature needs a real (C2T) subspace")
    mu, nu = spec.param_index(mu), spec.param_index(nu)
    _, derivs = frame_derivatives(spec, point, "real_orthogonal")
    d1, d2 = derivs[:, :, 0], derivs[:, :, 1]
    fd = float(np.real(np.vdot(d1[mu], d2[nu]) - np.vdot(d1[nu], d2[mu])))
    geo = geometry_grid(spec, point, mu, nu, "real_orthogonal")
    closed = float(np.sign(geo["eu"]) * 0.5 * abs(geo["solid"]))
    if abs(fd - closed) > tol:
        raise NumericalError(f"Euler curvature routes disagree: {fd:.3e} vs {closed:.3e}")
    return closed


def quantum_distance(spec, point, dlambda, coeffs):
    """(exact infidelity, quadratic form c^dag g c dl dl) for a small step.

    ``exact`` is 1 - <Psi|P(lambda + dlambda)|Psi>, computed as the squared
    norm of the component of Psi outside the displaced ground space.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if abs(np.vdot(coeffs, coeffs).real - 1.0) > 1e-12:
        raise ValidationError("coefficients must be normalized")
    point = np.asarray(point, dtype=float)
    npar = len(spec.param_names)
    dl = np.zeros(point.shape, dtype=float)
    dl[:npar] = np.asarray(dlambda, dtype=float)[:npar]
    gauge, orientation = resolve_gauge(spec, None)
    sub = fix_gauge(eigensystem(hamiltonian(spec, point)), gauge, orientation)
    psi = sub.ground @ coeffs
    moved = eigensystem(hamiltonian(spec, point + dl))
    outside = psi - moved.projector @ psi
    exact = float(np.vdot(outside, outside).real)
    q, _, _ = qgt_tensor(spec, point, gauge)
    g, _ = split_qgt(q)
    quad = float(np.einsum("i,mnij,j,m,n->", np.conj(coeffs), g, coeffs, dl[:npar], dl[:npar]).real)
    return exact, quad


QGT_CSV_HEADER = (
    ["kx", "ky"]
    + [f"g{i}{j}_{part}" for i in (1, 2) for j in (1, 2) for part in ("re", "im")]
    + [f"f{i}{j}_{part}" for i in (1, 2) for j in (1, 2) for part in ("re", "im")]
    + ["tr_g", "tr_f", "det_g_mat", "eu"]
)


def qgt_map_rows(spec, kz, n_grid, gauge=None):
    """Rows for the (kx, ky) QGT map at fixed kz, in the (x, y) pair."""
    ks = bz_axis(n_grid)
    kx, ky = np.meshgrid(ks, ks, indexing="ij")
    pts = np.stack([kx, ky, np.full_like(kx, kz)], axis=-1)
    geo = geometry_grid(spec, pts, 0, 1, gauge)
    rows = []
    for a in range(n_grid):
        for b in range(n_grid):
            row = [kx[a, b], ky[a, b]]
            for key in ("g", "f"):
                blk = geo[key][a, b]
                for i in range(2):
                    for j in range(2):
                        row += [blk[i, j].real, blk[i, j].imag]
            row += [geo["tr_g"][a, b, 1], geo["tr_f"][a, b], geo["det_g_mat"][a, b],
                    geo["eu"][a, b] if spec.is_c2t else 0.0]
            rows.append(row)
    return rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in map(_plain, row)])


def _plain(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def bz_axis(n):
    """n momenta on (-pi, pi) at half-cell offsets."""
    return -np.pi + (np.arange(n) + 0.5) * (2 * np.pi / n)
