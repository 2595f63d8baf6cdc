"""Bloch vectors and Hamiltonians of the CP and C2T Dirac model families.

Every family is written as H = D_0 G_0 + D_1 G_1 + D_2 G_2 with the
family's Clifford triple G, and an in-plane complex amplitude
Z = (z_x + i z_y)^n so that

    D = (alpha_x s_p Re Z, alpha_y s_p Im Z, alpha_z s_z w).

``bloch_components`` is the single source of truth for D and its
parameter gradient. It only uses numpy ufuncs, so it runs unchanged on
scalars, on broadcast arrays, and inside numba-compiled kernels.
"""
import json
from dataclasses import asdict, dataclass, field
from itertools import permutations

import numpy as np

from .clifford import C2T_GAMMAS, C2T_ORIENTATION, CP_GAMMAS
from .errors import ValidationError

FAMILIES = (
    "cp_lattice",
    "c2t_lattice",
    "cp_effective_plus",
    "cp_effective_minus",
    "c2t_effective_plus",
    "c2t_effective_minus",
    "cp_sphere_plus",
    "cp_sphere_minus",
    "c2t_sphere_plus",
    "c2t_sphere_minus",
)
FAMILY_CODE = {name: code for code, name in enumerate(FAMILIES)}

LATTICE_PARAMS = ("kx", "ky", "kz")
SPHERE_PARAMS = ("theta", "phi")

HALF_PI = 0.5 * np.pi


def bloch_components(code, n, ax, ay, az, mass, t, radius, l0, l1, l2):
    """Bloch vector D and its gradient for family ``code`` at (l0, l1, l2).

    Returns ``(d0, d1, d2), ((d0_0, d0_1, d0_2), (d1_0, ...), (d2_0, ...))``
    where ``dr_m`` is the derivative of D_r with respect to parameter m.
    Sphere families read (theta, phi) from (l0, l1) and ignore l2.
    """
    zero = 0.0 * l0
    sp = 1.0
    sz = 1.0
    if code >= 6:
        # sphere: Z = radius sin(theta) (i e^{-i phi})^n, w = radius cos(theta)
        if code == 7 or code == 9:
            sz = -1.0
        if code >= 8:
            sp = -1.0
        phase = np.exp(1j * n * (HALF_PI - l1))
        zn = radius * np.sin(l0) * phase
        dz0 = radius * np.cos(l0) * phase
        dz1 = -1j * n * zn
        dz2 = zero + 0j
        w = radius * np.cos(l0)
        dw0 = -radius * np.sin(l0)
        dw1 = zero
        dw2 = zero
    else:
        if code <= 1:
            sx_ = 2.0 * t * np.sin(l0)
            sy_ = 2.0 * t * np.sin(l1)
            z = sx_ + 1j * sy_
            zx = 2.0 * t * np.cos(l0) + 0j
            zy = 2j * t * np.cos(l1)
            w = 2.0 * t * (mass - np.cos(l0) - np.cos(l1) - np.cos(l2))
            dw0 = 2.0 * t * np.sin(l0)
            dw1 = 2.0 * t * np.sin(l1)
            dw2 = 2.0 * t * np.sin(l2)
        else:
            if code == 3 or code == 5:
                sz = -1.0
                kz0 = -HALF_PI
            else:
                kz0 = HALF_PI
            if code >= 4:
                sp = -1.0
                kx0 = np.pi
            else:
                kx0 = 0.0
            qx = l0 - kx0
            qy = l1 - kx0
            z = qx + 1j * qy
            zx = 1.0 + 0j + zero
            zy = 1j + zero
            w = l2 - kz0
            dw0 = zero
            dw1 = zero
            dw2 = zero + 1.0
        # integer power by repeated products: complex pow is slow in compiled code
        zn1 = z * 0.0 + 1.0
        for _ in range(n - 1):
            zn1 = zn1 * z
        zn = zn1 * z
        dz0 = n * zn1 * zx
        dz1 = n * zn1 * zy
        dz2 = zero + 0j
    cx = ax * sp
    cy = ay * sp
    cz = az * sz
    d = (cx * zn.real, cy * zn.imag, cz * w)
    grad = (
        (cx * dz0.real, cx * dz1.real, cx * dz2.real),
        (cy * dz0.imag, cy * dz1.imag, cy * dz2.imag),
        (cz * dw0, cz * dw1, cz * dw2),
    )
    return d, grad


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n: int = 1
    alpha: tuple = (1, 1, 1)
    mass: float = 2.0
    t: float = 0.5
    radius: float = 0.1

    def __post_init__(self):
        if self.family not in FAMILY_CODE:
            raise ValidationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"winding order must be a positive integer, got {self.n!r}")
        alpha = tuple(int(a) for a in self.alpha)
        if len(alpha) != 3 or any(a not in (-1, 1) for a in alpha):
            raise ValidationError(f"alpha must be three signs (+1/-1), got {self.alpha!r}")
        if not self.radius > 0:
            raise ValidationError("sphere radius must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def code(self):
        return FAMILY_CODE[self.family]

    @property
    def is_c2t(self):
        return self.family.startswith("c2t")

    @property
    def is_lattice(self):
        return self.family.endswith("lattice")

    @property
    def is_sphere(self):
        return "_sphere_" in self.family

    @property
    def branch(self):
        if self.family.endswith("plus"):
            return 1
        if self.family.endswith("minus"):
            return -1
        return 0

    @property
    def param_names(self):
        return SPHERE_PARAMS if self.is_sphere else LATTICE_PARAMS

    @property
    def gammas(self):
        return C2T_GAMMAS if self.is_c2t else CP_GAMMAS

    @property
    def orientation(self):
        """Real antisymmetric form orienting the real ground plane (C2T only)."""
        return C2T_ORIENTATION if self.is_c2t else None

    @property
    def default_gauge(self):
        return "real_orthogonal" if self.is_c2t else "complex_phase"

    @property
    def kernel_args(self):
        ax, ay, az = self.alpha
        return (self.code, self.n, float(ax), float(ay), float(az), self.mass, self.t, self.radius)

    def param_index(self, mu):
        if isinstance(mu, str):
            if mu not in self.param_names:
                raise ValidationError(f"unknown parameter {mu!r} for {self.family}")
            return self.param_names.index(mu)
        if not 0 <= int(mu) < len(self.param_names):
            raise ValidationError(f"parameter index {mu!r} out of range for {self.family}")
        return int(mu)

    def replace(self, **changes):
        data = self.to_dict()
        data.update(changes)
        return ModelSpec.from_dict(data)

    def to_dict(self):
        data = asdict(self)
        data["alpha"] = list(self.alpha)
        return data

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"family", "n", "alpha", "mass", "t", "radius"}
        if unknown:
            raise ValidationError(f"unknown model keys: {sorted(unknown)}")
        if "family" not in data:
            raise ValidationError("model requires a 'family'")
        kwargs = dict(data)
        if "alpha" in kwargs:
            kwargs["alpha"] = tuple(kwargs["alpha"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BlochVector:
    d: np.ndarray  # (3,)
    grad: np.ndarray  # (3, P), grad[r, mu] = d D_r / d lambda_mu

    @property
    def norm(self):
        return float(np.linalg.norm(self.d))

    def unit(self):
        return self.d / self.norm

    def unit_grad(self):
        """Analytic derivative of the unit vector, shape (3, P)."""
        e = self.norm
        dhat = self.d / e
        return (self.grad - np.outer(dhat, dhat @ self.grad)) / e


@dataclass(frozen=True)
class SphereCoords:
    theta: float
    phi: float
    q: float = field(default=0.1)

    def __post_init__(self):
        if not self.q > 0:
            raise ValidationError("sphere radius q must be positive")
        if self.theta == 0.0:
            raise ValidationError("theta = 0 is a coordinate singularity; use theta in (0, pi]")
        if not 0.0 < self.theta <= np.pi:
            raise ValidationError(f"theta must lie in (0, pi], got {self.theta}")


def _point(spec, k):
    k = np.asarray(k, dtype=float)
    if spec.is_sphere:
        if k.shape[-1] not in (2, 3):
            raise ValidationError("sphere families take (theta, phi)")
        return k[..., 0], k[..., 1], np.zeros_like(k[..., 0])
    if k.shape[-1] != 3:
        raise ValidationError("lattice and effective families take (kx, ky, kz)")
    return k[..., 0], k[..., 1], k[..., 2]


def bloch_arrays(spec, k):
    """Vectorized D and gradient: shapes (..., 3) and (..., 3, P)."""
    l0, l1, l2 = _point(spec, k)
    d, grad = bloch_components(*spec.kernel_args, l0, l1, l2)
    npar = len(spec.param_names)
    d = np.stack(np.broadcast_arrays(*d), axis=-1)
    g = np.stack([np.stack(np.broadcast_arrays(*row[:npar]), axis=-1) for row in grad], axis=-2)
    return d, g


def bloch_vector(spec, k):
    d, g = bloch_arrays(spec, k)
    return BlochVector(d=np.asarray(d, dtype=float), grad=np.asarray(g, dtype=float))


def assemble(gammas, d):
    """sum_r d[..., r] * gammas[r]."""
    return np.einsum("...r,rij->...ij", np.asarray(d, dtype=complex), gammas)


def hamiltonian(spec, k):
    """H(k); broadcasts over leading axes of ``k``."""
    d, _ = bloch_arrays(spec, k)
    return assemble(spec.gammas, d)


def d_hamiltonian(spec, k, mu):
    mu = spec.param_index(mu)
    _, g = bloch_arrays(spec, k)
    return assemble(spec.gammas, g[..., :, mu])


def dispersion(spec, k):
    """Upper energy |D|, written out from the component formulas."""
    l0, l1, l2 = _point(spec, k)
    if spec.is_sphere:
        return np.full_like(np.asarray(l0, dtype=float), spec.radius)
    if spec.is_lattice:
        dx = 2 * spec.t * np.sin(l0)
        dy = 2 * spec.t * np.sin(l1)
        dz = 2 * spec.t * (spec.mass - np.cos(l0) - np.cos(l1) - np.cos(l2))
    else:
        d, _ = bloch_arrays(spec, k)
        return np.linalg.norm(d, axis=-1)
    return np.sqrt((dx ** 2 + dy ** 2) ** spec.n + dz ** 2)


def sphere_embed(spec, s):
    """Bloch vector of a sphere family at ``s``; derivatives are in (theta, phi)."""
    if not spec.is_sphere:
        raise ValidationError(f"{spec.family} is not sphere-parametrized")
    return bloch_vector(spec.replace(radius=s.q), (s.theta, s.phi))


def sphere_momentum(theta, phi, q, n):
    """Literal momentum-space parametrization (q_x, q_y, q_z) of a sphere of radius q."""
    r = (q * np.sin(theta)) ** (1.0 / n)
    return r * np.sin(phi), r * np.cos(phi), q * np.cos(theta)


def monopole_positions(mass, tol=1e-9):
    """Gapless points of the n-independent CP/C2T lattice d-vector in the FBZ."""
    points = []
    for kx in (0.0, np.pi):
        for ky in (0.0, np.pi):
            c = mass - np.cos(kx) - np.cos(ky)
            if abs(c) <= 1.0 + tol:
                kz = np.arccos(np.clip(c, -1.0, 1.0))
                for s in ((1.0,) if kz < tol or abs(kz - np.pi) < tol else (1.0, -1.0)):
                    points.append((kx, ky, s * kz))
    return points


# Four-level atomic Hamiltonians in the bare basis {a, b, c, d}.

def atomic_cp(d):
    dx, dy, dz = d
    om = (dy, dz, dx, dx, -dz, dy)
    return np.array([
        [0, 1j * om[0], om[1], om[2]],
        [-1j * om[0], 0, om[3], om[4]],
        [om[1], om[3], 0, 1j * om[5]],
        [om[2], om[4], -1j * om[5], 0],
    ], dtype=complex)


def atomic_c2t(d):
    dx, dy, dz = d
    delta = (dx, -dx, dx, -dx)
    om = (dz, -dy, dy, dz)
    return np.array([
        [delta[0], om[0], 0, om[1]],
        [om[0], delta[1], om[2], 0],
        [0, om[2], delta[2], om[3]],
        [om[1], 0, om[3], delta[3]],
    ], dtype=complex)


def atomic_equivalence(d, kind="cp", alpha=(1, 1, 1)):
    """Smallest ||P H' P^T - H^(1)||_inf over the 24 relabelings of {a,b,c,d}.

    Returns ``(residual, permutation)``; ``H^(1)`` is the n = 1 Dirac
    Hamiltonian of the ``kind`` family with signs ``alpha``.
    """
    if kind not in ("cp", "c2t"):
        raise ValidationError("kind must be 'cp' or 'c2t'")
    d = np.asarray(d, dtype=float)
    atomic = atomic_cp(d) if kind == "cp" else atomic_c2t(d)
    gammas = CP_GAMMAS if kind == "cp" else C2T_GAMMAS
    target = assemble(gammas, np.asarray(alpha) * d)
    best = (np.inf, None)
    for perm in permutations(range(4)):
        p = np.eye(4)[list(perm)]
        res = float(np.max(np.abs(p @ atomic @ p.T - target)))
        if res < best[0]:
            best = (res, perm)
    return best
