"""Hot loop: fixed-step RK4 integration of batches of ramp trajectories.

Two interchangeable backends:

* numba: one compiled trajectory loop per batch member (``prange``).
* numpy: the whole batch advances together, one vectorized step at a time.

Set ``NQGT_DISABLE_NUMBA=1`` to force the numpy path (numba is also
skipped automatically when it cannot be imported). Both paths evaluate
the Hamiltonian through ``models.bloch_components``.
"""
import os

import numpy as np

from .models import bloch_components

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get("NQGT_DISABLE_NUMBA", "0") in ("", "0")
TWO_PI = 2.0 * np.pi


def backend():
    return "numba" if NUMBA_ENABLED else "numpy"


def set_threads(n):
    if NUMBA_ENABLED and n:
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


def evolve_batch_numpy(model, gammas, starts, dirs, psi0, v, nsteps, t_final):
    """Advance every trajectory of the batch together (numpy backend)."""
    psi = np.array(psi0, dtype=complex)
    starts = np.asarray(starts, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    gt = np.ascontiguousarray(np.transpose(gammas, (0, 2, 1)))
    h = t_final / nsteps
    accel = v * v / TWO_PI

    def hpsi(d, x):
        return d[0][:, None] * (x @ gt[0]) + d[1][:, None] * (x @ gt[1]) + d[2][:, None] * (x @ gt[2])

    def dvec(t):
        lam = starts + dirs * (accel * t * t)
        d, _ = bloch_components(*model, lam[:, 0], lam[:, 1], lam[:, 2])
        return tuple(np.broadcast_to(c, lam[:, 0].shape) for c in d)

    d0 = dvec(0.0)
    for s in range(nsteps):
        t0 = s * h
        dm = dvec(t0 + 0.5 * h)
        d1 = dvec(t0 + h)
        k1 = -1j * hpsi(d0, psi)
        k2 = -1j * hpsi(dm, psi + (0.5 * h) * k1)
        k3 = -1j * hpsi(dm, psi + (0.5 * h) * k2)
        k4 = -1j * hpsi(d1, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        d0 = d1
    return psi


def monomial_form(gammas):
    """Column index and coefficient of the single nonzero in each row of each Gamma.

    Pauli products have exactly one nonzero per row, so Gamma_r psi reduces
    to ``coef[r, i] * psi[cols[r, i]]``.
    """
    gammas = np.asarray(gammas, dtype=complex)
    nz = np.abs(gammas) > 1e-14
    if not np.all(nz.sum(axis=-1) == 1):
        raise ValueError("Clifford triple is not monomial")
    cols = np.argmax(nz, axis=-1)
    coef = np.take_along_axis(gammas, cols[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(cols, dtype=np.int64), np.ascontiguousarray(coef)


def _build_numba():
    njit = numba.njit
    bloch = njit(cache=True)(bloch_components)

    @njit(cache=True)
    def _dvec(code, n, ax, ay, az, mass, t, radius, start, direction, shift, out):
        d, _ = bloch(code, n, ax, ay, az, mass, t, radius,
                     start[0] + direction[0] * shift,
                     start[1] + direction[1] * shift,
                     start[2] + direction[2] * shift)
        out[0] = d[0]
        out[1] = d[1]
        out[2] = d[2]

    @njit(cache=True)
    def _stage(d, cols, coef, base, x, scale, out):
        # out = -i H(d) (base + scale * x)
        for i in range(4):
            acc = 0j
            for r in range(3):
                j = cols[r, i]
                acc += d[r] * coef[r, i] * (base[j] + scale * x[j])
            out[i] = -1j * acc

    @njit(cache=True, parallel=True)
    def evolve(code, n, ax, ay, az, mass, t, radius, cols, coef, starts, dirs, psi0, v, nsteps, t_final):
        nb = starts.shape[0]
        result = np.empty((nb, 4), dtype=np.complex128)
        h = t_final / nsteps
        accel = v * v / TWO_PI
        for b in numba.prange(nb):
            psi = psi0[b].copy()
            d0 = np.empty(3)
            dm = np.empty(3)
            d1 = np.empty(3)
            k1 = np.empty(4, dtype=np.complex128)
            k2 = np.empty(4, dtype=np.complex128)
            k3 = np.empty(4, dtype=np.complex128)
            k4 = np.empty(4, dtype=np.complex128)
            start = starts[b]
            direction = dirs[b]
            _dvec(code, n, ax, ay, az, mass, t, radius, start, direction, 0.0, d0)
            for s in range(nsteps):
                tm = (s + 0.5) * h
                t1 = (s + 1.0) * h
                _dvec(code, n, ax, ay, az, mass, t, radius, start, direction, accel * tm * tm, dm)
                _dvec(code, n, ax, ay, az, mass, t, radius, start, direction, accel * t1 * t1, d1)
                _stage(d0, cols, coef, psi, psi, 0.0, k1)
                _stage(dm, cols, coef, psi, k1, 0.5 * h, k2)
                _stage(dm, cols, coef, psi, k2, 0.5 * h, k3)
                _stage(d1, cols, coef, psi, k3, h, k4)
                for i in range(4):
                    psi[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                for r in range(3):
                    d0[r] = d1[r]
            for i in range(4):
                result[b, i] = psi[i]
        return result

    return evolve


_numba_evolve = None


def evolve_batch_numba(model, gammas, starts, dirs, psi0, v, nsteps, t_final):
    global _numba_evolve
    if _numba_evolve is None:
        _numba_evolve = _build_numba()
    code, n, ax, ay, az, mass, t, radius = model
    cols, coef = monomial_form(gammas)
    return _numba_evolve(
        int(code), int(n), float(ax), float(ay), float(az), float(mass), float(t), float(radius),
        cols, coef,
        np.ascontiguousarray(starts, dtype=np.float64),
        np.ascontiguousarray(dirs, dtype=np.float64),
        np.ascontiguousarray(psi0, dtype=np.complex128),
        float(v), int(nsteps), float(t_final),
    )


def evolve_batch(model, gammas, starts, dirs, psi0, v, nsteps, t_final, use_numba=None):
    """Final states of a batch of quadratic-ramp trajectories.

    ``model`` is ``ModelSpec.kernel_args``; ``starts`` and ``dirs`` are
    (B, 3) parameter arrays with lambda(t) = start + dir * v^2 t^2 / 2 pi.
    """
    if use_numba is None:
        use_numba = NUMBA_ENABLED
    fn = evolve_batch_numba if use_numba else evolve_batch_numpy
    return fn(model, gammas, starts, dirs, psi0, v, nsteps, t_final)
