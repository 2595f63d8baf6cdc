"""Open-boundary (slab) spectra of the lattice models.

The Bloch Hamiltonian is sampled along the open axis and Fourier
transformed into hoppings T_m with H(k) = sum_m T_m exp(i m k); the slab
matrix has T_m on block (r, r + m) and hard walls at both ends.
"""
from dataclasses import dataclass

import numpy as np

from .errors import RangeError, ValidationError
from .models import hamiltonian
from .spectral import dense_eigh

AXES = ("x", "y", "z")
DFT_SAMPLES = 64
DROP_TOL = 1e-12
REASSEMBLY_TOL = 1e-10
EDGE_SITES = 4
EDGE_THRESHOLD = 0.6
MAX_DIM = 1024


@dataclass(frozen=True)
class HoppingSeries:
    terms: dict  # m -> (4, 4) complex
    open_axis: str
    fixed: dict

    @property
    def reach(self):
        return max((abs(m) for m in self.terms), default=0)

    def bloch(self, k):
        k = np.asarray(k, dtype=float)
        out = np.zeros(k.shape + (4, 4), dtype=complex)
        for m, t in self.terms.items():
            out += np.exp(1j * m * k)[..., None, None] * t
        return out


@dataclass(frozen=True)
class SlabSpectrum:
    transverse_k: dict
    energies: np.ndarray
    edge_weight: np.ndarray
    vectors: np.ndarray = None


def _points(spec, open_axis, fixed, k):
    if spec.is_sphere:
        raise ValidationError("slab spectra need a lattice or effective model")
    if open_axis not in AXES:
        raise ValidationError(f"open_axis must be one of {AXES}")
    k = np.asarray(k, dtype=float)
    cols = []
    for ax in AXES:
        if ax == open_axis:
            cols.append(k)
        else:
            key = "k" + ax
            if key not in fixed:
                raise ValidationError(f"missing fixed momentum {key}")
            cols.append(np.full_like(k, float(fixed[key])))
    return np.stack(cols, axis=-1)


def fourier_hoppings(spec, open_axis="y", fixed=None, samples=DFT_SAMPLES):
    """Hopping blocks along ``open_axis`` at fixed transverse momenta."""
    fixed = dict(fixed or {})
    ks = 2 * np.pi * np.arange(samples) / samples
    h = hamiltonian(spec, _points(spec, open_axis, fixed, ks))
    coeffs = np.fft.fft(h, axis=0) / samples  # coeffs[j] multiplies exp(+i j k)
    terms = {}
    for j in range(samples):
        m = j if j <= samples // 2 else j - samples
        if np.max(np.abs(coeffs[j])) >= DROP_TOL:
            terms[m] = coeffs[j]
    series = HoppingSeries(dict(sorted(terms.items())), open_axis, fixed)
    probe = ks + np.pi / samples
    err = float(np.max(np.abs(series.bloch(probe) - hamiltonian(spec, _points(spec, open_axis, fixed, probe)))))
    if err > REASSEMBLY_TOL:
        raise RangeError(f"hopping reassembly error {err:.2e}; increase the sample count")
    return series


def slab_hamiltonian(series, ny):
    ny = int(ny)
    dim = 4 * ny
    if dim > MAX_DIM:
        raise ValidationError(f"slab dimension {dim} exceeds cap {MAX_DIM}")
    h = np.zeros((dim, dim), dtype=complex)
    for m, t in series.terms.items():
        for r in range(max(0, -m), min(ny, ny - m)):
            h[4 * r: 4 * r + 4, 4 * (r + m): 4 * (r + m) + 4] = t
    return h


def edge_weight(vectors, ny, sites=EDGE_SITES):
    """Probability on the outer ``sites`` cells of each boundary, per eigenvector."""
    p = np.abs(vectors) ** 2
    cells = p.reshape(ny, 4, -1).sum(axis=1)
    return cells[:sites].sum(axis=0) + cells[ny - sites:].sum(axis=0)


def slab_spectrum(spec, open_axis="y", ny=60, fixed=None, sweep_axis="x", sweep=None, keep_vectors=False):
    """Slab spectra at each momentum in ``sweep`` along ``sweep_axis``."""
    if int(ny) < 40:
        raise ValidationError("ny must be at least 40")
    if sweep_axis == open_axis or sweep_axis not in AXES:
        raise ValidationError("sweep axis must be a periodic axis")
    fixed = dict(fixed or {})
    sweep = np.linspace(-np.pi, np.pi, 201) if sweep is None else np.asarray(sweep, dtype=float)
    out = []
    for k in sweep:
        mom = dict(fixed)
        mom["k" + sweep_axis] = float(k)
        series = fourier_hoppings(spec, open_axis, mom)
        e, v = dense_eigh(slab_hamiltonian(series, ny), max_dim=MAX_DIM)
        out.append(SlabSpectrum(mom, e, edge_weight(v, int(ny)), v if keep_vectors else None))
    return out


def bulk_gap_edge(spec, open_axis, transverse, samples=512):
    """min over the open-axis momentum of |d|, the bulk band edge at these momenta."""
    ks = -np.pi + 2 * np.pi * (np.arange(samples) + 0.5) / samples
    h = hamiltonian(spec, _points(spec, open_axis, transverse, ks))
    e = np.sqrt(np.einsum("kij,kji->k", h, h).real / 4.0)
    return float(np.min(e))


def in_gap_mask(spec, spectrum, open_axis="y", margin=0.05):
    """States strictly inside the bulk gap window, shrunk by ``margin`` (relative)."""
    edge = bulk_gap_edge(spec, open_axis, spectrum.transverse_k)
    return np.abs(spectrum.energies) < (1.0 - margin) * edge


def spectral_asymmetry(spectrum):
    e = spectrum.energies
    return float(np.max(np.abs(e + e[::-1])))


def zero_crossing_edge_states(spec, spectra, open_axis="y", threshold=EDGE_THRESHOLD):
    """Edge-localized in-gap states at the sweep sample closest to E = 0.

    Returns (sweep index, number of states within the crossing window that
    are in-gap with edge_weight > threshold, crossing window). The window
    is set by the sweep resolution: twice the largest level spacing change
    between the two neighbouring samples.
    """
    mins = np.array([np.min(np.abs(s.energies)) for s in spectra])
    i = int(np.argmin(mins))
    nb = [j for j in (i - 1, i + 1) if 0 <= j < len(spectra)]
    window = max(2.0 * max(mins[j] for j in nb), 1e-6) if nb else 1e-6
    s = spectra[i]
    mask = in_gap_mask(spec, s, open_axis) & (np.abs(s.energies) <= window) & (s.edge_weight > threshold)
    return i, int(mask.sum()), window


def spectral_gap(spectrum):
    return 2.0 * float(np.min(np.abs(spectrum.energies)))


SLAB_CSV_HEADER = ["sweep_k", "index", "energy", "edge_weight"]


def slab_rows(spectra, sweep_axis="x"):
    rows = []
    for s in spectra:
        k = s.transverse_k["k" + sweep_axis]
        for idx, (e, w) in enumerate(zip(s.energies, s.edge_weight)):
            rows.append([float(k), idx, float(e), float(w)])
    return rows
