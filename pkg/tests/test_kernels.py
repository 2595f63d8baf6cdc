import os
import subprocess
import sys

import numpy as np
import pytest

from nonabelian_qgt import _kernels
from nonabelian_qgt.clifford import C2T_GAMMAS, CP_GAMMAS
from nonabelian_qgt.models import FAMILIES, ModelSpec


def test_monomial_form_reproduces_gammas():
    for gammas in (CP_GAMMAS, C2T_GAMMAS):
        cols, coef = _kernels.monomial_form(gammas)
        for r in range(3):
            m = np.zeros((4, 4), dtype=complex)
            m[np.arange(4), cols[r]] = coef[r]
            assert np.array_equal(m, gammas[r])


@pytest.mark.skipif(_kernels.numba is None, reason="numba unavailable")
@pytest.mark.parametrize("family", FAMILIES)
def test_backends_agree(family):
    spec = ModelSpec(family, n=2, radius=1.0)
    rng = np.random.default_rng(3)
    starts = np.zeros((3, 3))
    starts[:, :len(spec.param_names)] = rng.uniform(0.3, 2.0, (3, len(spec.param_names)))
    dirs = np.zeros((3, 3))
    dirs[:, 0] = 1.0
    psi0 = np.zeros((3, 4), dtype=complex)
    psi0[:, 1] = 1.0
    args = (spec.kernel_args, spec.gammas, starts, dirs, psi0, 0.5, 500, 2.0)
    a = _kernels.evolve_batch(*args, use_numba=True)
    b = _kernels.evolve_batch(*args, use_numba=False)
    assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if expected == "numba" and _kernels.numba is None:
        pytest.skip("numba unavailable")
    env = dict(os.environ, NQGT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from nonabelian_qgt import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
