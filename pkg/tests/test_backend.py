from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from fracvar import _backend, _pykernels

ck = pytest.importorskip("fracvar._ckernels")


def _data(n, rng):
    f = rng.standard_normal(n)
    g = rng.standard_normal(n)
    K = rng.standard_normal(2 * n - 1)
    return f, g, K


def test_compiled_and_numpy_kernels_agree_1d():
    rng = np.random.default_rng(0)
    f, g, K = _data(97, rng)
    P = np.abs(rng.standard_normal(97))
    idx = np.ascontiguousarray(rng.integers(0, 97, 11).astype(np.intp))
    for p in (1.0, 2.0):
        assert ck.gagliardo_1d(f, P, p) == pytest.approx(_pykernels.gagliardo_1d(f, P, p), rel=1e-12)
    np.testing.assert_allclose(ck.nl_sum_1d(f, g, K), _pykernels.nl_sum_1d(f, g, K), rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(ck.apply_at_1d(f, K, idx), _pykernels.apply_at_1d(f, K, idx), rtol=1e-12)


def test_compiled_and_numpy_kernels_agree_2d():
    rng = np.random.default_rng(1)
    f = rng.standard_normal((9, 7))
    g = rng.standard_normal((9, 7))
    K = np.ascontiguousarray(rng.standard_normal((17, 13)))
    P = np.ascontiguousarray(np.abs(rng.standard_normal((9, 7))))
    idx = np.ascontiguousarray(np.array([[0, 0], [4, 3], [8, 6]], dtype=np.intp))
    assert ck.gagliardo_2d(f, P, 1.0) == pytest.approx(_pykernels.gagliardo_2d(f, P, 1.0), rel=1e-12)
    np.testing.assert_allclose(ck.nl_sum_2d(f, g, K), _pykernels.nl_sum_2d(f, g, K), rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(ck.apply_at_2d(f, K, idx), _pykernels.apply_at_2d(f, K, idx), rtol=1e-12)


def test_environment_switch_forces_fallback():
    env = dict(os.environ, FRACVAR_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from fracvar import _backend; print(_backend.COMPILED)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "False"
    # this process was built with the extension, unless it runs under the switch itself
    forced = os.environ.get("FRACVAR_PURE_PYTHON", "") not in ("", "0")
    assert _backend.COMPILED is (not forced)
