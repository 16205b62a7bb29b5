import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mqpgsim import kernels
from mqpgsim import _kernels_py

cython_available = pytest.mark.skipif(kernels.BACKEND != "cython",
                                      reason="compiled extension not built")


def interp_oracle(alpha, mu0, dmu, nu_out, nu_in):
    # np.interp on real and imaginary parts, zero outside the sampled pump
    mu = mu0 + dmu * np.arange(len(alpha))
    x = np.subtract.outer(nu_out, nu_in)
    out = np.interp(x, mu, alpha.real) + 1j * np.interp(x, mu, alpha.imag)
    out[(x < mu[0]) | (x > mu[-1])] = 0.0
    return out


def random_case(seed, n_mu=64, n_out=17, n_in=13):
    r = np.random.default_rng(seed)
    alpha = r.normal(size=n_mu) + 1j * r.normal(size=n_mu)
    mu0, dmu = 1.0, 0.05
    nu_in = np.sort(r.uniform(-0.5, 0.5, n_in))
    nu_out = np.sort(r.uniform(0.5, 5.0, n_out))
    return alpha, mu0, dmu, nu_out, nu_in


@given(st.integers(0, 2**31 - 1))
def test_python_backend_matches_interp(seed):
    a, mu0, dmu, no, ni = random_case(seed)
    p = kernels.pump_matrix(a, mu0, dmu, no, ni, backend="python")
    assert np.allclose(p, interp_oracle(a, mu0, dmu, no, ni), atol=1e-12)


@cython_available
@given(st.integers(0, 2**31 - 1))
def test_backends_agree(seed):
    a, mu0, dmu, no, ni = random_case(seed)
    p_py = kernels.pump_matrix(a, mu0, dmu, no, ni, backend="python")
    p_cy = kernels.pump_matrix(a, mu0, dmu, no, ni, backend="cython")
    assert np.allclose(p_py, p_cy, rtol=0, atol=1e-13)


def test_exact_at_samples():
    a = np.arange(5) + 1j * np.arange(5)[::-1]
    p = kernels.pump_matrix(a, 0.0, 1.0, np.array([0.0, 1.0, 4.0]), np.array([0.0]))
    assert np.allclose(p[:, 0], a[[0, 1, 4]])


def test_zero_outside():
    a = np.ones(4, dtype=complex)
    p = kernels.pump_matrix(a, 0.0, 1.0, np.array([-0.1, 3.1]), np.array([0.0]))
    assert np.all(p == 0)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.pump_matrix(np.ones(4), 0.0, 1.0, [0.0], [0.0], backend="fortran")


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


def test_fallback_module_standalone():
    a, mu0, dmu, no, ni = random_case(7)
    p = _kernels_py.pump_matrix(a.real.copy(), a.imag.copy(), mu0, dmu, no, ni)
    assert p.shape == (len(no), len(ni))


def test_env_var_forces_fallback():
    import os
    import subprocess
    import sys

    env = {**os.environ, "MQPGSIM_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import mqpgsim; print(mqpgsim.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@cython_available
def test_benchmark_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--quick", "--repeat", "1"]) == 0
    assert "speedup" in capsys.readouterr().out
