import os
import subprocess
import sys

import pytest

from bdindex import _kernels_numpy
from bdindex._accel import ENV_FLAG, backend_name, get_backend


def test_explicit_backends():
    assert get_backend("numpy") is _kernels_numpy
    assert backend_name(get_backend("numba")) in ("numba", "numpy")
    with pytest.raises(ValueError):
        get_backend("cuda")


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv(ENV_FLAG, "1")
    assert get_backend() is _kernels_numpy


def test_env_flag_end_to_end(tmp_path):
    g = tmp_path / "p3.txt"
    g.write_text("0 1\n1 2\n")
    idx = tmp_path / "p3.bdx"
    env = {**os.environ, ENV_FLAG: "1"}
    subprocess.run([sys.executable, "-m", "bdindex.cli", "build", "-g", str(g), "-o", str(idx)],
                   check=True, env=env, capture_output=True)
    out = subprocess.run([sys.executable, "-m", "bdindex.cli", "bench", "-i", str(idx), "-g", str(g),
                          "-k", "3"], check=True, env=env, capture_output=True, text=True).stdout
    assert "backend: numpy" in out
