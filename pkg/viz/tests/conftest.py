import struct

import numpy as np
import pytest

HEADER = struct.Struct("<8sdqdd")


def write_snapshot(path, values, L=6.0, origin=0.0, t=1.5):
    values = np.asarray(values, dtype="<f8")
    n = values.shape[0]
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(b"PFSNAP01", L, n, origin, t))
        fh.write(np.ascontiguousarray(values).tobytes())
    return path


@pytest.fixture
def wave_snapshot(tmp_path):
    n = 24
    x = np.linspace(0, 2 * np.pi, n, endpoint=False)
    values = np.cos(x)[:, None] * np.cos(x)[None, :]
    return write_snapshot(tmp_path / "wave.bin", values, L=2 * np.pi)


@pytest.fixture
def cost_csv(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text(
        "Prob,Scheme,Step tol.,Point value,Obj. err.,FFT,Clock (sec),CPU (sec)\n"
        "fch1,mp,0.001,0.25,1e-06,1200,10.5,9.8\n"
        "fch1,bdf2,0.0001,0.2500001,2e-06,1500,12.5,11.9\n"
        "pfc1,lmp,0.01,0.4,5e-07,900,7.5,7.1\n"
    )
    return path
