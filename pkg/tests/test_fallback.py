import json
import os
import subprocess
import sys

import pytest

SCRIPT = """
import json, numpy as np
from jacobs_ladder import _accel, build_ladder_table, phi1, make_sn_generator, verify_cell, hardy_z
t = build_ladder_table(2000.0)
x = phi1(t, np.array([40.0, 333.3, 1500.0]))
G = make_sn_generator(0.5)
rep = verify_cell(t, G, G.cell_near(1000.0))
print(json.dumps({"numba": _accel.USE_NUMBA, "phi1": x.tolist(), "I": rep.I,
                  "alpha": rep.exponent.alpha_star, "z": hardy_z(np.array([150.0, 1234.5])).tolist()}))
"""


def run(flag):
    env = dict(os.environ, JACOBS_LADDER_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


@pytest.fixture(scope="module")
def pair():
    return run("1"), run("0")


def test_flag_selects_backend(pair):
    fast, slow = pair
    assert slow["numba"] is False
    pytest.importorskip("numba")
    assert fast["numba"] is True


def test_backends_agree(pair):
    fast, slow = pair
    for a, b in zip(fast["phi1"], slow["phi1"]):
        assert abs(a - b) <= 1e-9 * a
    for a, b in zip(fast["z"], slow["z"]):
        assert abs(a - b) <= 1e-10
    assert fast["I"] == pytest.approx(slow["I"], rel=1e-8)
    assert fast["alpha"] == pytest.approx(slow["alpha"], rel=1e-8)
