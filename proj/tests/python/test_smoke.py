import math
import os
from pathlib import Path

import numpy as np
import pytest

import ncsopt

CONFIGS = Path(os.environ.get("NCS_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


@pytest.fixture(scope="module")
def tiny():
    return ncsopt.load_config(str(CONFIGS / "tiny_mixing.json"))


def test_chain_powers():
    chain = ncsopt.DelayChain(0, 1, np.array([[0.6, 0.4], [0.5, 0.5]]))
    assert chain.n_step(0, 0, 2) == pytest.approx(0.56, abs=1e-15)
    assert np.allclose(chain.power(3).sum(axis=1), 1.0)


def test_bad_chain_raises():
    with pytest.raises(ncsopt.NcsError, match="SupportError"):
        ncsopt.DelayChain(0, 2, np.array([[0.5, 0.4, 0.1], [0.3, 0.3, 0.4], [0.2, 0.3, 0.5]]))


def test_synthesize_and_value(tiny):
    sched = ncsopt.synthesize(tiny)
    assert sched.spec_hash == tiny.spec_hash
    dim = tiny.n + tiny.m_hat
    K = sched.value(tiny.k0, 1, 1)
    assert K.shape == (dim, dim)
    assert np.allclose(K, K.T)
    assert np.linalg.eigvalsh(K).min() >= -1e-8
    assert sched.gain(tiny.k0, 0, 0).shape == (tiny.m_tilde, dim)
    x = tiny.initial_extended_state()
    v = float(x @ K @ x)
    assert ncsopt.enumerate_expected_cost(tiny, sched) == pytest.approx(v, rel=1e-8)
    value, z = ncsopt.joint_open_loop_min(tiny)
    assert v <= value + 1e-9
    assert z.shape == ((tiny.N - tiny.k0 + 1) * tiny.m_tilde,)


def test_schedule_round_trip(tiny):
    sched = ncsopt.synthesize(tiny)
    back = ncsopt.schedule_from_string(sched.to_string())
    assert back == sched
    with pytest.raises(ncsopt.NcsError, match="FormatError"):
        ncsopt.schedule_from_string("not a schedule")


def test_episode_and_monte_carlo(tiny):
    sched = ncsopt.synthesize(tiny)
    a = ncsopt.run_episode(tiny, sched, 11)
    b = ncsopt.run_episode(tiny, sched, 11)
    assert a["J"] == b["J"]
    assert len(a["steps"]) == tiny.N - tiny.k0 + 1
    summary = ncsopt.run_monte_carlo(tiny, sched, 4000, 5)
    assert abs(summary["mean_J"] - summary["v_k0"]) <= 3 * summary["stderr_J"]
    assert math.isfinite(summary["stderr_Jtilde"])


def test_verify_exhaustive(tiny):
    lines = ncsopt.verify(tiny, "exhaustive")
    assert lines and all(line["passed"] for line in lines), [l for l in lines if not l["passed"]]
    names = {line["name"] for line in lines}
    assert {"dp_value_equality", "open_loop_ordering", "kernel_expectations"} <= names


def test_invalid_config_raises():
    with pytest.raises(ncsopt.NcsError):
        ncsopt.load_config(str(CONFIGS / "invalid_chain.json"))
