import json
import math
import pathlib

import numpy as np
import pytest

import secure_state as ss

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def scalar_three():
    return ss.LinearSystem(np.ones((1, 1)), np.ones((3, 1)), 1.0, 1.0)


def test_version():
    assert ss.__version__.count(".") == 2


def test_riccati_golden_ratio():
    f = ss.solve_steady_state(ss.LinearSystem(np.ones((1, 1)), np.ones((1, 1)), 1.0, 1.0), [0])
    assert f.p_opt == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-9)
    assert f.P_pred.shape == (1, 1)


def test_observability_of_planar_plant():
    C = np.array([[1, 0], [0, 1], [1, 1], [1, -1], [1, 2]], dtype=float)
    sys = ss.LinearSystem(np.eye(2), C, 0.0, 0.0)
    info = ss.sparse_observability_index(sys)
    assert info["theta"] == 2
    assert info["max_correctable"] == 1

    x = np.array([0.3, -1.2])
    Y = ss.observation_symbols(sys, x)
    Y[4] += [40.0, -7.0]
    d = ss.noiseless_secure_decode(sys, Y, 1)
    assert d["status"] == "unique"
    np.testing.assert_allclose(d["estimates"][0], x, atol=1e-9)


def test_zero_out_attack_is_isolated():
    sys = scalar_three()
    tr = ss.simulate(sys, 4200, attacked_set=[1], strategy="zero_out", seed=3)
    assert tr["outputs"].shape == (3, 4200)
    assert not tr["outputs"][1].any()
    rep = ss.scalar_predict(sys, tr["outputs"], k=1, t1=200, N=4000)
    assert rep.selected_set == [0, 2]
    assert rep.epsilon == pytest.approx(0.1 * rep.bound)
    mse = np.mean(np.sum((tr["states"][:, 200:4200] - rep.estimates) ** 2, axis=0))
    assert mse <= rep.bound + rep.epsilon

    vec = ss.vector_predict(sys, tr["outputs"], k=1, t1=200, N=4000)
    np.testing.assert_allclose(vec.estimates, rep.estimates, atol=1e-10)
    assert ss.vector_filter(sys, tr["outputs"], k=1, t1=200, N=4000).selected_set == [0, 2]


def test_errors_map_to_python_exceptions():
    with pytest.raises(ss.DimensionError):
        ss.LinearSystem(np.ones((2, 3)), np.ones((1, 2)), 1.0, 1.0)
    with pytest.raises(ss.PreconditionError):
        ss.scalar_predict(scalar_three(), np.zeros((3, 300)), k=2, t1=10, N=100)
    with pytest.raises(ss.ConfigError, match="system.A"):
        ss.run_experiment('{"system": {"A": [[1], [1, 2]], "C": [[1]], "sigma_w": 1, "sigma_v": 1}, "k": 0, "mode": "prediction"}')
    assert issubclass(ss.ConfigError, ss.Error)


def test_run_experiment_from_config():
    config = json.loads((CONFIGS / "scalar_zero_out.json").read_text())
    config["trials"] = 3
    config["window"]["N"] = 2000
    a = ss.run_experiment(config)
    b = ss.run_experiment(json.dumps(config), parallel=2)
    assert a["algorithm"] == "scalar_prediction"
    assert len(a["rows"]) == 3
    a.pop("generated_at")
    b.pop("generated_at")
    assert a == b
    assert a["aggregate"]["acceptance_passed"]

    o = ss.run_experiment(config, oracle=True)
    assert len(o["oracle"]) == 3
