# Copyright 2026 The Subzero Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import csv
import os
import pathlib

import numpy as np
import pytest

import subzero


@pytest.fixture
def workdir(tmp_path):
    root = os.environ.get("SUBZERO_TEST_TMP")
    if root:
        path = pathlib.Path(root) / tmp_path.name
        path.mkdir(parents=True, exist_ok=True)
        return path
    return tmp_path


def small_quadratic():
    h = subzero.generate_hessian(dim=32, rank=8, max_eigenvalues=[10.0], seed=7)
    return h, subzero.Quadratic(h, rank=8)


def test_hessian_is_symmetric_psd_with_requested_rank():
    h, q = small_quadratic()
    assert h.shape == (32, 32)
    assert np.array_equal(h, h.T)
    w = np.linalg.eigvalsh(h)
    assert w.min() > -1e-9
    assert np.isclose(w.max(), 10.0, rtol=1e-9)
    assert q.numerical_rank == 8
    assert np.isclose(q.trace, np.trace(h))


def test_generation_is_deterministic():
    a = subzero.generate_hessian(dim=16, rank=4, seed=3)
    b = subzero.generate_hessian(dim=16, rank=4, seed=3)
    assert np.array_equal(a, b)


def test_loss_and_gradient_match_numpy():
    h, q = small_quadratic()
    theta = np.linspace(-1.0, 1.0, 32)
    assert np.isclose(q.loss(theta), 0.5 * theta @ h @ theta, rtol=1e-12)
    assert np.allclose(q.gradient(theta), h @ theta, rtol=1e-12, atol=1e-12)


def test_rho_distribution_mean_tracks_expectation():
    _, q = small_quadratic()
    rho = subzero.rho_distribution("low-rank", q, 8, trials=400, seed=1)
    assert rho.shape == (400,)
    se = rho.std(ddof=1) / np.sqrt(rho.size)
    assert abs(rho.mean() - q.expected_rho(8)) < 4 * se


def test_run_zero_lr_keeps_theta_and_logs_every_step():
    _, q = small_quadratic()
    theta0 = np.ones(32)
    out = subzero.run(q, theta0, method="mezo-bcd", lr=0.0, steps=20, num_blocks=4,
                      order="flipflop")
    assert out["status"] == "completed"
    assert np.array_equal(out["theta"], theta0)
    assert list(out["active_block"][:8]) == [0, 1, 2, 3, 2, 1, 0, 1]


def test_run_reduces_loss():
    _, q = small_quadratic()
    theta0 = np.ones(32)
    out = subzero.run(q, theta0, method="zo-sgd", lr=1e-2, steps=500, seed=2)
    assert q.loss(out["theta"]) < 0.5 * q.loss(theta0)


def test_invalid_input_raises_value_error():
    _, q = small_quadratic()
    with pytest.raises(ValueError):
        subzero.run(q, np.ones(32), method="nope")
    with pytest.raises(ValueError):
        subzero.update_block_idx("ascending", 1, 0)


def test_block_orders():
    assert [subzero.update_block_idx("ascending", t, 3) for t in range(1, 5)] == [1, 2, 3, 1]
    assert [subzero.update_block_idx("flipflop", t, 3) for t in range(1, 6)] == [1, 2, 3, 2, 1]


def test_cost_models():
    rep = subzero.peak_memory_params("mezo", [(4, 4), (2, 2)])
    assert rep == {"total": 20, "auxiliary": 16, "peak": 36}
    assert subzero.traffic_per_step("mezo", 100, 4) == 500
    assert subzero.traffic_per_step("mezo-bcd", 100, 4) == 275


def test_reproduce_writes_verifiable_csv(workdir):
    res = subzero.reproduce("traffic", workdir, seed=0)
    assert res["passed"]
    panel_dir = workdir / "traffic"
    assert subzero.verify(panel_dir) == []
    with open(panel_dir / res["files"][0], newline="") as f:
        header = next(csv.reader(f))
    assert header == ["method", "d", "N", "traffic"]
