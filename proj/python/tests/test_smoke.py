# Copyright 2026 The etaudit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

import etaudit


def test_auc_worked_example():
    assert etaudit.auc(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0.0, 0.0, 1.0, 1.0])) == 0.75


def test_brunner_munzel_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    x = [1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 2, 4, 1, 1]
    y = [3, 3, 4, 3, 1, 2, 3, 1, 1, 5, 4]
    scores = np.array(x + y, dtype=float)
    labels = np.array([0.0] * len(x) + [1.0] * len(y))
    r = etaudit.brunner_munzel(scores, labels, alternative="two-sided")
    ref = scipy_stats.brunnermunzel(x, y)
    assert r["p_value"] == pytest.approx(ref.pvalue, rel=1e-9)


def test_generate_and_audit():
    d = etaudit.generate("indirect", n=3000, gamma=0.9, seed=1)
    x = np.column_stack([d["x1"], d["x2"], d["x3"]])
    report = etaudit.audit(x, d["y"], d["z"], "0", "1", ["x1", "x2", "x3"], model="logistic",
                           bootstrap_runs=2, drivers=False)
    assert report["et"]["auc"] > 0.6
    assert report["et_violation"] is True


def test_explain_is_efficient():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(300, 3))
    y = (x[:, 0] + x[:, 1] > 0).astype(float)
    values, base, outputs = etaudit.explain(x, y, x[:20], x[100:150], model="gbt")
    assert np.max(np.abs(values.sum(axis=1) + base - outputs)) < 1e-9


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        etaudit.generate("bogus")
    code, _, err = etaudit.run_cli(["audit", "--bogus"])
    assert code == 1 and err
