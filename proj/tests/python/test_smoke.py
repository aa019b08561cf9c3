# Copyright 2026 The PulseForge Authors
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


import json
import math

import numpy as np
import pytest

import pulseforge as pf


def test_conjugation_matches_dense_rotation():
    op = pf.PauliSum.parse("0.7*XZ + 0.2*YY - 1.1*ZI")
    r = pf.GlobalRotation(0.9, axis_phase=0.4)
    u = np.kron(r.matrix(), r.matrix())
    expected = u.conj().T @ op.to_dense() @ u
    assert np.allclose(pf.conjugate(op, r).to_dense(), expected, atol=1e-12)


def test_cpmg_decouples_uniform_z():
    seq, target = pf.build_sequence("cpmg", spins=3, j0_hz=300.0, p=1.2, bx_hz=40.0, bz_hz=20.0)
    report = pf.validate_decoupling(seq, target, pf.uniform_field(3, pf.Pauli.Z))
    assert report.passed
    broken = pf.validate_decoupling(pf.drop_pulse(seq, 1), target, pf.uniform_field(3, pf.Pauli.Z))
    assert not broken.passed


def test_heisenberg_average_hamiltonian():
    seq, target = pf.build_sequence("heisenberg", spins=2, j0_hz=1.0, t1=1e-3)
    avg = pf.average_hamiltonian(seq)
    scale = pf.time_dilution_factor(seq)
    for letters in ("XX", "YY", "ZZ"):
        assert avg.coefficient(letters).real / scale == pytest.approx(2 * math.pi / 3, rel=1e-12)


def test_beta_bounds():
    assert pf.effective_beta(20e-6, 120e-6, 1.0) == pytest.approx(5 / 6)
    assert pf.effective_beta(20e-6, 120e-6, 2.0) == pytest.approx(0.7917, abs=1e-4)


def test_bad_pauli_text_raises():
    with pytest.raises(ValueError):
        pf.PauliSum.parse("0.5*XQ")


def test_builtin_run_is_reproducible():
    assert "fig5_haldane_shastry" in pf.builtin_names()
    config = json.loads(pf.builtin_config("fig5_haldane_shastry"))
    config["variants"] = [v for v in config["variants"] if v["label"] == "polarized_z"]
    a = pf.run(json.dumps(config), seed=3)
    b = pf.run(json.dumps(config), seed=3, workers=2)
    assert a["series_csv"] == b["series_csv"]
    z = a["variants"]["polarized_z"]["series"]["z"]
    assert len(z["times"]) == len(z["mean"]) > 2
    assert max(abs(v - z["mean"][0]) for v in z["mean"]) < 0.05
