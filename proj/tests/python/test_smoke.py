import math
import pathlib

import numpy as np
import pytest

import mindet

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def test_h2_optimum():
    wf = mindet.generate_h2_model(0.9)
    rep = mindet.optimize(wf)
    assert rep.converged
    assert abs(rep.final_f - 0.9) < 1e-12
    assert rep.character == "maximum"
    u = rep.final_u
    assert u.shape == (4, 2)
    np.testing.assert_allclose(u.T @ u, np.eye(2), atol=1e-12)


def test_h2_surface():
    c0 = 0.8
    wf = mindet.generate_h2_model(c0)
    s = math.sqrt(1 - c0 * c0)
    for ka, kb in [(0.1, 0.2), (-0.7, 0.4), (1.2, 1.2)]:
        expected = c0 * math.cos(ka) * math.cos(kb) + s * math.sin(ka) * math.sin(kb)
        assert abs(mindet.overlap(mindet.h2_point(ka, kb), wf) - expected) < 1e-14


def test_algorithms_agree():
    wf = mindet.read_wavefunction(str(FIXTURES / "random_ci_6_3_42.wfn"))
    values = [abs(mindet.optimize(wf, algorithm=a).final_f) for a in ("absil", "thouless", "hybrid")]
    assert max(values) - min(values) < 1e-8


def test_hubbard_mean_field_start():
    wf = mindet.hubbard_dimer(1.0, 10.0)
    rep = mindet.optimize(wf, start=mindet.hubbard_mean_field(1.0, 10.0))
    assert rep.converged
    assert rep.final_grad_norm < 1e-8


def test_round_trip_and_errors():
    wf = mindet.random_ci(6, 3, 10, 42)
    assert wf.serialize() == (FIXTURES / "random_ci_6_3_42.wfn").read_text()
    assert len(mindet.parse_wavefunction(wf.serialize())) == 10
    with pytest.raises(ValueError):
        mindet.parse_wavefunction("WFN 1\nnorb 4\nnelec 2\n3 1 1.0\n")
    with pytest.raises(ValueError):
        mindet.optimize(wf, algorithm="simplex")


def test_metrics():
    d = mindet.distances(1 / math.sqrt(2))
    assert abs(d["fubini_study"] - math.pi / 4) < 1e-15
    assert abs(d["brlcm"] - 0.5) < 1e-15
    a = mindet.random_stiefel(6, 3, 1)
    assert mindet.subspace_distance(a, a @ np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))[0]) < 1e-7
    assert abs(mindet.plucker_residual(mindet.generate_h2_model(1.0))) < 1e-15
