import math

import numpy as np
import pytest

coas = pytest.importorskip("coas")


def poly_data(beta, n=300, seed=1):
    X = coas.lhs_design(n, [(0.0, 1.0), (0.0, 1.0)], seed)
    y = np.array([coas.poly(x, beta) for x in X])
    return X, y


def test_fit_and_closed_form_matrix():
    X, y = poly_data(3.0)
    model, report = coas.fit(X, y, [(0.0, 1.0), (0.0, 1.0)], label="f2")
    assert report["r2"] > 0.999
    assert model.p == 2 and model.label == "f2"
    C = coas.cmat(model, model, coas.InputPrior.uniform_box(2))
    truth = np.array([[480.0, 1110.0], [1110.0, 3516.0]]) / 180.0
    assert np.linalg.norm(C - truth) < 0.1
    assert np.allclose(C, C.T)


def test_model_json_round_trip():
    X, y = poly_data(0.5, n=100)
    model, _ = coas.fit(X, y, [(0.0, 1.0), (0.0, 1.0)], max_terms=11)
    back = coas.MarsSurrogate.from_json(model.to_json())
    assert back == model
    x = np.array([0.3, 0.7])
    assert back.evaluate(x) == model.evaluate(x)


def test_concordance_of_polynomial_pair():
    c1 = np.array([[480.0, 165.0], [165.0, 60.0]]) / 180.0
    c2 = np.array([[480.0, 322.5], [322.5, 231.0]]) / 180.0
    c12 = np.array([[480.0, 322.5], [165.0, 105.0]]) / 180.0
    dec = coas.decompose(coas.symmetrize(c12), np.trace(c1), np.trace(c2))
    assert round(dec["concordance"], 3) == 0.944
    assert math.isclose(dec["contributions"].sum(), dec["concordance"], abs_tol=1e-12)
    assert coas.discordance(1.0) == 0.0
    with pytest.raises(ValueError):
        coas.concordance(0.0, 0.0, 1.0)


def test_monte_carlo_agrees_with_closed_form():
    X, y = poly_data(0.0)
    model, _ = coas.fit(X, y, [(0.0, 1.0), (0.0, 1.0)])
    prior = coas.InputPrior.from_dict(
        {"p": 2, "dims": [{"type": "uniform", "lo": 0, "hi": 1},
                          {"type": "normal", "mean": 0.5, "sd": 0.2, "trunc_lo": 0, "trunc_hi": 1}]})
    C = coas.cmat(model, model, prior)
    est, se = coas.mc_cmat(model, model, prior, 20000, seed=3)
    assert np.all(np.abs(est - C) <= 5 * se + 1e-12)


def test_mds_and_centers():
    D = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
    emb = coas.mds_embed(D)
    assert emb["stress"] < 1e-6
    assert all(b <= a for a, b in zip(emb["stress_history"], emb["stress_history"][1:]))
    centers = coas.model_centers(emb["points"], [0, 0, 1], 2)
    assert centers.shape == (2, 2)
