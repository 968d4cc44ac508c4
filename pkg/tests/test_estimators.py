import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import hamiltonian_for
from vqf.analysis import decode_state
from vqf.errors import EvenInput
from vqf.estimators import FEATURES, ClauseEncoder, VQEFactorizer
from vqf.hamiltonian import haar_mean, trace


def test_params_roundtrip_and_clone():
    est = VQEFactorizer(ansatz="t", layers=2, restarts=3, random_state=7)
    params = est.get_params()
    assert params["ansatz"] == "t" and params["restarts"] == 3
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(restarts=5)
    assert est.restarts == 5
    assert ClauseEncoder(prior=True).get_params() == {"prior": True, "preprocess": True}


def test_encoder_features():
    enc = ClauseEncoder()
    F = enc.fit_transform([91, 25])
    assert F.shape == (2, len(FEATURES))
    H = hamiltonian_for(91)
    assert F[0, 0] == 10
    assert F[0, 1] == pytest.approx(trace(H))
    assert F[0, 3] == pytest.approx(haar_mean(H))
    assert list(enc.get_feature_names_out()) == list(FEATURES)
    assert enc.reduced_system(91).qubit_count == 10


def test_encoder_solved_instance_row():
    F = ClauseEncoder(prior=True).fit_transform([25])
    assert F[0, 0] == 0 and np.all(np.isnan(F[0, 1:]))


def test_not_fitted_and_bad_input():
    with pytest.raises(NotFittedError):
        ClauseEncoder().transform([91])
    with pytest.raises(NotFittedError):
        VQEFactorizer().predict([91])
    with pytest.raises(EvenInput):
        ClauseEncoder().fit([90])


def test_factorizer_fit_predict_score():
    est = VQEFactorizer(ansatz="cx", layers=2, restarts=4, random_state=1)
    est.fit([35, 25])
    pred = est.predict([35, 25])
    assert pred.shape == (2, 2)
    for m, (p, q) in zip((35, 25), pred):
        if p:
            assert p * q == m and p >= q
    s = est.score([35, 25])
    assert 0.0 <= s <= 1.0
    best = est.results_[35]["best"]
    assert best.final_energy == min(est.results_[35]["stats"].energies)
    with pytest.raises(ValueError):
        est.predict([91])


def test_factorizer_solved_by_preprocessing():
    est = VQEFactorizer(prior=True, restarts=1).fit(49)
    assert est.predict(49).tolist() == [[7, 7]]
    assert est.score(49) == 1.0


def test_factorizer_deterministic():
    a = VQEFactorizer(ansatz="t", layers=1, restarts=3, random_state=5).fit([91])
    b = VQEFactorizer(ansatz="t", layers=1, restarts=3, random_state=5).fit([91])
    assert np.array_equal(a.results_[91]["stats"].energies, b.results_[91]["stats"].energies)


def test_decode_state_of_ground_state():
    est = ClauseEncoder().fit([91])
    r = est.reduced_system(91)
    H = hamiltonian_for(91)
    from vqf.hamiltonian import dense_table
    idx = int(np.argmin(dense_table(H)))
    assert decode_state(r, idx) == (13, 7)
