import json
import math
from pathlib import Path

import numpy as np
import pytest

import tinet

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


def scalar_chain(a, c):
    A = tinet.Stencil(1, 1, 1)
    A.set([0], [[-a]])
    A.set([1], [[c]])
    A.set([-1], [[c]])
    eye = tinet.Stencil.identity(1, 1)
    return tinet.Network(A, eye, eye, tinet.Stencil(1, 1, 1))


def test_symbol_matches_direct_sum():
    s = tinet.Stencil(1, 1, 1)
    s.set([0], [[2.0]])
    s.set([1], [[-1.0]])
    for sigma in np.linspace(-math.pi, math.pi, 7):
        expected = 2.0 - np.exp(-1j * sigma)
        assert abs(s.symbol(np.array([sigma]))[0, 0] - expected) < 1e-14


def test_circulant_is_lattice_operator():
    s = tinet.Stencil(1, 1, 1)
    s.set([1], [[3.0]])
    C = s.circulant(5)
    x = np.arange(5.0)
    assert np.allclose(C @ x, 3.0 * np.roll(x, 1))


def test_stencil_json_round_trip():
    s = tinet.Stencil(2, 2, 1)
    s.set([1, -1], [[1.5], [0.25]])
    assert tinet.Stencil.from_json(s.to_json()) == s


def test_transfer_function_closed_form():
    model = scalar_chain(2.0, 0.5)
    s, sigma = 0.3 + 1.1j, 0.7
    expected = 1.0 / (s + 2.0 - 2 * 0.5 * math.cos(sigma))
    assert abs(model.transfer_function(s, np.array([sigma]))[0, 0] - expected) < 1e-14


def test_passivity_verdicts():
    good = tinet.check_passive(scalar_chain(2.0, 0.5), grid=16, include_limit=False)
    assert good["verdict"] is True
    assert good["margin"] > 0

    neg_d = tinet.load_model(str(DATA / "negative_feedthrough.json")).model
    bad = tinet.check_passive(neg_d, grid=16)
    assert bad["verdict"] is False
    assert bad["margin"] == pytest.approx(-2.0)


def test_position_sensing_is_negative_imaginary():
    model = tinet.actuated(tinet.pinned(tinet.chain()), 0.5, "position")
    assert tinet.check_negative_imaginary(model, grid=16, points=10)["verdict"] is True
    assert tinet.check_positive_real(tinet.actuated(tinet.pinned(tinet.chain()), 0.5), grid=16, points=10)["verdict"] is True


def test_chain_dispersion():
    surface = tinet.dispersion(tinet.chain(mass=2.0, kappa=0.5), grid=32)
    for sigma, omega in zip(surface["sigma"], surface["omega"]):
        assert omega[0] == pytest.approx(2 * math.sqrt(0.5 / 2.0) * abs(math.sin(sigma[0] / 2)), abs=1e-12)
    assert tinet.phase_velocity(tinet.chain())["value"] == pytest.approx(1.0, abs=1e-9)


def test_lossless_energy_conserved():
    spec = tinet.pinned(tinet.chain())
    rng = np.random.default_rng(1)
    trace = tinet.simulate(spec.network(), 8, rng.standard_normal(16), 1.0, 1e-3, storage=spec.storage())
    H = np.array(trace["H"])
    assert np.max(np.abs(H - H[0])) < 1e-9 * H[0]


def test_phonon_wave():
    report = tinet.phonon_wave_check(tinet.pinned(tinet.chain()), 16, [3], t_end=2.0, dt=1e-2)
    assert report["residual"] < 1e-6


def test_python_input_callback():
    model = scalar_chain(2.0, 0.5)
    trace = tinet.simulate(model, 4, np.zeros(4), 0.1, 0.01, input=lambda t: np.ones(4), supply=True)
    assert trace["W"][-1] > 0


def test_errors_are_typed():
    with pytest.raises(tinet.InvalidArgument):
        tinet.simulate(scalar_chain(2.0, 0.5), 4, np.zeros(3), 1.0, 0.01)
    with pytest.raises(tinet.InvalidArgument, match="/params/mass"):
        tinet.parse_model(json.dumps({"schema": 1, "preset": "chain", "params": {"mass": "x"}}))


def test_model_file_export_is_stable():
    f = tinet.load_model(str(DATA / "plate.json"))
    assert tinet.parse_model(f.to_json()).to_json() == f.to_json()
