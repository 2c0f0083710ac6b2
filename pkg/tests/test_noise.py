"""Unit tests for channels, local noise, transmission, and calibration."""

import numpy as np
import pytest

from graphcost.dense import state_from_tableau
from graphcost.graphs import prepare_graph_state, readout_index, star
from graphcost.noise import (NoiseParams, OutOfRangeError, apply_local_noise,
                             depol_index_fidelity, lne_estimate, noisy_gate,
                             reliability_to_retention,
                             retention_to_reliability, sample_channel,
                             transmit)
from graphcost.tableau import StabilizerRegister


def test_reliability_retention_conversions():
    assert reliability_to_retention(1.0) == 1.0
    assert reliability_to_retention(0.9) == pytest.approx(0.925)
    assert reliability_to_retention(0.99) == pytest.approx(0.9925)
    assert retention_to_reliability(0.925) == pytest.approx(0.9)
    for p in (0.0, 0.4, 0.77, 1.0):
        assert retention_to_reliability(reliability_to_retention(p)) \
            == pytest.approx(p)
    with pytest.raises(ValueError):
        reliability_to_retention(-0.5)
    with pytest.raises(ValueError):
        retention_to_reliability(1.5)


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(channel="amplitude")
    with pytest.raises(ValueError):
        NoiseParams(local_model="thermal")
    with pytest.raises(ValueError):
        NoiseParams(q_channel=1.5)
    with pytest.raises(ValueError):
        NoiseParams(q_local=-0.1)


def test_local_channel_selection():
    depol = NoiseParams(local_model="depol", q_local=0.99)
    assert depol.local_channel(0) == ("depol", 0.99)
    assert depol.local_channel(3) == ("depol", 0.99)
    assert depol.noisy_fusion
    toy = NoiseParams(local_model="toy", q_local=0.95)
    assert toy.local_channel(0) == ("bit", 0.95)
    assert toy.local_channel(2) == ("phase", 0.95)
    assert not toy.noisy_fusion
    assert NoiseParams(local_model="none").local_channel(0) is None
    # perfect locals short-circuit regardless of the model name
    assert NoiseParams(local_model="depol", q_local=1.0).local_channel(0) is None


def test_sample_channel_statistics():
    rng = np.random.default_rng(0)
    n = 40000
    counts = {"I": 0, "X": 0, "Y": 0, "Z": 0}
    for _ in range(n):
        counts[sample_channel("depol", 0.7, rng)] += 1
    assert counts["I"] / n == pytest.approx(0.7, abs=0.01)
    for k in "XYZ":
        assert counts[k] / n == pytest.approx(0.1, abs=0.01)
    phase = {sample_channel("phase", 0.5, rng) for _ in range(200)}
    assert phase == {"I", "Z"}
    bit = {sample_channel("bit", 0.5, rng) for _ in range(200)}
    assert bit == {"I", "X"}
    assert sample_channel("phase", 1.0, rng) == "I"
    assert sample_channel("bit", 0.0, rng) == "X"
    with pytest.raises(ValueError):
        sample_channel("amp", 0.0, rng)


def test_depol_draw_count_is_fixed():
    # the sampler consumes one uniform, plus one integer when it alters
    rng = np.random.default_rng(1)
    twin = np.random.default_rng(1)
    for _ in range(200):
        out = sample_channel("depol", 0.6, rng)
        retained = twin.random() >= 1.0 - 0.6
        if retained:
            assert out == "I"
        else:
            assert out == "XYZ"[int(twin.integers(0, 3))]
    assert rng.bit_generator.state == twin.bit_generator.state


def test_transmit_counts_and_relabels():
    rng = np.random.default_rng(2)
    params = NoiseParams(channel="phase", q_channel=1.0)
    reg = StabilizerRegister(2)
    transmit(reg, 1, 0, 3, params, rng)
    assert reg.sites[1] == 3
    assert reg.channel_uses == 1
    with pytest.raises(ValueError):
        transmit(reg, 1, 0, 2, params, rng)  # qubit 1 is no longer at site 0


def test_transmit_noiseless_preserves_state():
    rng = np.random.default_rng(3)
    params = NoiseParams(channel="depol", q_channel=1.0)
    reg = StabilizerRegister(3)
    h = prepare_graph_state(reg, range(3), star(3))
    before = state_from_tableau(reg)
    for v in (1, 2):
        transmit(reg, v, 0, v, params, rng)
    after = state_from_tableau(reg)
    assert abs(abs(np.vdot(before, after)) - 1.0) < 1e-9
    assert list(readout_index(reg, h, rng)) == [0, 0, 0]


def test_transmit_phase_flip_statistics():
    # q=0.6 phase channel on a star leaf flips that index bit 40% of the time
    rng = np.random.default_rng(4)
    params = NoiseParams(channel="phase", q_channel=0.6)
    flips = 0
    n = 4000
    for _ in range(n):
        reg = StabilizerRegister(2, record=False)
        h = prepare_graph_state(reg, range(2), star(2))
        transmit(reg, 1, 0, 1, params, rng)
        flips += int(readout_index(reg, h, rng)[1])
    assert flips / n == pytest.approx(0.4, abs=0.025)


def test_apply_local_noise_models():
    rng = np.random.default_rng(5)
    # toy model at Alice: bit flips only; on a pair graph an X on the hub
    # flips the leaf's index bit
    params = NoiseParams(local_model="toy", q_local=0.0, alice_site=0)
    reg = StabilizerRegister(2, record=False)
    h = prepare_graph_state(reg, range(2), star(2))
    apply_local_noise(reg, 0, params, rng)
    assert list(readout_index(reg, h, rng)) == [0, 1]
    # toy model elsewhere: phase flips; Z on the leaf flips its own bit
    reg = StabilizerRegister(2, record=False)
    h = prepare_graph_state(reg, range(2), star(2))
    reg.sites[1] = 1
    apply_local_noise(reg, 1, params, rng)
    assert list(readout_index(reg, h, rng)) == [0, 1]
    # "none" leaves the register untouched and draws nothing
    params = NoiseParams(local_model="none")
    before = rng.bit_generator.state
    reg = StabilizerRegister(1)
    apply_local_noise(reg, 0, params, rng)
    assert rng.bit_generator.state == before


def test_noisy_gate_runs_gate_after_noise():
    rng = np.random.default_rng(6)
    params = NoiseParams(local_model="none")
    reg = StabilizerRegister(2)
    reg.h(0)
    noisy_gate(reg, "CNOT", (0, 1), params, rng)
    b0, _ = reg.measure_z(0, rng)
    b1, det = reg.measure_z(1, rng)
    assert det and b0 == b1
    # a fused prefix rotation is applied before the gate, without extra noise
    reg = StabilizerRegister(2)
    noisy_gate(reg, "CZ", (0, 1), params, rng, prefix=(("H", 0), ("H", 1)))
    # H|00> then CZ = 2-qubit graph state: index readout is all-zero
    psi = state_from_tableau(reg)
    ref = np.array([0.5, 0.5, 0.5, -0.5])
    assert abs(abs(np.vdot(psi, ref)) - 1.0) < 1e-9


def test_noisy_gate_pauli_prefix():
    rng = np.random.default_rng(7)
    params = NoiseParams(local_model="none")
    reg = StabilizerRegister(1)
    noisy_gate(reg, "H", (0,), params, rng, prefix=(("X", 0),))
    # X then H on |0> = |->: measuring X gives 1 deterministically
    bit, det = reg.measure_x(0, rng)
    assert det and bit == 1


def test_depol_index_fidelity_limits():
    rng = np.random.default_rng(8)
    g = star(4)
    f0, s0 = depol_index_fidelity(g, 0.0, 1000, rng)
    assert f0 == 1.0 and s0 == pytest.approx(0.0, abs=1e-6)
    # at alteration 3/4 every qubit applies a uniform Pauli (I included), so
    # the index is exactly uniform over the 2^n strings
    f1, _ = depol_index_fidelity(g, 0.75, 40000, rng)
    assert f1 == pytest.approx(1.0 / 16.0, abs=0.006)


def test_depol_index_fidelity_pair_rate():
    # on a pair graph a single fault always moves the index (X flips the
    # partner's bit, Z the own bit, Y both); two faults cancel for 3 of the
    # 9 kind combinations, so F = (1-x)^2 + x^2/3
    rng = np.random.default_rng(9)
    x = 0.3
    f, sig = depol_index_fidelity(star(2), x, 200000, rng)
    assert f == pytest.approx((1 - x) ** 2 + x**2 / 3.0, abs=4 * sig)


def test_lne_estimate_round_trip():
    # calibrate the alteration for a known fidelity, then check it reproduces
    rng = np.random.default_rng(10)
    g = star(3)
    target = 0.8
    x, err = lne_estimate(g, target, rng, tol=5e-4)
    assert 0.0 < x < 0.75
    assert err < 0.01
    f, sig = depol_index_fidelity(g, x, 200000, rng)
    assert f == pytest.approx(target, abs=3 * sig + 5e-4)


def test_lne_estimate_edges():
    rng = np.random.default_rng(11)
    g = star(3)
    assert lne_estimate(g, 1.0, rng) == (0.0, 0.0)
    with pytest.raises(OutOfRangeError):
        lne_estimate(g, 0.1, rng)  # below the 1/8 floor
    with pytest.raises(OutOfRangeError):
        lne_estimate(g, 1.2, rng)
