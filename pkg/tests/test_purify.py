"""Unit tests for purification steps, Monte Carlo and exact."""

import numpy as np
import pytest

from graphcost.graphs import (Graph, pauli_index_oracle, prepare_graph_state,
                              readout_index, star)
from graphcost.noise import NoiseParams
from graphcost.purify import (DiagonalEnsemble, StepOutcome,
                              bepp_coefficient_map, purification_step)
from graphcost.tableau import StabilizerRegister

PERFECT = NoiseParams(local_model="none")


def pair_run(mu_src, mu_tgt, protocol, seed=0):
    """One noiseless pair step on index states; returns the surviving index
    (as a list) or None if rejected."""
    n = len(mu_src)
    rng = np.random.default_rng(seed)
    reg = StabilizerRegister(2 * n, record=False)
    g = star(n)
    h1 = prepare_graph_state(reg, range(n), g)
    h2 = prepare_graph_state(reg, range(n, 2 * n), g)
    for h, mu in ((h1, mu_src), (h2, mu_tgt)):
        for v, bit in enumerate(mu):
            if bit:
                reg.apply_pauli("Z", h.qubits[v])
    kept, _ = purification_step(reg, [h1, h2], protocol, PERFECT, rng)
    if not kept:
        return None
    return list(readout_index(reg, kept[0], rng))


def test_p1_pair_semantics():
    # keep iff the hub-side bits agree; survivor keeps the common hub bit
    # and the XOR of the leaf bits
    assert pair_run((1, 0, 0), (0, 0, 0), "P1") is None
    assert pair_run((1, 0, 0), (1, 0, 0), "P1") == [1, 0, 0]
    assert pair_run((0, 1, 0), (0, 0, 1), "P1") == [0, 1, 1]
    assert pair_run((0, 1, 0), (0, 1, 0), "P1") == [0, 0, 0]
    assert pair_run((0, 1, 1), (0, 0, 0), "P1") == [0, 1, 1]


def test_p2_pair_semantics():
    # mirror image: keep iff the leaf-side bits agree; survivor keeps the
    # common leaf bits and the XOR of the hub bit
    assert pair_run((0, 1, 0), (0, 0, 1), "P2") is None
    assert pair_run((0, 1, 1), (0, 0, 0), "P2") is None
    assert pair_run((1, 0, 0), (1, 0, 0), "P2") == [0, 0, 0]
    assert pair_run((1, 0, 0), (0, 0, 0), "P2") == [1, 0, 0]
    assert pair_run((0, 1, 0), (0, 1, 0), "P2") == [0, 1, 0]


def test_pb_pair_semantics():
    # twirl maps (a, b) -> (a, a^b), then the pair rule applies
    assert pair_run((0, 0), (0, 0), "Pb") == [0, 0]
    assert pair_run((1, 0), (1, 0), "Pb") == [0, 1]
    assert pair_run((0, 1), (0, 1), "Pb") == [0, 1]
    assert pair_run((1, 1), (1, 1), "Pb") == [0, 0]
    assert pair_run((1, 0), (0, 0), "Pb") is None
    assert pair_run((0, 1), (0, 0), "Pb") is None
    assert pair_run((1, 1), (1, 0), "Pb") is None


def test_pair_outcomes_branch_independent():
    # the random measurement branches never change keep/readout decisions
    for seed in range(8):
        assert pair_run((1, 0, 0), (1, 0, 0), "P2", seed) == [0, 0, 0]
        assert pair_run((0, 1, 0), (0, 0, 1), "P1", seed) == [0, 1, 1]
        assert pair_run((1, 0), (0, 0), "Pb", seed) is None


def test_purification_step_counts_and_errors():
    rng = np.random.default_rng(1)
    reg = StabilizerRegister(6 * 2, record=False)
    handles = [prepare_graph_state(reg, range(2 * i, 2 * i + 2), star(2))
               for i in range(5)]  # odd count: one left over
    kept, out = purification_step(reg, handles, "P2", PERFECT, rng)
    assert out == StepOutcome(before=5, paired=4, kept=2)
    assert [h.qubits for h in kept] == [(0, 1), (4, 5)]
    assert purification_step(reg, [], "P2", PERFECT, rng) == \
        ([], StepOutcome(0, 0, 0))
    with pytest.raises(ValueError):
        purification_step(reg, handles[:2], "Px", PERFECT, rng)
    reg3 = StabilizerRegister(6, record=False)
    h3 = [prepare_graph_state(reg3, range(3 * i, 3 * i + 3), star(3))
          for i in range(2)]
    with pytest.raises(ValueError):
        purification_step(reg3, h3, "Pb", PERFECT, rng)


def test_purification_step_rejects_mixed_graphs():
    rng = np.random.default_rng(2)
    reg = StabilizerRegister(6, record=False)
    h1 = prepare_graph_state(reg, range(3), star(3))
    h2 = prepare_graph_state(reg, range(3, 6), Graph(3, [(0, 1), (1, 2)]))
    with pytest.raises(ValueError):
        purification_step(reg, [h1, h2], "P1", PERFECT, rng)


def test_coefficient_map_values():
    out, k = bepp_coefficient_map(np.array([1.0, 0.0, 0.0, 0.0]))
    assert k == 1.0 and list(out) == [1.0, 0.0, 0.0, 0.0]
    # the uniform mixture is a fixed point with success probability 1/2
    out, k = bepp_coefficient_map(np.array([0.25] * 4))
    assert k == pytest.approx(0.5)
    assert list(out) == pytest.approx([0.25] * 4)
    x = np.array([0.7, 0.2, 0.06, 0.04])
    out, k = bepp_coefficient_map(x)
    assert k == pytest.approx((0.7 + 0.04) ** 2 + (0.2 + 0.06) ** 2)
    assert out[0] == pytest.approx((0.49 + 0.0016) / k)
    assert out[2] == pytest.approx(2 * 0.7 * 0.04 / k)
    assert out.sum() == pytest.approx(1.0)


def test_diagonal_ensemble_init_and_channels():
    g = star(3)
    ens = DiagonalEnsemble(g)
    assert ens.fidelity() == 1.0
    assert ens.flat()[0] == 1.0 and ens.flat().sum() == 1.0
    # depolarizing on the hub: X/Y/Z images carry (1-q)/3 each
    q = 0.7
    ens.apply_channel(0, "depol", q)
    w = ens.weights
    mu0 = np.zeros(3, dtype=np.uint8)
    assert w[tuple(mu0)] == pytest.approx(q)
    for kind in "XYZ":
        img = pauli_index_oracle(mu0, kind, 0, g)
        assert w[tuple(img)] == pytest.approx((1 - q) / 3)
    assert ens.flat().sum() == pytest.approx(1.0)


def test_diagonal_ensemble_phase_and_bit():
    g = star(3)
    ens = DiagonalEnsemble(g)
    ens.apply_channel(1, "phase", 0.8)
    assert ens.weights[0, 0, 0] == pytest.approx(0.8)
    assert ens.weights[0, 1, 0] == pytest.approx(0.2)
    ens2 = DiagonalEnsemble(g)
    ens2.apply_channel(1, "bit", 0.8)  # X on a leaf flips the hub bit
    assert ens2.weights[1, 0, 0] == pytest.approx(0.2)
    cp = ens.copy()
    cp.apply_channel(2, "phase", 0.5)
    assert ens.weights[0, 0, 0] == pytest.approx(0.8)  # copy is independent


def test_diagonal_p2_round_hand_value():
    # leaves flipped independently with probability 0.2: coincidence keeps
    # k = 0.64^2 + 2*0.16^2 + 0.04^2, survivors all-zero with 0.4096/k
    g = star(3)
    ens = DiagonalEnsemble(g)
    for v in (1, 2):
        ens.apply_channel(v, "phase", 0.8)
    k = ens.step_p2()
    assert k == pytest.approx(0.4624)
    assert ens.fidelity() == pytest.approx(0.4096 / 0.4624)


def test_diagonal_p1_round_hand_value():
    # hub flipped with probability 0.3: P1 keeps on agreement,
    # k = 0.7^2 + 0.3^2, fidelity 0.49/k
    g = star(3)
    ens = DiagonalEnsemble(g)
    ens.apply_channel(0, "phase", 0.7)
    k = ens.step_p1()
    assert k == pytest.approx(0.58)
    assert ens.fidelity() == pytest.approx(0.49 / 0.58)


def test_step_bepp_equals_coefficient_map():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.random(4)
        x /= x.sum()
        ens = DiagonalEnsemble(star(2), x.reshape(2, 2).copy())
        k = ens.step_bepp()
        out, k_ref = bepp_coefficient_map(x)
        assert k == pytest.approx(k_ref, rel=1e-12)
        assert list(ens.flat()) == pytest.approx(list(out), rel=1e-12)


def test_monte_carlo_matches_exact_p2_round():
    # 2000 copies of a 3-star with independent leaf phase flips, one P2
    # round: kept fraction and survivor quality match the exact ensemble
    rng = np.random.default_rng(123)
    g = star(3)
    q = 0.8
    exact = DiagonalEnsemble(g)
    for v in (1, 2):
        exact.apply_channel(v, "phase", q)
    k_exact = exact.step_p2()
    f_exact = exact.fidelity()

    copies, cap = 2000, 16
    paired = kept = good = 0
    done = 0
    while done < copies:
        take = min(cap, copies - done)
        done += take
        reg = StabilizerRegister(take * 3, record=False)
        handles = []
        for c in range(take):
            h = prepare_graph_state(reg, range(3 * c, 3 * c + 3), g)
            handles.append(h)
            for v in (1, 2):
                if rng.random() < 1 - q:
                    reg.apply_pauli("Z", h.qubits[v])
        surv, out = purification_step(reg, handles, "P2", PERFECT, rng)
        paired += out.paired
        kept += out.kept
        good += sum(int(not readout_index(reg, h, rng).any()) for h in surv)
    pairs = paired // 2
    z_k = (kept / pairs - k_exact) / np.sqrt(k_exact * (1 - k_exact) / pairs)
    z_f = (good / kept - f_exact) / np.sqrt(f_exact * (1 - f_exact) / kept)
    assert abs(z_k) < 4
    assert abs(z_f) < 4
