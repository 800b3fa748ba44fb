import math

import numpy as np
import pytest

from qcell.circuits import cnot_matrix
from qcell.optics import (
    H,
    MINUS,
    ModeState,
    OpticsError,
    PLUS,
    PhotonQubit,
    V,
    corrected_channel,
    feed_forward_correct,
    make_ancilla,
    parse_photon,
    pbs_apply,
    sample_run,
    simulate_cnot_setup,
)

CNOT = cnot_matrix(2, 1, 2)
SQ2 = 1 / math.sqrt(2)


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v = v / np.linalg.norm(v)
    return PhotonQubit(complex(v[0]), complex(v[1]))


def single_photon(path, pol):
    occ = [0] * 8
    occ[2 * (path - 1) + pol] = 1
    return ModeState({tuple(occ): 1.0 + 0j})


class TestAncilla:
    def test_bell_two_terms(self):
        s = make_ancilla("bell")
        assert len(s.terms) == 2
        assert all(abs(abs(a) - SQ2) < 1e-12 for a in s.terms.values())

    def test_product_factors(self):
        # a2 carries H in every term, so the partial state over a1 factors out
        s = make_ancilla("product")
        a2_pols = set()
        for occ in s.terms:
            assert occ[4] == 1 and occ[5] == 0  # path 3 = modes 4, 5
            a2_pols.add((occ[4], occ[5]))
        assert a2_pols == {(1, 0)}

    def test_normalized(self):
        for kind in ("bell", "product"):
            assert make_ancilla(kind).norm() == pytest.approx(1.0, abs=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(OpticsError):
            make_ancilla("w")


class TestPbs:
    def test_h_transmits(self):
        out = pbs_apply(single_photon(1, 0), "hv", 1, 2)
        assert len(out.terms) == 1
        occ, amp = next(iter(out.terms.items()))
        assert occ[0] == 1 and abs(amp - 1.0) < 1e-12

    def test_v_reflects(self):
        out = pbs_apply(single_photon(1, 1), "hv", 1, 2)
        occ, amp = next(iter(out.terms.items()))
        assert occ[3] == 1  # V photon moved to path 2
        assert abs(abs(amp) - 1.0) < 1e-12

    def test_plus_splits_in_hv_pbs(self):
        # |+> = (|H>+|V>)/sqrt(2) exits both ports with equal weight
        plus = ModeState(
            {k: SQ2 * v for s in (single_photon(1, 0), single_photon(1, 1))
             for k, v in s.terms.items()}
        )
        out = pbs_apply(plus, "hv", 1, 2)
        paths = sorted(
            (2 * (p - 1), abs(a) ** 2)
            for occ, a in out.terms.items()
            for p in (1, 2)
            if occ[2 * (p - 1)] + occ[2 * (p - 1) + 1] == 1
        )
        assert out.norm() == pytest.approx(1.0, abs=1e-12)
        weights = [abs(a) ** 2 for a in out.terms.values()]
        assert np.allclose(sorted(weights), [0.5, 0.5], atol=1e-12)

    def test_diagonal_pbs_transmits_plus(self):
        plus = ModeState({})
        plus.terms = {}
        for pol, amp in ((0, SQ2), (1, SQ2)):
            occ = [0] * 8
            occ[4 + pol] = 1  # path 3
            plus.terms[tuple(occ)] = amp
        out = pbs_apply(plus, "diagonal", 3, 4)
        # |+> on path 3 transmits: stays on path 3
        for occ, amp in out.terms.items():
            assert occ[4] + occ[5] == 1
        assert out.norm() == pytest.approx(1.0, abs=1e-12)

    def test_photon_number_conserved(self):
        rng = np.random.default_rng(3)
        c, t = random_qubit(rng), random_qubit(rng)
        outcomes, failure = simulate_cnot_setup(c, t, "bell")
        assert failure == pytest.approx(0.75, abs=1e-12)


class TestSimulate:
    def test_hh_input(self):
        outcomes, failure = simulate_cnot_setup(
            PhotonQubit(1, 0), PhotonQubit(1, 0), "bell"
        )
        for o in outcomes:
            assert o.probability == pytest.approx(1 / 16, abs=1e-12)
            if (o.control_side, o.target_side) == (PLUS, H):
                assert np.allclose(o.post_state.amps, [1, 0, 0, 0], atol=1e-12)
        assert failure == pytest.approx(0.75, abs=1e-12)

    def test_vh_input_flips_target(self):
        outcomes, _ = simulate_cnot_setup(PhotonQubit(0, 1), PhotonQubit(1, 0), "bell")
        for o in outcomes:
            corrected = feed_forward_correct(o)
            assert np.allclose(corrected.amps, [0, 0, 0, 1], atol=1e-12)

    def test_each_outcome_one_sixteenth(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            c, t = random_qubit(rng), random_qubit(rng)
            outcomes, failure = simulate_cnot_setup(c, t, "bell")
            for o in outcomes:
                assert o.probability == pytest.approx(1 / 16, abs=1e-12)
            assert sum(o.probability for o in outcomes) + failure == pytest.approx(
                1.0, abs=1e-10
            )

    def test_unnormalized_rejected(self):
        with pytest.raises(OpticsError):
            simulate_cnot_setup(PhotonQubit(1, 1), PhotonQubit(1, 0), "bell")


class TestCorrections:
    def test_plus_h_unchanged(self):
        rng = np.random.default_rng(7)
        c, t = random_qubit(rng), random_qubit(rng)
        expect = CNOT @ np.kron([c.a_h, c.a_v], [t.a_h, t.a_v])
        outcomes, _ = simulate_cnot_setup(c, t, "bell")
        for o in outcomes:
            if (o.control_side, o.target_side) == (PLUS, H):
                assert np.allclose(o.post_state.amps, expect, atol=1e-12)
                assert np.allclose(feed_forward_correct(o).amps, expect, atol=1e-12)

    def test_all_outcomes_correct_to_reference(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            c, t = random_qubit(rng), random_qubit(rng)
            expect = CNOT @ np.kron([c.a_h, c.a_v], [t.a_h, t.a_v])
            outcomes, _ = simulate_cnot_setup(c, t, "bell")
            for o in outcomes:
                assert np.max(np.abs(feed_forward_correct(o).amps - expect)) <= 1e-12

    def test_minus_h_is_xzx_on_control(self):
        rng = np.random.default_rng(9)
        c, t = random_qubit(rng), random_qubit(rng)
        outcomes, _ = simulate_cnot_setup(c, t, "bell")
        ref = next(
            o for o in outcomes if (o.control_side, o.target_side) == (PLUS, H)
        )
        other = next(
            o for o in outcomes if (o.control_side, o.target_side) == (MINUS, H)
        )
        xzx = np.array([[-1, 0], [0, 1]], dtype=complex)
        assert np.allclose(
            other.post_state.amps,
            np.kron(xzx, np.eye(2)) @ ref.post_state.amps,
            atol=1e-12,
        )


class TestChannel:
    def test_bell_channel_is_cnot(self):
        assert np.max(np.abs(corrected_channel("bell") - CNOT)) <= 1e-10

    def test_product_channel_is_identity(self):
        assert np.max(np.abs(corrected_channel("product") - np.eye(4))) <= 1e-10

    def test_product_identity_on_states(self):
        outcomes, _ = simulate_cnot_setup(PhotonQubit(0, 1), PhotonQubit(1, 0), "product")
        for o in outcomes:
            assert np.allclose(
                feed_forward_correct(o).amps, [0, 0, 1, 0], atol=1e-12
            )


class TestSampling:
    def test_deterministic(self):
        a = sample_run(PhotonQubit(1, 0), PhotonQubit(0, 1), "bell", 11, 500)
        b = sample_run(PhotonQubit(1, 0), PhotonQubit(0, 1), "bell", 11, 500)
        assert a == b

    def test_single_shot(self):
        tally = sample_run(PhotonQubit(1, 0), PhotonQubit(1, 0), "bell", 1, 1)
        assert sum(tally.values()) == 1

    def test_16000_shot_statistics(self):
        tally = sample_run(PhotonQubit(1, 0), PhotonQubit(1, 0), "bell", 123, 16000)
        sigma = math.sqrt(16000 * (1 / 16) * (15 / 16))
        for key in ("plus,H", "plus,V", "minus,H", "minus,V"):
            assert abs(tally[key] - 1000) <= 5 * sigma

    def test_bad_shots(self):
        with pytest.raises(OpticsError):
            sample_run(PhotonQubit(1, 0), PhotonQubit(1, 0), "bell", 1, 0)


def test_parse_photon():
    p = parse_photon("0.6,0.8j")
    assert p.a_h == 0.6 and p.a_v == 0.8j
    with pytest.raises(OpticsError):
        parse_photon("1")
    with pytest.raises(OpticsError):
        parse_photon("1,1")  # unnormalized
