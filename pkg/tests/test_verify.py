"""Verification checkers: samplers, counterexamples, PL oracle, law suites."""

import json
import math

import numpy as np
import pytest

from logcon.channels import compose, noisy_affine
from logcon.concepts import crisp, gauss_fuzz, scalar_concept
from logcon.geometry import Ball, Box, Point, unit_box, whole_space
from logcon.measures import density1d, dirac, gaussian, uniform
from logcon.verify import (
    CheckReport,
    RawFunction,
    check_channel_log_concave,
    check_extended_pl,
    check_log_concave,
    check_markov_laws,
    check_prekopa_leindler,
    check_quasi_concave,
    check_state_log_concave,
    counterexample_remark,
    non_affine_counterexample_channel,
    remark_factors,
    remark_tensor,
    run_suite,
    standard_channel_battery,
    standard_concept_battery,
    standard_state_battery,
)


class TestPointwiseCheckers:
    def test_gauss_fuzz_passes(self):
        C = gauss_fuzz(Ball([0.0, 0.0], 0.4), 0.6)
        rep = check_log_concave(C, Box([-2, -2], [2, 2]), trials=3000, seed=1)
        assert rep.passed
        assert rep.worst_violation <= 1e-9

    def test_remark_d_fails_log_concavity(self):
        """(y^2+1)/2 is convex, so it cannot be log-concave; a witness exists."""
        _, D = remark_factors()
        rep = check_log_concave(D, Box([0.0], [1.0]), trials=3000, seed=2)
        assert not rep.passed
        assert rep.witnesses

    def test_constant_passes(self):
        C = RawFunction(1, lambda pts: np.full(len(pts), 0.7), "const")
        rep = check_log_concave(C, Box([-1.0], [1.0]), trials=1000, seed=3)
        assert rep.passed

    def test_log_concave_implies_quasi_concave_same_seed(self):
        battery = [
            gauss_fuzz(Point([0.0]), 0.5),
            crisp(Ball([0.2], 0.7)),
        ]
        for C in battery:
            lc = check_log_concave(C, Box([-2.0], [2.0]), trials=2000, seed=11)
            qc = check_quasi_concave(C, Box([-2.0], [2.0]), trials=2000, seed=11)
            assert lc.passed
            assert qc.passed

    def test_monotone_function_quasi_concave(self):
        f = RawFunction(1, lambda pts: 1.0 / (1.0 + np.exp(-pts[:, 0])), "sigmoid")
        rep = check_quasi_concave(f, Box([-3.0], [3.0]), trials=2000, seed=5)
        assert rep.passed

    def test_remark_tensor_fails_quasi_concavity(self):
        rep = check_quasi_concave(
            remark_tensor(), unit_box(2), trials=2000, seed=7,
            probes=[((0.0, 0.0), (1.0, 1.0), 0.5)],
        )
        assert not rep.passed
        canonical = rep.witnesses[0]
        # probes are evaluated first, so the canonical witness is recorded
        assert any(
            w["x"] == [0.0, 0.0] and w["y"] == [1.0, 1.0] and w["p"] == 0.5
            for w in rep.witnesses
        )
        assert canonical["violation"] >= 0.03125

    def test_reports_reproducible(self):
        C = gauss_fuzz(Point([0.0]), 1.0)
        a = check_log_concave(C, Box([-2.0], [2.0]), trials=500, seed=9)
        b = check_log_concave(C, Box([-2.0], [2.0]), trials=500, seed=9)
        assert a.to_json() == b.to_json()


class TestCounterexampleRemark:
    def test_exact_dyadic_values(self):
        v00, v11, vmid = counterexample_remark()
        assert (v00, v11, vmid) == (0.5, 0.5, 0.46875)

    def test_defect_is_exact(self):
        v00, v11, vmid = counterexample_remark()
        assert min(v00, v11) - vmid == 0.03125


class TestPrekopaLeindler:
    def test_equal_indicators_give_unity(self):
        g = RawFunction(
            1, lambda pts: ((pts[:, 0] >= 0) & (pts[:, 0] <= 1)).astype(float),
            "ind[0,1]", support=Box([0.0], [1.0]),
        )
        for p in (0.25, 0.5, 0.8):
            rep = check_prekopa_leindler(g, g, p, grid_resolution=1e-3)
            assert rep.passed
            assert rep.meta["int_f"] == pytest.approx(1.0, abs=1e-3)
            assert rep.meta["rhs"] == pytest.approx(1.0, abs=1e-3)

    def test_gaussians_hold_with_margin(self):
        """Shifted Gaussians: int f = sqrt(2 pi (p s1^2 + q s2^2)) exceeds
        rhs = sqrt(2 pi) s1^p s2^q by the AM-GM gap."""
        def gauss(mu, s):
            return RawFunction(
                1, lambda pts: np.exp(-0.5 * ((pts[:, 0] - mu) / s) ** 2),
                f"g{mu}", support=Box([mu - 8 * s], [mu + 8 * s]),
            )

        p = 0.5
        s1, s2 = 0.5, 1.0
        rep = check_prekopa_leindler(gauss(-0.5, s1), gauss(0.7, s2), p, 1e-3)
        assert rep.passed
        want_lhs = math.sqrt(2 * math.pi * (p * s1**2 + (1 - p) * s2**2))
        want_rhs = math.sqrt(2 * math.pi) * s1**p * s2 ** (1 - p)
        assert rep.meta["int_f"] == pytest.approx(want_lhs, abs=5e-3)
        assert rep.meta["rhs"] == pytest.approx(want_rhs, abs=5e-3)
        assert rep.meta["margin"] > 0.1

    def test_degenerate_p_rejected(self):
        g = RawFunction(1, lambda pts: np.ones(len(pts)), "one", support=unit_box(1))
        with pytest.raises(ValueError):
            check_prekopa_leindler(g, g, 0.0)
        with pytest.raises(ValueError):
            check_prekopa_leindler(g, g, 1.0)


class TestExtendedPL:
    def test_uniform_reduces_to_classical(self):
        w = uniform(Box([-1.0], [1.0]))
        f = RawFunction(1, lambda pts: np.exp(-np.abs(pts[:, 0])), "laplace-bump")
        rep = check_extended_pl(w, w, w, f, f, f, p=0.5, seed=1)
        assert rep.verdict == "pass"

    def test_dirac_equality_case(self):
        d = dirac([0.3])
        one = RawFunction(1, lambda pts: np.ones(len(pts)), "one")
        rep = check_extended_pl(d, d, d, one, one, one, p=0.5, seed=2)
        assert rep.verdict == "pass"
        assert rep.meta["int_f_mu"] == pytest.approx(1.0)
        assert rep.meta["rhs"] == pytest.approx(1.0)

    def test_shifted_gaussians_hold(self):
        """Three shifted Gaussians with matching function triple: premise
        holds (each is log-concave) and the conclusion follows."""
        mu = gaussian([0.0], 1.0)
        nu = gaussian([0.4], 1.0)
        om = gaussian([-0.4], 1.0)
        f = RawFunction(1, lambda pts: np.exp(-0.5 * pts[:, 0] ** 2), "bump0")
        g = RawFunction(1, lambda pts: np.exp(-0.5 * (pts[:, 0] - 0.4) ** 2), "bump+")
        h = RawFunction(1, lambda pts: np.exp(-0.5 * (pts[:, 0] + 0.4) ** 2), "bump-")
        rep = check_extended_pl(mu, nu, om, f, g, h, p=0.5, seed=3)
        assert rep.verdict == "pass"

    def test_premise_unmet_reported_not_failed(self):
        """A mass-inflating middle measure cannot satisfy the premise against
        a much heavier nu; the report says so instead of failing."""
        mu = dirac([5.0])  # all mass far away: mu(C) = 0 for probe mixes near 0
        nu = gaussian([0.0], 0.5)
        om = gaussian([0.0], 0.5)
        one = RawFunction(1, lambda pts: np.ones(len(pts)), "one")
        rep = check_extended_pl(mu, nu, om, one, one, one, p=0.5, seed=4)
        assert rep.verdict == "premise-unmet"
        assert rep.witnesses


class TestChannelAndStateCheckers:
    def test_noisy_affine_gaussian_passes(self):
        ch = noisy_affine([[1.2]], [0.1], gaussian([0.0], 0.5))
        rep = check_channel_log_concave(ch, trials=300, seed=0)
        assert rep.passed
        assert rep.meta["active_trials"] > 50

    def test_composite_of_passing_channels_passes(self):
        f = noisy_affine([[1.0]], [0.0], gaussian([0.0], 0.3))
        g = noisy_affine([[0.8]], [0.4], gaussian([0.0], 0.6))
        rep = check_channel_log_concave(compose(g, f), trials=300, seed=1)
        assert rep.passed

    def test_non_affine_dirac_channel_fails_with_witness(self):
        bad = non_affine_counterexample_channel()
        rep = check_channel_log_concave(
            bad, trials=1000, seed=0, set_kinds=("box",), region=Box([0.0], [1.0])
        )
        assert not rep.passed
        w = rep.witnesses[0]
        assert w["violation"] > 1e-9
        # replay the witness: it genuinely violates the kernel inequality
        from logcon.geometry import Hull, minkowski_mix, mix, set_from_json

        A = set_from_json(w["A"])
        B = set_from_json(w["B"])
        x, y, p = np.array(w["x"]), np.array(w["y"]), w["p"]
        lhs = bad.kernel_with_error(mix(x, y, p), minkowski_mix(A, B, p)).value
        rhs = bad.kernel_with_error(x, A).value ** p * bad.kernel_with_error(y, B).value ** (1 - p)
        assert rhs - lhs > 1e-9

    def test_state_batteries_pass(self):
        for name, st, kinds in standard_state_battery(0)[:4]:
            rep = check_state_log_concave(st, trials=200, seed=0, set_kinds=kinds)
            assert rep.passed, name


class TestMarkovLaws:
    def test_exact_on_dims_1_to_4(self):
        for dim in (1, 2, 3, 4):
            rep = check_markov_laws(whole_space(dim), probes=50, seed=0)
            assert rep.passed
            assert rep.worst_violation == 0.0
            assert rep.tolerance == 0.0


class TestSuites:
    def test_concept_battery_has_twenty_entries(self):
        assert len(standard_concept_battery(0)) == 20

    def test_channel_battery_contents(self):
        names = [n for n, _, _ in standard_channel_battery(0)]
        for needed in ("identity_2d", "copy_1d", "discard_2d", "update_gaussfuzz",
                       "crisp_affine_partial", "noisy_affine_iso_2d"):
            assert needed in names

    def test_markov_suite_runs(self):
        reports = run_suite("markov", seed=0, trials=20)
        assert len(reports) == 4
        assert all(r.passed for r in reports)

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError):
            run_suite("nonsense")

    def test_report_json_round_trip(self):
        rep = CheckReport("demo", 10, 0.0, [], "pass", 1, 1e-9, {"k": 1})
        back = json.loads(json.dumps(rep.to_json()))
        assert back["name"] == "demo"
        assert back["verdict"] == "pass"
        assert "PASS" in rep.render()
