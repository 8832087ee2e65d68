"""Tests for the deterministic certificate-parameter sweeps."""

from fractions import Fraction
import random

import pytest

from pinchcert.exact_poly import rat
from pinchcert import param_search as ps
from pinchcert import pinching_bounds as pb

F = Fraction

WIDTH = F(1, 10**6)


# ---------------------------------------------------------------------------
# left threshold
# ---------------------------------------------------------------------------


def test_left_threshold_reproduces_paper_enclosure():
    th = ps.left_threshold(F(1, 2), F(5, 3), WIDTH)
    assert not th.degenerate
    assert rat("1.7075") < th.enclosure.lo
    assert th.enclosure.hi < rat("1.7076")
    assert th.enclosure.width <= WIDTH
    assert ps.replay_threshold(th)


def test_left_threshold_endpoint_signs():
    th = ps.left_threshold(F(1, 2), F(5, 3), WIDTH)
    p = th.certificate.polynomial
    assert p(th.enclosure.lo) < 0 < p(th.enclosure.hi)
    assert th.phi_lo < 0 < th.phi_hi


def test_left_threshold_degenerate_for_large_w():
    th = ps.left_threshold(F(1, 2), F(9, 5), WIDTH)
    assert th.degenerate
    assert th.enclosure.lo == th.enclosure.hi == F(5, 3)
    assert th.phi_lo > 0
    assert ps.replay_threshold(th)


def test_left_threshold_continuity_in_t():
    base = ps.left_threshold(F(1, 2), F(5, 3), WIDTH)
    near = ps.left_threshold(F(499, 1000), F(5, 3), WIDTH)
    assert abs(near.enclosure.lo - base.enclosure.lo) < F(1, 1000)


def test_left_threshold_domain_validation():
    with pytest.raises(ValueError):
        ps.left_threshold(F(3, 4), F(5, 3), WIDTH)
    with pytest.raises(ValueError):
        ps.left_threshold(F(1, 2), F(3, 2), WIDTH)
    with pytest.raises(ValueError):
        ps.left_threshold(F(1, 2), F(5, 3), F(0))


def test_left_branch_max_equals_certificate_value():
    # the piecewise-polynomial branch maximum must agree with the direct
    # supremum evaluation everywhere on the domain
    rng = random.Random(42)
    for t, w in [(F(1, 2), F(5, 3)), (F(1, 4), F(5, 3)), (F(3, 10), F(17, 10))]:
        branches = ps.left_branch_polynomials(w, t)
        for _ in range(40):
            x = F(5, 3) + F(2, 15) * F(rng.randint(0, 10**5), 10**5)
            applicable = [p(x) for (_, p, seg) in branches if seg.contains(x)]
            assert max(applicable) == ps.left_certificate_value(t, w, x)


def test_left_certificate_value_matches_pinching_bounds():
    rng = random.Random(7)
    for _ in range(20):
        t = F(rng.randint(1, 100), 200)
        x = F(5, 3) + F(2, 15) * F(rng.randint(0, 10**4), 10**4)
        assert ps.left_certificate_value(t, F(5, 3), x) == pb.left_certificate(x, F(5, 3), t)


def test_left_threshold_negativity_dossier_covers_initial_segment():
    # spot-check the certified claim: the certificate value is strictly
    # negative all the way from the domain edge to the enclosure
    th = ps.left_threshold(F(1, 2), F(5, 3), WIDTH)
    lo = th.enclosure.lo
    for k in range(1, 50):
        x = F(5, 3) + (lo - F(5, 3)) * F(k, 50)
        assert ps.left_certificate_value(F(1, 2), F(5, 3), x) < 0
    assert all(c.replay() for c in th.support)


# ---------------------------------------------------------------------------
# right threshold
# ---------------------------------------------------------------------------


def test_right_threshold_reproduces_paper_enclosure():
    th = ps.right_threshold(F(1, 4), WIDTH)
    assert not th.degenerate
    assert rat("1.7852") < th.enclosure.lo
    assert th.enclosure.hi < rat("1.7853")
    assert th.enclosure.width <= WIDTH
    assert ps.replay_threshold(th)


def test_right_threshold_endpoint_signs():
    th = ps.right_threshold(F(1, 4), WIDTH)
    p = pb.theta2(F(1, 4))
    assert p(th.enclosure.lo) > 0 > p(th.enclosure.hi)


def test_right_threshold_no_root_at_half():
    th = ps.right_threshold(F(1, 2), WIDTH)
    assert th.degenerate
    assert th.enclosure.lo == th.enclosure.hi == F(9, 5)
    assert th.certificate.claim == "no-root"
    assert th.certificate.replay()


def test_right_threshold_t_eighth_is_weaker_than_quarter():
    an_eighth = ps.right_threshold(F(1, 8), WIDTH)
    a_quarter = ps.right_threshold(F(1, 4), WIDTH)
    # smaller upper end = stronger; t = 1/4 wins against t = 1/8
    assert a_quarter.enclosure.hi < an_eighth.enclosure.lo


def test_right_threshold_rejects_bad_t():
    with pytest.raises(ValueError):
        ps.right_threshold(F(0), WIDTH)
    with pytest.raises(ValueError):
        ps.right_threshold(F(2, 3), WIDTH)


def test_replay_detects_tampered_enclosures():
    genuine = ps.right_threshold(F(1, 4), WIDTH)
    shifted = ps.ThresholdEnclosure(
        side=genuine.side,
        t=genuine.t,
        w=genuine.w,
        enclosure=ps.IntervalQ(genuine.enclosure.lo - F(1, 100),
                               genuine.enclosure.hi - F(1, 100)),
        certificate=genuine.certificate,
        degenerate=False,
        support=genuine.support,
    )
    assert not ps.replay_threshold(shifted)
    wrong_t = ps.ThresholdEnclosure(
        side=genuine.side,
        t=F(1, 8),
        w=genuine.w,
        enclosure=genuine.enclosure,
        certificate=genuine.certificate,
        degenerate=False,
        support=genuine.support,
    )
    assert not ps.replay_threshold(wrong_t)


# ---------------------------------------------------------------------------
# sweep configuration
# ---------------------------------------------------------------------------


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        ps.SweepConfig(t_grid=(), w_grid=(F(5, 3),))
    with pytest.raises(ValueError):
        ps.SweepConfig(t_grid=(F(1, 2), F(1, 4)), w_grid=(F(5, 3),))
    with pytest.raises(ValueError):
        ps.SweepConfig(t_grid=(F(3, 4),), w_grid=(F(5, 3),))
    with pytest.raises(ValueError):
        ps.SweepConfig(t_grid=(F(1, 4),), w_grid=(F(1, 2),))
    with pytest.raises(ValueError):
        ps.SweepConfig(t_grid=(F(1, 4),), w_grid=(F(5, 3),), refinement_rounds=-1)


def test_sweep_config_json_roundtrip():
    cfg = ps.SweepConfig(
        t_grid=(F(1, 4), F(1, 2)),
        w_grid=(F(5, 3), F(9, 5)),
        refinement_rounds=3,
        isolation_width=F(1, 10**4),
    )
    assert ps.SweepConfig.from_json(cfg.to_json()) == cfg


def test_default_config_contains_paper_parameters():
    left = ps.default_config("left")
    assert F(1, 2) in left.t_grid and F(5, 3) in left.w_grid
    right = ps.default_config("right")
    assert F(1, 4) in right.t_grid
    assert right.w_grid == (F(9, 5),)


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------


def small_left_config(rounds=0):
    return ps.SweepConfig(
        t_grid=(F(1, 4), F(2, 5), F(1, 2)),
        w_grid=(F(5, 3), F(26, 15), F(9, 5)),
        refinement_rounds=rounds,
    )


def small_right_config(rounds=0):
    return ps.SweepConfig(
        t_grid=tuple(F(k, 20) for k in range(1, 11)),
        w_grid=(F(9, 5),),
        refinement_rounds=rounds,
    )


def test_optimize_right_dominates_paper_choice():
    opt = ps.optimize("right", small_right_config())
    quarter = ps.right_threshold(F(1, 4), WIDTH)
    # t = 1/4 is in the grid, so the optimum is at least as strong
    assert opt.threshold.hi <= quarter.enclosure.hi
    assert ps.replay_threshold(opt.best)


def test_optimize_left_dominates_paper_choice():
    opt = ps.optimize("left", small_left_config())
    assert opt.best_w == F(5, 3)
    assert opt.threshold.lo >= rat("1.7075")
    assert ps.replay_threshold(opt.best)


def test_optimize_singleton_grid_matches_direct_call():
    cfg = ps.SweepConfig(t_grid=(F(1, 4),), w_grid=(F(9, 5),), refinement_rounds=0)
    opt = ps.optimize("right", cfg)
    direct = ps.right_threshold(F(1, 4), cfg.isolation_width)
    assert opt.threshold == direct.enclosure
    assert opt.best_t == F(1, 4)
    assert opt.to_json()["best"] == direct.to_json()


def test_optimize_superset_grid_never_worse():
    subset = ps.SweepConfig(
        t_grid=(F(1, 8), F(1, 4)), w_grid=(F(9, 5),), refinement_rounds=0
    )
    superset = ps.SweepConfig(
        t_grid=(F(1, 8), F(1, 5), F(1, 4), F(3, 10)), w_grid=(F(9, 5),),
        refinement_rounds=0,
    )
    a = ps.optimize("right", subset)
    b = ps.optimize("right", superset)
    assert b.threshold.hi <= a.threshold.hi


def test_optimize_bit_identical_reruns():
    cfg = small_right_config(rounds=2)
    a = ps.optimize("right", cfg)
    b = ps.optimize("right", cfg)
    assert a.to_json_str() == b.to_json_str()


def test_optimize_refinement_never_hurts():
    base = ps.optimize("right", small_right_config(rounds=0))
    refined = ps.optimize("right", small_right_config(rounds=2))
    assert refined.threshold.hi <= base.threshold.hi


def test_optimize_rejects_bad_side():
    with pytest.raises(ValueError):
        ps.optimize("middle", small_right_config())


def test_optimum_table_rows_are_sorted_and_exact():
    opt = ps.optimize("right", small_right_config())
    ts = [row[0] for row in opt.table]
    assert ts == sorted(ts)
    for t, w, lo, hi, deg in opt.table:
        th = ps.right_threshold(t, F(1, 10**6))
        assert (th.enclosure.lo, th.enclosure.hi) == (lo, hi)
