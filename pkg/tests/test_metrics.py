import itertools

import numpy as np
import pytest

from teamcoord.core import GridSpec, Role, TeamSession
from teamcoord.metrics import (
    SeriesMetric,
    TooShortSessionError,
    UnsupportedMetricError,
    WindowTooLargeError,
    coordination_metrics,
    cross_role_distances,
    metric_time_series,
    spatial_exploration_diversity,
    spatial_movement_specialization,
    spatial_proximity_adaptation,
)
from teamcoord.occupancy import jensen_shannon_divergence, occupancy_of

from helpers import random_session, session_from_cells, traj

G = GridSpec(8, 8)


def static(cell, n=6):
    return [cell] * n


# --- exploration diversity ---------------------------------------------------

def test_sed_zero_for_identical_trajectories():
    path = [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2)]
    s = session_from_cells([path, path], [path, path], G)
    assert spatial_exploration_diversity(s) == 0.0


def test_sed_one_for_disjoint_static_players():
    s = session_from_cells([static((0, 0)), static((7, 0))],
                           [static((0, 7)), static((7, 7))], G)
    assert spatial_exploration_diversity(s) == pytest.approx(1.0, abs=1e-12)


def test_sed_two_identical_pairs():
    # two pairs, identical within and disjoint across: 2 pairs at 0, 4 at 1
    s = session_from_cells([static((0, 0)), static((0, 0))],
                           [static((7, 7)), static((7, 7))], G)
    assert spatial_exploration_diversity(s) == pytest.approx(4 / 6, abs=1e-12)


def test_sed_permutation_invariant():
    rng = np.random.default_rng(21)
    for _ in range(20):
        s = random_session(rng)
        base = spatial_exploration_diversity(s)
        perm = list(s.players)
        rng.shuffle(perm)
        shuffled = TeamSession(s.session_id, s.grid, tuple(perm))
        assert spatial_exploration_diversity(shuffled) == pytest.approx(base, abs=1e-12)


# --- movement specialization -------------------------------------------------

def test_sms_equal_entropy_zero_overlap_is_one():
    medic = [(0, 0), (1, 0)] * 4
    engineer = [(0, 2), (1, 2)] * 4
    s = session_from_cells([medic, medic], [engineer, engineer], G)
    assert spatial_movement_specialization(s) == pytest.approx(1.0, abs=1e-12)


def test_sms_identical_roles_is_zero():
    path = [(0, 0), (1, 0), (1, 1), (0, 1)] * 2
    s = session_from_cells([path, path], [path, path], G)
    assert spatial_movement_specialization(s) == 0.0


def test_sms_product_of_components():
    # medics uniform over a 2x2 block (entropy 2); engineers alternate two
    # cells (entropy 1); one shared cell of five => overlap 0.2
    medic = [(0, 0), (1, 0), (1, 1), (0, 1)] * 2
    engineer = [(1, 1), (2, 1)] * 4
    s = session_from_cells([medic, medic], [engineer, engineer], G)
    assert spatial_movement_specialization(s) == pytest.approx(0.5 * (1 - 0.2), abs=1e-12)


def test_sms_invariant_to_role_label_swap():
    rng = np.random.default_rng(31)
    for _ in range(20):
        s = random_session(rng)
        base = spatial_movement_specialization(s)
        from teamcoord.core import PlayerTrajectory
        flipped = tuple(
            PlayerTrajectory(p.player_id,
                             Role.ENGINEER if p.role is Role.MEDIC else Role.MEDIC,
                             p.samples)
            for p in s.players)
        assert spatial_movement_specialization(
            TeamSession(s.session_id, s.grid, flipped)) == pytest.approx(base, abs=1e-12)


# --- proximity adaptation ----------------------------------------------------

def test_spa_zero_for_static_formation():
    s = session_from_cells([static((0, 0)), static((1, 0))],
                           [static((5, 0)), static((6, 0))], G)
    assert spatial_proximity_adaptation(s) == 0.0


def test_spa_zero_when_all_colocated():
    s = session_from_cells([static((3, 3)), static((3, 3))],
                           [static((3, 3)), static((3, 3))], G)
    assert spatial_proximity_adaptation(s) == 0.0


def test_spa_hand_constructed_halves():
    # engineers sit at x=10 for ten ticks, then walk to x=5 and hold:
    # D1 = 10, D2 = (9+8+7+6+5*6)/10 = 6, so SPA = 4/10
    grid = GridSpec(21, 1)
    eng = [(10, 0)] * 10 + [(9, 0), (8, 0), (7, 0), (6, 0), (5, 0)] + [(5, 0)] * 5
    med = [(0, 0)] * 20
    s = session_from_cells([med, med], [eng, eng], grid)
    assert spatial_proximity_adaptation(s) == pytest.approx(0.4, abs=1e-12)


def test_spa_invariant_to_time_reversal():
    rng = np.random.default_rng(41)
    for _ in range(20):
        s = random_session(rng, n_ticks=14)
        base = spatial_proximity_adaptation(s)
        rev_players = tuple(
            traj(p.player_id, p.role, [(q.position.x, q.position.y) for q in reversed(p.samples)])
            for p in s.players)
        rev = TeamSession(s.session_id, s.grid, rev_players)
        assert spatial_proximity_adaptation(rev) == pytest.approx(base, abs=1e-12)


def test_spa_needs_two_ticks():
    s = session_from_cells([[(0, 0)], [(1, 0)]], [[(2, 0)], [(3, 0)]], G)
    with pytest.raises(TooShortSessionError):
        spatial_proximity_adaptation(s)


def test_distance_metric_switch():
    s = session_from_cells([static((0, 0)), static((0, 0))],
                           [static((3, 4)), static((3, 4))], G)
    d_euc = cross_role_distances(s, "euclidean")
    d_man = cross_role_distances(s, "manhattan")
    assert d_euc[0] == pytest.approx(5.0)
    assert d_man[0] == pytest.approx(7.0)
    with pytest.raises(ValueError):
        cross_role_distances(s, "chebyshev")


# --- bounds on random sessions ----------------------------------------------

def test_metric_triple_within_bounds():
    rng = np.random.default_rng(51)
    for _ in range(100):
        m = coordination_metrics(random_session(rng))
        assert 0.0 <= m.sed <= 1.0
        assert 0.0 <= m.sms <= 1.0
        assert 0.0 <= m.spa <= 1.0


# --- time series ---------------------------------------------------------

def split_session(t_join=30, t_total=60):
    """All four players co-move at the origin, then scatter to the corners."""
    grid = GridSpec(31, 31)
    p1 = [(0, 0)] * t_total
    p2 = [(0, 0)] * t_join + [(i + 1, 0) for i in range(t_total - t_join)]
    p3 = [(0, 0)] * t_join + [(0, i + 1) for i in range(t_total - t_join)]
    p4 = [(0, 0)] * t_join
    x = y = 0
    for i in range(t_total - t_join):
        if i % 2 == 0:
            x += 1
        else:
            y += 1
        p4.append((x, y))
    return session_from_cells([p1, p2], [p3, p4], grid,
                              mission_duration_s=float(t_total * 3),
                              red_cutoff_s=float(t_total * 3) * 0.6)


def test_series_constant_for_static_inter_role_distance():
    s = session_from_cells([static((0, 0), 30), static((1, 0), 30)],
                           [static((5, 0), 30), static((6, 0), 30)], G)
    ts = metric_time_series(s, "inter_role_distance", window_ticks=5, smooth_ticks=3)
    vals = ts.series()
    assert np.allclose(vals, vals[0])


def test_series_rolling_adaptation_zero_on_constant_distance():
    s = session_from_cells([static((0, 0), 30), static((1, 0), 30)],
                           [static((5, 0), 30), static((6, 0), 30)], G)
    ts = metric_time_series(s, SeriesMetric.SPA_ROLLING, window_ticks=5, smooth_ticks=1)
    assert np.allclose(ts.series(), 0.0)


def test_series_sed_monotone_around_divergence():
    s = split_session()
    ts = metric_time_series(s, "sed", window_ticks=10, smooth_ticks=1)
    by_end = {round(p * s.nominal_ticks): v for p, v in ts.values}
    transition = [by_end[e] for e in range(29, 46)]
    assert all(b >= a - 1e-12 for a, b in zip(transition, transition[1:]))
    assert transition[0] == 0.0
    assert transition[-1] > 0.5

    # independent recomputation of each window from sub-trajectories
    for end in (32, 36, 40):
        start = end - 9
        dists = [
            occupancy_of(traj(p.player_id, p.role,
                              [(q.position.x, q.position.y) for q in p.samples[start:end + 1]]),
                         s.grid)
            for p in s.players
        ]
        expected = np.mean([jensen_shannon_divergence(a, b)
                            for a, b in itertools.combinations(dists, 2)])
        assert by_end[end] == pytest.approx(expected, abs=1e-12)


def test_series_progress_is_strictly_increasing_in_unit_interval():
    s = split_session()
    for metric in SeriesMetric:
        ts = metric_time_series(s, metric, window_ticks=8, smooth_ticks=3)
        prog = ts.progress()
        assert np.all(np.diff(prog) > 0)
        assert prog[0] >= 0.0 and prog[-1] <= 1.0


def test_single_window_series_matches_whole_mission_metrics():
    rng = np.random.default_rng(61)
    for _ in range(10):
        s = random_session(rng, n_ticks=16)
        t = s.n_ticks
        sed_ts = metric_time_series(s, "sed", window_ticks=t, smooth_ticks=1)
        assert len(sed_ts.values) == 1
        assert sed_ts.values[0][1] == pytest.approx(spatial_exploration_diversity(s), abs=1e-12)
        sms_ts = metric_time_series(s, "sms", window_ticks=t, smooth_ticks=1)
        assert sms_ts.values[0][1] == pytest.approx(spatial_movement_specialization(s), abs=1e-12)
        d_ts = metric_time_series(s, "inter_role_distance", window_ticks=t, smooth_ticks=1)
        assert d_ts.values[0][1] == pytest.approx(float(cross_role_distances(s).mean()), abs=1e-12)


def test_series_window_too_large():
    s = random_session(np.random.default_rng(71), n_ticks=10)
    with pytest.raises(WindowTooLargeError):
        metric_time_series(s, "sed", window_ticks=11)


def test_series_unknown_metric():
    s = random_session(np.random.default_rng(81), n_ticks=10)
    with pytest.raises(UnsupportedMetricError):
        metric_time_series(s, "velocity", window_ticks=4)
