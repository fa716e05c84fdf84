import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spherelayout.errors import NotConverged
from spherelayout.lloyd import (
    GeneratorState,
    LloydConfig,
    adjust_weight,
    initial_distribution,
    run_wscvt,
    size_error,
)


def test_adjust_weight_shrinks_oversized_cells():
    assert adjust_weight(1.0, 0.1, 0.15) == pytest.approx(0.5)
    assert adjust_weight(1.0, 0.1, 0.05) == pytest.approx(1.5)
    assert adjust_weight(1.0, 0.1, 0.1) == 1.0
    # the literal sign grows the oversized cell instead
    assert adjust_weight(1.0, 0.1, 0.15, literal=True) == pytest.approx(1.5)


def test_adjust_weight_floor():
    assert adjust_weight(1.0, 0.1, 0.5, delta=1e-6) == 1e-6
    out = adjust_weight(np.ones(3), np.full(3, 0.1), np.array([0.1, 0.3, 0.0]))
    assert out.tolist() == [1.0, 1e-6, 2.0]


@given(st.floats(1e-3, 1.0), st.floats(1e-3, 1.0), st.floats(0.0, 1.0))
def test_adjust_weight_moves_toward_target(w, d, a):
    new = adjust_weight(w, d, a)
    assert new >= 1e-6
    if a > d:
        assert new < w or new == 1e-6
    elif a < d:
        assert new > w


def test_size_error_modes():
    d = np.array([0.25, 0.25, 0.5])
    a = np.array([0.2, 0.3, 0.5])
    assert size_error((d, a)) == pytest.approx(0.05)
    assert size_error((d, a), "average") == pytest.approx(0.1 / 3)
    state = GeneratorState(np.zeros((3, 3)), np.ones(3), d, a)
    assert size_error(state, "avg") == size_error((d, a), "average")
    with pytest.raises(ValueError):
        size_error((d, a), "median")


def test_config_validation():
    assert LloydConfig(error_mode="avg").error_mode == "average"
    for bad in ({"epsilon": 0}, {"delta": 0.5}, {"max_iterations": 0}, {"error_mode": "l2"}, {"swap_policy": "x"}):
        with pytest.raises(ValueError):
            LloydConfig(**bad)


def test_initial_distribution_is_seeded():
    a = initial_distribution(50, 7)
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)
    assert np.array_equal(a, initial_distribution(50, 7))
    assert not np.array_equal(a, initial_distribution(50, 8))
    with pytest.raises(ValueError):
        initial_distribution(3)


def test_small_sets_surround_origin():
    for seed in range(20):
        pts = initial_distribution(4, seed)
        # origin inside the tetrahedron: 0 = c . pts[:3] + pts[3] with c > 0
        coef = np.linalg.solve(pts[:3].T, -pts[3])
        assert np.all(coef > 0)


def test_equal_weights_converge():
    pos, tess, report = run_wscvt(np.ones(20))
    assert report.converged and report.final_error <= 5e-4
    assert tess.areas().sum() == pytest.approx(4 * np.pi, rel=1e-9)
    assert np.all(np.abs(tess.area_fractions() - 0.05) <= 5e-4)
    assert report.error_history[-1] == report.final_error


def test_weighted_run_meets_targets():
    w = np.arange(1, 21, dtype=float)
    pos, tess, report = run_wscvt(w, LloydConfig(seed=1))
    assert report.converged
    assert np.max(np.abs(tess.area_fractions() - w / w.sum())) <= 5e-4


def test_average_mode_threshold():
    w = np.arange(1, 13, dtype=float)
    _, tess, report = run_wscvt(w, LloydConfig(error_mode="average"))
    assert np.mean(np.abs(tess.area_fractions() - w / w.sum())) <= 5e-4


def test_only_ratios_matter():
    w = np.arange(1, 16, dtype=float)
    a = run_wscvt(w)
    b = run_wscvt(w * 1000)
    assert np.array_equal(a[0], b[0])
    assert a[2].iterations == b[2].iterations


def test_deterministic():
    w = np.linspace(1, 3, 12)
    a = run_wscvt(w, LloydConfig(seed=5))
    b = run_wscvt(w, LloydConfig(seed=5))
    assert np.array_equal(a[0], b[0])
    assert a[2].error_history == b[2].error_history


def test_budget_exhaustion_carries_best_state():
    with pytest.raises(NotConverged) as info:
        run_wscvt(np.arange(1, 41), LloydConfig(max_iterations=3))
    exc = info.value
    assert exc.report.iterations == 3
    assert exc.positions is not None and exc.positions.shape == (40, 3)


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        run_wscvt([1, 2, 3])
    with pytest.raises(ValueError):
        run_wscvt([1, 2, 0, 4])
