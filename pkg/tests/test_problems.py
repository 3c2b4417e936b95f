import json

import numpy as np
import pytest
from scipy import stats

from smoothdyn.problems import (
    PRESETS,
    build_example1,
    build_random_l2l1,
    preset,
    segment_projection,
    standard_normal,
    uniform,
)


def test_generator_reproducible_and_stream_separated():
    np.testing.assert_array_equal(standard_normal(7, 100), standard_normal(7, 100))
    assert not np.array_equal(standard_normal(7, 10), standard_normal(8, 10))
    assert not np.array_equal(uniform(7, 10, stream=0), uniform(7, 10, stream=1))
    # prefix property: a longer draw extends a shorter one
    np.testing.assert_array_equal(standard_normal(3, 11)[:10], standard_normal(3, 10))


def test_generator_distribution():
    u = uniform(1, 20000)
    assert 0 < u.min() and u.max() < 1
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    z = standard_normal(1, 20000)
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_example1_optimal_value():
    prob = build_example1()
    f = prob.objective
    # every point of the segment attains 3/4
    for s in np.linspace(0, 1, 11):
        assert f.underlying(np.array([0.5 * (1 - s), 0.5 * s])) == pytest.approx(0.75)
    # a fine grid never goes below it
    g = np.linspace(-2, 2, 201)
    vals = [f.underlying(np.array([a, b])) for a in g for b in g]
    assert min(vals) >= 0.75 - 1e-12
    assert prob.dist_to_opt([0.25, 0.25]) == 0.0
    assert prob.dist_to_opt([1.0, 1.0]) == pytest.approx(np.sqrt(2) * 0.75)
    assert f.kappa == pytest.approx(1 + np.log(2))
    assert (f.lip_nonsmooth, f.lip_smooth) == (1.25, 4.0)


def test_segment_projection():
    np.testing.assert_allclose(segment_projection([5.0, -5.0]), [0.5, 0.0])
    np.testing.assert_allclose(segment_projection([0.0, 0.0]), [0.25, 0.25])
    np.testing.assert_allclose(segment_projection([-1.0, 3.0]), [0.0, 0.5])


def test_random_l2l1_instance():
    prob = build_random_l2l1(20, 50, 10, seed=5)
    assert prob.objective.underlying(prob.x_star) == pytest.approx(0.0, abs=1e-12)
    assert prob.objective.kappa == 50.0
    d = json.loads(prob.to_json())
    assert d["dims"] == [20, 50, 10] and d["seed"] == 5 and d["f_star"] == 0.0
    A = standard_normal(5, 200).reshape(20, 10)
    assert d["sigma_max_A"] == pytest.approx(np.linalg.svd(A, compute_uv=False)[0], rel=1e-7)
    np.testing.assert_array_equal(build_random_l2l1(20, 50, 10, seed=5).x_star, prob.x_star)
    with pytest.raises(ValueError):
        build_random_l2l1(0, 5, 5, seed=1)


def test_presets():
    assert set(PRESETS) == {"ex1", "ex1_perturbed", "ex2", "ex3"}
    prob, spec, cfg = preset("ex1_perturbed")
    assert spec.alpha == 7.0 and spec.t0 == 1.0
    assert spec.schedule.to_dict() == {"kind": "power_law", "c": 1.0, "p": 3.0}
    np.testing.assert_allclose(spec.perturbation(1.0), 20 * np.exp(-1) / np.sqrt(2) * np.ones(2))
    assert cfg.t_end == 100.0
    prob3, spec3, _ = preset("ex3")
    assert prob3.dim == 100 and spec3.objective.kappa == 500.0
    with pytest.raises(ValueError):
        preset("ex9")
