import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from steklab.errors import HypothesisViolated, InvalidParameter
from steklab.separated import FiniteMetricMeasureSpace, separated_family


def _circle(m, length):
    t = np.arange(m) * length / m
    d = np.abs(t[:, None] - t[None, :])
    return FiniteMetricMeasureSpace(np.minimum(d, length - d), np.ones(m))


def _brute_force(X, fam):
    """Set masses and minimum pairwise distance, recomputed from scratch."""
    seps = [X.distances[np.ix_(a, b)].min()
            for i, a in enumerate(fam.sets) for b in fam.sets[i + 1:]]
    return [float(X.masses[A].sum()) for A in fam.sets], min(seps, default=np.inf)


def test_atoms_violate_hypothesis():
    X = FiniteMetricMeasureSpace.from_points([0.0, 10.0, 20.0])
    with pytest.raises(HypothesisViolated) as info:
        separated_family(X, 2, 2, 1.0)
    assert info.value.mass == 1.0
    assert info.value.limit == pytest.approx(3 / 32)
    assert info.value.witness in (0, 1, 2)


def test_thousand_points_on_a_circle():
    X = _circle(1000, 1000.0)
    fam = separated_family(X, 2, 3, 1.0)
    masses, sep = _brute_force(X, fam)
    assert len(fam) == 2
    assert min(masses) >= 1000 / 12
    assert sep >= 3.0
    for i, a in enumerate(fam.sets):
        for b in fam.sets[i + 1:]:
            assert not np.intersect1d(a, b).size


def test_single_set_is_whole_space():
    X = _circle(1000, 1000.0)
    fam = separated_family(X, 1, 3, 1.0)
    assert len(fam.sets[0]) == 1000 and fam.masses[0] == 1000


def test_bad_arguments():
    X = _circle(10, 10.0)
    for args in ((0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)):
        with pytest.raises(InvalidParameter):
            separated_family(X, *args)
    with pytest.raises(InvalidParameter):
        FiniteMetricMeasureSpace(np.zeros((2, 2)), [1.0, -1.0])
    with pytest.raises(InvalidParameter):
        FiniteMetricMeasureSpace(np.zeros((2, 3)), [1.0, 1.0])


def test_ball_masses_closed():
    X = FiniteMetricMeasureSpace.from_points([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    assert list(X.ball_masses(1.0)) == [3.0, 6.0, 5.0]
    assert X.total == 6.0


@given(m=st.integers(200, 400), K=st.integers(2, 4), length=st.floats(10, 1e4),
       seed=st.integers(0, 10 ** 6))
def test_certificates_hold_whenever_hypothesis_holds(m, K, length, seed):
    rng = np.random.default_rng(seed)
    t = np.sort((np.arange(m) + rng.uniform(-0.3, 0.3, m)) * length / m)
    d = np.abs(t[:, None] - t[None, :])
    X = FiniteMetricMeasureSpace(np.minimum(d, length - d), rng.uniform(0.8, 1.2, m))
    N = 3
    limit = X.total / (4 * N * N * K)
    radii = [r for r in np.geomspace(length / m / 4, length, 30)
             if X.ball_masses(r).max() <= limit]
    if not radii:
        with pytest.raises(HypothesisViolated):
            separated_family(X, K, N, length / m)
        return
    r = radii[-1]
    fam = separated_family(X, K, N, r)
    masses, sep = _brute_force(X, fam)
    assert len(fam) == K
    assert min(masses) >= X.total / (2 * N * K) * (1 - 1e-12)
    assert sep >= 3 * r
