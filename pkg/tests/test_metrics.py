from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from outliermbc.errors import DomainError
from outliermbc.metrics import adjusted_rand_index, outlier_f1


def set_partitions(n, max_blocks):
    """Restricted growth strings of length n using at most max_blocks labels."""
    out = []

    def grow(prefix, used):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for lab in range(min(used + 1, max_blocks)):
            grow(prefix + [lab], max(used, lab + 1))

    grow([], 0)
    return out


def pair_count_ari(a, b):
    # classic 2x2 pair table form, independent of the contingency-table code
    n11 = n10 = n01 = n00 = 0
    for i, j in combinations(range(len(a)), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        n11 += sa and sb
        n10 += sa and not sb
        n01 += sb and not sa
        n00 += not sa and not sb
    den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11)
    if den == 0:
        return 1.0
    return float(Fraction(2 * (n00 * n11 - n01 * n10), den))


PARTS = set_partitions(6, 3)


def test_partition_count():
    # Stirling numbers S(6,1) + S(6,2) + S(6,3)
    assert len(PARTS) == 1 + 31 + 90


def test_ari_matches_pair_counting_on_all_partitions():
    for a in PARTS:
        for b in PARTS:
            assert adjusted_rand_index(a, b) == pair_count_ari(a, b), (a, b)


def test_ari_examples():
    assert adjusted_rand_index([1, 1, 2, 2, 0], [1, 1, 2, 2, 0]) == 1.0
    assert adjusted_rand_index([1, 2, 3, 1, 2], [7] * 5) == 0.0
    a, b = (1, 1, 2, 2, 3, 3), (1, 1, 2, 3, 3, 3)
    assert adjusted_rand_index(a, b) == pair_count_ari(a, b)
    assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=60), st.integers(0, 2**31))
def test_ari_symmetry_and_relabelling(a, seed):
    rng = np.random.default_rng(seed)
    b = list(rng.integers(0, 3, len(a)))
    relabel = {lab: 10 + k for k, lab in enumerate(rng.permutation(5))}
    assert adjusted_rand_index(a, b) == adjusted_rand_index(b, a)
    assert adjusted_rand_index(a, b) == adjusted_rand_index([relabel[x] for x in a], b)
    if len(set(a)) >= 2:
        assert adjusted_rand_index(a, a) == 1.0


def test_ari_large_n_against_sklearn():
    rng = np.random.default_rng(0)
    a, b = rng.integers(0, 4, 20_000), rng.integers(0, 4, 20_000)
    b[:15_000] = a[:15_000]
    assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)


def test_ari_length_mismatch():
    with pytest.raises(DomainError):
        adjusted_rand_index([1, 2], [1])


def test_f1_examples():
    f1, c = outlier_f1([1, 2, 3], [1, 2, 3], 10)
    assert f1 == 1.0 and c.to_dict() == {"tp": 3, "fp": 0, "fn": 0, "tn": 7}
    assert outlier_f1([], [4, 5], 10)[0] == 0.0
    true = list(range(100))
    pred = list(range(15, 100)) + list(range(100, 105))
    f1, c = outlier_f1(pred, true, 1000)
    assert (c.tp, c.fp, c.fn) == (85, 5, 15)
    precision, recall = 85 / 90, 85 / 100
    assert round(precision, 3) == 0.944 and recall == 0.85
    assert f1 == pytest.approx(2 * precision * recall / (precision + recall), rel=1e-15)
    assert round(f1, 3) == 0.895


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 49)), st.sets(st.integers(0, 49)))
def test_f1_count_identities(pred, true):
    _, c = outlier_f1(pred, true, 50)
    assert c.tp + c.fn == len(true)
    assert c.tp + c.fp == len(pred)
    assert c.tp + c.fp + c.fn + c.tn == 50


def test_f1_domain():
    with pytest.raises(DomainError):
        outlier_f1([10], [], 10)
