import math
from itertools import permutations as iter_permutations

import numpy as np
import pytest
import scipy.stats

from vizsig.matrices import DistanceMatrix, LabeledMatrix
from vizsig.inference import (
    Dendrogram,
    Merge,
    cophenetic,
    discrepancy,
    mantel_test,
    spearman,
    to_newick,
    upgma,
    write_merges_csv,
)


def random_distance_matrix(rng, m, labels=None):
    a = rng.random((m, m))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 0.0)
    labels = labels or tuple(f"L{i}" for i in range(m))
    return DistanceMatrix(labels, a)


def mantel_exhaustive_oracle(a, b):
    """Exact permutation p by brute-force enumeration with scipy's spearman."""
    m = a.m
    iu = np.triu_indices(m, k=1)
    r_obs = scipy.stats.spearmanr(a.values[iu], b.values[iu]).statistic
    count = 0
    total = 0
    for perm in iter_permutations(range(m)):
        p = np.array(perm)
        r = scipy.stats.spearmanr(a.values[iu], b.values[np.ix_(p, p)][iu]).statistic
        if r >= r_obs:
            count += 1
        total += 1
    return r_obs, count / total


class TestSpearman:
    def test_reversed(self):
        assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_identity(self):
        x = [4.0, 1.0, 7.0, 3.0]
        assert spearman(x, x) == pytest.approx(1.0)

    def test_ties_average_rank(self):
        assert spearman([1, 2, 2, 4], [10, 20, 20, 40]) == pytest.approx(1.0)

    def test_matches_scipy_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(3, 30))
            x = rng.integers(0, 6, size=n).astype(float)  # plenty of ties
            y = rng.normal(size=n)
            if len(set(x)) < 2:
                x[0] += 1.0
            expected = scipy.stats.spearmanr(x, y).statistic
            assert spearman(x, y) == pytest.approx(expected, abs=1e-12)

    def test_zero_variance_errors(self):
        with pytest.raises(ValueError, match="zero variance"):
            spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_short_input_errors(self):
        with pytest.raises(ValueError):
            spearman([1, 2], [3, 4])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(4)
        x = rng.random(20)
        y = rng.random(20)
        base = spearman(x, y)
        assert spearman(np.exp(3 * x), y) == pytest.approx(base, abs=1e-12)
        assert spearman(x, y**3) == pytest.approx(base, abs=1e-12)


class TestMantel:
    def test_identity_min_p_sampled(self):
        rng = np.random.default_rng(1)
        dm = random_distance_matrix(rng, 10)
        report = mantel_test(dm, dm, permutations=9999, seed=7, method="sampled")
        assert report.r == pytest.approx(1.0)
        assert report.p_value == pytest.approx(1 / 10000)
        assert report.permutations == 9999

    def test_exhaustive_matches_enumeration_oracle_m4(self):
        rng = np.random.default_rng(2)
        for trial in range(5):
            a = random_distance_matrix(rng, 4)
            b = random_distance_matrix(rng, 4)
            report = mantel_test(a, b, permutations=9999, seed=trial)
            assert report.exhaustive
            r_exp, p_exp = mantel_exhaustive_oracle(a, b)
            assert report.r == pytest.approx(r_exp, abs=1e-12)
            assert report.p_value == pytest.approx(p_exp, abs=1e-15)

    def test_label_mismatch(self):
        rng = np.random.default_rng(3)
        a = random_distance_matrix(rng, 5)
        b = random_distance_matrix(rng, 5, labels=tuple("vwxyz"))
        with pytest.raises(ValueError, match="labels"):
            mantel_test(a, b)

    def test_constant_matrix_degenerate(self):
        values = np.ones((5, 5)) - np.eye(5)
        dm = DistanceMatrix(tuple("abcde"), values)
        rng = np.random.default_rng(4)
        other = random_distance_matrix(rng, 5, labels=tuple("abcde"))
        with pytest.raises(ValueError, match="degenerate"):
            mantel_test(dm, other)

    def test_seed_determinism_and_variation(self):
        rng = np.random.default_rng(5)
        a = random_distance_matrix(rng, 8)
        b = random_distance_matrix(rng, 8)
        r1 = mantel_test(a, b, permutations=199, seed=1)
        r2 = mantel_test(a, b, permutations=199, seed=1)
        r3 = mantel_test(a, b, permutations=199, seed=2)
        assert r1.p_value == r2.p_value and r1.z_score == r2.z_score
        assert r1.r == r3.r  # observed statistic does not depend on the seed

    def test_monotone_transform_invariance_of_r(self):
        rng = np.random.default_rng(6)
        a = random_distance_matrix(rng, 7)
        b = random_distance_matrix(rng, 7)
        base = mantel_test(a, b, permutations=99, seed=0, method="sampled")
        squared = DistanceMatrix(a.labels, a.values**2)
        transformed = mantel_test(squared, b, permutations=99, seed=0, method="sampled")
        assert transformed.r == pytest.approx(base.r, abs=1e-12)
        assert transformed.p_value == base.p_value

    def test_m_below_4_rejected(self):
        rng = np.random.default_rng(7)
        dm = random_distance_matrix(rng, 3)
        with pytest.raises(ValueError):
            mantel_test(dm, dm)

    def test_permutation_floor(self):
        rng = np.random.default_rng(8)
        dm = random_distance_matrix(rng, 5)
        with pytest.raises(ValueError):
            mantel_test(dm, dm, permutations=50)

    def test_missing_entries_rejected(self):
        values = np.zeros((4, 4))
        values[0, 1] = values[1, 0] = np.nan
        values[0, 2] = values[2, 0] = 1.0
        values[0, 3] = values[3, 0] = 2.0
        values[1, 2] = values[2, 1] = 3.0
        values[1, 3] = values[3, 1] = 1.5
        values[2, 3] = values[3, 2] = 2.5
        dm = DistanceMatrix(tuple("abcd"), values)
        rng = np.random.default_rng(9)
        other = random_distance_matrix(rng, 4, labels=tuple("abcd"))
        with pytest.raises(ValueError, match="missing"):
            mantel_test(dm, other)


def ultrametric_4leaf():
    values = np.array(
        [
            [0.0, 2.0, 4.0, 6.0],
            [2.0, 0.0, 4.0, 6.0],
            [4.0, 4.0, 0.0, 6.0],
            [6.0, 6.0, 6.0, 0.0],
        ]
    )
    return DistanceMatrix(("A", "B", "C", "D"), values)


class TestUpgma:
    def test_hand_ultrametric_example(self):
        dend = upgma(ultrametric_4leaf())
        got = [(m.a, m.b, m.distance, m.height) for m in dend.merges]
        assert got == [(0, 1, 2.0, 1.0), (2, 4, 4.0, 2.0), (3, 5, 6.0, 3.0)]
        assert [m.size for m in dend.merges] == [2, 3, 4]

    def test_two_leaves(self):
        dm = DistanceMatrix(("A", "B"), np.array([[0.0, 3.0], [3.0, 0.0]]))
        dend = upgma(dm)
        assert len(dend.merges) == 1
        assert dend.merges[0].distance == 3.0

    def test_cophenetic_inverts_ultrametric(self):
        dm = ultrametric_4leaf()
        assert np.array_equal(cophenetic(upgma(dm)).values, dm.values)

    def test_cophenetic_random_ultrametric(self):
        # build a random dendrogram, read off its ultrametric, refit
        rng = np.random.default_rng(11)
        for trial in range(10):
            m = int(rng.integers(3, 9))
            leaves = tuple(f"L{i}" for i in range(m))
            heights = np.sort(rng.random(m - 1)) + 0.1
            merges = []
            active = list(range(m))
            sizes = {i: 1 for i in range(m)}
            for step in range(m - 1):
                i, j = sorted(rng.choice(len(active), size=2, replace=False))
                a, b = active[i], active[j]
                merges.append(
                    Merge(
                        a=a,
                        b=b,
                        distance=float(heights[step]),
                        height=float(heights[step]) / 2,
                        size=sizes[a] + sizes[b],
                    )
                )
                active = [c for c in active if c not in (a, b)] + [m + step]
                sizes[m + step] = merges[-1].size
            reference = cophenetic(Dendrogram(leaves, tuple(merges)))
            rebuilt = cophenetic(upgma(reference))
            assert np.allclose(rebuilt.values, reference.values, atol=1e-12)

    def test_matches_scipy_average_linkage(self):
        import scipy.cluster.hierarchy
        import scipy.spatial.distance

        rng = np.random.default_rng(20)
        for trial in range(10):
            m = int(rng.integers(3, 12))
            dm = random_distance_matrix(rng, m)
            ours = cophenetic(upgma(dm)).values
            linkage = scipy.cluster.hierarchy.linkage(
                scipy.spatial.distance.squareform(dm.values), method="average"
            )
            theirs = scipy.spatial.distance.squareform(
                scipy.cluster.hierarchy.cophenet(linkage)
            )
            assert np.allclose(ours, theirs, atol=1e-10)

    def test_merge_distances_non_decreasing(self):
        rng = np.random.default_rng(12)
        for trial in range(10):
            dm = random_distance_matrix(rng, int(rng.integers(3, 10)))
            dend = upgma(dm)
            distances = [m.distance for m in dend.merges]
            assert all(b >= a - 1e-12 for a, b in zip(distances, distances[1:]))

    def test_cophenetic_is_ultrametric(self):
        rng = np.random.default_rng(13)
        dm = random_distance_matrix(rng, 7)
        co = cophenetic(upgma(dm)).values
        m = co.shape[0]
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    assert co[i, j] <= max(co[i, k], co[k, j]) + 1e-12

    def test_tie_rule_smallest_pair(self):
        values = np.array(
            [
                [0.0, 1.0, 5.0, 5.0],
                [1.0, 0.0, 5.0, 5.0],
                [5.0, 5.0, 0.0, 1.0],
                [5.0, 5.0, 1.0, 0.0],
            ]
        )
        dend = upgma(DistanceMatrix(("A", "B", "C", "D"), values))
        first = dend.merges[0]
        assert (first.a, first.b) == (0, 1)  # (0,1) beats the tied (2,3)

    def test_newick_shape(self):
        dend = upgma(ultrametric_4leaf())
        newick = to_newick(dend)
        assert newick.endswith(";")
        assert newick.count("(") == 3
        for leaf in "ABCD":
            assert leaf in newick
        # leaf D hangs directly under the root at height 3
        assert "D:3.0" in newick

    def test_merges_csv(self, tmp_path):
        dend = upgma(ultrametric_4leaf())
        path = tmp_path / "merges.csv"
        write_merges_csv(dend, path, comment="matrix=test")
        lines = path.read_text().splitlines()
        assert lines[0] == "# matrix=test"
        assert lines[1] == "# leaves: A,B,C,D"
        assert lines[2] == "step,a,b,distance,height,size"
        assert lines[3] == "0,0,1,2.0,1.0,2"


class TestDiscrepancy:
    def test_identical_inputs_zero(self):
        rng = np.random.default_rng(14)
        dm = random_distance_matrix(rng, 5)
        out = discrepancy(dm, dm)
        assert np.array_equal(out.values, np.zeros((5, 5)))

    def test_sign_convention(self):
        # pair (a, b) is the visual outlier; same pair is citation-minimal
        visual = DistanceMatrix(
            ("a", "b", "c"),
            np.array([[0.0, 10.0, 1.0], [10.0, 0.0, 2.0], [1.0, 2.0, 0.0]]),
        )
        citation = DistanceMatrix(
            ("a", "b", "c"),
            np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]]),
        )
        out = discrepancy(visual, citation)
        assert out.values[0, 1] == pytest.approx(-1.0)

    def test_hand_example(self):
        a = DistanceMatrix(
            ("x", "y", "z"),
            np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]]),
        )
        b = DistanceMatrix(
            ("x", "y", "z"),
            np.array([[0.0, 6.0, 5.0], [6.0, 0.0, 4.0], [5.0, 4.0, 0.0]]),
        )

        def norm_oracle(vals):
            # loop route, off-diagonal min-max
            m = vals.shape[0]
            entries = [vals[i, j] for i in range(m) for j in range(m) if i != j]
            lo, hi = min(entries), max(entries)
            out = np.zeros_like(vals)
            for i in range(m):
                for j in range(m):
                    if i != j:
                        out[i, j] = (vals[i, j] - lo) / (hi - lo)
            return out

        expected = norm_oracle(b.values) - norm_oracle(a.values)
        out = discrepancy(a, b)
        assert np.allclose(out.values, expected, atol=1e-12)
        assert out.values[0, 1] == pytest.approx(1.0 - 0.0)
        assert out.values[1, 2] == pytest.approx(0.0 - 1.0)

    def test_constant_matrix_rejected(self):
        flat = DistanceMatrix(
            ("x", "y", "z"), np.ones((3, 3)) - np.eye(3)
        )
        rng = np.random.default_rng(15)
        other = random_distance_matrix(rng, 3, labels=("x", "y", "z"))
        with pytest.raises(ValueError, match="constant"):
            discrepancy(flat, other)

    def test_label_mismatch(self):
        rng = np.random.default_rng(16)
        a = random_distance_matrix(rng, 3)
        b = random_distance_matrix(rng, 3, labels=tuple("xyz"))
        with pytest.raises(ValueError):
            discrepancy(a, b)
