import math
import random

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as scipy_stats

from splitsec import (
    JointDistribution,
    Placement,
    conditional_entropy,
    entropy,
    joint_distribution,
    mi_reduction_percent,
    mutual_information,
    mutual_information_reverse,
    parse_bench,
    shuffle,
)
from splitsec.leakage import joint_to_csv
from splitsec import harness

import synth

# A(0,0) drives B; C is placed but unconnected.
TRIANGLE = "INPUT(A)\nINPUT(C)\nB = NOT(A)\n"


def triangle_layout(b_site, c_site):
    g = parse_bench(TRIANGLE)
    sites = {g.gid("A"): (0, 0), g.gid("B"): b_site, g.gid("C"): c_site}
    return g, Placement(sites, None, 0, 1.0)


def bruteforce_mi(g, pl, bin_width=1):
    """Independent oracle: explicit joint probability table over all pairs."""
    ids = sorted(pl.sites)
    from splitsec import connected_pairs

    conn = connected_pairs(g)
    joint = {}
    pairs = 0
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            (xa, ya), (xb, yb) = pl.sites[a], pl.sites[b]
            d = (abs(xa - xb) + abs(ya - yb)) // bin_width
            x = 1 if (min(a, b), max(a, b)) in conn else 0
            joint[(x, d)] = joint.get((x, d), 0) + 1
            pairs += 1
    px = {}
    pd = {}
    for (x, d), c in joint.items():
        px[x] = px.get(x, 0) + c
        pd[d] = pd.get(d, 0) + c
    mi = 0.0
    for (x, d), c in joint.items():
        p_xd = c / pairs
        mi += p_xd * math.log2(p_xd / ((px[x] / pairs) * (pd[d] / pairs)))
    return mi


class TestEntropy:
    def test_fair_coin(self):
        assert entropy([0.5, 0.5]) == pytest.approx(1.0)

    def test_degenerate(self):
        assert entropy([1.0]) == 0.0

    def test_third(self):
        assert entropy([1 / 3, 2 / 3]) == pytest.approx(0.9183, abs=1e-4)

    def test_zero_terms_ignored(self):
        assert entropy([0.5, 0.0, 0.5]) == pytest.approx(1.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            entropy([1.2, -0.2])

    def test_bad_sum_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            entropy([0.5, 0.4])


class TestJointDistribution:
    def test_hand_enumerated_bins(self):
        g, pl = triangle_layout((0, 1), (2, 0))
        jd = joint_distribution(g, pl, bin_width=1)
        assert jd.bins == {1: (1, 0), 2: (0, 1), 3: (0, 1)}
        assert jd.total_pairs == 3

    def test_wide_bin_collapses(self):
        g, pl = triangle_layout((0, 1), (2, 0))
        jd = joint_distribution(g, pl, bin_width=10)
        assert jd.bins == {0: (1, 2)}

    def test_edgeless_all_unconnected(self):
        g = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\n")
        pl = Placement({0: (0, 0), 1: (1, 0), 2: (5, 5)}, None, 0, 1.0)
        jd = joint_distribution(g, pl)
        assert all(c == 0 for c, _ in jd.bins.values())
        assert jd.total_pairs == 3

    def test_exclude_pads_flag(self, fulladder):
        pl = synth.random_layout(fulladder, 2)
        full = joint_distribution(fulladder, pl, include_pads=True)
        cells = joint_distribution(fulladder, pl, include_pads=False)
        assert full.total_pairs == 45  # C(10, 2)
        assert cells.total_pairs == 10  # C(5, 2)

    def test_too_few_vertices(self):
        g = parse_bench("INPUT(a)\n")
        pl = Placement({0: (0, 0)}, None, 0, 1.0)
        with pytest.raises(ValueError, match="at least 2"):
            joint_distribution(g, pl)

    def test_count_invariant_enforced(self):
        with pytest.raises(ValueError):
            JointDistribution(1, {0: (1, 1)}, 3)

    def test_csv_export(self):
        g, pl = triangle_layout((0, 1), (2, 0))
        csv = joint_to_csv(joint_distribution(g, pl))
        assert csv == "bin,connected,unconnected\n1,1,0\n2,0,1\n3,0,1\n"


class TestConditionalEntropy:
    def test_pure_bins_zero(self):
        jd = JointDistribution(1, {1: (3, 0), 2: (0, 4)}, 7)
        assert conditional_entropy(jd) == 0.0

    def test_single_even_bin(self):
        jd = JointDistribution(1, {0: (1, 1)}, 2)
        assert conditional_entropy(jd) == pytest.approx(1.0)

    def test_hand_computed_mixture(self):
        jd = JointDistribution(1, {1: (1, 1), 2: (0, 1)}, 3)
        assert conditional_entropy(jd) == pytest.approx(2 / 3, abs=1e-9)


class TestMutualInformation:
    def test_distance_determines_connectivity(self):
        g, pl = triangle_layout((0, 1), (2, 0))
        rep = mutual_information(joint_distribution(g, pl))
        assert rep.h_x == pytest.approx(0.9183, abs=1e-4)
        assert rep.h_x_given_d == 0.0
        assert rep.mi == pytest.approx(0.9183, abs=1e-4)
        assert rep.normalized_mi == pytest.approx(1.0)

    def test_partial_leakage_case(self):
        g, pl = triangle_layout((1, 0), (0, 1))
        rep = mutual_information(joint_distribution(g, pl))
        assert rep.mi == pytest.approx(0.2516, abs=1e-4)

    def test_independent_joint_is_zero(self):
        jd = JointDistribution(1, {0: (2, 2), 5: (1, 1)}, 6)
        assert mutual_information(jd).mi == pytest.approx(0.0, abs=1e-12)

    def test_bounds_and_normalization(self):
        for seed in range(10):
            g = synth.random_graph(seed, n_gates=12)
            jd = joint_distribution(g, synth.scatter_layout(g, seed))
            rep = mutual_information(jd)
            assert 0 <= rep.mi <= rep.h_x + 1e-12
            assert rep.h_x_given_d == pytest.approx(rep.h_x - rep.mi, abs=1e-9)
            assert 0 <= rep.normalized_mi <= 1

    def test_reduction_percent(self):
        assert mi_reduction_percent(0.5, 0.5) == 0.0
        assert mi_reduction_percent(0.5, 0.0) == 100.0
        assert math.isnan(mi_reduction_percent(0.0, 0.1))


class TestSymmetryIdentity:
    @given(st.integers(0, 10**6))
    @settings(max_examples=40)
    def test_reverse_equals_forward(self, seed):
        g = synth.random_graph(seed, n_gates=random.Random(seed).randint(2, 16))
        jd = joint_distribution(g, synth.scatter_layout(g, seed))
        rep = mutual_information(jd)
        assert mutual_information_reverse(jd) == pytest.approx(rep.mi, abs=1e-9)


class TestScaleInvariance:
    @pytest.mark.parametrize("k", [2, 3, 7])
    def test_scaling_coords_and_bin_width(self, k):
        g = synth.random_graph(4, n_gates=10)
        pl = synth.scatter_layout(g, 4)
        scaled = Placement(
            {v: (x * k, y * k) for v, (x, y) in pl.sites.items()}, None, 0, 1.0
        )
        jd1 = joint_distribution(g, pl, bin_width=1)
        jd2 = joint_distribution(g, scaled, bin_width=k)
        assert jd1.bins == jd2.bins
        assert mutual_information(jd1).mi == mutual_information(jd2).mi


class TestOracleEquivalence:
    @given(st.integers(0, 10**6))
    @settings(max_examples=50)
    def test_small_layouts_match_bruteforce(self, seed):
        rng = random.Random(seed)
        g = synth.random_graph(
            seed,
            n_gates=rng.randint(0, 5),
            n_inputs=rng.randint(2, 3),
            n_outputs=rng.randint(0, 1),
        )
        if g.n < 2:
            return
        assert g.n <= 9
        pl = synth.scatter_layout(g, seed)
        jd = joint_distribution(g, pl)
        assert mutual_information(jd).mi == pytest.approx(
            bruteforce_mi(g, pl), abs=1e-9
        )


class TestLeakageTrend:
    def test_shuffle_sweep_decreases_mi(self):
        text = synth.random_bench(random.Random(3), n_gates=60, n_inputs=8, n_outputs=5)
        g = parse_bench(text, "synth60")
        fractions = [i / 10 for i in range(11)]
        sums = [0.0] * len(fractions)
        for seed in range(5):
            base, _ = harness.placement_for(g, "none", seed, 0.8, 3000)
            for i, frac in enumerate(fractions):
                pl = shuffle(base, frac, harness.derive_seed(seed, i), g)
                sums[i] += mutual_information(
                    joint_distribution(g, pl)
                ).normalized_mi
        means = [s / 5 for s in sums]
        rho = scipy_stats.spearmanr(fractions, means).statistic
        assert rho <= -0.8
