import math
from unittest import mock

import numpy as np
import pytest
from scipy import stats

from locscale import jls
from locscale.data import GenotypeVector, PhenotypeVector
from locscale.numeric import DomainError
from locscale.util import UsageError


def t4_sf(t):
    u = t / math.sqrt(t * t + 4.0)
    return 0.5 - 0.75 * (u - u ** 3 / 3.0)


P_WORKED = 2.0 * t4_sf(1.0 / math.sqrt(0.375 / 4.0))


def worked_example():
    return GenotypeVector([0, 0, 1, 1, 2, 2], variant_id='rs1', chrom='1'), PhenotypeVector([0, 1, 1, 2, 2, 3])


def null_data(seed, n=200, maf=0.3):
    rng = np.random.default_rng(seed)
    return GenotypeVector(rng.binomial(2, maf, n), variant_id='null'), PhenotypeVector(rng.standard_normal(n))


# ── combinations ─────────────────────────────────────────────────────────────

class TestFisherCombine:
    def test_ones(self):
        w, p = jls.fisher_combine(1.0, 1.0)
        assert w == 0.0
        assert p == pytest.approx(1.0)

    def test_equal_pair(self):
        w, p = jls.fisher_combine(0.05, 0.05)
        assert w == pytest.approx(11.98293, abs=1e-5)
        assert p == pytest.approx(0.0174786, abs=1e-7)

    def test_unequal_pair(self):
        w, p = jls.fisher_combine(0.01, 0.5)
        q = 0.005
        assert w == pytest.approx(10.5966, abs=1e-4)
        assert p == pytest.approx(q * (1.0 - math.log(q)), rel=1e-10)
        assert p == pytest.approx(0.03149, abs=1e-5)

    def test_zero_is_clamped(self):
        c = jls.fisher_combine(0.0, 0.5)
        assert c.clamped is True
        assert np.isfinite(c.statistic)
        assert c.p < 1e-290

    def test_not_clamped(self):
        assert jls.fisher_combine(0.2, 0.3).clamped is False

    def test_domain(self):
        with pytest.raises(DomainError):
            jls.fisher_combine(1.5, 0.5)

    def test_missing_component(self):
        w, p = jls.fisher_combine(float('nan'), 0.5)
        assert np.isnan(w) and np.isnan(p)


class TestMinpCombine:
    def test_ones(self):
        assert tuple(jls.minp_combine(1.0, 1.0)) == (1.0, 1.0)

    def test_zero(self):
        assert tuple(jls.minp_combine(0.0, 0.7)) == (0.0, 0.0)

    def test_closed_form(self):
        w, p = jls.minp_combine(0.05, 0.9)
        assert w == 0.05
        assert p == pytest.approx(0.0975, rel=1e-12)

    def test_missing_component(self):
        w, p = jls.minp_combine(0.2, float('nan'))
        assert np.isnan(w) and np.isnan(p)


# ── single variant ───────────────────────────────────────────────────────────

class TestJlsSingleVariant:
    def test_worked_example(self):
        r = jls.jls_single_variant(*worked_example())
        assert r.p_location == pytest.approx(P_WORKED, rel=1e-10)
        assert r.p_scale == pytest.approx(1.0)
        assert r.w_fisher == pytest.approx(-2.0 * math.log(P_WORKED), rel=1e-10)
        assert r.w_fisher == pytest.approx(6.9536, abs=1e-3)
        assert r.p_fisher == pytest.approx(P_WORKED * (1.0 - math.log(P_WORKED)), rel=1e-9)
        assert r.w_minp == pytest.approx(P_WORKED, rel=1e-10)
        assert r.p_minp == pytest.approx(P_WORKED * (2.0 - P_WORKED), rel=1e-10)
        assert r.status == 'ok'
        assert r.n_used == 6
        assert r.variant_id == 'rs1'

    def test_monomorphic(self):
        g = GenotypeVector([1] * 6)
        r = jls.jls_single_variant(g, PhenotypeVector([0, 1, 1, 2, 2, 3]))
        assert r.status == 'degenerate'
        for value in (r.w_fisher, r.p_fisher, r.w_minp, r.p_minp):
            assert np.isnan(value)

    def test_constant_phenotype(self):
        g, _ = worked_example()
        r = jls.jls_single_variant(g, PhenotypeVector([4.0] * 6))
        assert not r.location.ok
        assert r.status == 'degenerate'

    def test_lrt_switch(self):
        r = jls.jls_single_variant(*worked_example(), config=jls.JlsConfig(lrt=False))
        assert r.lrt is None
        assert np.isnan(r.p_lrt)

    def test_anova_config(self):
        r = jls.jls_single_variant(*worked_example(), config=jls.JlsConfig(location='anova'))
        assert r.p_location == pytest.approx((11.0 / 3.0) ** -1.5, rel=1e-10)

    def test_clamped_flag_in_status(self):
        rng = np.random.default_rng(5)
        g = rng.binomial(2, 0.4, 2000)
        y = 5.0 * g + rng.standard_normal(2000)
        r = jls.jls_single_variant(GenotypeVector(g), PhenotypeVector(y))
        assert r.p_location < jls.FISHER_FLOOR
        assert r.status == 'ok,clamped'

    def test_bad_config(self):
        with pytest.raises(UsageError):
            jls.JlsConfig(location='kruskal')
        with pytest.raises(UsageError):
            jls.JlsConfig(min_group_size=0)


# ── permutation p-values ─────────────────────────────────────────────────────

class TestPermutationPvalue:
    def test_strict(self):
        assert jls.permutation_pvalue(2.5, [1, 2, 3, 4], 'strict') == 0.5

    def test_add_one(self):
        assert jls.permutation_pvalue(2.5, [1, 2, 3, 4], 'add-one') == pytest.approx(0.6)

    def test_larger_than_all(self):
        assert jls.permutation_pvalue(10.0, [1, 2, 3, 4], 'strict') == 0.0
        assert jls.permutation_pvalue(10.0, [1, 2, 3, 4], 'add-one') == pytest.approx(0.2)

    def test_ties_count_as_extreme_under_add_one(self):
        assert jls.permutation_pvalue(2.0, [2.0, 2.0], 'add-one') == 1.0
        assert jls.permutation_pvalue(2.0, [2.0, 2.0], 'strict') == 0.0

    def test_missing_replicates_never_extreme(self):
        assert jls.permutation_pvalue(1.0, [np.nan, 2.0, 0.5], 'strict') == pytest.approx(1.0 / 3.0)

    def test_missing_observed(self):
        assert np.isnan(jls.permutation_pvalue(float('nan'), [1.0]))

    def test_empty(self):
        with pytest.raises(UsageError):
            jls.permutation_pvalue(1.0, [])

    def test_unknown_convention(self):
        with pytest.raises(UsageError):
            jls.permutation_pvalue(1.0, [1.0], 'phipson')


class TestPermutationPlan:
    def test_zero_replicates(self):
        with pytest.raises(UsageError):
            jls.PermutationPlan(0)

    def test_unknown_convention(self):
        with pytest.raises(UsageError):
            jls.PermutationPlan(10, convention='exact')

    def test_blocks_cover_all_replicates(self):
        plan = jls.PermutationPlan(600, block_size=256)
        assert plan.blocks() == [(0, 256), (256, 512), (512, 600)]


class TestPermutedPhenotypes:
    def test_missing_stay_in_place(self):
        values = np.array([1.0, np.nan, 3.0, 4.0, np.nan, 6.0])
        Y = jls.permuted_phenotypes(values, 11, 0, 20)
        assert Y.shape == (20, 6)
        assert np.isnan(Y[:, [1, 4]]).all()
        for row in Y:
            assert sorted(row[[0, 2, 3, 5]]) == [1.0, 3.0, 4.0, 6.0]

    def test_rows_depend_only_on_replicate_index(self):
        values = np.arange(30, dtype=float)
        whole = jls.permuted_phenotypes(values, 3, 0, 10)
        part = jls.permuted_phenotypes(values, 3, 4, 7)
        np.testing.assert_array_equal(whole[4:7], part)


class TestPermuteAndRescore:
    def test_identity_permutation(self):
        g, y = worked_example()
        plan = jls.PermutationPlan(1, seed=0)
        with mock.patch('locscale.jls.shuffle_order', side_effect=lambda seed, k, n: np.arange(n)):
            result = jls.permute_and_rescore(g, y, plan)
        for name in ('location', 'scale', 'fisher', 'minp', 'lrt'):
            assert result.pvalues[name] == 1.0
        assert result.p_fisher == 1.0

    def test_identity_permutation_strict(self):
        g, y = worked_example()
        plan = jls.PermutationPlan(1, seed=0, convention='strict')
        with mock.patch('locscale.jls.shuffle_order', side_effect=lambda seed, k, n: np.arange(n)):
            result = jls.permute_and_rescore(g, y, plan)
        assert result.p_fisher == 0.0

    def test_deterministic_given_seed(self):
        g, y = null_data(1)
        plan = jls.PermutationPlan(300, seed=99, block_size=64)
        a = jls.permute_and_rescore(g, y, plan)
        b = jls.permute_and_rescore(g, y, plan)
        assert a.pvalues == b.pvalues

    def test_threads_do_not_change_result(self):
        g, y = null_data(2)
        plan = jls.PermutationPlan(300, seed=7, block_size=64)
        a = jls.permute_and_rescore(g, y, plan, threads=1)
        b = jls.permute_and_rescore(g, y, plan, threads=2)
        assert a.pvalues == b.pvalues

    def test_p_values_on_grid(self):
        g, y = null_data(3)
        result = jls.permute_and_rescore(g, y, jls.PermutationPlan(99, seed=1))
        for p in result.pvalues.values():
            assert 0.01 <= p <= 1.0
            assert (p * 100) == pytest.approx(round(p * 100))

    def test_strong_effect_hits_floor(self):
        rng = np.random.default_rng(4)
        g = rng.binomial(2, 0.3, 300)
        y = g + rng.standard_normal(300)
        result = jls.permute_and_rescore(GenotypeVector(g), PhenotypeVector(y), jls.PermutationPlan(199, seed=2))
        assert result.p_fisher == pytest.approx(1.0 / 200)
        assert result.p_location == pytest.approx(1.0 / 200)

    def test_degenerate_variant(self):
        result = jls.permute_and_rescore(GenotypeVector([0] * 6), PhenotypeVector([0, 1, 1, 2, 2, 3]),
                                         jls.PermutationPlan(10))
        assert np.isnan(result.p_fisher)
        assert result.degenerate_fraction == 1.0

    def test_unstable_flag(self):
        result = jls.PermutationResult(None, {}, 100, 0.2)
        assert result.unstable
        assert not jls.PermutationResult(None, {}, 100, 0.01).unstable

    def test_unknown_attribute(self):
        with pytest.raises(AttributeError):
            jls.PermutationResult(None, {}, 100, 0.0).p_unknown

    def test_null_p_values_roughly_uniform(self):
        ps = []
        for seed in range(150):
            g, y = null_data(1000 + seed, n=150)
            ps.append(jls.permute_and_rescore(g, y, jls.PermutationPlan(99, seed=seed)).p_fisher)
        assert stats.kstest(ps, 'uniform').pvalue > 0.001
