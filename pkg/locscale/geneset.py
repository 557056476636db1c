"""Gene-set association: sum of per-SNP JLS statistics with a phenotype
permutation p-value. One permutation of the phenotype is applied to every SNP of
the set, so the LD between SNPs is kept in the permutation distribution.
"""
import numpy as np

from locscale.data import PhenotypeVector, check_aligned
from locscale.jls import JlsConfig, PermutationPlan, jls_single_variant, permutation_pvalue, \
    permuted_phenotypes, score_batch, FISHER_FLOOR
from locscale.stattests import OK, DEGENERATE
from locscale.types import params
from locscale.util import DataError, LocScaleError, UsageError, parallel_map, require

SNP_STATISTICS = ('fisher', 'minp')


class DegenerateSetError(LocScaleError):
    """Every SNP of a set is degenerate; ``data`` holds the per-SNP results."""


class GeneSet:
    def __init__(self, set_id, description='', variant_ids=(), unresolved=()):
        variant_ids = list(variant_ids)
        if len(variant_ids) == 0:
            raise DataError("Gene set {} has no variants".format(set_id))
        seen = set()
        for v in variant_ids:
            if v in seen:
                raise DataError("Variant {} listed twice in gene set {}".format(v, set_id))
            seen.add(v)
        self.set_id = set_id
        self.description = description
        self.variant_ids = variant_ids
        self.unresolved = list(unresolved)

    @property
    def J(self):
        return len(self.variant_ids)

    def resolve(self, known):
        """Split ids into those present in ``known`` and an unresolved report."""
        found = [v for v in self.variant_ids if v in known]
        missing = [v for v in self.variant_ids if v not in known]
        if not found:
            raise DataError("Gene set {} has no variant present in the genotype data".format(self.set_id))
        return GeneSet(self.set_id, self.description, found, self.unresolved + missing)

    def __repr__(self):
        return "GeneSet({}, J={})".format(self.set_id, self.J)


class GeneSetResult:
    def __init__(self, set_id, statistic, observed, excluded, replicates, p, per_snp):
        self.set_id = set_id
        self.statistic = statistic
        self.observed = observed
        self.excluded = excluded
        self.replicates = replicates
        self.p = p
        self.per_snp = per_snp

    @classmethod
    def degenerate(cls, set_id, statistic, per_snp, replicates):
        per_snp = list(per_snp)
        return cls(set_id, statistic, float('nan'), len(per_snp), replicates, float('nan'), per_snp)

    @property
    def J_used(self):
        return len(self.per_snp) - self.excluded

    @property
    def status(self):
        return OK if self.J_used > 0 else DEGENERATE

    def __repr__(self):
        return "GeneSetResult({}, J_used={}, observed={}, K={}, p={})".format(
            self.set_id, self.J_used, self.observed, self.replicates, self.p)


def _check_statistic(statistic):
    if statistic not in SNP_STATISTICS:
        raise UsageError("Unknown gene-set statistic: {}".format(statistic))


def snp_statistic(w_fisher, w_minp, statistic='fisher'):
    """Per-SNP contribution to the sum: W_F, or -2 ln p_minp."""
    if statistic == 'fisher':
        return w_fisher
    p_minp = np.asarray(w_minp) * (2.0 - np.asarray(w_minp))
    return -2.0 * np.log(np.maximum(p_minp, FISHER_FLOOR))


def geneset_sum_statistic(results, statistic='fisher'):
    """Sum the per-SNP statistic over non-degenerate results.

    Returns ``(total, excluded)`` where ``excluded`` counts degenerate SNPs.
    """
    _check_statistic(statistic)
    used = [r for r in results if r.ok]
    if not used:
        raise DegenerateSetError("Every SNP of the gene set is degenerate", data=list(results))
    total = 0.0
    for r in used:
        total += float(snp_statistic(r.w_fisher, r.w_minp, statistic))
    return total, len(results) - len(used)


def _sum_block(snps, values, seed, config, statistic, start, stop):
    Y = permuted_phenotypes(values, seed, start, stop)
    total = np.zeros(stop - start)
    for x, keep in snps:
        scores = score_batch(x, Y[:, keep], config)
        with np.errstate(over='ignore'):
            s = snp_statistic(scores['fisher'], np.exp(-scores['minp']), statistic)
        # a SNP degenerate under one permutation adds nothing to that replicate
        total += np.where(np.isnan(s), 0.0, s)
    return total


@params(pheno=PhenotypeVector, plan=PermutationPlan)
def geneset_permutation_test(genos, pheno, plan, config=None, statistic='fisher', set_id='', threads=1):
    _check_statistic(statistic)
    config = config or JlsConfig()
    genos = list(genos)
    require(len(genos) >= 1, "A gene set needs at least one variant")
    results = []
    for geno in genos:
        check_aligned(geno, pheno)
        results.append(jls_single_variant(geno, pheno, config))
    observed, excluded = geneset_sum_statistic(results, statistic)
    snps = []
    for geno, r in zip(genos, results):
        if r.ok:
            keep = ~geno.missing & ~pheno.missing
            snps.append((geno.codes[keep].astype(float), keep))
    parts = parallel_map(_sum_block,
                         [(snps, pheno.values, plan.seed, config, statistic, start, stop)
                          for start, stop in plan.blocks()],
                         threads)
    p = permutation_pvalue(observed, np.concatenate(parts), plan.convention)
    return GeneSetResult(set_id, statistic, observed, excluded, plan.replicates, p, results)
