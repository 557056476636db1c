import numpy as np

from locscale.util import DataError

MISSING = -1
GENOTYPE_CODES = (0, 1, 2)
X_CHROMOSOMES = ('X', 'CHRX', '23')
MALE = 1
FEMALE = 2


def is_x_chromosome(chrom):
    return str(chrom).upper() in X_CHROMOSOMES


class GenotypeVector:
    """Minor allele counts of one variant, ``MISSING`` (-1) for no call."""

    def __init__(self, codes, variant_id='', chrom='', sample_ids=None):
        codes = np.asarray(codes)
        if codes.ndim != 1:
            raise DataError("Genotype vector of {} must be one dimensional".format(variant_id))
        if codes.dtype.kind == 'f':
            nan = np.isnan(codes)
            codes = np.where(nan, MISSING, codes)
        bad = ~np.isin(codes, GENOTYPE_CODES + (MISSING,))
        if np.any(bad):
            raise DataError("Invalid genotype code {!r} for variant {}".format(codes[bad][0].item(), variant_id))
        self.codes = codes.astype(np.int8)
        self.variant_id = variant_id
        self.chrom = str(chrom)
        self.sample_ids = None if sample_ids is None else list(sample_ids)
        if self.sample_ids is not None and len(self.sample_ids) != len(self.codes):
            raise DataError("Variant {} has {} genotypes for {} samples".format(
                variant_id, len(self.codes), len(self.sample_ids)))

    def __len__(self):
        return len(self.codes)

    @property
    def missing(self):
        return self.codes == MISSING

    def is_x(self):
        return is_x_chromosome(self.chrom)

    def check_x_coding(self, sexes, sample_ids=None):
        """Males on X may only carry 0 or 2 (hemizygous coding)."""
        if not self.is_x():
            return
        sexes = np.asarray(sexes)
        bad = np.flatnonzero((sexes == MALE) & (self.codes == 1))
        if len(bad) > 0:
            ids = sample_ids or self.sample_ids or [str(i) for i in range(len(self))]
            raise DataError("Male heterozygous genotype on X for variant {} in sample(s): {}".format(
                self.variant_id, ', '.join(ids[i] for i in bad[:10])))

    def take(self, index):
        ids = None if self.sample_ids is None else [self.sample_ids[i] for i in index]
        return GenotypeVector(self.codes[index], self.variant_id, self.chrom, ids)


class PhenotypeVector:
    """Quantitative trait values, NaN for missing."""

    def __init__(self, values, sample_ids=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1:
            raise DataError("Phenotype vector must be one dimensional")
        if np.any(np.isinf(values)):
            raise DataError("Phenotype values must be finite")
        self.values = values
        self.sample_ids = None if sample_ids is None else list(sample_ids)
        if self.sample_ids is not None and len(self.sample_ids) != len(values):
            raise DataError("Phenotype has {} values for {} samples".format(len(values), len(self.sample_ids)))

    def __len__(self):
        return len(self.values)

    @property
    def missing(self):
        return np.isnan(self.values)

    def take(self, index):
        ids = None if self.sample_ids is None else [self.sample_ids[i] for i in index]
        return PhenotypeVector(self.values[index], ids)


def check_aligned(geno, pheno):
    if len(geno) != len(pheno):
        raise DataError("Variant {} has {} samples but the phenotype has {}".format(
            geno.variant_id, len(geno), len(pheno)))
    if geno.sample_ids is not None and pheno.sample_ids is not None and geno.sample_ids != pheno.sample_ids:
        raise DataError("Samples of variant {} are not aligned with the phenotype".format(geno.variant_id))


def complete_cases(geno, pheno):
    """Drop samples missing either the genotype or the phenotype."""
    check_aligned(geno, pheno)
    keep = ~geno.missing & ~pheno.missing
    return geno.codes[keep].astype(float), pheno.values[keep]


class GroupSummary:
    def __init__(self, codes, counts, means, variances, mean_abs_dev, center):
        self.codes = codes
        self.counts = counts
        self.means = means
        self.variances = variances
        self.mean_abs_dev = mean_abs_dev
        self.center = center

    @property
    def n(self):
        return int(sum(self.counts))

    def as_dict(self):
        return {int(c): {'n': int(n), 'mean': float(m), 'var': float(v), 'mad': float(d)}
                for c, n, m, v, d in zip(self.codes, self.counts, self.means, self.variances, self.mean_abs_dev)}
