"""Seedable data generators and Monte-Carlo experiment drivers.

Phenotypes follow

    Y = b_G G + b_E1 E1 + b_E2 E2 + b_GE1 G E1 + b_GE2 G E2 + e

with the terms of each model switched on:

    null  no genetic or exposure terms
    i     b_G, b_E1, b_GE1
    ii    b_E1, b_E2, b_GE1, b_GE2
    iii   b_GE1

E1 and E2 are Bernoulli exposures that only the generator sees; the tests are
run on (G, Y) alone. The intercept is 0.
"""
import math

import numpy as np
import pandas as pd

from locscale import numeric, stattests
from locscale.data import GenotypeVector, PhenotypeVector
from locscale.jls import JlsConfig, PermutationPlan, fisher_arrays, minp_arrays, permute_and_rescore
from locscale.types import params
from locscale.util import UsageError, replicate_rng, derive_seed, blocks, parallel_map, require

MODELS = ('null', 'i', 'ii', 'iii')
RESIDUALS = ('normal', 'lognormal')
TESTS = ('location', 'scale', 'fisher', 'minp', 'lrt')
MODES = ('asymptotic', 'permutation')
TYPE1_ALPHAS = (0.05, 0.005, 0.0005)
GENOME_WIDE = 5e-8

MODEL_TERMS = {
    'null': (),
    'i': ('beta_g', 'beta_e1', 'beta_ge1'),
    'ii': ('beta_e1', 'beta_e2', 'beta_ge1', 'beta_ge2'),
    'iii': ('beta_ge1',),
}
BETAS = ('beta_g', 'beta_e1', 'beta_e2', 'beta_ge1', 'beta_ge2')

TABLE_COLUMNS = ['cell', 'model', 'n', 'maf', 'n0', 'n1', 'n2'] + list(BETAS) + \
                ['f1', 'f2', 'residual', 'mode', 'test', 'alpha', 'replicates', 'rejections', 'degenerate',
                 'rate', 'se']


# ── genotypes ────────────────────────────────────────────────────────────────

def gen_genotypes_hwe(maf, n, seed=None):
    """I.i.d. additive genotypes under Hardy-Weinberg equilibrium."""
    require(0 < maf <= 0.5, "MAF must be in (0, 0.5]: {}".format(maf))
    require(n >= 1, "Sample size must be positive")
    rng = np.random.default_rng(seed)
    return GenotypeVector(rng.binomial(2, maf, size=n), variant_id='sim')


def gen_genotypes_fixed(n0, n1, n2, seed=None, n=None):
    """Exactly n_g carriers of each genotype g, in a seeded random order."""
    sizes = (n0, n1, n2)
    require(all(s >= 0 for s in sizes), "Group sizes must be non-negative: {}".format(sizes))
    require(n is None or sum(sizes) == n, "Group sizes {} do not sum to n = {}".format(sizes, n))
    rng = np.random.default_rng(seed)
    codes = np.repeat(np.arange(3), sizes)
    return GenotypeVector(rng.permutation(codes), variant_id='sim')


def gen_genotypes_ld(maf, n, J, rho, seed=None):
    """J SNPs whose haplotype liabilities have AR(1) correlation ``rho``.

    Each haplotype carries the minor allele at SNP j when its latent normal
    falls below the maf quantile, so every SNP keeps the requested MAF.
    """
    require(0 < maf <= 0.5, "MAF must be in (0, 0.5]: {}".format(maf))
    require(J >= 1, "Number of SNPs must be positive")
    require(-1 < rho < 1, "LD correlation must be in (-1, 1)")
    rng = np.random.default_rng(seed)
    lags = np.abs(np.subtract.outer(np.arange(J), np.arange(J)))
    cov = rho ** lags
    threshold = numeric.normal_quantile(maf)
    haplotypes = rng.multivariate_normal(np.zeros(J), cov, size=(2, n), method='cholesky') < threshold
    codes = haplotypes.sum(axis=0).T
    return [GenotypeVector(codes[j], variant_id='snp{}'.format(j + 1)) for j in range(J)]


def hwe_group_sizes(n, smallest):
    """Genotype group sizes in HWE proportions given the rare homozygote count."""
    require(0 < smallest < n, "Smallest group size must be in (0, n)")
    maf = math.sqrt(smallest / float(n))
    n1 = int(round(2 * maf * (1 - maf) * n))
    return (n - n1 - smallest, n1, smallest)


# ── models ───────────────────────────────────────────────────────────────────

class SimulationSpec:
    def __init__(self, model='null', n=2000, maf=None, group_sizes=None, beta_g=0.0, beta_e1=0.0, beta_e2=0.0,
                 beta_ge1=0.0, beta_ge2=0.0, f1=0.3, f2=0.3, residual='normal', seed=0):
        if model not in MODELS:
            raise UsageError("Unknown simulation model: {}".format(model))
        if residual not in RESIDUALS:
            raise UsageError("Unknown residual distribution: {}".format(residual))
        require(n >= 1, "Sample size must be positive")
        if maf is None and group_sizes is None:
            maf = 0.3
        require((maf is None) != (group_sizes is None), "Give either a MAF or fixed group sizes, not both")
        if maf is not None:
            require(0 < maf <= 0.5, "MAF must be in (0, 0.5]: {}".format(maf))
        if group_sizes is not None:
            group_sizes = tuple(int(s) for s in group_sizes)
            require(len(group_sizes) == 3 and sum(group_sizes) == n and min(group_sizes) >= 0,
                    "Group sizes {} must be three non-negative counts summing to n = {}".format(group_sizes, n))
        for f in (f1, f2):
            require(0 < f <= 1, "Exposure frequencies must be in (0, 1]")
        self.model = model
        self.n = int(n)
        self.maf = maf
        self.group_sizes = group_sizes
        self.beta_g = beta_g
        self.beta_e1 = beta_e1
        self.beta_e2 = beta_e2
        self.beta_ge1 = beta_ge1
        self.beta_ge2 = beta_ge2
        self.f1 = f1
        self.f2 = f2
        self.residual = residual
        self.seed = seed
        for name in BETAS:
            value = getattr(self, name)
            require(math.isfinite(value), "{} must be finite".format(name))
            require(value == 0 or name in MODEL_TERMS[model], "{} is not part of model {}".format(name, model))

    @property
    def is_null(self):
        return all(getattr(self, name) == 0 for name in ('beta_g', 'beta_ge1', 'beta_ge2'))

    def replace(self, **kwargs):
        fields = self.as_dict()
        fields.update(kwargs)
        if 'group_sizes' in kwargs and kwargs['group_sizes'] is not None: fields['maf'] = None
        if 'maf' in kwargs and kwargs['maf'] is not None: fields['group_sizes'] = None
        return SimulationSpec(**fields)

    def as_dict(self):
        return {
            'model': self.model, 'n': self.n, 'maf': self.maf, 'group_sizes': self.group_sizes,
            'beta_g': self.beta_g, 'beta_e1': self.beta_e1, 'beta_e2': self.beta_e2,
            'beta_ge1': self.beta_ge1, 'beta_ge2': self.beta_ge2, 'f1': self.f1, 'f2': self.f2,
            'residual': self.residual, 'seed': self.seed,
        }

    def columns(self):
        n0, n1, n2 = self.group_sizes or (None, None, None)
        row = {'model': self.model, 'n': self.n, 'maf': self.maf, 'n0': n0, 'n1': n1, 'n2': n2}
        row.update({name: getattr(self, name) for name in BETAS})
        row.update({'f1': self.f1, 'f2': self.f2, 'residual': self.residual})
        return row

    def __repr__(self):
        terms = ', '.join('{}={:g}'.format(t, getattr(self, t)) for t in MODEL_TERMS[self.model])
        geno = 'maf={:g}'.format(self.maf) if self.maf is not None else 'sizes={}'.format(self.group_sizes)
        return "SimulationSpec(model={}, n={}, {}{})".format(self.model, self.n, geno, ', ' + terms if terms else '')


class SimulatedDataset:
    def __init__(self, genotype, phenotype, exposures):
        self.genotype = genotype
        self.phenotype = phenotype
        # kept for checks on the generator only; never handed to a test
        self.hidden_exposures = exposures


def _residuals(rng, n, residual):
    if residual == 'normal':
        return rng.standard_normal(n)
    # log-normal(0, 1) standardised to mean 0 and variance 1
    e = math.e
    return (rng.lognormal(0.0, 1.0, n) - math.sqrt(e)) / math.sqrt((e - 1.0) * e)


@params(spec=SimulationSpec)
def simulate_dataset(spec, rng=None):
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    if spec.group_sizes is not None:
        geno = gen_genotypes_fixed(*spec.group_sizes, seed=rng, n=spec.n)
    else:
        geno = gen_genotypes_hwe(spec.maf, spec.n, seed=rng)
    g = geno.codes.astype(float)
    e1 = (rng.random(spec.n) < spec.f1).astype(float)
    e2 = (rng.random(spec.n) < spec.f2).astype(float)
    y = spec.beta_g * g + spec.beta_e1 * e1 + spec.beta_e2 * e2 + spec.beta_ge1 * g * e1 + \
        spec.beta_ge2 * g * e2 + _residuals(rng, spec.n, spec.residual)
    return SimulatedDataset(geno, PhenotypeVector(y), (e1, e2))


# ── experiments ──────────────────────────────────────────────────────────────

class ExperimentGrid:
    def __init__(self, cells, replicates, alphas=(0.05,), tests=TESTS, seed=0, config=None, modes=('asymptotic',),
                 permutations=1000, convention='add-one', block_size=50, name=''):
        cells = list(cells)
        require(len(cells) >= 1, "An experiment grid needs at least one cell")
        require(int(replicates) >= 1, "Number of replicates must be at least 1")
        alphas = tuple(float(a) for a in alphas)
        require(all(0 < a <= 1 for a in alphas), "Significance levels must be in (0, 1]")
        for t in tests:
            require(t in TESTS, "Unknown test: {}".format(t))
        for m in modes:
            require(m in MODES, "Unknown p-value mode: {}".format(m))
        self.cells = cells
        self.replicates = int(replicates)
        self.alphas = alphas
        self.tests = tuple(tests)
        self.seed = int(seed)
        self.config = config or JlsConfig()
        self.modes = tuple(modes)
        self.permutations = int(permutations)
        self.convention = convention
        self.block_size = block_size
        self.name = name
        if 'permutation' in self.modes:
            PermutationPlan(self.permutations, convention=convention)

    def __repr__(self):
        return "ExperimentGrid({}, cells={}, R={}, alphas={})".format(
            self.name, len(self.cells), self.replicates, self.alphas)


def asymptotic_pvalues(geno, pheno, config):
    """Asymptotic p-values of every test in TESTS for one dataset."""
    keep = ~geno.missing & ~pheno.missing
    x = geno.codes[keep].astype(float)
    y = pheno.values[keep]
    location = config.location_kernel()(x, y)
    scale = config.scale_kernel()(x, y)
    _, p_fisher, _ = fisher_arrays(location.p, scale.p, config.p_floor)
    _, p_minp = minp_arrays(location.p, scale.p)
    return {
        'location': location.p[0],
        'scale': scale.p[0],
        'fisher': p_fisher[0],
        'minp': p_minp[0],
        'lrt': stattests.lrt_kernel(x, y).p[0],
    }


def _run_block(spec, grid, cell, start, stop):
    rejections = np.zeros((len(grid.modes), len(grid.tests), len(grid.alphas)), dtype=np.int64)
    degenerate = np.zeros((len(grid.modes), len(grid.tests)), dtype=np.int64)
    alphas = np.array(grid.alphas)
    for r in range(start, stop):
        ds = simulate_dataset(spec, replicate_rng(grid.seed, cell, r))
        for i, mode in enumerate(grid.modes):
            if mode == 'asymptotic':
                pvalues = asymptotic_pvalues(ds.genotype, ds.phenotype, grid.config)
            else:
                plan = PermutationPlan(grid.permutations, derive_seed(grid.seed, cell, r, 1), grid.convention)
                pvalues = permute_and_rescore(ds.genotype, ds.phenotype, plan, grid.config).pvalues
            for j, test in enumerate(grid.tests):
                p = pvalues.get(test, float('nan'))
                if np.isnan(p):
                    degenerate[i, j] += 1
                else:
                    rejections[i, j] += p <= alphas
    return rejections, degenerate


def _run_grid(grid, threads=1, progress=None):
    rows = []
    for c, spec in enumerate(grid.cells):
        tasks = [(spec, grid, c, start, stop) for start, stop in blocks(grid.replicates, grid.block_size)]
        parts = parallel_map(_run_block, tasks, threads)
        rejections = sum(part[0] for part in parts)
        degenerate = sum(part[1] for part in parts)
        for i, mode in enumerate(grid.modes):
            for j, test in enumerate(grid.tests):
                for a, alpha in enumerate(grid.alphas):
                    rate = rejections[i, j, a] / float(grid.replicates)
                    row = {'cell': c}
                    row.update(spec.columns())
                    row.update({
                        'mode': mode, 'test': test, 'alpha': alpha, 'replicates': grid.replicates,
                        'rejections': int(rejections[i, j, a]), 'degenerate': int(degenerate[i, j]),
                        'rate': rate, 'se': math.sqrt(rate * (1.0 - rate) / grid.replicates),
                    })
                    rows.append(row)
        if progress: progress(c + 1, len(grid.cells))
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def run_type1_grid(grid, threads=1, progress=None):
    """Empirical type 1 error per (cell, test, alpha) with binomial standard errors."""
    for spec in grid.cells:
        require(spec.is_null, "Type 1 error grids need null-model cells: {}".format(spec))
    return _run_grid(grid, threads, progress)


def run_power_grid(grid, threads=1, progress=None):
    """Empirical power per (cell, mode, test, alpha); permutation mode nests K permutations per replicate."""
    return _run_grid(grid, threads, progress)


# ── presets ──────────────────────────────────────────────────────────────────

def effect_grid(lo, hi, step):
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


TABLE2_SIZES = [(1882, 116, 2), (1805, 190, 5), (1767, 226, 7), hwe_group_sizes(2000, 10), (1674, 311, 15),
                (1620, 360, 20)]
TABLE3_ROWS = [(0.05, 2.0), (0.1, 1.0), (0.2, 0.5), (0.3, 0.33), (0.5, 0.2), (1.0, 0.1)]


def _null_maf(**kw):
    cells = [SimulationSpec('null', n=2000, maf=maf) for maf in (0.3, 0.2, 0.1, 0.05, 0.03)]
    return cells, dict(replicates=20000, alphas=TYPE1_ALPHAS)


def _null_sizes(**kw):
    cells = [SimulationSpec('null', n=2000, group_sizes=sizes) for sizes in TABLE2_SIZES]
    return cells, dict(replicates=20000, alphas=TYPE1_ALPHAS)


def _interaction(**kw):
    cells = [SimulationSpec('iii', n=4000, maf=0.3, f1=f1, beta_ge1=b) for f1, b in TABLE3_ROWS]
    return cells, dict(replicates=500, alphas=(GENOME_WIDE,))


def _asym_vs_perm(**kw):
    cells = [SimulationSpec('iii', n=1000, maf=0.3, f1=0.05, beta_ge1=2.0)]
    return cells, dict(replicates=500, alphas=(0.01,), modes=MODES, permutations=2000)


def _model_i(**kw):
    cells = [SimulationSpec('i', n=2000, maf=0.3, f1=0.3, beta_g=bg, beta_e1=0.3 if bge >= 0 else -0.3,
                            beta_ge1=bge)
             for bg in (0.01, 0.05, 0.1) for bge in effect_grid(-1.0, 1.0, 0.1)]
    return cells, dict(replicates=500, alphas=(GENOME_WIDE,))


def _model_ii(**kw):
    cells = [SimulationSpec('ii', n=2000, maf=0.3, f1=0.3, f2=0.3, beta_e1=0.3, beta_e2=0.3 if bge2 >= 0 else -0.3,
                            beta_ge1=bge1, beta_ge2=bge2)
             for bge1 in (0.3, 0.6) for bge2 in effect_grid(-1.0, 1.0, 0.1)]
    return cells, dict(replicates=500, alphas=(GENOME_WIDE,))


PRESETS = {
    'null-maf': _null_maf,
    'null-sizes': _null_sizes,
    'interaction': _interaction,
    'asym-vs-perm': _asym_vs_perm,
    'model-i': _model_i,
    'model-ii': _model_ii,
}
TYPE1_PRESETS = ('null-maf', 'null-sizes')


def preset(name, replicates=None, seed=0, permutations=None, alphas=None, config=None, residual=None):
    if name not in PRESETS:
        raise UsageError("Unknown experiment preset: {} (choose from {})".format(name, ', '.join(sorted(PRESETS))))
    cells, options = PRESETS[name]()
    if residual is not None:
        cells = [spec.replace(residual=residual) for spec in cells]
    if replicates is not None: options['replicates'] = replicates
    if permutations is not None: options['permutations'] = permutations
    if alphas is not None: options['alphas'] = alphas
    return ExperimentGrid(cells, seed=seed, config=config, name=name, **options)
