import os, sys, contextlib

import numpy as np

from locscale import display, datafiles
from locscale.data import GenotypeVector, PhenotypeVector
from locscale.geneset import GeneSetResult, DegenerateSetError, geneset_permutation_test, SNP_STATISTICS
from locscale.jls import JlsConfig, PermutationPlan, CONVENTIONS, jls_single_variant, permute_and_rescore
from locscale.stattests import LOCATION_TESTS, SCALE_TESTS
from locscale.types import params
from locscale.util import LocScaleError, DataError, UsageError, blocks, parallel_map, require

MODES = ('asymptotic', 'permutation')
METHODS = ('fisher', 'minp')
VARIANT_BLOCK = 64


class ScanConfig:
    def __init__(self, phenotype, genotype, genesets=None, location='ols', scale='levene-mean', methods=METHODS,
                 lrt=True, mode='asymptotic', permutations=1000, seed=0, flag_alpha=None, int_transform=False,
                 int_offset=datafiles.BLOM_OFFSET, min_group_size=2, out='results.tsv', threads=1,
                 convention='add-one', statistic='fisher'):
        require(location in LOCATION_TESTS, "Unknown location test: {}".format(location))
        require(scale in SCALE_TESTS, "Unknown scale test: {}".format(scale))
        methods = tuple(methods)
        require(len(methods) > 0 and all(m in METHODS for m in methods),
                "Joint methods must be fisher, minp or both: {}".format(','.join(methods)))
        require(mode in MODES, "Unknown p-value mode: {}".format(mode))
        require(convention in CONVENTIONS, "Unknown permutation p-value convention: {}".format(convention))
        require(statistic in SNP_STATISTICS, "Unknown gene-set statistic: {}".format(statistic))
        if mode == 'permutation' or genesets:
            require(int(permutations) >= 1, "Permutation mode needs at least one replicate")
        require(flag_alpha is None or 0 < flag_alpha <= 1, "Flag threshold must be in (0, 1]")
        require(int(threads) >= 1, "Number of threads must be at least 1")
        for path in (phenotype, genotype, genesets):
            if path is not None and not os.path.isfile(path):
                raise UsageError("Input file is not readable: {}".format(path))
        self.phenotype = phenotype
        self.genotype = genotype
        self.genesets = genesets
        self.location = location
        self.scale = scale
        self.methods = methods
        self.lrt = lrt
        self.mode = mode
        self.permutations = int(permutations)
        self.seed = int(seed)
        self.flag_alpha = flag_alpha
        self.int_transform = int_transform
        self.int_offset = int_offset
        self.min_group_size = min_group_size
        self.out = out
        self.threads = int(threads)
        self.convention = convention
        self.statistic = statistic

    def jls_config(self):
        return JlsConfig(self.location, self.scale, self.lrt, self.min_group_size)

    def plan(self):
        return PermutationPlan(self.permutations, self.seed, self.convention)


class SampleFrame:
    """Phenotype and genotypes restricted to the samples present in both files.

    Samples are ordered by id, so results do not depend on column order.
    """

    def __init__(self, phenotypes, genotypes, report):
        self.phenotypes = phenotypes
        self.genotypes = genotypes
        self.report = report

    @property
    def sample_ids(self):
        return self.phenotypes.sample_ids

    @property
    def sexes(self):
        return self.phenotypes.sexes

    @property
    def phenotype(self):
        return self.phenotypes.vector()

    @classmethod
    def build(cls, phenotypes, genotypes):
        in_pheno, in_geno = set(phenotypes.sample_ids), set(genotypes.sample_ids)
        common = sorted(in_pheno & in_geno)
        if not common:
            raise DataError("No sample is present in both the phenotype and the genotype file")
        ppos = {s: i for i, s in enumerate(phenotypes.sample_ids)}
        gpos = {s: i for i, s in enumerate(genotypes.sample_ids)}
        report = {
            'phenotype_samples': len(in_pheno),
            'genotype_samples': len(in_geno),
            'common': len(common),
            'phenotype_only': sorted(in_pheno - in_geno),
            'genotype_only': sorted(in_geno - in_pheno),
        }
        return cls(phenotypes.take([ppos[s] for s in common]), genotypes.take([gpos[s] for s in common]), report)

    def transform(self, offset=datafiles.BLOM_OFFSET):
        values = datafiles.inverse_normal_transform(self.phenotypes.values, offset)
        self.phenotypes = datafiles.PhenotypeTable(self.phenotypes.sample_ids, values, self.phenotypes.sexes,
                                                   self.phenotypes.name)

    def reconciliation_lines(self):
        r = self.report
        yield "{} samples in common ({} with phenotype, {} with genotypes)".format(
            r['common'], r['phenotype_samples'], r['genotype_samples'])
        for key, what in (('phenotype_only', 'without genotypes'), ('genotype_only', 'without phenotype')):
            if r[key]:
                shown = ', '.join(r[key][:5]) + (', ...' if len(r[key]) > 5 else '')
                yield "{} sample(s) {} dropped: {}".format(len(r[key]), what, shown)


# ── scanning ─────────────────────────────────────────────────────────────────

def _scan_block(codes, variant_ids, chroms, pheno, config, plan):
    out = []
    for row, (variant_id, chrom) in enumerate(zip(variant_ids, chroms)):
        geno = GenotypeVector(codes[row], variant_id, chrom)
        if plan is None:
            out.append(jls_single_variant(geno, pheno, config))
        else:
            out.append(permute_and_rescore(geno, pheno, plan, config))
    return out


@params(config=ScanConfig, frame=SampleFrame)
def run_scan(config, frame, progress=None):
    """JLS results of every variant in input order.

    Permutation mode returns PermutationResults sharing one plan seed. Work is
    split in fixed blocks of variants, so the output does not depend on the
    number of threads.
    """
    jls_config = config.jls_config()
    plan = config.plan() if config.mode == 'permutation' else None
    pheno = PhenotypeVector(frame.phenotypes.values)
    matrix = frame.genotypes
    tasks = [(matrix.codes[start:stop], matrix.variant_ids[start:stop], matrix.chroms[start:stop], pheno, jls_config,
              plan) for start, stop in blocks(len(matrix), VARIANT_BLOCK)]
    results = []
    chunk = max(1, 4 * config.threads)
    for i in range(0, len(tasks), chunk):
        for part in parallel_map(_scan_block, tasks[i:i + chunk], config.threads):
            results.extend(part)
            if progress: progress(len(part))
    return results


def joint_p(result, method='fisher'):
    if hasattr(result, 'pvalues'):
        return result.pvalues.get(method, float('nan'))
    return getattr(result, 'p_' + method)


def observed(result):
    return result.observed if hasattr(result, 'pvalues') else result


def count_flagged(results, alpha, method='fisher'):
    ps = np.array([joint_p(r, method) for r in results], dtype=float)
    with np.errstate(invalid='ignore'):
        return int(np.sum(ps <= alpha))


@params(config=ScanConfig, frame=SampleFrame)
def run_geneset_scan(config, frame, genesets, progress=None):
    """One permutation test per gene set; sets whose SNPs are all degenerate get a degenerate row."""
    jls_config = config.jls_config()
    plan = config.plan()
    pheno = frame.phenotype
    results = []
    for gs in genesets:
        genos = [frame.genotypes.get(v) for v in gs.variant_ids]
        try:
            results.append(geneset_permutation_test(genos, pheno, plan, jls_config, config.statistic, gs.set_id,
                                                    config.threads))
        except DegenerateSetError as err:
            results.append(GeneSetResult.degenerate(gs.set_id, config.statistic, err.data, plan.replicates))
        if progress: progress(1)
    return results


@contextlib.contextmanager
def try_(msg=None, verbose=False):
    """Print the error and exit with the code of its class; re-raise in verbose mode."""
    try:
        yield
    except LocScaleError as err:
        display.error(str(err))
        if msg: display.error(msg)
        if verbose:
            if err.data: display.console.print(str(err.data))
            raise
        sys.exit(err.exit_code)
    except Exception:
        extype, exvalue, _ = sys.exc_info()
        display.error("Unexpected error: " + str(extype))
        display.console.print(str(exvalue))
        if msg: display.error(msg)
        if verbose: raise
        sys.exit(LocScaleError.exit_code)


class Scanner:
    def __init__(self, config, verbose=False):
        self.config = config
        self.verbose = verbose

    def log(self, *args):
        if self.verbose: display.verbose(' '.join([str(arg) for arg in args]))

    def try_(self, msg=None):
        return try_(msg, self.verbose)

    def load(self):
        c = self.config
        with display.status("Loading input files"):
            phenotypes = datafiles.load_phenotypes(c.phenotype)
            self.log("read", len(phenotypes), "phenotype records from", c.phenotype)
            genotypes = datafiles.load_genotypes(c.genotype, phenotypes.sex_of())
            self.log("read", len(genotypes), "variants x", len(genotypes.sample_ids), "samples from", c.genotype)
        frame = SampleFrame.build(phenotypes, genotypes)
        for line in frame.reconciliation_lines():
            if frame.report['common'] < max(frame.report['phenotype_samples'], frame.report['genotype_samples']):
                display.warning(line)
            else:
                display.info(line)
        if c.int_transform:
            frame.transform(c.int_offset)
            self.log("inverse normal transform with offset", c.int_offset)
        return frame

    def scan(self):
        c = self.config
        frame = self.load()
        display.phase("Scanning {} variants ({} p-values)".format(len(frame.genotypes), c.mode))
        with display.create_progress() as progress:
            task = progress.add_task("scan", total=len(frame.genotypes))
            results = run_scan(c, frame, lambda n: progress.advance(task, n))
        written = datafiles.write_results(results, c.out, c.methods)
        degenerate = [observed(r).variant_id for r in results if not observed(r).ok]
        if degenerate:
            display.warning("{} degenerate variant(s)".format(len(degenerate)))
            if self.verbose: display.verbose(', '.join(display.variant(v) for v in degenerate))
        unstable = sum(1 for r in results if getattr(r, 'unstable', False))
        if unstable: display.warning("{} variant(s) with unstable permutation distributions".format(unstable))
        if c.flag_alpha is not None:
            method = 'fisher' if 'fisher' in c.methods else 'minp'
            display.info("{} variant(s) with p_{} <= {:g}".format(count_flagged(results, c.flag_alpha, method),
                                                                   method, c.flag_alpha))
        display.success("Wrote {} result(s) to {}".format(written, c.out))
        return results

    def geneset_scan(self):
        c = self.config
        frame = self.load()
        genesets = []
        for gs in datafiles.load_genesets(c.genesets):
            resolved = gs.resolve(frame.genotypes)
            if resolved.unresolved:
                display.warning("Gene set {}: {} variant(s) not in the genotype file: {}".format(
                    display.variant(gs.set_id), len(resolved.unresolved),
                    ', '.join(display.variant(v) for v in resolved.unresolved)))
            genesets.append(resolved)
        display.phase("Testing {} gene set(s) with K = {}".format(len(genesets), c.permutations))
        with display.create_progress() as progress:
            task = progress.add_task("gene sets", total=len(genesets))
            results = run_geneset_scan(c, frame, genesets, lambda n: progress.advance(task, n))
        written = datafiles.write_geneset_results(results, c.out)
        display.success("Wrote {} gene-set result(s) to {}".format(written, c.out))
        return results
