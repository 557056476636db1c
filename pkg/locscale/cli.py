import click, functools, sys

import numpy as np

from locscale import __version__
from locscale import display, datafiles, simulate
from locscale.jls import JlsConfig, CONVENTIONS
from locscale.scanner import ScanConfig, Scanner, try_
from locscale.stattests import SCALE_TESTS
from locscale.util import UsageError, derive_seed, output_path, parse_floats, read_config, normalize_key
import locscale.util as util

aliases = {
    'cal': 'calibrate',
    'int': 'transform',
}

METHOD_CHOICES = {'fisher': ('fisher',), 'minp': ('minp',), 'both': ('fisher', 'minp')}


class AliasedGroup(click.Group):
    def get_command(self, ctx, cmd_name):
        rv = click.Group.get_command(self, ctx, cmd_name)
        if rv is not None:
            return rv
        if cmd_name in aliases:
            return click.Group.get_command(self, ctx, aliases[cmd_name])
        return None


def config_defaults(group, cfg):
    """Spread ``key = value`` settings over the subcommands that take them."""
    default_map, used = {}, set()
    for name, command in group.commands.items():
        params = {p.name for p in command.params}
        default_map[name] = {k: v for k, v in cfg.items() if k in params}
        used.update(default_map[name])
    for key in sorted(set(cfg) - used):
        display.warning("Unknown config key ignored: {}".format(key))
    return default_map


@click.group(cls=AliasedGroup, context_settings={'help_option_names': ['-h', '--help']})
@click.version_option(version=__version__, prog_name='locscale')
@click.option('-c', '--config', type=click.Path(dir_okay=False), help="Read option defaults from a 'key = value' file")
@click.option('-v', '--verbose', is_flag=True, envvar='LOCSCALE_VERBOSE', help="Enable verbose mode")
@click.pass_context
def cli(ctx, config, verbose):
    ctx.obj = {'VERBOSE': verbose or util.VERBOSE}
    if config:
        with try_("Failed to read config file {}".format(config), ctx.obj['VERBOSE']):
            ctx.default_map = config_defaults(cli, {normalize_key(k): v for k, v in read_config(config).items()})


def common_options(out):
    def decorator(f):
        @click.option('--seed', type=int, default=0, show_default=True, help="Master random seed")
        @click.option('-j', '--threads', type=int, default=1, show_default=True, help="Number of worker processes")
        @click.option('-o', '--out', default=out, show_default=True,
                      help="Output file (relative paths go under $LOCSCALE_OUT_DIR when set)")
        @click.pass_obj
        @functools.wraps(f)
        def w(obj, *args, **kwargs):
            obj = obj or {}
            kwargs['out'] = output_path(kwargs['out'])
            if kwargs['threads'] < 1:
                raise click.BadParameter("must be at least 1", param_hint='--threads')
            return f(obj.get('VERBOSE', util.VERBOSE), *args, **kwargs)

        return w

    return decorator


def analysis_options(f):
    for option in reversed([
        click.option('--location', type=click.Choice(['ols', 'anova']), default='ols', show_default=True,
                     help="Location test"),
        click.option('--scale', type=click.Choice(SCALE_TESTS), default='levene-mean', show_default=True,
                     help="Scale test"),
        click.option('--min-group-size', type=int, default=2, show_default=True,
                     help="Genotype groups smaller than this leave the scale test"),
    ]):
        f = option(f)
    return f


def floats(name):
    def convert(ctx, param, value):
        if value is None:
            return None
        try:
            return parse_floats(value, name)
        except UsageError as err:
            raise click.BadParameter(str(err))

    return convert


@cli.command(name='scan')
@common_options('results.tsv')
@analysis_options
@click.option('-p', '--phenotype', required=True, type=click.Path(dir_okay=False), help="Phenotype TSV")
@click.option('-g', '--genotype', required=True, type=click.Path(dir_okay=False), help="Genotype TSV")
@click.option('--methods', type=click.Choice(sorted(METHOD_CHOICES)), default='both', show_default=True,
              help="Joint location-scale combination(s) to report")
@click.option('--lrt/--no-lrt', default=True, show_default=True, help="Also run the likelihood ratio test")
@click.option('--mode', type=click.Choice(['asymptotic', 'permutation']), default='asymptotic', show_default=True,
              help="How joint p-values are obtained")
@click.option('-K', '--permutations', type=int, default=1000, show_default=True, help="Permutation replicates")
@click.option('--convention', type=click.Choice(CONVENTIONS), default='add-one', show_default=True,
              help="Permutation p-value convention")
@click.option('--flag-alpha', type=float, help="Report how many variants reach this joint p-value")
@click.option('--int/--no-int', 'int_transform', default=False, show_default=True,
              help="Inverse normal transform the phenotype first")
@click.option('--int-offset', type=float, default=datafiles.BLOM_OFFSET, show_default=True,
              help="Rank offset of the inverse normal transform (0.375 Blom, 0.5 rankit)")
def scan_command(verbose, seed, threads, out, location, scale, min_group_size, phenotype, genotype, methods, lrt,
                 mode, permutations, convention, flag_alpha, int_transform, int_offset):
    """ Test every variant for joint location-scale association """
    with try_("Scan failed", verbose):
        config = ScanConfig(phenotype, genotype, location=location, scale=scale, methods=METHOD_CHOICES[methods],
                            lrt=lrt, mode=mode, permutations=permutations, seed=seed, flag_alpha=flag_alpha,
                            int_transform=int_transform, int_offset=int_offset, min_group_size=min_group_size,
                            out=out, threads=threads, convention=convention)
        Scanner(config, verbose).scan()


@cli.command(name='geneset')
@common_options('genesets.tsv')
@analysis_options
@click.option('-p', '--phenotype', required=True, type=click.Path(dir_okay=False), help="Phenotype TSV")
@click.option('-g', '--genotype', required=True, type=click.Path(dir_okay=False), help="Genotype TSV")
@click.option('-s', '--genesets', required=True, type=click.Path(dir_okay=False), help="GMT style gene-set file")
@click.option('--statistic', type=click.Choice(['fisher', 'minp']), default='fisher', show_default=True,
              help="Per-SNP statistic summed over the set")
@click.option('-K', '--permutations', type=int, default=1000, show_default=True, help="Permutation replicates")
@click.option('--convention', type=click.Choice(CONVENTIONS), default='add-one', show_default=True,
              help="Permutation p-value convention")
@click.option('--int/--no-int', 'int_transform', default=False, show_default=True,
              help="Inverse normal transform the phenotype first")
@click.option('--int-offset', type=float, default=datafiles.BLOM_OFFSET, show_default=True,
              help="Rank offset of the inverse normal transform")
def geneset_command(verbose, seed, threads, out, location, scale, min_group_size, phenotype, genotype, genesets,
                    statistic, permutations, convention, int_transform, int_offset):
    """ Permutation test of summed JLS statistics per gene set """
    with try_("Gene-set scan failed", verbose):
        config = ScanConfig(phenotype, genotype, genesets=genesets, location=location, scale=scale, lrt=False,
                            permutations=permutations, seed=seed, int_transform=int_transform,
                            int_offset=int_offset, min_group_size=min_group_size, out=out, threads=threads,
                            convention=convention, statistic=statistic)
        Scanner(config, verbose).geneset_scan()


def model_options(f):
    @click.option('--model', type=click.Choice(simulate.MODELS), default='null', show_default=True,
                  help="Phenotype model")
    @click.option('-n', '--samples', 'n', type=int, default=2000, show_default=True, help="Sample size")
    @click.option('--maf', type=float, help="Minor allele frequency (HWE genotypes) [default: 0.3]")
    @click.option('--sizes', callback=floats('group size'), help="Fixed genotype group sizes n0,n1,n2 (sets the sample size)")
    @click.option('--beta-g', type=float, default=0.0, help="Genetic main effect")
    @click.option('--beta-e1', type=float, default=0.0, help="Main effect of exposure 1")
    @click.option('--beta-e2', type=float, default=0.0, help="Main effect of exposure 2")
    @click.option('--beta-ge1', type=float, default=0.0, help="Interaction of G with exposure 1")
    @click.option('--beta-ge2', type=float, default=0.0, help="Interaction of G with exposure 2")
    @click.option('--f1', type=float, default=0.3, show_default=True, help="Frequency of exposure 1")
    @click.option('--f2', type=float, default=0.3, show_default=True, help="Frequency of exposure 2")
    @click.option('--residual', type=click.Choice(simulate.RESIDUALS), default='normal', show_default=True,
                  help="Residual distribution")
    @functools.wraps(f)
    def w(*args, **kwargs):
        keys = ('model', 'n', 'maf', 'sizes', 'beta_g', 'beta_e1', 'beta_e2', 'beta_ge1', 'beta_ge2', 'f1', 'f2',
                'residual')
        fields = {k: kwargs.pop(k) for k in keys}
        sizes = fields.pop('sizes')
        if sizes is not None:
            fields['group_sizes'] = [int(s) for s in sizes]
            fields['n'] = sum(fields['group_sizes'])
        kwargs['fields'] = fields
        return f(*args, **kwargs)

    return w


@cli.command(name='simulate')
@common_options('sim')
@model_options
@click.option('--variants', type=int, default=1, show_default=True,
              help="Number of variants; the first is causal, the others are null")
def simulate_command(verbose, seed, threads, out, fields, variants):
    """ Write simulated phenotype and genotype files """
    with try_("Simulation failed", verbose):
        if variants < 1:
            raise UsageError("Number of variants must be at least 1")
        spec = simulate.SimulationSpec(seed=derive_seed(seed, 0), **fields)
        ds = simulate.simulate_dataset(spec)
        ids = ['s{}'.format(i + 1) for i in range(spec.n)]
        maf = spec.maf if spec.maf is not None else float(np.mean(ds.genotype.codes)) / 2.0
        genos = [ds.genotype] + [simulate.gen_genotypes_hwe(maf, spec.n, derive_seed(seed, j))
                                 for j in range(1, variants)]
        codes = [g.codes for g in genos]
        names = ['sim{}'.format(j + 1) for j in range(variants)]
        matrix = datafiles.GenotypeMatrix(names, ['1'] * variants, codes, ids)
        pheno = datafiles.PhenotypeTable(ids, ds.phenotype.values)
        pheno_path, geno_path = out + '.pheno.tsv', out + '.geno.tsv'
        datafiles.write_phenotypes(pheno, pheno_path)
        datafiles.write_genotypes(matrix, geno_path)
        display.success("Wrote {} samples to {} and {} variant(s) to {}".format(spec.n, pheno_path, variants,
                                                                                 geno_path))


def _run_experiment(grid, runner, threads, out, verbose):
    display.phase("Running {} ({} cell(s) x {} replicate(s))".format(grid.name or 'experiment', len(grid.cells),
                                                                    grid.replicates))
    with display.create_progress() as progress:
        task = progress.add_task(grid.name or 'cells', total=len(grid.cells))
        frame = runner(grid, threads, lambda done, total: progress.update(task, completed=done))
    datafiles.write_table(frame, out)
    display.console.print(display.rate_table(frame, title=grid.name or None))
    degenerate = int(frame['degenerate'].sum())
    if degenerate and verbose:
        display.verbose("{} degenerate test outcome(s) not counted as rejections".format(degenerate))
    display.success("Wrote {} row(s) to {}".format(len(frame), out))
    return frame


def _grid(preset, fields, replicates, alphas, seed, permutations, config, modes=None):
    if preset:
        return simulate.preset(preset, replicates=replicates, seed=seed, permutations=permutations, alphas=alphas,
                               config=config, residual=fields['residual'])
    options = {'alphas': alphas or (0.05,), 'seed': seed, 'config': config, 'name': fields['model']}
    if modes: options['modes'] = modes
    if permutations: options['permutations'] = permutations
    return simulate.ExperimentGrid([simulate.SimulationSpec(**fields)], replicates or 1000, **options)


@cli.command(name='calibrate')
@common_options('calibration.tsv')
@analysis_options
@model_options
@click.option('--preset', type=click.Choice(simulate.TYPE1_PRESETS), help="Reproduce a type 1 error table")
@click.option('-R', '--replicates', type=int, help="Null replicates per cell")
@click.option('--alpha', 'alphas', callback=floats('alpha'), help="Significance levels, e.g. 0.05,0.005")
def calibrate_command(verbose, seed, threads, out, location, scale, min_group_size, fields, preset, replicates,
                      alphas):
    """ Empirical type 1 error of every test under the null """
    with try_("Calibration failed", verbose):
        config = JlsConfig(location, scale, min_group_size=min_group_size)
        grid = _grid(preset, fields, replicates, alphas, seed, None, config)
        _run_experiment(grid, simulate.run_type1_grid, threads, out, verbose)


@cli.command(name='power')
@common_options('power.tsv')
@analysis_options
@model_options
@click.option('--preset', type=click.Choice(sorted(set(simulate.PRESETS) - set(simulate.TYPE1_PRESETS))),
              help="Reproduce a power table or figure grid")
@click.option('-R', '--replicates', type=int, help="Replicates per cell")
@click.option('--alpha', 'alphas', callback=floats('alpha'), help="Significance levels, e.g. 5e-8")
@click.option('--permutation', is_flag=True, help="Also estimate power with permutation p-values")
@click.option('-K', '--permutations', type=int, help="Permutation replicates per dataset")
def power_command(verbose, seed, threads, out, location, scale, min_group_size, fields, preset, replicates, alphas,
                  permutation, permutations):
    """ Empirical power of every test under an alternative model """
    with try_("Power experiment failed", verbose):
        config = JlsConfig(location, scale, min_group_size=min_group_size)
        modes = simulate.MODES if permutation else None
        grid = _grid(preset, fields, replicates, alphas, seed, permutations, config, modes)
        _run_experiment(grid, simulate.run_power_grid, threads, out, verbose)


@cli.command(name='transform')
@common_options('transformed.tsv')
@click.option('-p', '--phenotype', required=True, type=click.Path(dir_okay=False), help="Phenotype TSV")
@click.option('--int-offset', type=float, default=datafiles.BLOM_OFFSET, show_default=True,
              help="Rank offset of the inverse normal transform (0.375 Blom, 0.5 rankit)")
def transform_command(verbose, seed, threads, out, phenotype, int_offset):
    """ Inverse normal transform a phenotype file """
    with try_("Transform failed", verbose):
        table = datafiles.load_phenotypes(phenotype)
        table.values = datafiles.inverse_normal_transform(table.values, int_offset)
        datafiles.write_phenotypes(table, out)
        display.success("Wrote {} transformed value(s) to {}".format(int(np.sum(~np.isnan(table.values))), out))


def main(args=None):
    """Entry point; command-line usage errors exit with status 1."""
    try:
        cli.main(args=args, prog_name='locscale', standalone_mode=False)
    except click.exceptions.Abort:
        display.error("Aborted")
        sys.exit(1)
    except click.ClickException as err:
        err.show()
        sys.exit(1)
