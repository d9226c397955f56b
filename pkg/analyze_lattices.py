import argparse
import json
import sys
import textwrap
import time

import numpy as np
import pandas as pd

import hilbert_counterexample as hc
import lattice_expr as le
import projectivity as pj
import quasi_lattice as ql
import stable_constants as sc
from acceptance_suite import self_test
from expr_parser import parse_expr
from free_norm import SearchBudget, norm_bracket
from input_specs import (parse_assignment, parse_budget, parse_float_list, parse_int_list,
                         parse_lattice_spec, parse_space_spec, parse_vector, parse_vectors)
from lattice_errors import PropertyCheckError
from report_builder import RunConfig, error_payload, write_output
from seeding import MAX_SEED

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_PROPERTY = 3

GLOBAL_KEYS = ('subcommand', 'seed', 'threads', 'output_format', 'output', 'reproducible', 'verbose')


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='Root seed of all random streams. Default = 0')
    common.add_argument('--threads', type=int, default=1, help='Worker threads; output does not depend on it. Default = 1')
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument('--json', dest='output_format', action='store_const', const='json', help='JSON output (default)')
    fmt.add_argument('--csv', dest='output_format', action='store_const', const='csv', help='CSV output')
    fmt.add_argument('--table', dest='output_format', action='store_const', const='table', help='Plain text table')
    common.add_argument('--output', type=str, default=None, help='Write the output to this file instead of stdout')
    common.add_argument('--reproducible', action='store_true', help='Leave the timestamp out of the metadata')
    common.add_argument('-v', '--verbose', action='store_true', help='Progress and runtime on stderr')
    common.set_defaults(output_format='json')
    return common


def build_parser():
    parser = argparse.ArgumentParser(
        prog='Free-Lattice-Profiler',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=textwrap.dedent('''\
            Numerical checks for free Banach lattices and quasi-Banach lattices
            -------------------------------------------------------------------
              free-lattice norm brackets, q-stable moment constants A_{p,q},
              the Hilbert transform counterexample F_n and l_p projectivity
            ''')
    )
    common = _common_options()
    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser('fbl-norm', parents=[common], help='Bracket the free p-convex lattice norm of an expression')
    p.add_argument('--expr', type=str, required=True, help='Expression in prefix notation, e.g. "(abs (gen 0))"')
    p.add_argument('--space', type=str, required=True, help='Space E, e.g. lp:2:3 or lp:inf:3')
    p.add_argument('--p', type=float, default=1.0, help='Convexity exponent p in (0, 1]. Default = 1')
    p.add_argument('--budget', type=str, default='', help='Search budget, e.g. "n=8,restarts=32,iters=200"')
    p.add_argument('--certificate', type=str, default=None, help='Domination certificate vectors, e.g. "1,0;0,1"')
    p.add_argument('--check-points', type=int, default=1000, help='Probe functionals for certificates. Default = 1000')

    p = sub.add_parser('apq', parents=[common], help='Moment constant A_{p,q}')
    p.add_argument('--p', type=float, required=True, help='Moment order p')
    p.add_argument('--q', type=float, required=True, help='Stability index q in (0, 2]')
    p.add_argument('--mc', type=int, default=0, help='Monte Carlo sample size; 0 = closed form only. Default = 0')
    p.add_argument('--quadrature', action='store_true', help='Also evaluate the integral identity numerically')

    p = sub.add_parser('mn-bound', parents=[common], help='Factorization constant bound T_q A_{r,q} / A_{p,q}')
    p.add_argument('--p', type=float, required=True, help='Exponent p')
    p.add_argument('--r', type=float, required=True, help='Exponent r, p < r < q')
    p.add_argument('--q', type=float, required=True, help='Stability index q <= 2')
    p.add_argument('--type-const', type=float, default=1.0, help='Type q constant T_q >= 1. Default = 1')
    p.add_argument('--uniform-sup', action='store_true', help='Also estimate sup_p A_{r,q} / A_{p,q} over p in (0, r)')

    p = sub.add_parser('apq-scan', parents=[common], help='A_{r,q} / A_{p,q} over a grid of p in (0, r)')
    p.add_argument('--r', type=float, required=True, help='Exponent r')
    p.add_argument('--q', type=float, required=True, help='Stability index q')
    p.add_argument('--grid-min', type=float, default=1e-4, help='Smallest p. Default = 1e-4')
    p.add_argument('--grid-max', type=float, default=None, help='Largest p. Default = r - 0.001')
    p.add_argument('--points', type=int, default=200, help='Grid points. Default = 200')

    p = sub.add_parser('stable-sample', parents=[common], help='Draws of the normalized symmetric q-stable law')
    p.add_argument('--q', type=float, required=True, help='Stability index q in (0, 2]')
    p.add_argument('--n', type=int, default=1000, help='Number of draws. Default = 1000')

    p = sub.add_parser('hilbert-table', parents=[common], help='Minima and weak-L1 norms of F_n')
    p.add_argument('--n', type=str, required=True, help='Comma separated list of n, e.g. 1,2,4,8')
    p.add_argument('--cells', type=int, default=10001, help='Grid cells on [0,1]. Default = 10001')

    p = sub.add_parser('lemma-check', parents=[common], help='Symmetry, unimodality and minima ordering of F_n')
    p.add_argument('--n', type=str, required=True, help='Comma separated list of n')
    p.add_argument('--pairs', type=int, default=1000, help='Symmetry sample pairs. Default = 1000')

    p = sub.add_parser('projectivity', parents=[common], help='Verdicts for the alpha / beta construction on l_p^N')
    p.add_argument('--N', type=int, default=12, help='Truncation N. Default = 12')
    p.add_argument('--p', type=float, default=1.0, help='Exponent p in (0, 1]. Default = 1')
    p.add_argument('--trials', type=int, default=10000, help='Random trials per check. Default = 10000')
    p.add_argument('--sandwich', type=int, default=20, help='Random coefficient vectors. Default = 20')

    p = sub.add_parser('convexity', parents=[common], help='Lower bound for the p-convexity constant')
    p.add_argument('--lattice', type=str, required=True, help='Lattice, e.g. lpgrid:0.5:8 or weightedlr:0.5:4')
    p.add_argument('--p', type=str, required=True, help='Exponent p, or a comma separated ascending list for a scan')
    p.add_argument('--trials', type=int, default=1000, help='Random tuples. Default = 1000')

    p = sub.add_parser('lconvexity', parents=[common], help='Random search for L-convexity violations')
    p.add_argument('--lattice', type=str, required=True, help='Lattice spec')
    p.add_argument('--eps', type=float, default=0.1, help='epsilon in (0, 1). Default = 0.1')
    p.add_argument('--trials', type=int, default=1000, help='Random families. Default = 1000')
    p.add_argument('--family-size', type=int, default=8, help='Members per family. Default = 8')

    p = sub.add_parser('expr-eval', parents=[common], help='Evaluate an expression at scalars or lattice elements')
    p.add_argument('--expr', type=str, required=True, help='Expression in prefix notation')
    p.add_argument('--assign', type=str, default=None, help='Scalar assignment, e.g. "0=3,1=5"')
    p.add_argument('--elements', type=str, default=None, help='Lattice elements for generators 0, 1, ..., e.g. "1,0;0,1"')

    p = sub.add_parser('self-test', parents=[common], help='Run the acceptance suite')
    p.add_argument('--filter', type=str, default=None, help='Only criteria whose name contains this text')

    return parser


### Validation ###

def validate_args(args):
    '''
    Collect every problem with the parsed arguments and raise them together.
    '''
    errors = []
    if not (0 <= args.seed <= MAX_SEED):
        errors.append(f"--seed must be a 64-bit unsigned integer. Got: {args.seed}")
    if args.threads < 1:
        errors.append(f"--threads must be >= 1. Got: {args.threads}")

    positive_ints = [('--check-points', 'check_points'), ('--points', 'points'), ('--n', 'n'),
                     ('--cells', 'cells'), ('--pairs', 'pairs'), ('--N', 'N'), ('--trials', 'trials'),
                     ('--sandwich', 'sandwich'), ('--family-size', 'family_size')]
    for flag, attr in positive_ints:
        value = getattr(args, attr, None)
        if isinstance(value, int) and value < 1:
            errors.append(f"{flag} must be a positive integer. Got: {value}")
    if getattr(args, 'mc', 0) < 0:
        errors.append(f"--mc must be >= 0. Got: {args.mc}")
    if args.subcommand == 'fbl-norm' and not (0 < args.p <= 1):
        errors.append(f"--p must be in (0, 1]. Got: {args.p}")
    if args.subcommand == 'expr-eval' and (args.assign is None) == (args.elements is None):
        errors.append("expr-eval needs exactly one of --assign or --elements.")
    if args.subcommand == 'lconvexity' and not (0 < args.eps < 1):
        errors.append(f"--eps must be in (0, 1). Got: {args.eps}")

    if errors:
        raise ValueError("Argument validation failed.\n" + "\n".join(errors))


def make_config(args):
    params = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS}
    return RunConfig(
        subcommand=args.subcommand,
        params=params,
        seed=args.seed,
        output_format=args.output_format,
        output_path=args.output,
        threads=args.threads,
        reproducible=args.reproducible,
        verbose=args.verbose,
    )


### Subcommands ###

def run_fbl_norm(params, config):
    f = parse_expr(params['expr'])
    space = parse_space_spec(params['space'])
    budget = parse_budget(params['budget']) if params['budget'] else SearchBudget()
    certificate = parse_vectors(params['certificate']) if params['certificate'] else None
    bracket = norm_bracket(f, space, params['p'], budget=budget, seed=config.seed, certificate=certificate,
                           check_points=params['check_points'], threads=config.threads)
    result = bracket.to_dict()
    result['expr'] = le.to_prefix(f)
    result['space'] = space.describe()
    return result


def run_apq(params, config):
    p, q = params['p'], params['q']
    result = {'p': p, 'q': q, 'value': sc.a_pq(p, q), 'limit_p_to_0': sc.a_pq_limit(q),
              'gaussian_extension': sc.is_gaussian_extension(q)}
    if params['quadrature']:
        result['quadrature'] = sc.a_pq_quadrature(p, q)
    if params['mc']:
        mc = sc.a_pq_monte_carlo(p, q, sc.StableSpec(q, config.seed, params['mc']), threads=config.threads,
                                 verbose=config.verbose)
        result['monte_carlo'] = {'estimate': mc.estimate, 'stderr': mc.stderr, 'n_samples': mc.n_samples,
                                 'unreliable': mc.unreliable}
    return result


def run_mn_bound(params, config):
    return sc.mn_constant_bound(params['p'], params['r'], params['q'], params['type_const'],
                                 uniform_sup=params['uniform_sup'])


def run_apq_scan(params, config):
    r, q = params['r'], params['q']
    grid_max = params['grid_max'] if params['grid_max'] is not None else r - 1e-3
    grid = np.linspace(params['grid_min'], grid_max, params['points'])
    scan = sc.uniform_bound_scan(r, q, grid)
    if config.output_format == 'json':
        return {'r': r, 'q': q, 'max_ratio': scan.max_ratio, 'argmax_p': scan.argmax_p,
                'endpoint_ratio': scan.endpoint_ratio, 'limit_ratio': scan.limit_ratio, 'grid': scan.table}
    return scan.table


def run_stable_sample(params, config):
    samples = sc.sample_stable(sc.StableSpec(params['q'], config.seed, params['n']), threads=config.threads)
    if config.output_format == 'json':
        return {'q': params['q'], 'n': params['n'], 'median_abs': float(np.median(np.abs(samples))),
                'negative_fraction': float(np.mean(samples < 0)), 'samples': samples}
    return pd.DataFrame({'x': samples})


def run_hilbert_table(params, config):
    return hc.divergence_table(parse_int_list(params['n']), params['cells'], threads=config.threads,
                               verbose=config.verbose)


def run_lemma_check(params, config):
    reports = [hc.f_n_lemma_check(n, pairs=params['pairs'], seed=config.seed) for n in parse_int_list(params['n'])]
    if config.output_format == 'json':
        return [r.to_dict() for r in reports]
    return pd.DataFrame([{k: v for k, v in r.to_dict().items() if k != 'details'} for r in reports])


def run_projectivity(params, config):
    return pj.projectivity_report(params['N'], params['p'], params['trials'], config.seed,
                                  sandwich_vectors=params['sandwich'], threads=config.threads,
                                  verbose=config.verbose)


def run_convexity(params, config):
    L = parse_lattice_spec(params['lattice'])
    exponents = parse_float_list(params['p'])
    if len(exponents) == 1:
        report = ql.p_convexity_lower_bound(L, exponents[0], params['trials'], config.seed,
                                            threads=config.threads, verbose=config.verbose)
        return dict(report.to_dict(), lattice=L.describe())
    reports = ql.convexity_monotonicity_scan(L, exponents, params['trials'], config.seed, threads=config.threads)
    if config.output_format == 'json':
        return {'lattice': L.describe(), 'scan': [r.to_dict() for r in reports]}
    return pd.DataFrame([{'p': r.exponent, 'bound': r.bound, 'witness_exponent': r.witness_exponent}
                         for r in reports])


def run_lconvexity(params, config):
    L = parse_lattice_spec(params['lattice'])
    found = ql.l_convexity_search(L, params['eps'], params['trials'], config.seed, family_size=params['family_size'])
    return {'lattice': L.describe(), 'eps': params['eps'], 'trials': params['trials'], 'violations': found}


def run_expr_eval(params, config):
    f = parse_expr(params['expr'])
    result = {'expr': le.to_prefix(f), 'generators': list(le.generators(f))}
    if params['assign'] is not None:
        result['value'] = le.evaluate_scalar(f, parse_assignment(params['assign']))
    else:
        elements = parse_vectors(params['elements'])
        result['value'] = le.evaluate_lattice(f, dict(enumerate(elements)))
    return result


def run_self_test(params, config):
    return self_test(params['filter'], verbose=config.verbose)


HANDLERS = {
    'fbl-norm': run_fbl_norm,
    'apq': run_apq,
    'mn-bound': run_mn_bound,
    'apq-scan': run_apq_scan,
    'stable-sample': run_stable_sample,
    'hilbert-table': run_hilbert_table,
    'lemma-check': run_lemma_check,
    'projectivity': run_projectivity,
    'convexity': run_convexity,
    'lconvexity': run_lconvexity,
    'expr-eval': run_expr_eval,
    'self-test': run_self_test,
}


def _verdict(config, result):
    # report-style subcommands fail with exit 3 when a checked property fails
    if config.subcommand == 'self-test' and not result['passed'].all():
        return EXIT_PROPERTY
    if config.subcommand == 'projectivity' and not result['passed']:
        return EXIT_PROPERTY
    if config.subcommand == 'lemma-check':
        passed = [r['passed'] for r in result] if isinstance(result, list) else list(result['passed'])
        if not all(passed):
            return EXIT_PROPERTY
    return EXIT_OK


def _report_error(config, error, label):
    print(f"\n{label}: {error}", file=sys.stderr)
    if config.output_format == 'json':
        sys.stdout.write(json.dumps(error_payload(error), sort_keys=True) + '\n')


def dispatch(config):
    '''
    Run one subcommand and write its output.

    Returns:
        0 on success, 2 on validation errors, 3 when a checked property fails, 1 otherwise
    '''
    handler = HANDLERS.get(config.subcommand)
    if handler is None:
        _report_error(config, ValueError(f"Unknown subcommand '{config.subcommand}'."), 'Error')
        return EXIT_VALIDATION
    try:
        result = handler(config.params, config)
        write_output(result, config)
        return _verdict(config, result)
    except PropertyCheckError as e:
        _report_error(config, e, 'Property check failed')
        return EXIT_PROPERTY
    except ValueError as e:
        _report_error(config, e, 'Error')
        return EXIT_VALIDATION
    except FileNotFoundError as e:
        _report_error(config, e, 'File Error')
        return EXIT_UNEXPECTED
    except Exception as e:
        _report_error(config, e, 'Unexpected Error')
        return EXIT_UNEXPECTED


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        validate_args(args)
    except ValueError as e:
        print(f"\nError: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    config = make_config(args)

    if config.verbose:
        print("\n       === Free-Lattice-Profiler ===", file=sys.stderr)
        print(f"  subcommand: {config.subcommand}  seed: {config.seed}  threads: {config.threads}", file=sys.stderr)
        print('-' * 60, file=sys.stderr)
    return dispatch(config)


if __name__ == "__main__":
    start_time = time.time()
    code = main()
    if '-v' in sys.argv or '--verbose' in sys.argv:
        print(f"\nTotal runtime: {time.time() - start_time:.2f} seconds", file=sys.stderr)
    sys.exit(code)
