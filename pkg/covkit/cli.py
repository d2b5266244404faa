"""Command line front end.

Every subcommand prints one JSON report on stdout (validated against
REPORT_SCHEMA) and returns 0 on success, 1 when a verification fails, 2 on
validation errors and 3 when a budget is exhausted. Logging goes to stderr.
"""
import argparse
import json
import logging
import sys

from covkit.covers import check_c1, check_c2_exhaustive, cover_from_partition_family
from covkit.instances import (KMldInstance, certify_no_thresholds, gen_planted_maxlin,
                              gen_random_maxlin, load_cover, load_family, load_instance,
                              no_threshold, parse_rational, rational_to_json, save_cover,
                              save_family, save_instance, yes_threshold)
from covkit.oracle import classify_gap, solve_instance
from covkit.partitions import (check_p1, check_p2_exhaustive, check_p2_sampled,
                               deterministic_family, hypercube_family, random_family)
from covkit.reduce import (kmld_to_ncp, maxlin_to_mld, mld_group_cover, mld_group_naive,
                           pipeline_maxlin_to_kmld)
from covkit.utils.config import BudgetConfig
from covkit.utils.errors import BadParams, CovkitError
from covkit.utils.schemas import REPORT_SCHEMA, validate_document
from covkit.utils_configs import get_config
from covkit.utils_evaluation import evaluate_gap_panel

logger = logging.getLogger('covkit')


class UsageError(Exception):
  pass


class CovkitParser(argparse.ArgumentParser):
  def error(self, message):
    raise UsageError('{}\n{}'.format(message, self.format_usage()))


def rational(text):
  try:
    return parse_rational(text)
  except CovkitError as e:
    raise argparse.ArgumentTypeError(str(e))


def _params(args):
  skip = {'handler', 'verbose'}
  params = {}
  for key, value in sorted(vars(args).items()):
    if key in skip:
      continue
    params[key] = str(value) if value is not None and not isinstance(value, (int, str, bool)) else value
  return params


def _threshold_block(inst):
  block = {'yes': rational_to_json(yes_threshold(inst)), 'no': rational_to_json(no_threshold(inst))}
  if inst.kind == 'maxlin':
    block.update(c=rational_to_json(inst.c), s=rational_to_json(inst.s))
  else:
    block['gamma'] = rational_to_json(inst.gamma)
  return block


########################
# SUBCOMMANDS
########################

def cmd_gen_maxlin(args, config):
  report = {}
  if args.mode == 'planted':
    inst, planted = gen_planted_maxlin(args.n, args.m, args.q, args.c, args.seed, s=args.s)
    report['planted'] = planted.tolist()
  else:
    inst = gen_random_maxlin(args.n, args.m, args.q, args.seed, c=args.c,
                             s=args.s if args.s is not None else args.c / 2)
    if args.certify_no:
      optimum = solve_instance(inst, budget=config.enumeration_budget).optimum
      inst = certify_no_thresholds(inst, optimum)
      report['optimum'] = optimum
  save_instance(inst, args.output)
  report['thresholds'] = _threshold_block(inst)
  return report


def cmd_build_family(args, config):
  if args.construction == 'random':
    F = random_family(args.m, args.k, args.alpha, args.epsilon, args.seed,
                      budget=config.enumeration_budget)
  elif args.construction == 'deterministic':
    F = deterministic_family(args.m, args.k, args.eta, args.epsilon, budget=config.hypercube_budget)
  else:
    F = hypercube_family(args.k, args.d, args.alpha, args.epsilon, budget=config.hypercube_budget)
  save_family(F, args.output)
  return {'functions': len(F), 'm': F.m, 'guarantee_regime': bool(F.guarantee_regime),
          'p1': check_p1(F).ok}


def cmd_build_cover(args, config):
  F = load_family(args.family)
  S = cover_from_partition_family(F, args.alpha, args.epsilon, budget=config.cover_budget)
  save_cover(S, args.output)
  return {'sets': len(S), 'size_bound': rational_to_json(S.size_bound)}


def _expect_kind(inst, kind):
  if inst.kind != kind:
    raise BadParams('expected a {} instance, got {}'.format(kind, inst.kind))
  return inst


def cmd_reduce(args, config):
  report = {}
  if args.reduction == 'maxlin-to-mld':
    out = maxlin_to_mld(_expect_kind(load_instance(args.input), 'maxlin'))
  elif args.reduction == 'group-naive':
    mld = _expect_kind(load_instance(args.input), 'mld')
    out = mld_group_naive(mld.H, mld.u, mld.ell, args.k, gamma=mld.gamma, epsilon=args.epsilon,
                          budget=config.label_budget)
  elif args.reduction == 'group-cover':
    mld = _expect_kind(load_instance(args.input), 'mld')
    out = mld_group_cover(mld.H, mld.u, load_cover(args.cover), args.k, gamma=mld.gamma,
                          budget=config.label_budget)
  elif args.reduction == 'kmld-to-ncp':
    kmld = load_instance(args.input)
    if not isinstance(kmld, KMldInstance):
      raise BadParams('expected a kmld instance, got {}'.format(kmld.kind))
    out = kmld_to_ncp(kmld.matrix, kmld.target, kmld.k, kmld.gamma)
  else:
    family = load_family(args.family_file) if args.family == 'explicit' else None
    out, pipeline = pipeline_maxlin_to_kmld(
      _expect_kind(load_instance(args.input), 'maxlin'), args.k, args.epsilon,
      family_source=args.family, seed=args.seed, family=family, eta=args.eta,
      grouping=args.grouping, budget=config.enumeration_budget, timings=args.timings)
    details = pipeline.to_json()
    details['pipeline_params'] = details.pop('params')
    report.update(details)
    report['gamma_target'] = rational_to_json(pipeline.gamma_target)
  save_instance(out, args.output)
  report['kind'] = out.kind
  report.setdefault('thresholds', {}).update(
    {'target_' + key: value for key, value in _threshold_block(out).items()})
  return report


def cmd_verify(args, config):
  if args.property in ('p1', 'p2'):
    F = load_family(args.family)
  if args.property == 'p1':
    result = check_p1(F)
  elif args.property == 'p2':
    if args.sampled:
      trials = args.trials or config.sampled_trials
      failures = check_p2_sampled(F, args.alpha, args.epsilon, trials, args.seed)
      return {'ok': failures == 0, 'failures': failures, 'trials': trials}
    result = check_p2_exhaustive(F, args.alpha, args.epsilon, budget=config.enumeration_budget,
                                 verbose=args.verbose)
  elif args.property == 'c1':
    result = check_c1(load_cover(args.cover))
  else:
    result = check_c2_exhaustive(load_cover(args.cover), load_family(args.family), args.alpha,
                                 args.epsilon, budget=config.enumeration_budget,
                                 verbose=args.verbose)
  report = {'ok': result.ok}
  if not result.ok:
    report['counterexample'] = list(result.counterexample)
  return report


def cmd_solve(args, config):
  inst = _expect_kind(load_instance(args.input), args.kind)
  result = solve_instance(inst, budget=config.enumeration_budget, verbose=args.verbose)
  return {'optimum': result.optimum,
          'witness': None if result.witness is None else result.witness.tolist(),
          'feasible': result.optimum is not None}


def cmd_classify(args, config):
  inst = load_instance(args.input)
  result = solve_instance(inst, budget=config.enumeration_budget, bounded=True, verbose=args.verbose)
  verdict = classify_gap(inst, result)
  report = verdict.to_json()
  report['thresholds'] = _threshold_block(inst)
  return report


def cmd_experiment(args, config):
  preset = get_config(args.preset)
  panel, summary = evaluate_gap_panel(preset, args.runs, seed=args.seed,
                                      budget=config.enumeration_budget, output=args.output)
  preserved = bool(len(panel) == 0 or panel['preserved'].all())
  return {'ok': preserved, 'summary': summary, 'rows': int(len(panel))}


########################
# PARSER
########################

def build_parser():
  parser = CovkitParser(prog='covkit',
                        description='Gap reductions MaxLin -> MLD -> k-MLD -> NCP over prime fields')
  parser.add_argument('--verbose', action='store_true', help='debug logging and progress bars on stderr')
  parser.add_argument('--budget', type=int, default=None,
                      help='enumeration budget (default: $COVKIT_BUDGET or 10^6)')
  sub = parser.add_subparsers(dest='command', parser_class=CovkitParser)
  sub.required = True

  p = sub.add_parser('gen-maxlin', help='generate a planted or random MaxLin instance')
  p.add_argument('--n', required=True, type=int, help='number of variables')
  p.add_argument('--m', required=True, type=int, help='number of equations')
  p.add_argument('--q', required=True, type=int, help='prime modulus')
  p.add_argument('--c', required=True, type=rational, help='completeness threshold num/den')
  p.add_argument('--s', type=rational, default=None, help='soundness threshold num/den (default c/2)')
  p.add_argument('--seed', required=True, type=int)
  p.add_argument('--mode', choices=['planted', 'random'], default='planted')
  p.add_argument('--certify-no', action='store_true',
                 help='random mode: solve exactly and set thresholds making it a NO instance')
  p.add_argument('-o', '--output', required=True)
  p.set_defaults(handler=cmd_gen_maxlin)

  p = sub.add_parser('build-family', help='build a balanced partition family')
  p.add_argument('construction', choices=['random', 'deterministic', 'hypercube'])
  p.add_argument('--m', type=int, help='universe size (random, deterministic)')
  p.add_argument('--k', required=True, type=int, help='number of buckets')
  p.add_argument('--d', type=int, help='hypercube dimension')
  p.add_argument('--alpha', type=rational)
  p.add_argument('--epsilon', type=rational)
  p.add_argument('--eta', type=rational)
  p.add_argument('--seed', type=int)
  p.add_argument('-o', '--output', required=True)
  p.set_defaults(handler=cmd_build_family)

  p = sub.add_parser('build-cover', help='derive a cover family from a partition family')
  p.add_argument('--family', required=True)
  p.add_argument('--alpha', required=True, type=rational)
  p.add_argument('--epsilon', required=True, type=rational)
  p.add_argument('-o', '--output', required=True)
  p.set_defaults(handler=cmd_build_cover)

  p = sub.add_parser('reduce', help='apply one reduction or the whole pipeline')
  p.add_argument('reduction', choices=['maxlin-to-mld', 'group-naive', 'group-cover',
                                       'kmld-to-ncp', 'pipeline'])
  p.add_argument('--in', dest='input', required=True)
  p.add_argument('--k', type=int)
  p.add_argument('--epsilon', type=rational)
  p.add_argument('--cover', help='cover family JSON (group-cover)')
  p.add_argument('--family', choices=['random', 'deterministic', 'explicit'], default='random')
  p.add_argument('--family-file', help='partition family JSON for --family explicit')
  p.add_argument('--eta', type=rational)
  p.add_argument('--grouping', choices=['cover', 'naive'], default='cover')
  p.add_argument('--seed', type=int)
  p.add_argument('--timings', action='store_true', help='record wall-clock seconds per stage')
  p.add_argument('-o', '--output', required=True)
  p.set_defaults(handler=cmd_reduce)

  p = sub.add_parser('verify', help='check P1/P2 of a family or C1/C2 of a cover')
  p.add_argument('property', choices=['p1', 'p2', 'c1', 'c2'])
  p.add_argument('--family')
  p.add_argument('--cover')
  p.add_argument('--alpha', type=rational)
  p.add_argument('--epsilon', type=rational)
  p.add_argument('--sampled', action='store_true', help='p2: sample subsets instead of enumerating')
  p.add_argument('--trials', type=int)
  p.add_argument('--seed', type=int)
  p.set_defaults(handler=cmd_verify)

  p = sub.add_parser('solve', help='exact brute-force optimum of an instance')
  p.add_argument('kind', choices=['maxlin', 'mld', 'kmld', 'ncp'])
  p.add_argument('--in', dest='input', required=True)
  p.set_defaults(handler=cmd_solve)

  p = sub.add_parser('classify', help='YES / NO / NEITHER verdict of an instance')
  p.add_argument('--in', dest='input', required=True)
  p.set_defaults(handler=cmd_classify)

  p = sub.add_parser('experiment', help='gap preservation panel over a named preset')
  p.add_argument('--preset', required=True)
  p.add_argument('--runs', type=int, default=10)
  p.add_argument('--seed', required=True, type=int)
  p.add_argument('-o', '--output', help='panel CSV')
  p.set_defaults(handler=cmd_experiment)

  for subparser in sub.choices.values():
    subparser.add_argument('--budget', type=int, default=argparse.SUPPRESS,
                           help='enumeration budget, overrides the global option')
  return parser


REQUIRED = {
  ('build-family', 'random'): ('m', 'alpha', 'epsilon', 'seed'),
  ('build-family', 'deterministic'): ('m', 'eta', 'epsilon'),
  ('build-family', 'hypercube'): ('d',),
  ('reduce', 'group-naive'): ('k',),
  ('reduce', 'group-cover'): ('k', 'cover'),
  ('reduce', 'pipeline'): ('k', 'epsilon'),
  ('verify', 'p1'): ('family',),
  ('verify', 'p2'): ('family', 'alpha', 'epsilon'),
  ('verify', 'c1'): ('cover',),
  ('verify', 'c2'): ('family', 'cover', 'alpha', 'epsilon'),
}


def _check_required(args):
  choice = getattr(args, 'construction', None) or getattr(args, 'reduction', None) \
    or getattr(args, 'property', None)
  missing = [name for name in REQUIRED.get((args.command, choice), ())
             if getattr(args, name) is None]
  if args.command == 'reduce' and choice == 'pipeline' and args.grouping == 'cover':
    if args.family == 'random' and args.seed is None:
      missing.append('seed')
    if args.family == 'explicit' and args.family_file is None:
      missing.append('family_file')
  if args.command == 'verify' and getattr(args, 'sampled', False) and args.seed is None:
    missing.append('seed')
  if missing:
    raise UsageError('missing required options for {} {}: {}'.format(
      args.command, choice, ', '.join('--' + name.replace('_', '-') for name in missing)))


def emit(report):
  validate_document(report, REPORT_SCHEMA)
  sys.stdout.write(json.dumps(report, sort_keys=True) + '\n')


def run(argv=None):
  """Parse `argv`, run one subcommand, print its report and return the exit code."""
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
    _check_required(args)
  except UsageError as e:
    sys.stderr.write('covkit: {}\n'.format(e))
    sys.stderr.write('reports follow the "{}" JSON schema; see covkit --help\n'.format(
      REPORT_SCHEMA['title']))
    return 2

  logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.WARNING,
                      format='%(asctime)s %(name)s %(levelname)s %(message)s')
  command = args.command if not hasattr(args, 'reduction') else 'reduce ' + args.reduction
  report = {'command': command, 'ok': True, 'params': _params(args),
            'output': getattr(args, 'output', None)}
  try:
    config = BudgetConfig(enumeration_budget=args.budget, label_budget=args.budget,
                          cover_budget=args.budget, hypercube_budget=args.budget,
                          verbose=args.verbose)
    report.update(args.handler(args, config))
    code = 0 if report['ok'] else 1
  except CovkitError as e:
    logger.debug('%s failed', command, exc_info=True)
    report.update(ok=False, error={'type': type(e).__name__, 'message': str(e)})
    code = e.exit_code
  except OSError as e:
    report.update(ok=False, error={'type': type(e).__name__, 'message': str(e)})
    code = 2
  emit(report)
  return code


def cli():
  sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
  cli()
