import logging
from fractions import Fraction

import pandas as pd

from covkit.instances import (Verdict, certify_no_thresholds, gen_planted_maxlin,
                              gen_random_maxlin, parse_rational)
from covkit.oracle import classify_gap, solve_instance
from covkit.reduce import pipeline_maxlin_to_kmld

logger = logging.getLogger(__name__)


########################
# GAP PRESERVATION PANEL
########################

def _reduce_and_classify(inst, config, seed, budget):
  """
  Runs the pipeline on one source instance and classifies both ends
  :param inst: MaxLinInstance
  :param config: preset dict from utils_configs
  :param seed: seed of the random family
  :return: dict row of the panel
  """
  reduction = config['reduction_parameters']
  eta = reduction['eta']
  kmld, report = pipeline_maxlin_to_kmld(inst, reduction['k'], parse_rational(reduction['epsilon']),
                                         family_source=reduction['family'], seed=seed,
                                         eta=None if eta is None else parse_rational(eta),
                                         grouping=reduction['grouping'], budget=budget)
  source = classify_gap(inst, solve_instance(inst, budget=budget))
  target = classify_gap(kmld, solve_instance(kmld, budget=budget, bounded=True))
  return {'source_optimum': source.optimum,
          'source_verdict': source.verdict.value,
          'target_optimum': target.optimum,
          'target_verdict': target.verdict.value,
          'gamma_target': str(report.gamma_target),
          'columns': kmld.n,
          'p2_verified': report.family_status.get('p2')}


def run_gap_panel(config, runs, seed=0, budget=None):
  """
  Gap preservation panel of planted (YES side) and certified random (NO side)
  MaxLin sources pushed through the pipeline

  Parameters
  ----------
  config: dict
    preset from utils_configs.get_config
  runs: int
    number of sources per side
  seed: int
    base seed; run r uses seed + r for generation and for the family

  Returns
  -------
  panel: pandas DataFrame
    one row per (side, run) with both verdicts and `preserved`, which is
    True when a YES or NO source keeps its verdict after the reduction.
  """
  params = config['instance_parameters']
  n, m, q = params['n'], params['m'], params['q']
  c, s = parse_rational(params['c']), parse_rational(params['s'])
  no_side = config['no_side']

  rows = []
  for run in range(runs):
    run_seed = seed + run
    inst, _ = gen_planted_maxlin(n, m, q, c, run_seed, s=s)
    row = {'side': 'YES', 'run': run, 'seed': run_seed}
    row.update(_reduce_and_classify(inst, config, run_seed, budget))
    rows.append(row)

    if not no_side['enabled']:
      continue
    candidate = gen_random_maxlin(n, m, q, run_seed, c=Fraction(1, 2), s=Fraction(1, 4))
    optimum = solve_instance(candidate, budget=budget).optimum
    if optimum < no_side['min_optimum']:
      logger.info('run %d: random system has optimum %d, no NO source', run, optimum)
      continue
    inst = certify_no_thresholds(candidate, optimum)
    row = {'side': 'NO', 'run': run, 'seed': run_seed}
    row.update(_reduce_and_classify(inst, config, run_seed, budget))
    rows.append(row)

  panel = pd.DataFrame(rows)
  if len(panel):
    decided = panel['source_verdict'] != Verdict.NEITHER.value
    panel['preserved'] = ~decided | (panel['source_verdict'] == panel['target_verdict'])
  return panel


def summarize_panel(panel):
  """
  Per-side counts of runs and preserved verdicts
  :param panel: DataFrame from run_gap_panel
  :return: dict side -> {'runs', 'preserved'}
  """
  if not len(panel):
    return {}
  grouped = panel.groupby('side')['preserved'].agg(['count', 'sum'])
  return {side: {'runs': int(row['count']), 'preserved': int(row['sum'])}
          for side, row in grouped.iterrows()}


def evaluate_gap_panel(config, runs, seed=0, budget=None, output=None):
  """
  Runs the panel, optionally writes it as CSV, prints a short summary
  """
  panel = run_gap_panel(config, runs, seed=seed, budget=budget)
  if output is not None:
    panel.to_csv(output, index=False)
  summary = summarize_panel(panel)
  for side, counts in sorted(summary.items()):
    logger.info('%s sources: %d of %d verdicts preserved', side, counts['preserved'], counts['runs'])
  return panel, summary
