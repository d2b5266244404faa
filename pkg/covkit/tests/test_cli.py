#Testing the covkit command line
import json
import os
import subprocess
import sys

import pandas as pd
import pytest

from covkit.cli import run
from covkit.instances import load_instance
from covkit.utils.schemas import REPORT_SCHEMA, validate_document

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def covkit(*argv, env=None):
  """Run `python -m covkit.cli argv` and return (exit code, parsed report, raw stdout)."""
  environment = {key: value for key, value in os.environ.items() if key != 'COVKIT_BUDGET'}
  environment.update(env or {})
  proc = subprocess.run([sys.executable, '-m', 'covkit.cli'] + [str(a) for a in argv],
                        cwd=ROOT, env=environment, capture_output=True, text=True)
  report = json.loads(proc.stdout) if proc.stdout.strip() else None
  if report is not None:
    validate_document(report, REPORT_SCHEMA)
  return proc.returncode, report, proc.stdout


@pytest.fixture
def planted(tmp_path):
  path = str(tmp_path / 'inst.json')
  code, report, _ = covkit('gen-maxlin', '--n', 10, '--m', 20, '--q', 2, '--c', '9/10',
                           '--seed', 7, '-o', path)
  assert code == 0, report
  return path


def test_gen_maxlin(planted):
  inst = load_instance(planted)
  assert inst.kind == 'maxlin'
  assert (inst.m, inst.n, inst.q) == (20, 10, 2)


def test_gen_maxlin_report(tmp_path):
  path = str(tmp_path / 'inst.json')
  code, report, _ = covkit('gen-maxlin', '--n', 10, '--m', 20, '--q', 2, '--c', '9/10',
                           '--seed', 7, '-o', path)
  assert code == 0
  assert report['command'] == 'gen-maxlin'
  assert report['params']['n'] == 10
  assert report['params']['c'] == '9/10'
  assert report['thresholds']['yes'] == [2, 1]
  assert len(report['planted']) == 10


def test_runs_are_byte_identical(tmp_path):
  path = str(tmp_path / 'inst.json')
  argv = ('gen-maxlin', '--n', 6, '--m', 12, '--q', 3, '--c', '5/6', '--seed', 3, '-o', path)
  _, _, first_stdout = covkit(*argv)
  with open(path, 'rb') as fh:
    first = fh.read()
  _, _, second_stdout = covkit(*argv)
  with open(path, 'rb') as fh:
    assert fh.read() == first
  assert first_stdout == second_stdout

  out = str(tmp_path / 'kmld.json')
  argv = ('reduce', 'pipeline', '--in', path, '--k', 2, '--epsilon', '1/2', '--seed', 4, '-o', out)
  _, _, first_stdout = covkit(*argv)
  with open(out, 'rb') as fh:
    first = fh.read()
  _, _, second_stdout = covkit(*argv)
  with open(out, 'rb') as fh:
    assert fh.read() == first
  assert first_stdout == second_stdout


def test_family_cover_and_verify(tmp_path):
  family, cover = str(tmp_path / 'fam.json'), str(tmp_path / 'cov.json')
  code, report, _ = covkit('build-family', 'hypercube', '--k', 2, '--d', 3, '-o', family)
  assert code == 0 and report['functions'] == 3 and report['p1']
  code, report, _ = covkit('build-cover', '--family', family, '--alpha', '1/2', '--epsilon', 1,
                           '-o', cover)
  assert code == 0 and report['size_bound'] == [4, 1]

  code, report, _ = covkit('verify', 'c2', '--family', family, '--cover', cover,
                           '--alpha', '1/2', '--epsilon', 1, '--budget', 100000)
  assert code == 0 and report['ok'] is True
  code, report, _ = covkit('verify', 'c1', '--cover', cover)
  assert code == 0 and report['ok'] is True
  code, report, _ = covkit('verify', 'p2', '--family', family, '--alpha', '1/2', '--epsilon', '1/2')
  assert code == 0 and report['ok'] is True
  code, report, _ = covkit('verify', 'p2', '--family', family, '--alpha', '1/2', '--epsilon', 0,
                           '--sampled', '--trials', 200, '--seed', 1)
  assert report['trials'] == 200


def test_failed_verification_exits_one(tmp_path):
  family = str(tmp_path / 'fam.json')
  covkit('build-family', 'hypercube', '--k', 2, '--d', 3, '-o', family)
  code, report, _ = covkit('verify', 'p2', '--family', family, '--alpha', '1/2', '--epsilon', 0)
  assert code == 1
  assert report['ok'] is False
  assert len(report['counterexample']) == 4


def test_pipeline_report(planted, tmp_path):
  out = str(tmp_path / 'out.json')
  code, report, _ = covkit('reduce', 'pipeline', '--in', planted, '--k', 3, '--epsilon', '1/4',
                           '--family', 'random', '--seed', 11, '-o', out)
  assert code == 0, report
  assert report['gamma_target'] == [22, 5]
  assert [stage['stage'] for stage in report['stages']] == ['maxlin', 'mld', 'family', 'cover', 'kmld']
  assert report['family_status']['p1'] is True
  assert load_instance(out).kind == 'kmld'


def test_pipeline_target_of_planted_source_is_yes(planted, tmp_path):
  out = str(tmp_path / 'out.json')
  code, report, _ = covkit('reduce', 'pipeline', '--in', planted, '--k', 3, '--epsilon', '1/2',
                           '--seed', 11, '-o', out)
  assert code == 0, report
  assert report['gamma_target'] == [11, 3]
  code, report, _ = covkit('classify', '--in', out)
  assert code == 0
  assert report['verdict'] == 'YES'
  assert report['optimum'] <= 3


def test_reduction_chain(tmp_path):
  inst, mld = str(tmp_path / 'inst.json'), str(tmp_path / 'mld.json')
  kmld, ncp = str(tmp_path / 'kmld.json'), str(tmp_path / 'ncp.json')
  covkit('gen-maxlin', '--n', 3, '--m', 6, '--q', 2, '--c', '2/3', '--seed', 5, '-o', inst)
  assert covkit('reduce', 'maxlin-to-mld', '--in', inst, '-o', mld)[0] == 0
  assert covkit('reduce', 'group-naive', '--in', mld, '--k', 2, '-o', kmld)[0] == 0
  assert covkit('reduce', 'kmld-to-ncp', '--in', kmld, '-o', ncp)[0] == 0

  optima = [covkit('solve', kind, '--in', path)[1]['optimum']
            for kind, path in (('maxlin', inst), ('mld', mld), ('kmld', kmld), ('ncp', ncp))]
  assert len(set(optima)) == 1


def test_validation_errors_exit_two(tmp_path):
  path = str(tmp_path / 'inst.json')
  code, report, _ = covkit('gen-maxlin', '--n', 3, '--m', 6, '--q', 4, '--c', '1/2',
                           '--seed', 0, '-o', path)
  assert code == 2
  assert report['ok'] is False and report['error']['type'] == 'BadParams'

  assert covkit('gen-maxlin', '--n', 3, '--m', 6, '--q', 2, '--c', '0.5', '--seed', 0,
                '-o', path)[0] == 2
  assert covkit('gen-maxlin', '--n', 3, '--m', 6, '--q', 2, '--c', '1/2', '-o', path)[0] == 2
  assert covkit('build-family', 'random', '--m', 8, '--k', 2, '-o', path)[0] == 2

  with open(path, 'w') as fh:
    fh.write('{"kind": "maxlin"}')
  code, report, _ = covkit('solve', 'maxlin', '--in', path)
  assert code == 2 and report['error']['type'] == 'SchemaError'


def test_budget_errors_exit_three(planted):
  code, report, _ = covkit('solve', 'maxlin', '--in', planted, '--budget', 10)
  assert code == 3
  assert report['error']['type'] == 'BudgetExceeded'
  assert covkit('--budget', 10, 'solve', 'maxlin', '--in', planted)[0] == 3
  assert covkit('solve', 'maxlin', '--in', planted, env={'COVKIT_BUDGET': '10'})[0] == 3
  assert covkit('solve', 'maxlin', '--in', planted)[0] == 0


def test_experiment(tmp_path):
  csv = str(tmp_path / 'panel.csv')
  code, report, _ = covkit('experiment', '--preset', 'Smoke', '--runs', 2, '--seed', 0, '-o', csv)
  assert code == 0 and report['ok'] is True
  panel = pd.read_csv(csv)
  assert len(panel) == report['rows']
  assert panel['preserved'].all()


def test_usage_error_in_process(capsys):
  assert run(['reduce', 'pipeline', '--in', 'missing.json', '-o', 'out.json']) == 2
  captured = capsys.readouterr()
  assert captured.out == ''
  assert '--k' in captured.err


def _run_twice(argv, output):
  """Run the same argv twice; return both stdouts and both output file contents."""
  stdouts, contents = [], []
  for _ in range(2):
    code, report, stdout = covkit(*argv)
    assert code == 0, report
    stdouts.append(stdout)
    with open(output, 'rb') as fh:
      contents.append(fh.read())
  return stdouts, contents


def test_randomized_subcommands_are_byte_identical(tmp_path):
  family = str(tmp_path / 'fam.json')
  stdouts, contents = _run_twice(('build-family', 'random', '--m', 16, '--k', 2, '--alpha', '1/2',
                                  '--epsilon', '1/2', '--seed', 3, '-o', family), family)
  assert stdouts[0] == stdouts[1] and contents[0] == contents[1]

  argv = ('verify', 'p2', '--family', family, '--alpha', '1/2', '--epsilon', '1/2',
          '--sampled', '--trials', 100, '--seed', 1)
  assert covkit(*argv)[2] == covkit(*argv)[2]

  csv = str(tmp_path / 'panel.csv')
  stdouts, contents = _run_twice(('experiment', '--preset', 'Smoke', '--runs', 2, '--seed', 0,
                                  '-o', csv), csv)
  assert stdouts[0] == stdouts[1] and contents[0] == contents[1]


def test_pipeline_report_keeps_command_params(planted, tmp_path):
  out = str(tmp_path / 'out.json')
  code, report, _ = covkit('reduce', 'pipeline', '--in', planted, '--k', 3, '--epsilon', '1/2',
                           '--seed', 11, '-o', out)
  assert code == 0, report
  assert report['params']['input'] == planted
  assert report['params']['seed'] == 11
  assert report['pipeline_params']['k'] == 3


def test_undecodable_inputs_exit_two(planted, tmp_path):
  with open(planted) as fh:
    doc = json.load(fh)
  doc['entries'][0] = 10**30
  huge = tmp_path / 'huge.json'
  huge.write_text(json.dumps(doc))
  code, report, _ = covkit('solve', 'maxlin', '--in', str(huge))
  assert code == 2
  assert report['error']['type'] == 'SchemaError'
  assert report['error']['message'].startswith('entries')

  binary = tmp_path / 'binary.json'
  binary.write_bytes(b'{"kind": "\xff\xfe"}')
  code, report, _ = covkit('solve', 'maxlin', '--in', str(binary))
  assert code == 2 and report['error']['type'] == 'SchemaError'


@pytest.mark.parametrize('value', ['abc', '0'])
def test_bad_environment_budget_exits_two(planted, value):
  code, report, _ = covkit('solve', 'maxlin', '--in', planted, env={'COVKIT_BUDGET': value})
  assert code == 2
  assert report['error']['type'] == 'BadParams'


def test_zero_budget_flag_exits_two(planted):
  code, report, _ = covkit('solve', 'maxlin', '--in', planted, '--budget', 0)
  assert code == 2
  assert report['error']['type'] == 'BadParams'
