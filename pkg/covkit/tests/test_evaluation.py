from fractions import Fraction

import pytest

from covkit.utils_configs import get_config
from covkit.utils_evaluation import evaluate_gap_panel, run_gap_panel, summarize_panel


def test_get_config():
  config = get_config('GapPreservation')
  assert config['instance_parameters']['m'] == 20
  assert config['reduction_parameters']['k'] == 3
  with pytest.raises(ValueError):
    get_config('Hourly')


def test_gap_preservation_panel():
  panel = run_gap_panel(get_config('GapPreservation'), runs=50, seed=0)
  yes = panel[panel['side'] == 'YES']
  assert len(yes) == 50
  assert (yes['source_verdict'] == 'YES').all()
  assert (yes['target_verdict'] == 'YES').all()
  assert (yes['gamma_target'] == str(Fraction(10, 3))).all()
  no = panel[panel['side'] == 'NO']
  assert len(no) > 0
  assert (no['source_verdict'] == 'NO').all()
  assert (no['target_verdict'] == 'NO').all()
  assert panel['preserved'].all()


def test_deterministic_preset_panel():
  panel = run_gap_panel(get_config('Deterministic'), runs=3, seed=5)
  assert panel['preserved'].all()
  assert summarize_panel(panel)['YES'] == {'runs': 3, 'preserved': 3}


def test_ternary_panel_writes_csv(tmp_path):
  csv = str(tmp_path / 'panel.csv')
  panel, summary = evaluate_gap_panel(get_config('Ternary'), runs=2, seed=1, output=csv)
  assert set(panel['side']) == {'YES'}
  assert summary['YES']['preserved'] == 2
  assert (tmp_path / 'panel.csv').exists()
