import pytest

from covkit.utils.config import DEFAULT_BUDGET, BudgetConfig, resolve_budget
from covkit.utils.errors import BadParams


def test_defaults(monkeypatch):
  monkeypatch.delenv('COVKIT_BUDGET', raising=False)
  config = BudgetConfig()
  assert config.enumeration_budget == DEFAULT_BUDGET == 10**6
  assert config.to_dict()['cover_budget'] == DEFAULT_BUDGET


def test_environment_override(monkeypatch):
  monkeypatch.setenv('COVKIT_BUDGET', '500')
  assert BudgetConfig().label_budget == 500
  assert resolve_budget(None) == 500
  assert resolve_budget(7) == 7


def test_explicit_budgets_win(monkeypatch):
  monkeypatch.setenv('COVKIT_BUDGET', '500')
  config = BudgetConfig(enumeration_budget=40)
  assert config.resolve(None) == 40
  assert config.resolve(None, 'hypercube') == 500


@pytest.mark.parametrize('value', ['abc', '0', '-3', '2.5'])
def test_bad_environment_budget(monkeypatch, value):
  monkeypatch.setenv('COVKIT_BUDGET', value)
  with pytest.raises(BadParams):
    BudgetConfig()


def test_explicit_zero_budget_is_rejected(monkeypatch):
  monkeypatch.delenv('COVKIT_BUDGET', raising=False)
  with pytest.raises(BadParams):
    BudgetConfig(enumeration_budget=0)
  with pytest.raises(BadParams):
    resolve_budget(0)
  assert BudgetConfig(label_budget=1).label_budget == 1
