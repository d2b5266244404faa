import os

from covkit.utils.errors import BadParams

DEFAULT_BUDGET = 10**6
BUDGET_ENV_VAR = 'COVKIT_BUDGET'


def check_positive_budget(value, source='budget'):
  """Budgets are positive integers, whatever their source."""
  try:
    budget = int(str(value).strip()) if isinstance(value, str) else value
  except ValueError:
    raise BadParams('{} must be a positive integer, got {!r}'.format(source, value))
  if isinstance(budget, bool) or not isinstance(budget, int) or budget <= 0:
    raise BadParams('{} must be a positive integer, got {!r}'.format(source, value))
  return budget


def default_budget():
  """Enumeration budget, overridable through the COVKIT_BUDGET variable."""
  value = os.environ.get(BUDGET_ENV_VAR)
  if value is None or value.strip() == '':
    return DEFAULT_BUDGET
  return check_positive_budget(value, BUDGET_ENV_VAR)


def _pick(explicit, fallback, name):
  return fallback if explicit is None else check_positive_budget(explicit, name)


class BudgetConfig(object):
  def __init__(self, enumeration_budget=None, label_budget=None,
               cover_budget=None, hypercube_budget=None,
               sampled_trials=1000, verbose=False):

    budget = default_budget()

    # Oracle and verifier enumerations
    self.enumeration_budget = _pick(enumeration_budget, budget, 'enumeration_budget')
    self.sampled_trials = sampled_trials

    # Construction sizes
    self.label_budget = _pick(label_budget, budget, 'label_budget')
    self.cover_budget = _pick(cover_budget, budget, 'cover_budget')
    self.hypercube_budget = _pick(hypercube_budget, budget, 'hypercube_budget')

    self.verbose = verbose

  def resolve(self, budget, kind='enumeration'):
    """Explicit budget if given, otherwise the configured one for `kind`."""
    if budget is not None:
      return check_positive_budget(int(budget))
    return getattr(self, '{}_budget'.format(kind))

  def to_dict(self):
    return {'enumeration_budget': self.enumeration_budget,
            'label_budget': self.label_budget,
            'cover_budget': self.cover_budget,
            'hypercube_budget': self.hypercube_budget,
            'sampled_trials': self.sampled_trials}


def resolve_budget(budget, kind='enumeration'):
  if budget is not None:
    return check_positive_budget(int(budget))
  return BudgetConfig().resolve(None, kind)
