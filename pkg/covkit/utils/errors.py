class CovkitError(Exception):
  """Base class of every error raised on purpose by covkit.

  `exit_code` is what the command line front end returns when the error
  escapes a subcommand.
  """
  exit_code = 1


class ValidationError(CovkitError, ValueError):
  exit_code = 2


class ZeroInverse(ValidationError, ZeroDivisionError):
  pass


class DimensionMismatch(ValidationError):
  pass


class BadParams(ValidationError):
  pass


class SchemaError(ValidationError):
  """Invalid JSON document; `path` names the offending field."""
  def __init__(self, path, message):
    self.path = path
    self.message = message
    super(SchemaError, self).__init__('{}: {}'.format(path or '<root>', message))


class FamilyInvalid(ValidationError):
  pass


class NotBalanced(ValidationError):
  pass


class EmptyFamily(ValidationError):
  pass


class Infeasible(ValidationError):
  pass


class BudgetExceeded(CovkitError):
  """An enumeration would visit `required` items, more than `budget`."""
  exit_code = 3

  def __init__(self, required, budget, what='items'):
    self.required = required
    self.budget = budget
    self.what = what
    super(BudgetExceeded, self).__init__(
      'enumeration needs {} {} but the budget is {}'.format(required, what, budget))


class TooLarge(BudgetExceeded):
  pass
