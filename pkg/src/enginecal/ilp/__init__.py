"""Representative selection as an integer linear program."""
from enginecal.ilp.bnb import IlpResult, solve
from enginecal.ilp.limits import cycle_budget, load_limit_table, norm_limits
from enginecal.ilp.model import (Assignment, IlpInputError, IlpInstance, build_instance,
                                 prey_values, to_solution_map, verify_solution)

__all__ = ["Assignment", "IlpInputError", "IlpInstance", "IlpResult", "build_instance",
           "cycle_budget", "load_limit_table", "norm_limits", "prey_values", "solve",
           "to_solution_map", "verify_solution"]
