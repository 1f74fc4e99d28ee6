"""Clause-learning cumulative scheduling with explained time-table-edge-finding."""

from .domains import DomainStore, Explanation, Lit, bool_false, bool_true, geq, leq
from .model import Activity, Bounds, Instance, Project, derived_bounds, free_fixed_split, window_length
from .profile import ResourceProfile, build_profile, tt_energy
from .timetable import tt_check, tt_filter
from .ttef import explain_overload, explain_update, ttef_check, ttef_filter_lb, ttef_filter_ub
from .cumulative import propagate_resource
from .engine import SolveResult, Solver, SolverConfig, solve, solve_lb, solve_ub
from .psplib import PsplibError, RawPsplibInstance, example1, parse_sm, read_sm, render, to_instance

__version__ = "0.1.0"
