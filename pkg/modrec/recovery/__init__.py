"""
Metodi di recupero dei campioni veri da campioni modulo.

I metodi sono registrati per nome nel registry (b2r2, hod).
"""

from .base import BaseRecovery, RecoveryOutcome, RecoveryRequest
from .registry import create_method, get_all_methods, get_method, list_methods, register_method
from .b2r2 import (
    B2R2Method,
    Direction,
    PeelInit,
    PeelRecord,
    PgdOptions,
    RecoveryTrace,
    b2r2_recover,
    cost,
    gradient,
    init_guess,
    pgd_solve,
    run_pgd,
    support_project,
)
from .hod import HodMethod, HodOptions, anti_difference, choose_order, finite_difference, hod_recover

__all__ = [
    "BaseRecovery",
    "RecoveryOutcome",
    "RecoveryRequest",
    "create_method",
    "get_all_methods",
    "get_method",
    "list_methods",
    "register_method",
    "B2R2Method",
    "Direction",
    "PeelInit",
    "PeelRecord",
    "PgdOptions",
    "RecoveryTrace",
    "b2r2_recover",
    "cost",
    "gradient",
    "init_guess",
    "pgd_solve",
    "run_pgd",
    "support_project",
    "HodMethod",
    "HodOptions",
    "anti_difference",
    "choose_order",
    "finite_difference",
    "hod_recover",
]
