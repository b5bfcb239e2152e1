"""Fast Douglas-Rachford splitting with its rate certificate and lower-bound instance."""

from .algorithms import (
    ALGORITHMS,
    PROX_PROX_METHODS,
    CompositeProblem,
    ProxCallLog,
    RunTrace,
    StepSchedule,
    run,
    run_cp,
    run_drs,
    run_dys,
    run_fdr,
    run_fista,
    run_ohm,
    run_prs,
)
from .lowerbound import build_worstcase, lowerbound_experiment
from .lyapunov import LyapunovCertificate, build_certificate, check_case_equalities
from .numeric import OrthonormalFrame
from .prox import ProxFunction

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "PROX_PROX_METHODS",
    "CompositeProblem",
    "LyapunovCertificate",
    "OrthonormalFrame",
    "ProxCallLog",
    "ProxFunction",
    "RunTrace",
    "StepSchedule",
    "build_certificate",
    "build_worstcase",
    "check_case_equalities",
    "lowerbound_experiment",
    "run",
    "run_cp",
    "run_drs",
    "run_dys",
    "run_fdr",
    "run_fista",
    "run_ohm",
    "run_prs",
]
