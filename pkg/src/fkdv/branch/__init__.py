from fkdv.branch.bifurcation import asymptotic_branch, bifurcation_point, local_bifurcation_data, mu2_coefficient
from fkdv.branch.continuation import continue_branch, estimate_mu2, verify_asymptotics
from fkdv.branch.limit import extrapolate_highest, select_tail
from fkdv.branch.newton import newton_correct, newton_correct_arclength, newton_system

__all__ = [
    "asymptotic_branch",
    "bifurcation_point",
    "local_bifurcation_data",
    "mu2_coefficient",
    "continue_branch",
    "estimate_mu2",
    "verify_asymptotics",
    "extrapolate_highest",
    "select_tail",
    "newton_correct",
    "newton_correct_arclength",
    "newton_system",
]
