"""Chemotaxis pattern formation: linear stability and local bifurcation
analytics for the logistic chemotaxis system, plus a finite-difference
simulator of its time-dependent dynamics."""

from .bifurcation import (BifurcationPoint, Linearization, MomentSolution,
                          ThresholdResult, bifurcation_ladder, branch_seed,
                          chi_bar, chi_double_prime, chi_prime, chi_threshold,
                          classify_branch, eigenvalue_drift, linearize,
                          q_ratio, solve_moment_system)
from .eigenbasis import (Domain, Mode, ModeMoments, enumerate_modes, eval_mode,
                         mode, moments, project, quadrature_moments, sample_mode)
from .model import (Kinetics, ModelParams, Sensitivity, homogeneous_state,
                    validate_for_branch_analytics)
from .solver import (FieldState, Grid, RunControls, RunReport, measure_growth,
                     run, steady_residual, step)

__version__ = "0.1.0"
