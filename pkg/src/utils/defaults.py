"""
Numeric defaults for estimators, fitters and samplers
"""


class FitDefaults:
    RESTARTS = 8
    # Nelder-Mead stopping rule, applied in the transformed parameter space
    XATOL = 1e-10
    FATOL = 1e-12
    MAX_ITER_PER_PARAM = 2000
    RESTART_SPREAD = 1.0

    # restarts must agree with the best log-likelihood to count as converged
    AGREEMENT_TOL = 1e-4
    OPT_IN_AGREEMENT_TOL = 1e-2
    MIN_AGREEING = 2

    INTEGER_SCAN_RADIUS = 5


class SeedingDefaults:
    PARTITION_GRID_MULTIPLIER = 10
    # log-likelihoods this close count as tied
    PARTITION_TIE_TOL = 1e-9


class ComplexityDefaults:
    HALSTEAD_DEFECT_DIVISOR = 3000.0
    # fixed weights of L_tot, C_inf, C_c, C_io, U_read
    TRW_WEIGHTS = (1.0, 0.1, 0.2, 0.4, -0.1)
    MIN_TRW_SAMPLES = 5
    RANK_TOL = 1e-10


class GrowthDefaults:
    MIN_EVENTS = 3


class NhppDefaults:
    MIN_EVENTS = 5
    MIN_NONEMPTY_BINS = 3
    START_SCALE = 1.5
    FD_REL_TARGET = 1e-7


class RunDomainDefaults:
    MIN_STAGES = 4
    MAX_EFFICIENCY = 10.0


class SelectionDefaults:
    PREQUENTIAL_START_FRACTION = 0.5
    MIN_EVENTS = 6


class SimulationDefaults:
    THINNING_SAFETY = 1.5
    THINNING_PIECES = 64
    THINNING_SUBGRID = 16
    UNBOUNDED_EPS_FRACTION = 1e-6
