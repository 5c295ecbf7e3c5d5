"""
Numeric constants and model roster labels.
"""

import math

LOG_2PI = math.log(2.0 * math.pi)

# sigma^2 is clamped below at this value after softplus
VARIANCE_FLOOR = 1e-6
SCALE_FLOOR = math.sqrt(VARIANCE_FLOOR)

# nu = DOF_SHIFT + softplus(.)
DOF_SHIFT = 3.0

# Unit-variance Student baseline: nu = 100, sigma = sqrt(98 / 100)
UNIT_STUDENT_DOF = 100.0
UNIT_STUDENT_SCALE = math.sqrt((UNIT_STUDENT_DOF - 2.0) / UNIT_STUDENT_DOF)

# ============================================================
# PARTITIONS
# ============================================================
TRUNK = 'z'
MEAN = 'mu'
SCALE = 'sigma'
DOF = 'nu'
PARTITIONS = (TRUNK, MEAN, SCALE, DOF)
MEAN_ONLY_PARTITIONS = (TRUNK, MEAN)

# ============================================================
# MODEL ROSTER
# ============================================================
UNIT_VARIANCE = 'unit-variance'
CONVENTIONAL = 'conventional'
BETA_NLL_HALF = 'beta-nll-0.5'
BETA_NLL_ONE = 'beta-nll-1.0'
PROPOSAL_1 = 'proposal-1'
PROPOSAL_2 = 'proposal-2'
FAITHFUL = 'faithful'

ROSTER_LABELS = {
    UNIT_VARIANCE: 'Unit Variance Homoscedastic',
    CONVENTIONAL: 'Conventional Heteroscedastic',
    BETA_NLL_HALF: 'Beta NLL (0.5)',
    BETA_NLL_ONE: 'Beta NLL (1.0)',
    PROPOSAL_1: 'Proposal 1',
    PROPOSAL_2: 'Proposal 2',
    FAITHFUL: 'Faithful Heteroscedastic',
}

NORMAL_ROSTER = (
    UNIT_VARIANCE, CONVENTIONAL, BETA_NLL_HALF, BETA_NLL_ONE,
    PROPOSAL_1, PROPOSAL_2, FAITHFUL,
)
STUDENT_ROSTER = (UNIT_VARIANCE, CONVENTIONAL, FAITHFUL)

FAMILIES = ('normal', 'student', 'deep-ensemble', 'mc-dropout')
EXPERIMENTS = ('convergence', 'tabular', 'decompose', 'verify-faithful', 'family')
