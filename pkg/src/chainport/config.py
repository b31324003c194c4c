"""Numerical tolerances and size limits shared across the package."""

# Unit norm / unitarity checks on individual operations.
NORM_TOL = 1e-12
# Renormalisation slack accepted on user-supplied factors.
INPUT_NORM_TOL = 1e-10
# Norm deviation on loaded input files that triggers a warning.
INPUT_FILE_WARN_TOL = 1e-6
# Property checks: marginals, trace distances, mode agreement, probability sums.
VERIFY_TOL = 1e-10
# Fidelity and Kraus proportionality checks.
FIDELITY_TOL = 1e-9
# Branches with smaller probability are treated as absent.
ZERO_PROB = 1e-14

# Full mode carries n spins and 2n Z4 pointers: 2**(5n) amplitudes.
FULL_MODE_MAX_N = 4
# Compact mode carries n spins and n Z4 difference registers: 2**(3n) amplitudes.
COMPACT_MODE_MAX_N = 8

# Significant digits used for floats in written reports.
REPORT_DIGITS = 12
