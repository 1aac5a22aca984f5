STATUS_OK = 1
STATUS_WARNING = 2
STATUS_ERROR = 8

STATUS_NAMES = {
    STATUS_OK: 'ok',
    STATUS_WARNING: 'warning',
    STATUS_ERROR: 'error',
}

FLAG_NONFINITE = 'nonfinite'
FLAG_BUDGET_EXHAUSTED = 'budget_exhausted'
FLAG_TRIAL_FAILED = 'trial_failed'

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
