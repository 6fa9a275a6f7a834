"""Error codes raised by the lab.

Every failure that a caller can act on is a ``LabError`` carrying one of the
codes below; validators and certifiers never raise, they return reports.
"""

CODES = (
    'STRICT_VIOLATION',
    'EMPTY_FEASIBLE_SET',
    'UNMATERIALIZED_INDEX',
    'NON_SUCCESSIVE_BLOCKS',
    'INVALID_ANTICHAIN',
    'HYPOTHESIS_FAILED',
    'SUPPORT_TOO_LOW',
    'NOT_ADMISSIBLE',
    'BALL_VIOLATION',
    'EPS_INFEASIBLE_AT_BUDGET',
    'INSUFFICIENT_FUNCTIONALS',
    'USAGE',
)


class LabError(Exception):
    """An error with a machine-readable ``code`` and free-form context."""

    def __init__(self, code, message, **context):
        assert code in CODES, 'unknown error code ' + str(code)
        self.code = code
        self.message = message
        self.context = context
        super().__init__('{}: {}'.format(code, message))

    def to_doc(self):
        return {'code': self.code, 'message': self.message,
                'context': self.context}
