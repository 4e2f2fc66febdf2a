SCHEMA_VERSION = 1

PASS = 'pass'
FAIL = 'fail'
INCONCLUSIVE = 'inconclusive'
VERDICTS = (PASS, FAIL, INCONCLUSIVE)

# multiplicative slack on strict inequalities
INEQUALITY_SLACK = 1e-3
REFINEMENT_DRIFT = 0.05
HEAT_CORRIDOR_DRIFT = 0.10
DILATION_DRIFT = 0.03
BAND_TAIL_LIMIT = 0.05
GROWTH_PER_STEP = 1.5
WINDOW_EDGE = 1e-9
TROTTER_NOISE = 0.10
MAX_DROPPED_SHARE = 0.20
CANCELLATION_FACTOR = 5.0
CANCELLATION_RADIUS = 8.0
ORDER_SLACK = 1e-6

FAMILIES = ('gaussian', 'plateau', 'power_tail', 'near_extremal')
