import os

import sentry_sdk
from githead import githead
from sentry_sdk.integrations.pure_eval import PureEvalIntegration

try:
    VERSION = 'git#' + githead()[:7]
except Exception:
    VERSION = 'git#unknown'

TEST_ENV = os.getenv('TEST_ENV', '0').strip().lower() in ('1', 'true', 'yes')
if TEST_ENV:
    print('[CONF] Running in test environment')  # noqa: T201

THREADS = int(os.getenv('LOOPMAPS_THREADS', 1))

# theta series
THETA_TOL = float(os.getenv('LOOPMAPS_THETA_TOL', 1e-16))
THETA_MAX_TERMS = int(os.getenv('LOOPMAPS_THETA_MAX_TERMS', 512))
MAX_DERIV_ORDER = int(os.getenv('LOOPMAPS_MAX_DERIV_ORDER', 12))
POLE_RADIUS = float(os.getenv('LOOPMAPS_POLE_RADIUS', 1e-8))

# endpoint solver
BISECT_TOL = float(os.getenv('LOOPMAPS_BISECT_TOL', 1e-13))
NEWTON_MAX_ITER = int(os.getenv('LOOPMAPS_NEWTON_MAX_ITER', 80))
NEWTON_TOL = float(os.getenv('LOOPMAPS_NEWTON_TOL', 1e-10))
CONTINUATION_STEPS = int(os.getenv('LOOPMAPS_CONTINUATION_STEPS', 8))
DEGENERATE_GAP = float(os.getenv('LOOPMAPS_DEGENERATE_GAP', 1e-12))

# residues and series
LAURENT_DEPTH = int(os.getenv('LOOPMAPS_LAURENT_DEPTH', 8))
SERIES_ITER_SLACK = int(os.getenv('LOOPMAPS_SERIES_ITER_SLACK', 2))
ENUMERATE_MAX_TRIANGLES = int(os.getenv('LOOPMAPS_ENUMERATE_MAX_TRIANGLES', 6))

if SENTRY_DSN := os.getenv('SENTRY_DSN'):
    sentry_sdk.init(
        dsn=SENTRY_DSN,
        release=VERSION,
        environment='test' if TEST_ENV else 'production',
        enable_tracing=True,
        traces_sample_rate=0.5,
        trace_propagation_targets=None,
        integrations=(PureEvalIntegration(),),
    )
