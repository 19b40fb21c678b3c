"""Forward-link performance analysis for multibeam satellite systems with an
optical feeder link, nonlinear onboard amplification, and zero-forcing
multibeam precoding.

Subpackages follow the signal path: ``fso_link`` (optical uplink statistics),
``transponder`` (amplifier linearization), ``rf_link`` (multibeam user link),
``system`` (end-to-end scenario assembly), ``analytics`` (closed-form and
asymptotic metrics), ``montecarlo`` (independent stochastic verification),
``cli`` (sweep front-end).
"""

__version__ = "0.1.0"

from . import specfun, fso_link, rf_link, transponder, system, analytics, montecarlo

__all__ = [
    "specfun",
    "fso_link",
    "rf_link",
    "transponder",
    "system",
    "analytics",
    "montecarlo",
    "__version__",
]
