"""Secrecy outage laboratory for secure cooperative NOMA.

Event-level Monte Carlo of the two-phase protocol, closed-form evaluators
for every outage distribution, and a CSV-emitting experiments CLI.
"""

from .analytic import (ANALYTIC_EXACT, ANALYTIC_LOWER_BOUND,
                       ANALYTIC_UPPER_BOUND, FJR, MONTE_CARLO, RELAY,
                       DerivedScalars, QuadratureConstants, SopEstimate,
                       sop_case1, sop_case2, sop_weak_high_snr)
from .config import ExperimentConfig, load_config
from .geometry import (ANALYTIC_MATCHED, PAPER_GEOMETRY, ChannelRealization,
                       NetworkGeometry, PairConfig, SamplingMode)
from .simulator import (CASE1, CASE2_FJR, CASE2_RELAY, COOP_NO_EVES,
                        NONCOOP_NOMA, SopMonteCarlo, TrialSpec, empirical_cdf,
                        estimate_sop)

__version__ = "0.1.0"
