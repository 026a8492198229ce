"""Two-user SISO X-channel with alternating CSIT: schemes, decoding and checks."""

from .channel import (ChannelRealization, CsitPattern, CsitState, CsitView, ForbiddenAccess,
                      LambdaDistribution, SlotCsit, draw_channels, lambda_of, read_coefficient)
from .decoder import (DecodeReport, EffectiveSystem, SingularSystem, combine,
                      oracle_identifiability, solve)
from .metrics import DofAccount, RateSweep, baseline_mix, dof_account, rate_sweep, sum_rate
from .patterns import (ClassificationResult, classify, dissociative, enumerate_candidates,
                       minimum_states_r1, minimum_states_r2, table1)
from .pipeline import Simulation, simulate
from .scheme import (Case, NotSynergistic, ReceivedSignals, SchemeCase, SlotRoles, SymbolSet,
                     TransmitBlock, classify_case, encode, mirror_pattern, transmit)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
