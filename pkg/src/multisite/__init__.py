"""On-chip test infrastructure design for maximum multi-site wafer-test throughput."""

__version__ = "0.1.0"

from .soc_model import AteSpec, ModuleSpec, SocDescription, SocFormatError, parse_soc, render_soc, validate_soc
from .wrapper import WrapperDesign, design_wrapper, min_channels, test_time
from .throughput import ThroughputParams
from .architecture import (
    Architecture,
    ChannelGroup,
    InfeasibleError,
    OptimizationResult,
    SitePlan,
    fit_step1,
    max_sites,
    optimize_step2,
)

test_time.__test__ = False
