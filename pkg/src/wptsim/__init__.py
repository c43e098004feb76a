"""Link-level simulation of closed-loop wireless power transfer and SWIPT."""

__version__ = "0.1.0"

from .signals import (
    FrequencyGrid,
    ModulationScheme,
    Precoder,
    TimeSeries,
    draw_symbols,
    papr,
    synthesize,
    uniform_multisine,
)
from .channel import ChannelState, PathTap, RisLinks, RisState, compose_ris, freq_response, generate
from .harvester import (
    RectennaParams,
    ReceivedTones,
    dc_combine,
    e3,
    fourth_moment,
    p_dc,
    rf_combine,
    second_moment,
    v_out,
)
from .optimizer import Strategy, ass, design, mrt_cw, optimize_rf_combiner, ris_tile_scan, smf
from .protocol import Codebook, Frame, ProbeModel, build_codebook, run_closed_loop
from .swipt import ReceiverArch, REPoint, energy_arch, ppm_link, rate_subbands, re_region, superpose
