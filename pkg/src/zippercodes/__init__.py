"""Zipper codes: spatially coupled product-like codes with BCH constituents.

Modules:

* ``galois_bch``: GF(2^d) arithmetic and shortened binary BCH codes.
* ``zipper_core``: zipping pairs, interleaver maps, encoding, rate.
* ``window_decoder``: sliding-window iterative decoding.
* ``channel_sim``: BSC Monte Carlo, extrapolation, gap to capacity.
* ``stall_analysis``: code/error graphs, peeling, stall counting, floors.
* ``cli``: the ``zipper`` command.
"""

from .galois_bch import BchCode, build_field, decode_bounded, encode_systematic, make_shortened_bch
from .zipper_core import (
    InterleaverMap,
    ZipperSpec,
    check_properties,
    code_rate,
    encode_buffer,
    make_braided7,
    make_custom,
    make_delayed_diagonal,
    make_staircase,
    make_tiled_diagonal,
)
from .window_decoder import DecoderConfig, decode_stream
from .channel_sim import ZipperSystem, fit_extrapolate, gap_db, run_sim_point, shannon_limit_p

__all__ = [
    "BchCode",
    "build_field",
    "decode_bounded",
    "encode_systematic",
    "make_shortened_bch",
    "InterleaverMap",
    "ZipperSpec",
    "check_properties",
    "code_rate",
    "encode_buffer",
    "make_braided7",
    "make_custom",
    "make_delayed_diagonal",
    "make_staircase",
    "make_tiled_diagonal",
    "DecoderConfig",
    "decode_stream",
    "ZipperSystem",
    "fit_extrapolate",
    "gap_db",
    "run_sim_point",
    "shannon_limit_p",
]

__version__ = "0.1.0"
