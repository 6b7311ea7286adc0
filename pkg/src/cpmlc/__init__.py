"""Channel-polarized multilevel coding with iterative decoding, plus baselines."""

__version__ = "0.1.0"

from .codes import KP4, ComponentCode, build_ebch, code_by_name, encode, outer_success, scheme_overhead
from .osd import FlippingSetSpec, osd_decode, osd_decode_batch
from .schemes import (
    InterleaverSpec,
    SchemeConfig,
    concatenated,
    cp_mlc,
    cp_mlc_id,
    decode_frames,
    encode_frames,
    uncoded,
)

__all__ = [
    "KP4",
    "ComponentCode",
    "FlippingSetSpec",
    "InterleaverSpec",
    "SchemeConfig",
    "build_ebch",
    "code_by_name",
    "concatenated",
    "cp_mlc",
    "cp_mlc_id",
    "decode_frames",
    "encode",
    "encode_frames",
    "osd_decode",
    "osd_decode_batch",
    "outer_success",
    "scheme_overhead",
    "uncoded",
]
