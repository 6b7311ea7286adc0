"""Required SNR at the outer-code threshold and net coding gain.

A quick, low-precision version of the threshold search (few errors per probe,
coarse tolerance). Use the CLI with a config file for publication-grade runs.

Run: python3 demos/threshold_and_ncg.py
"""

from __future__ import annotations

from cpmlc import KP4, build_ebch, concatenated, cp_mlc_id
from cpmlc.channel import uncoded_required_snr
from cpmlc.sim import StoppingRule, find_threshold, ncg_from_required, sdd_count


def main(seed: int = 1):
    rule = StoppingRule(min_bit_errors=100, min_frames=1000, max_frames=100_000, block_frames=500)
    ref = uncoded_required_snr(KP4.target_post_ber)
    print(f"uncoded BPSK needs {ref:.2f} dB for BER {KP4.target_post_ber:g}")
    print(f"outer code threshold: pre-outer BER {KP4.threshold_ber:g}\n")

    schemes = {
        "concatenated": concatenated(build_ebch(113), "t0+t1+t2(40,29)"),
        "cp-mlc-id I=3": cp_mlc_id(build_ebch(106), "t0+t1+t2(40,29)", iterations=3),
        "cp-mlc-id I=6": cp_mlc_id(build_ebch(106), "t0+t1+t2(40,29)", iterations=6),
    }
    ncg = {}
    for name, cfg in schemes.items():
        res = find_threshold(cfg, KP4.threshold_ber, (3.5, 5.0), tol=0.05, rule=rule, seed=seed)
        ncg[name] = ncg_from_required(cfg, res.snr_db)
        flag = "  (under-resolved)" if res.under_resolved else ""
        print(f"  {name:14s} required SNR {res.snr_db:.3f} dB  NCG {ncg[name]:.3f} dB  "
              f"SDDs per 3 lanes {sdd_count(cfg)}{flag}")
    base = ncg["concatenated"]
    for name in list(schemes)[1:]:
        print(f"  delta NCG {name} vs concatenated: {ncg[name] - base:+.3f} dB")


if __name__ == "__main__":
    main()
