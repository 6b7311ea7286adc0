"""Component codes, scheme overheads and flipping-set sizes.

Run: python3 demos/codes_and_overheads.py
"""

from __future__ import annotations

from cpmlc import build_ebch, concatenated, cp_mlc, cp_mlc_id, scheme_overhead
from cpmlc.codes import inner_rate, total_rate
from cpmlc.osd import FlippingSetSpec


def main():
    print("component codes")
    for k in (113, 106, 99):
        c = build_ebch(k)
        print(f"  {c.name}: n={c.n} k={c.k} d_min={c.d_min}")

    print("\nschemes at ~20% overhead (inner code + RS(544,514))")
    schemes = [
        ("concatenated", concatenated(build_ebch(113), "t0")),
        ("cp-mlc-id", cp_mlc_id(build_ebch(106), "t0")),
        ("cp-mlc", cp_mlc(build_ebch(99), "t0", d=2)),
    ]
    for name, cfg in schemes:
        print(
            f"  {name:13s} info bits/frame={cfg.info_bits:4d} inner rate={inner_rate(cfg):.4f} "
            f"total rate={total_rate(cfg):.4f} overhead={scheme_overhead(cfg):.2f}%"
        )

    print("\nflipping-set sizes")
    specs = ["t0+t1", "t0+t1+t2(10,4)", "t0+t1+t2(20,9)", "t0+t1+t2(30,19)", "t0+t1+t2(40,29)"]
    print("  " + " " * 18 + "".join(f"k={k:<6d}" for k in (113, 106, 99)))
    for s in specs:
        spec = FlippingSetSpec.parse(s)
        print(f"  {s:18s}" + "".join(f"{spec.size(k):<8d}" for k in (113, 106, 99)))


if __name__ == "__main__":
    main()
