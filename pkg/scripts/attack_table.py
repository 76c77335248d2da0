"""Tunings and Eve's view for the four saturating attacks over a channel grid."""

import argparse
import math

from hetqkd import bounds
from hetqkd.attacks import KINDS, build, eve_view_from
from hetqkd.errors import UnrealizableAttackError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--V", type=float, default=11.0)
    ap.add_argument("--T", type=float, nargs="+", default=[0.1, 0.25, 0.5, 0.9])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.0, 0.02, 0.1])
    args = ap.parse_args()

    print(f"{'kind':>18} {'T':>5} {'eps':>6} {'chi_E':>12} {'gap':>9}  tuning")
    for T in args.T:
        for eps in args.eps:
            chi_min = bounds.hetero_chi_E_min(T, eps)
            for kind in KINDS:
                try:
                    attack = build(kind, T, eps)
                except UnrealizableAttackError as exc:
                    print(f"{kind:>18} {T:5.2f} {eps:6.3f}  unrealizable: {exc}")
                    continue
                view = eve_view_from(attack.symplectic, args.V)
                gap = 0.0 if math.isinf(chi_min) else abs(view.chi_XE1 - chi_min)
                tuning = ", ".join(f"{k}={v:.6g}" for k, v in attack.tuning.items())
                print(f"{kind:>18} {T:5.2f} {eps:6.3f} {view.chi_XE1:12.6g} {gap:9.2e}  {tuning}")


if __name__ == "__main__":
    main()
