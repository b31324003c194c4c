"""Scan chain lengths and end links: does the all-zero branch realise the cyclic shift?

For every configuration this prints the channel overlap of K_0 with the cyclic
permutation, the worst unitarity deviation over all branches, the best overlap
any per-site Pauli correction reaches on K_0, and the Pauli expansion of the
residual P^dag K_0. Compact mode keeps n=5 cheap.

    python scripts/completion_scan.py --n-max 5
"""

import argparse

from chainport.corrections import best_pauli_correction
from chainport.protocol import ProtocolSpec, kraus_operators
from chainport.verify import kraus_report


def scan(n_max: int, mode: str):
    rows = [("two-way-vaa", 2, "y")]
    rows += [("chain", n, end) for n in range(2, n_max + 1) for end in ("z", "x", "y")]
    for family, n, end in rows:
        spec = ProtocolSpec(n, family=family, end_link=end, sim_mode=mode)
        rep = kraus_report(spec)
        k0 = kraus_operators(spec)[(0,) * n]
        labels, best, best_labels = best_pauli_correction(k0, n)
        residual = " ".join(f"{k}:{v:.3f}" for k, v in rep.zero_branch_residual.items())
        yield {
            "family": family,
            "n": n,
            "end": spec.end_axis,
            "branches": len(rep.unitarity),
            "overlap": rep.zero_branch_overlap,
            "max_unitarity_dev": max(rep.unitarity.values()),
            "best_pauli_overlap": best,
            "best_labels": "".join(labels or best_labels),
            "residual": residual,
        }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--mode", choices=["full", "compact"], default="compact")
    args = ap.parse_args()
    print(f"{'family':<12}{'n':>2} {'end':>3} {'#d':>3} {'K0.P':>9} {'unit.dev':>9} {'bestPauli':>10}  labels  residual")
    for r in scan(args.n_max, args.mode):
        print(
            f"{r['family']:<12}{r['n']:>2} {r['end']:>3} {r['branches']:>3} {r['overlap']:>9.6f} "
            f"{r['max_unitarity_dev']:>9.2e} {r['best_pauli_overlap']:>10.6f}  {r['best_labels']:<6}  {r['residual']}"
        )


if __name__ == "__main__":
    main()
