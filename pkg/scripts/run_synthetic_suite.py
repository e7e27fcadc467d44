"""Run the synthetic suite through both evaluators and print a comparison table.

    python3 scripts/run_synthetic_suite.py --scenes 50
"""
import argparse
import time

from aviseval.evaluator import evaluate
from aviseval.synth import reference_evaluate, synthetic_suite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenes", type=int, default=50)
    args = ap.parse_args()

    mismatches = 0
    t_fast = t_ref = 0.0
    print(f"{'seed':>4} {'videos':>6} {'hyps':>5} {'AP':>6} {'AP50':>6} {'AR10':>6}  agree")
    for spec, m, hyps in synthetic_suite(args.scenes):
        t0 = time.perf_counter()
        fast = evaluate(m, hyps)
        t1 = time.perf_counter()
        ref = reference_evaluate(m, hyps)
        t2 = time.perf_counter()
        t_fast += t1 - t0
        t_ref += t2 - t1
        same = fast.to_dict() == ref.to_dict()
        mismatches += not same
        fmt = lambda v: "-" if v is None else f"{v:.1f}"  # noqa: E731
        print(f"{spec.seed:>4} {spec.videos:>6} {len(hyps):>5} {fmt(fast.ap):>6} {fmt(fast.ap50):>6} "
              f"{fmt(fast.ar[10]):>6}  {'yes' if same else 'NO'}")
    print(f"\nevaluator {t_fast:.2f}s, reference {t_ref:.2f}s, mismatches {mismatches}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
