"""Render the reported AVISeg baseline rows in the evaluator's table format.

The numbers are copied constants, not recomputed; they only exercise the
formatter so a fresh run can be laid out next to them. Pass ``--gt`` and
``--pred`` to append a row for your own predictions.
"""
import argparse

from aviseval import dataset as ds
from aviseval.evaluator import MetricsReport, evaluate, format_table

PUBLISHED = [
    ("ResNet-50", MetricsReport(31.5, 54.2, 26.2, {1: 30.5, 10: 38.3})),
    ("Swin-Base", MetricsReport(35.6, 60.7, 28.6, {1: 31.1, 10: 38.8})),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gt")
    ap.add_argument("--pred")
    ap.add_argument("--label", default="ours")
    args = ap.parse_args()
    rows = list(PUBLISHED)
    if args.gt and args.pred:
        m = ds.load_ground_truth(args.gt)
        rows.append((args.label, evaluate(m, ds.load_predictions(args.pred, m))))
    print(format_table(rows))


if __name__ == "__main__":
    main()
