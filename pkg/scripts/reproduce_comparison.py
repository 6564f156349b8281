"""Train LogReg and MLP on one stratified split of the Kaggle corpus and check criteria 1-6.

    python scripts/reproduce_comparison.py --data malicious_phish.csv [--out results/]

Writes each model's report and bundle to --out when given.
"""

import argparse
import logging
import sys
from pathlib import Path

from urlsift.config import load_config_file
from urlsift.dataset import load_csv
from urlsift.experiment import check_criteria, run_comparison
from urlsift.metrics import render_report
from urlsift.store import save_bundle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", required=True)
    ap.add_argument("--config", help="JSON run config (defaults otherwise)")
    ap.add_argument("--out", help="directory for reports and bundles")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    dataset = load_csv(args.data)
    results = run_comparison(dataset, load_config_file(args.config))
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for kind, res in results.items():
        text = render_report(res.report, "text") + "\n" + res.confusion.render_text()
        print(f"== {kind} ({res.seconds:.0f}s, test n={len(res.run.test)})\n{text}")
        if out:
            (out / f"{kind}_report.txt").write_text(text)
            save_bundle(res.run.bundle, out / f"{kind}.usft")
    checks = check_criteria(results)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
