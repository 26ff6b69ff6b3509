"""Tabulate the rate bounds over a grid of eps, b and lambda.

    python3 scripts/rate_table.py --out rates.csv
"""
import argparse
import csv
import sys

from geofix.rates import ap_rate, averaged_rate, firmly_rate, lp_closed_form_rate, parallel_rate, parallel_rate_refined


def rows(eps_values, b_values, lam_values, K):
    for b in b_values:
        for eps in eps_values:
            yield {"formula": "ap", "eps": eps, "b": b, "lambda": "", "bound": ap_rate(eps, b)}
            yield {"formula": "parallel", "eps": eps, "b": b, "lambda": "", "bound": parallel_rate(eps, b, "cat0", K=K)}
            yield {"formula": "parallel_refined", "eps": eps, "b": b, "lambda": "",
                   "bound": parallel_rate_refined(eps, b, "cat0", K=K)}
            yield {"formula": "lp4", "eps": eps, "b": b, "lambda": "", "bound": lp_closed_form_rate(eps, b, 4, K=K)}
            for lam in lam_values:
                yield {"formula": "firmly", "eps": eps, "b": b, "lambda": lam, "bound": firmly_rate(eps, b, lam)}
                yield {"formula": "averaged", "eps": eps, "b": b, "lambda": lam, "bound": averaged_rate(eps, b, lam)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", default="2,1,0.5,0.1")
    ap.add_argument("--b", default="1,2")
    ap.add_argument("--lambda", dest="lam", default="0.25,0.5,0.75")
    ap.add_argument("--K", type=float, default=0.125, help="scheme constant for the parallel bounds")
    ap.add_argument("--out", help="CSV path; stdout when omitted")
    args = ap.parse_args(argv)
    floats = lambda s: [float(v) for v in s.split(",")]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, ["formula", "eps", "b", "lambda", "bound", "log10"])
    w.writeheader()
    for row in rows(floats(args.eps), floats(args.b), floats(args.lam), args.K):
        n = row["bound"]
        w.writerow({**row, "bound": str(n), "log10": f"{n.log10:.2f}" if n.log10 is not None else ""})
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
