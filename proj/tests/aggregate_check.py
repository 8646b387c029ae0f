#!/usr/bin/env python3
"""Re-aggregates trials.jsonl independently and compares with summary.csv.

Also exercises the CLI exit codes and the `report` round trip.
"""
import argparse
import json
import math
import subprocess
import sys
import tempfile
from collections import OrderedDict
from pathlib import Path

CONFIG = """\
seed = 7
setting = OS
c = 0.5
pi = 0.4
dataset.n = 900
dataset.n_test = 800
algo = upu, nnpu-c, pusb
model = mlp:6
iterations = 120
eval_every = 40
splits = 3
draws = 2
oracle_mode = true
criteria = pa, pauc, oa
sweep = c: 0.3, 0.7
"""

CRITERIA = ["pa", "pauc", "oa"]
METRICS = ["acc", "auc", "f1", "precision", "recall"]
TOL = 1e-12

failures = []


def check(ok, what):
    print(("PASS  " if ok else "FAIL  ") + what)
    if not ok:
        failures.append(what)


def run(cmd):
    return subprocess.run(cmd, capture_output=True, text=True)


def reaggregate(trials):
    groups = OrderedDict()
    for t in trials:
        sv = t["sweep"]["value"] if t["sweep"] else None
        groups.setdefault((t["algorithm_index"], t["algorithm"], sv), []).append(t)
    rows = []
    for (_, algo, sv), members in groups.items():
        splits = sorted({t["split"] for t in members})
        cells = []
        for cr in CRITERIA:
            picked = []
            for s in splits:
                best = None
                for t in sorted((t for t in members if t["split"] == s), key=lambda t: t["draw"]):
                    if t["failed"]:
                        continue
                    for ck in t["checkpoints"]:
                        if best is None or ck["criteria"][cr] > best["criteria"][cr]:
                            best = ck
                if best is not None:
                    picked.append(best["metrics"])
            for m in METRICS:
                if not picked:
                    cells.append(None)
                    continue
                vals = [p[m] for p in picked]
                mean = sum(vals) / len(vals)
                std = math.sqrt(sum((v - mean) ** 2 for v in vals) / len(vals))
                cells.append((mean, std))
        rows.append((algo, sv, cells))
    return rows


def parse_summary(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        f = line.split(",")
        cells = []
        for c in f[2:]:
            if c == "NA":
                cells.append(None)
            else:
                mean, std = c.split("±")
                cells.append((float(mean), float(std)))
        rows.append((f[0], float(f[1]), cells))
    return header, rows


def close(a, b):
    return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    args = ap.parse_args()
    cli = args.cli

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "run.cfg"
        cfg.write_text(CONFIG)
        out = tmp / "out"
        r = run([cli, "bench", "--config", str(cfg), "--out", str(out), "--workers", "3"])
        check(r.returncode == 0, f"bench exits 0 (got {r.returncode}) {r.stderr.strip()}")
        if r.returncode != 0:
            return 1

        trials = [json.loads(l) for l in (out / "trials.jsonl").read_text().splitlines() if l]
        check(len(trials) == 2 * 3 * 3 * 2, f"trial count {len(trials)} == 36")
        summary = (out / "summary.csv").read_text(encoding="utf-8")
        header, rows = parse_summary(summary)
        expected_header = ["algorithm", "c"] + [f"{c}:{m}" for c in CRITERIA for m in METRICS]
        check(header == expected_header, "summary.csv header")

        mine = reaggregate(trials)
        check(len(mine) == len(rows), f"row count {len(rows)} == {len(mine)}")
        worst = 0.0
        ok = True
        for (a1, v1, c1), (a2, v2, c2) in zip(mine, rows):
            if a1 != a2 or not close(v1, v2) or len(c1) != len(c2):
                ok = False
                continue
            for x, y in zip(c1, c2):
                if (x is None) != (y is None):
                    ok = False
                elif x is not None:
                    worst = max(worst, abs(x[0] - y[0]), abs(x[1] - y[1]))
                    ok = ok and close(x[0], y[0]) and close(x[1], y[1])
        check(ok, f"independent re-aggregation matches summary.csv (max abs diff {worst:.3g})")

        sweep = (out / "sweep_c.csv").read_text().splitlines()
        check(len(sweep) == 1 + len(rows) * len(CRITERIA) * len(METRICS), "sweep_c.csv row count")

        rep = tmp / "rep"
        r = run([cli, "report", "--trials", str(out / "trials.jsonl"), "--out", str(rep)])
        check(r.returncode == 0 and (rep / "summary.csv").read_text(encoding="utf-8") == summary,
              "report on trials.jsonl reproduces summary.csv byte for byte")

        r = run([cli, "bench", "--config", str(tmp / "missing.cfg")])
        check(r.returncode == 2, f"missing config exits 2 (got {r.returncode})")
        bad = tmp / "bad.cfg"
        bad.write_text(CONFIG + "learning_rat = 0.1\n")
        r = run([cli, "bench", "--config", str(bad), "--out", str(tmp / "bad")])
        check(r.returncode == 1 and "learning_rat" in r.stderr,
              f"unknown key exits 1 and names the key (got {r.returncode})")
        r = run([cli, "bench"])
        check(r.returncode == 1, f"missing --config exits 1 (got {r.returncode})")

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
