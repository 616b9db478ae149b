"""Shared record of acceptance outcomes, filled by test_acceptance and printed at the end of the run."""

TITLES = {
    1: "worked example: b = y23 + z21 is Maurer-Cartan",
    2: "worked example: deformed differential table",
    3: "worked example: cohomology of the deformed window",
    4: "deformed categories are flat A-infinity categories",
    5: "gauge functors are strict inverses",
    6: "pushforward of MC elements",
    7: "deformed functor",
    8: "mapping cone suite",
    9: "cyclic solver round trip",
    10: "DSL golden round trip and mutation check",
}

RESULTS: dict = {}


def lines():
    out = []
    for n, title in TITLES.items():
        status, note = RESULTS.get(n, ("NOT RUN", ""))
        out.append(f"acceptance {n:2d} {status}: {title}" + (f"  ({note})" if note else ""))
    return out
