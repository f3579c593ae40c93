from __future__ import annotations

import importlib.resources as resources
import random

import pytest

from lavrptw.instance import Instance, parse_solomon


def solomon_text(name: str, vehicles: int, capacity: int,
                 rows: list[tuple]) -> str:
    """Render rows (id, x, y, demand, ready, due, service) as a Solomon file."""
    lines = [name, "", "VEHICLE", "NUMBER     CAPACITY",
             f"  {vehicles}         {capacity}", "", "CUSTOMER",
             "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME",
             ""]
    for row in rows:
        lines.append("   " + "     ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def make_instance(rows: list[tuple], capacity: int = 200, name: str = "SYN") -> Instance:
    return parse_solomon(solomon_text(name, 25, capacity, rows))


def random_instance(rng: random.Random, n: int, capacity: int | None = None,
                    horizon: int = 400, max_demand: int = 20,
                    size: int = 60, max_service: int = 10) -> Instance:
    """Random Solomon-like instance: positive demands, distinct coordinates,
    and windows that keep every customer individually servable including the
    return leg to the depot."""
    taken = set()

    def spot():
        while True:
            p = (rng.randint(0, size), rng.randint(0, size))
            if p not in taken:
                taken.add(p)
                return p

    dx, dy = spot()
    rows = [(0, dx, dy, 0, 0, horizon, 0)]
    for i in range(1, n + 1):
        x, y = spot()
        dist = int(((x - dx) ** 2 + (y - dy) ** 2) ** 0.5) + 1
        service = rng.randint(0, max_service)
        ready = rng.randint(0, int(horizon * 0.6))
        due = max(ready, dist) + rng.randint(20, 100)
        due = max(min(due, horizon - service - dist), dist)
        ready = min(ready, due)
        rows.append((i, x, y, rng.randint(1, max_demand), ready, due, service))
    cap = capacity if capacity is not None else rng.randint(30, 3 * max_demand)
    cap = max(cap, max(r[3] for r in rows))
    return make_instance(rows, capacity=cap)


def load_bundled(name: str) -> Instance:
    text = (resources.files("lavrptw") / "data" / f"{name}.25.txt").read_text()
    return parse_solomon(text)


@pytest.fixture(scope="session")
def r101_25() -> Instance:
    return load_bundled("r101")


@pytest.fixture(scope="session")
def c101_25() -> Instance:
    return load_bundled("c101")


@pytest.fixture(scope="session")
def rc101_25() -> Instance:
    return load_bundled("rc101")
