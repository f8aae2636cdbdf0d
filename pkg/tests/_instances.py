"""Random small instances shared by property and acceptance tests."""

from __future__ import annotations

import random

from sdnadmit.harness import gen_random_instance
from sdnadmit.oracle import EnumerationLimit, enumerate_paths
from sdnadmit.product import build_product


def random_weights(net, rng: random.Random) -> dict[str, float]:
    return {z: rng.choice([0.0, rng.uniform(0, 3), float(rng.randint(0, 3))]) for z in net.resources()}


def sample_product_path(seed: int, cap: int = 4000):
    """``(net, req, pn, path)`` for a random request with at least one realization, or ``None``."""
    rng = random.Random(seed)
    net, events, _ = gen_random_instance(seed, max_nodes=6, max_edges=9, max_requests=6)
    reqs = [ev.request for ev in events if ev.kind == "arrival"]
    rng.shuffle(reqs)
    weights = random_weights(net, rng)
    for req in reqs:
        pn, preq = build_product(net, req, weights)
        try:
            paths = enumerate_paths(pn, preq, cap=cap)
        except EnumerationLimit:
            continue
        if paths:
            path, _ = rng.choice(paths)
            return net, req, pn, path
    return None
