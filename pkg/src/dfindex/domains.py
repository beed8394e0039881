"""Domain registry: built-in families and user expression-tree domains."""

from __future__ import annotations

import math
import re

import numpy as np

from . import expr, jets
from .boundary import DomainSpec
from .fields import ScalarField
from .geometry import MetricField
from .worm import WormParams, worm_domain

__all__ = ["REGISTRY_KEYS", "make_domain", "ball_domain", "ellipsoid_domain", "parse_domain_key"]

REGISTRY_KEYS = ("ball", "ellipsoid(a1..an)", "worm(gamma)", "user")


def ball_domain(n=2, signed=False, metric=None):
    """Unit ball; ``signed=True`` selects the constant-gradient-norm variant.

    The signed-distance defining function is scaled so that |dr| = 1 in the
    metric convention <d/dz_j, d/dz_k> = delta_jk.
    """
    metric = metric or MetricField.euclidean(n)
    if signed:
        def fn(zs):
            s = sum((jets.abs2(w) for w in zs), jets.Jet.constant(0.0, 2 * n, zs[0].order))
            return (jets.sqrt(s) - 1.0) * math.sqrt(2.0)

        r = ScalarField(n, fn, name="ball_signed_distance")
        interior = np.full(n, 0.2 + 0.0j)
    else:
        def fn(zs):
            return sum((jets.abs2(w) for w in zs), jets.Jet.constant(-1.0, 2 * n, zs[0].order))

        r = ScalarField(n, fn, name="ball")
        interior = np.zeros(n, dtype=complex)
    box = np.array([[-1.5, 1.5]] * (2 * n))
    return DomainSpec(
        name="ball_sd" if signed else "ball",
        n=n,
        r=r,
        metric=metric,
        box=box,
        interior_point=interior,
        params={"signed": signed},
    )


def ellipsoid_domain(axes, metric=None):
    axes = [float(a) for a in axes]
    if any(a <= 0 for a in axes):
        raise ValueError(f"ellipsoid axes must be positive, got {axes}")
    n = len(axes)
    metric = metric or MetricField.euclidean(n)
    inv2 = [1.0 / a**2 for a in axes]

    def fn(zs):
        return sum((jets.abs2(w) * c for w, c in zip(zs, inv2)),
                   jets.Jet.constant(-1.0, 2 * n, zs[0].order))

    pad = 1.5 * max(axes)
    return DomainSpec(
        name=f"ellipsoid({','.join(f'{a:g}' for a in axes)})",
        n=n,
        r=ScalarField(n, fn, name="ellipsoid"),
        metric=metric,
        box=np.array([[-pad, pad]] * (2 * n)),
        interior_point=np.zeros(n, dtype=complex),
        params={"axes": axes},
    )


def _user_domain(params):
    try:
        n = int(params["n"])
        tree = params["r"]
        box = np.asarray(params["box"], dtype=float)
        interior = np.asarray([complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
                               for c in params["interior"]], dtype=complex)
    except KeyError as missing:
        raise ValueError(f"user domain requires field {missing.args[0]!r} (n, r, box, interior)")
    if box.shape != (2 * n, 2):
        raise ValueError(f"user chart box must have shape ({2 * n}, 2), got {box.shape}")
    r = expr.build_field(tree, n, name="user_r")
    metric_spec = params.get("metric")
    if metric_spec is None:
        metric = MetricField.euclidean(n)
    else:
        entries = [[expr.build_field(metric_spec["entries"][j][k], n, name=f"g[{j}{k}]")
                    for k in range(n)] for j in range(n)]
        metric = MetricField(n, entries, name="user_metric")
    return DomainSpec(name="user", n=n, r=r, metric=metric, box=box,
                      interior_point=interior, params=dict(params))


def parse_domain_key(key):
    """Split a registry key like ``worm(3.14)`` into name and numeric args."""
    m = re.fullmatch(r"\s*([a-zA-Z_]+)\s*(?:\(([^)]*)\))?\s*", key)
    if not m:
        raise ValueError(f"malformed domain key {key!r}; known keys: {REGISTRY_KEYS}")
    name = m.group(1).lower()
    args = []
    if m.group(2):
        args = [float(tok) for tok in m.group(2).split(",") if tok.strip()]
    return name, args


def make_domain(key, metric="euclidean", **params):
    """Instantiate a registered domain.

    ``key`` is one of ``ball``, ``ellipsoid(a1..an)``, ``worm(gamma)``, or
    ``user``; parenthesized numbers may also be given through ``params``.
    """
    name, args = parse_domain_key(key) if isinstance(key, str) else (key, [])
    if name == "ball":
        n = int(args[0]) if args else int(params.get("n", 2))
        return ball_domain(n=n, signed=bool(params.get("signed", False)))
    if name == "ellipsoid":
        axes = args or params.get("axes")
        if not axes:
            raise ValueError("ellipsoid needs axes: ellipsoid(a1,..,an)")
        return ellipsoid_domain(axes)
    if name == "worm":
        gamma = args[0] if args else params.get("gamma")
        if gamma is None:
            raise ValueError("worm needs gamma: worm(gamma)")
        lam = {k: params[k] for k in ("lam_c", "lam_p") if params.get(k) is not None}
        wp = WormParams(gamma=float(gamma), t=params.get("t"), s=params.get("s"), **lam)
        if metric not in ("euclidean", "worm_kahler"):
            raise ValueError(f"worm supports metrics 'euclidean' and 'worm_kahler', got {metric!r}")
        return worm_domain(wp, metric=metric)
    if name == "user":
        return _user_domain(params)
    raise ValueError(f"unknown domain key {key!r}; known keys: {REGISTRY_KEYS}")
