"""The small oriented forests used by the random-homomorphism machinery.

Vertex names follow the artifact's file formats: a trailing + or - marks the
side, and a 'b' suffix on the base letter marks the barred variant (so
"xb+" is x-bar-plus).  The single-sided forests H0..H4_5 use bare names.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Forest:
    name: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        vs = set(self.vertices)
        deg: dict[str, int] = {v: 0 for v in self.vertices}
        seen = set()
        for (u, v) in self.edges:
            if u not in vs or v not in vs or u == v:
                raise ValueError(f"bad edge ({u},{v}) in {self.name}")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {u},{v}")
            seen.add(key)
            deg[u] += 1
            deg[v] += 1
        # acyclicity: components = vertices - edges for a forest
        if self._component_count() != len(self.vertices) - len(self.edges):
            raise ValueError(f"{self.name} has a cycle")

    def _component_count(self) -> int:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (u, v) in self.edges:
            parent[find(u)] = find(v)
        return len({find(v) for v in self.vertices})

    def components(self) -> list[list[str]]:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (u, v) in self.edges:
            parent[find(u)] = find(v)
        groups: dict[str, list[str]] = {}
        for v in self.vertices:
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())

    def out_edges_of(self, v: str) -> list[str]:
        return [b for (a, b) in self.edges if a == v]

    def in_edges_of(self, v: str) -> list[str]:
        return [a for (a, b) in self.edges if b == v]

    def reverse(self, name: str | None = None) -> "Forest":
        return Forest(
            name or (self.name + "_rev"),
            self.vertices,
            tuple((v, u) for (u, v) in self.edges),
        )


H_FOREST = Forest(
    "H",
    (
        "x+", "y+", "z+", "u+", "w+", "xb+", "zb+", "ub+", "wb+",
        "x-", "y-", "z-", "u-", "w-", "xb-", "zb-", "ub-", "wb-",
    ),
    (
        ("x+", "y+"), ("z+", "x+"), ("z+", "u+"), ("w+", "z+"),
        ("zb+", "xb+"), ("zb+", "ub+"), ("wb+", "zb+"),
        ("y-", "x-"), ("x-", "z-"), ("u-", "z-"), ("z-", "w-"),
        ("xb-", "zb-"), ("ub-", "zb-"), ("zb-", "wb-"),
    ),
)

H_X_PLUS = ("x+", "xb+")
H_X_MINUS = ("x-", "xb-")
H_X = H_X_PLUS + H_X_MINUS
H_PLUS_VERTICES = ("x+", "y+", "z+", "u+", "w+", "xb+", "zb+", "ub+", "wb+")
H_MINUS_VERTICES = ("x-", "y-", "z-", "u-", "w-", "xb-", "zb-", "ub-", "wb-")

H0 = Forest(
    "H0",
    ("x", "y", "z", "u", "w", "xb", "zb", "ub", "wb"),
    (("x", "y"), ("z", "x"), ("z", "u"), ("w", "z"),
     ("zb", "xb"), ("zb", "ub"), ("wb", "zb")),
)

H1 = Forest("H1", ("x", "y", "z", "xb", "zb"), (("x", "y"), ("z", "x"), ("zb", "xb")))

H2 = Forest("H2", ("x", "y", "z", "u", "w"), (("x", "y"), ("z", "x"), ("z", "u"), ("w", "z")))

H3_1 = Forest("H3_1", ("x", "y"), (("x", "y"),))
H3_2 = Forest("H3_2", ("x", "y"), (("y", "x"),))

H4_1 = Forest("H4_1", ("x", "y", "z"), (("x", "y"), ("z", "x")))
H4_2 = Forest("H4_2", ("x", "y"), (("x", "y"),))
H4_3 = Forest("H4_3", ("x", "y"), (("y", "x"),))
H4_4 = Forest("H4_4", ("x", "y", "z"), (("y", "x"), ("z", "y")))
H4_5 = Forest("H4_5", ("x", "y"), (("y", "x"),))


def builtin_forests() -> dict[str, Forest]:
    return {
        "H": H_FOREST,
        "H0": H0,
        "H1": H1,
        "H2": H2,
        "H3_1": H3_1,
        "H3_2": H3_2,
        "H4_1": H4_1,
        "H4_2": H4_2,
        "H4_3": H4_3,
        "H4_4": H4_4,
        "H4_5": H4_5,
    }


def h_plus_restriction_map() -> dict[str, str]:
    """Rename H's plus side onto H0 (x+ -> x, xb+ -> xb, ...)."""
    return {v: v[:-1] for v in H_PLUS_VERTICES}


def h_minus_restriction_map() -> dict[str, str]:
    """Rename H's minus side onto H0's names; H's minus side with edges
    reversed is isomorphic to H0."""
    return {v: v[:-1] for v in H_MINUS_VERTICES}


def h_side_swap() -> dict[str, str]:
    """The H -> H automorphism-of-names swapping + and - superscripts.

    Composed with edge reversal this is an isomorphism from H to H
    reversed, which is what directional duality uses.
    """
    out = {}
    for v in H_FOREST.vertices:
        base, d = v[:-1], v[-1]
        out[v] = base + ("-" if d == "+" else "+")
    return out
