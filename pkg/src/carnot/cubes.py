"""Christ-cube hierarchy over a graded lattice sample.

Construction: greedy maximal tau^k-separated nets per scale, built
coarse-to-fine with each finer net seeded by the coarser one (so nets
are nested), scanning candidates in lattice-index order.  Every point
is assigned to its nearest bottom-scale net center; net centers are
assigned to their nearest next-coarser center; all ties break to the
smallest lattice index.  A point's cube at scale k is the k-th link of
that chain.  The construction is deterministic bit-for-bit; the cube
invariants (partition, nesting, roundness) are audited after every
build rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .norms import dist_infty

DIAM_EXACT_CAP = 3000


@dataclass
class Cube:
    scale: int
    ordinal: int
    center: int
    points: np.ndarray
    parent: "Cube | None" = None
    children: list = field(default_factory=list)
    diam: float = 0.0
    diam_exact: bool = True
    radius: float = 0.0

    @property
    def cube_id(self):
        return f"k{self.scale}:c{self.ordinal}"

    def __repr__(self):
        return f"<Cube {self.cube_id} center={self.center} n={len(self.points)}>"


class CubeTree:
    def __init__(self, lattice, tau, k_min, k_max, cfg=None):
        self.lattice = lattice
        self.tau = float(tau)
        self.k_min = int(k_min)
        self.k_max = int(k_max)
        self.cfg = cfg
        self.scales = {}          # k -> list[Cube]
        self.assign = {}          # k -> int array: point row -> cube ordinal
        self.nets = {}            # k -> list of lattice rows (sorted)

    def side(self, k):
        return self.tau ** k

    def cubes_at(self, k):
        return self.scales[k]

    def all_cubes(self):
        for k in range(self.k_max, self.k_min - 1, -1):
            yield from self.scales[k]

    def cube_count(self):
        return sum(len(v) for v in self.scales.values())

    def root(self):
        roots = self.scales[self.k_max]
        if len(roots) != 1:
            raise ValueError(f"tree has {len(roots)} roots")
        return roots[0]

    def cube_of(self, point, k):
        return self.scales[k][self.assign[k][point]]

    def chain(self, point):
        """Cubes containing the point, bottom scale first."""
        return [self.cube_of(point, k) for k in range(self.k_min, self.k_max + 1)]

    def descendants(self, cube):
        """All cubes contained in `cube`, including itself."""
        out = [cube]
        frontier = [cube]
        while frontier:
            nxt = []
            for c in frontier:
                nxt.extend(c.children)
            out.extend(nxt)
            frontier = nxt
        return out


def _dist_to_point(lattice, row, targets, cfg):
    x = lattice.points[row]
    return dist_infty(lattice.algebra, lattice.points[targets], x, cfg)


def _dist_from_all(lattice, row, cfg):
    x = lattice.points[row]
    return dist_infty(lattice.algebra, lattice.points, x, cfg)


def _greedy_net(lattice, sep, seeds, cfg):
    """Maximal sep-separated subset: seeds first, then a lattice-index
    scan; returns sorted lattice rows."""
    M = lattice.size
    mind = np.full(M, np.inf)
    net = []
    for s in seeds:
        net.append(s)
        np.minimum(mind, _dist_from_all(lattice, s, cfg), out=mind)
    for i in range(M):
        if mind[i] >= sep:
            net.append(i)
            np.minimum(mind, _dist_from_all(lattice, i, cfg), out=mind)
    return sorted(net)


def _nearest(lattice, rows_from, rows_to, cfg):
    """For each row in rows_from, the index (into rows_to) of the
    nearest target; float-equal ties go to the earlier target, so with
    rows_to sorted by lattice index ties break to the smallest index."""
    rows_from = np.asarray(list(rows_from))
    pts = lattice.points[rows_from]
    best = np.full(len(rows_from), np.inf)
    arg = np.zeros(len(rows_from), dtype=int)
    for idx, t in enumerate(rows_to):
        d = dist_infty(lattice.algebra, pts, lattice.points[int(t)], cfg)
        better = d < best
        arg[better] = idx
        best[better] = d[better]
    return arg


def build_cube_tree(lattice, tau, k_min, k_max, cfg=None):
    tau_f = float(tau)
    if not tau_f > 1:
        raise ValueError("need tau > 1")
    if k_min > k_max:
        raise ValueError("need k_min <= k_max")
    R = float(lattice.R)
    h = float(lattice.h)
    if tau_f ** k_max < 2 * R:
        raise ValueError("need tau^k_max >= 2R so the root covers the ball")
    if tau_f ** k_min < h:
        raise ValueError("need tau^k_min >= h (no scales below the sample)")

    tree = CubeTree(lattice, tau_f, k_min, k_max, cfg)
    seeds = []
    for k in range(k_max, k_min - 1, -1):
        net = _greedy_net(lattice, tau_f ** k, seeds, cfg)
        tree.nets[k] = net
        seeds = net

    # Chains: points -> bottom net, each net -> next coarser net.
    up = {}
    for k in range(k_min, k_max):
        up[k] = _nearest(lattice, tree.nets[k], tree.nets[k + 1], cfg)
    bottom = _nearest(lattice, range(lattice.size), tree.nets[k_min], cfg)

    assign = {k_min: bottom}
    for k in range(k_min, k_max):
        assign[k + 1] = up[k][assign[k]]
    tree.assign = assign

    for k in range(k_max, k_min - 1, -1):
        cubes = []
        for o, center in enumerate(tree.nets[k]):
            pts = np.flatnonzero(assign[k] == o)
            cube = Cube(scale=k, ordinal=o, center=center, points=pts)
            cubes.append(cube)
        tree.scales[k] = cubes
    for k in range(k_min, k_max):
        for o, cube in enumerate(tree.scales[k]):
            parent = tree.scales[k + 1][up[k][o]]
            cube.parent = parent
            parent.children.append(cube)

    for cube in tree.all_cubes():
        d = _dist_to_point(lattice, cube.center, cube.points, cfg)
        cube.radius = float(d.max()) if len(d) else 0.0
        cube.diam, cube.diam_exact = _diameter(lattice, cube.points, cube.center, cfg)
    return tree


def _diameter(lattice, rows, center_row, cfg):
    """Max pairwise distance: exact below DIAM_EXACT_CAP, else a
    deterministic multi-sweep lower estimate."""
    n = len(rows)
    if n <= 1:
        return 0.0, True
    if n <= DIAM_EXACT_CAP:
        best = 0.0
        for r in rows:
            d = _dist_to_point(lattice, r, rows, cfg)
            best = max(best, float(d.max()))
        return best, True
    best = 0.0
    seen = set()
    current = center_row
    for _ in range(6):
        d = _dist_to_point(lattice, current, rows, cfg)
        m = float(d.max())
        best = max(best, m)
        current = int(rows[int(np.argmax(d))])
        if current in seen:
            break
        seen.add(current)
    return best, False


def set_distance(tree, rows, targets=None):
    """min over q in rows of d(x, q), for every lattice point x (or the
    given target rows).  d is symmetric, so iterate over whichever
    collection is smaller."""
    lattice = tree.lattice
    rows = np.asarray(rows)
    if targets is not None:
        targets = np.asarray(targets)
        if len(targets) < len(rows):
            out = np.empty(len(targets))
            for i, t in enumerate(targets):
                d = _dist_to_point(lattice, int(t), rows, tree.cfg)
                out[i] = float(d.min())
            return out
    out = np.full(lattice.size if targets is None else len(targets), np.inf)
    for r in rows:
        d = (
            _dist_from_all(lattice, int(r), tree.cfg)
            if targets is None
            else _dist_to_point(lattice, int(r), targets, tree.cfg)
        )
        np.minimum(out, d, out=out)
    return out


def dilate_cube(tree, cube, lam):
    """Lattice rows within (lam - 1) * diam(Q) of Q."""
    if lam < 1:
        raise ValueError("need lam >= 1")
    margin = (lam - 1) * cube.diam
    if margin == 0.0:
        return np.array(cube.points, copy=True)
    lattice = tree.lattice
    pre = _dist_to_point(lattice, cube.center, np.arange(lattice.size), tree.cfg)
    cand = np.flatnonzero(pre <= cube.radius + margin)
    d = set_distance(tree, cube.points, targets=cand)
    return cand[d <= margin]


def hat_cube(tree, cube):
    """Same-scale cubes meeting 2Q (always includes Q).

    Avoids materializing 2Q: a cube C meets 2Q iff some point of C is
    within diam(Q) of Q.  Candidates are pruned by center-to-center
    distance (quasi-triangle constant from the norm config), then by
    center-to-Q distance, and only undecided cubes are checked
    point-by-point."""
    margin = cube.diam
    quasi = tree.cfg.quasi_constant if tree.cfg is not None else 1.0
    lattice = tree.lattice
    same = tree.scales[cube.scale]
    centers = np.array([c.center for c in same])
    radii = np.array([c.radius for c in same])
    dz = dist_infty(
        lattice.algebra,
        lattice.points[centers],
        lattice.points[cube.center],
        tree.cfg,
    )
    feasible = dz - quasi * radii - quasi ** 2 * cube.radius <= quasi ** 2 * margin
    out = []
    for o in np.flatnonzero(feasible):
        other = same[int(o)]
        if other is cube:
            out.append(other)
            continue
        dzq = float(set_distance(tree, cube.points, targets=[other.center])[0])
        if dzq <= margin:
            out.append(other)
            continue
        if dzq / quasi - other.radius > margin:
            continue
        dmin = float(set_distance(tree, cube.points, targets=other.points).min())
        if dmin <= margin:
            out.append(other)
    return out


def hat_points(tree, cube):
    """Union of the point sets of the cubes in Q-hat."""
    parts = [c.points for c in hat_cube(tree, cube)]
    return np.unique(np.concatenate(parts))


def smallest_cube_2Q(tree, x, y):
    """Minimal-scale cube Q with x in Q and y in 2Q; falls back to the
    root when no smaller cube qualifies.  Returns (cube, ratio) with
    ratio = d(x, y) / diam(Q)."""
    if x == y:
        raise ValueError("need x != y")
    lattice = tree.lattice
    dxy = float(
        dist_infty(
            lattice.algebra,
            lattice.points[x],
            lattice.points[y],
            tree.cfg,
        )
    )
    for k in range(tree.k_min, tree.k_max + 1):
        cube = tree.cube_of(x, k)
        if tree.assign[k][y] == cube.ordinal:
            ratio = dxy / cube.diam if cube.diam > 0 else float("inf")
            return cube, ratio
        if cube.diam == 0.0:
            continue
        d = float(
            set_distance(tree, cube.points, targets=np.array([y])).min()
        )
        if d <= cube.diam:
            return cube, dxy / cube.diam
    cube = tree.root()
    ratio = dxy / cube.diam if cube.diam > 0 else float("inf")
    return cube, ratio


def estimate_b(tree, n_pairs, rng):
    """Largest b <= 1/10 with d(x,y) >= 10 b diam(Q) over sampled pairs,
    Q = smallest_cube_2Q(x, y)."""
    cap = 0.1
    if tree.cube_count() == 1:
        return cap
    M = tree.lattice.size
    best = float("inf")
    drawn = 0
    while drawn < n_pairs:
        xs = rng.integers(0, M, size=n_pairs)
        ys = rng.integers(0, M, size=n_pairs)
        for x, y in zip(xs, ys):
            if x == y:
                continue
            _, ratio = smallest_cube_2Q(tree, int(x), int(y))
            best = min(best, ratio)
            drawn += 1
            if drawn >= n_pairs:
                break
    return min(cap, best / 10.0)


def audit_cube_tree(tree, boundary_ts=(0.25, 0.125)):
    """Exhaustive partition/nesting/roundness audits plus the boundary
    statistic at middle scales.  Returns a JSON-ready report."""
    lattice = tree.lattice
    M = lattice.size
    report = {"partition": True, "nesting": True,
              "outer_ball": True, "inner_ball": True,
              "violations": [], "boundary": [], "scales": {}}

    for k in range(tree.k_min, tree.k_max + 1):
        seen = np.zeros(M, dtype=int)
        for cube in tree.scales[k]:
            seen[cube.points] += 1
        if not np.all(seen == 1):
            report["partition"] = False
            report["violations"].append({"kind": "partition", "scale": k})
        report["scales"][k] = {"cubes": len(tree.scales[k])}

    for cube in tree.all_cubes():
        if cube.parent is not None:
            pa = tree.assign[cube.parent.scale][cube.points]
            if not np.all(pa == cube.parent.ordinal):
                report["nesting"] = False
                report["violations"].append(
                    {"kind": "nesting", "cube": cube.cube_id}
                )

    for cube in tree.all_cubes():
        outer = tree.side(cube.scale + 1)
        inner = tree.side(cube.scale - 1)
        d = _dist_to_point(lattice, cube.center, np.arange(M), tree.cfg)
        members = np.zeros(M, dtype=bool)
        members[cube.points] = True
        if cube.radius > outer:
            report["outer_ball"] = False
            report["violations"].append(
                {"kind": "outer", "cube": cube.cube_id, "radius": cube.radius}
            )
        bad = np.flatnonzero((d < inner) & ~members)
        if len(bad):
            report["inner_ball"] = False
            report["violations"].append(
                {"kind": "inner", "cube": cube.cube_id, "count": int(len(bad))}
            )

    decreased = 0
    total = 0
    t_hi, t_lo = max(boundary_ts), min(boundary_ts)
    for k in range(tree.k_min + 1, tree.k_max):
        side = tree.side(k)
        for cube in tree.scales[k]:
            comp_near = _boundary_fractions(tree, cube, side, (t_hi, t_lo))
            if comp_near is None:
                continue
            f_hi, f_lo = comp_near
            total += 1
            if f_lo < f_hi:
                decreased += 1
            report["boundary"].append(
                {"cube": cube.cube_id, "t_hi": t_hi, "frac_hi": f_hi,
                 "t_lo": t_lo, "frac_lo": f_lo}
            )
    report["boundary_decrease_fraction"] = (
        decreased / total if total else None
    )
    report["ok"] = all(
        report[x] for x in ("partition", "nesting", "outer_ball", "inner_ball")
    )
    return report


def _boundary_fractions(tree, cube, side, ts):
    lattice = tree.lattice
    M = lattice.size
    if len(cube.points) == M or len(cube.points) == 0:
        return None
    members = np.zeros(M, dtype=bool)
    members[cube.points] = True
    pre = _dist_to_point(lattice, cube.center, np.arange(M), tree.cfg)
    reach = cube.radius + max(ts) * side
    comp = np.flatnonzero(~members & (pre <= reach))
    if len(comp) == 0:
        return tuple(0.0 for _ in ts)
    mind = np.full(len(cube.points), np.inf)
    for c in comp:
        d = _dist_to_point(lattice, int(c), cube.points, tree.cfg)
        np.minimum(mind, d, out=mind)
    n = len(cube.points)
    return tuple(float(np.count_nonzero(mind <= t * side)) / n for t in ts)


def tree_dump(tree):
    """JSON-ready cube listing."""
    out = []
    for cube in tree.all_cubes():
        out.append(
            {
                "id": cube.cube_id,
                "scale": cube.scale,
                "center": [float(v) for v in tree.lattice.points[cube.center]],
                "parent": cube.parent.cube_id if cube.parent else None,
                "count": int(len(cube.points)),
                "diam": cube.diam,
                "diam_exact": cube.diam_exact,
            }
        )
    return out
