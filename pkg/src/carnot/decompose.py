"""Bad-cube classification, word coding, and certified pieces.

The pipeline classifies cubes with degenerate image content (B1) or
large coarse-differentiation coefficient (B2), removes the high-
multiplicity set R2, codes the remaining cubes with words driven by
B2 neighborhoods, keys pieces by the stabilized bottom-scale words,
and certifies every piece a posteriori against the requested
biLipschitz lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import homogeneous_dimension
from .coarse import alpha_all
from .content import content_upper, radius_grid_for
from .cubes import estimate_b, hat_points
from .norms import dist_infty


class AlphabetExhausted(RuntimeError):
    """No letter satisfies the word constraints; T was undercounted or
    the constraint is letter-independent (structural)."""


@dataclass
class BadFamilies:
    b1: list
    b2: list
    c1: float
    delta: float
    alpha_threshold: float
    content: dict = field(default_factory=dict)
    measure: dict = field(default_factory=dict)


@dataclass
class Coding:
    alphabet_size: int
    l: int
    l_effective: int
    words: dict                  # cube_id -> tuple of letters
    family: dict                 # cube_id -> list of cubes F(Q)
    T: int


@dataclass
class Decomposition:
    pieces: dict                 # word tuple -> sorted np.ndarray of rows
    z_rows: np.ndarray
    z_parts: dict                # {"r1": rows, "r2": rows, "unresolved": rows}
    coding: Coding
    families: BadFamilies
    mult: np.ndarray
    b: float
    report: dict
    certification: dict | None = None


def _cube_measure(tree, cube):
    return len(cube.points) * tree.lattice.cell_volume


def classify_bad_cubes(f, tree, S, delta, c1, alpha_threshold, alpha_cache):
    """B1 = cubes whose image content falls below c1 * delta * |Q|;
    B2 = cubes whose alpha meets the threshold.  Alphas must be
    precomputed (alpha cache)."""
    N = homogeneous_dimension(tree.lattice.algebra)
    h = float(tree.lattice.h)
    cubes = tree.descendants(S)
    fam = BadFamilies(
        b1=[], b2=[], c1=c1, delta=delta, alpha_threshold=alpha_threshold
    )
    for Q in cubes:
        entry = alpha_cache.get(Q.cube_id)
        if entry is None:
            raise ValueError(f"alpha cache missing cube {Q.cube_id}")
        grid = radius_grid_for(tree.side(Q.scale), h)
        est = content_upper(f.values[Q.points], N, grid, f.target.dist)
        measure = _cube_measure(tree, Q)
        fam.content[Q.cube_id] = est.upper
        fam.measure[Q.cube_id] = measure
        if est.upper < c1 * delta * measure:
            fam.b1.append(Q)
        if entry["alpha"] >= alpha_threshold:
            fam.b2.append(Q)
    return fam


def maximal_cubes(cubes):
    """Maximal elements under cube inclusion (no ancestor in the set)."""
    ids = {c.cube_id for c in cubes}
    out = []
    for c in cubes:
        anc = c.parent
        while anc is not None and anc.cube_id not in ids:
            anc = anc.parent
        if anc is None:
            out.append(c)
    return out


def compute_R2(tree, B2, L_mult, hat_cache=None):
    """Points covered by at least L_mult hats of B2 cubes, with the
    multiplicity function and the counting-measure bound."""
    if L_mult < 1:
        raise ValueError("L_mult must be >= 1")
    size = tree.lattice.size
    mult = np.zeros(size, dtype=int)
    sum_hats = 0
    for S in B2:
        hp = _hat_rows(tree, S, hat_cache)
        mult[hp] += 1
        sum_hats += len(hp)
    r2_rows = np.flatnonzero(mult >= L_mult)
    assert len(r2_rows) * L_mult <= sum_hats
    return {
        "rows": r2_rows,
        "mult": mult,
        "sum_hats": int(sum_hats),
        "chebyshev_bound": sum_hats / L_mult,
        "L_mult": L_mult,
    }


def _hat_rows(tree, cube, cache):
    if cache is not None and cube.cube_id in cache:
        return cache[cube.cube_id]
    hp = hat_points(tree, cube)
    if cache is not None:
        cache[cube.cube_id] = hp
    return hp


def choose_l(tree, b):
    """Minimal l >= 1 such that every realized scale pair (k, k+l) has
    max diam at k strictly below b times the min diam at k+l; one past
    the realized span when no realized offset satisfies it (vacuous)."""
    lo, hi = tree.k_min, tree.k_max
    dmax = {}
    dmin = {}
    for k in range(lo, hi + 1):
        ds = [c.diam for c in tree.cubes_at(k)]
        dmax[k] = max(ds)
        dmin[k] = min(ds)
    span = hi - lo
    for l in range(1, span + 1):
        if all(dmax[k] < b * dmin[k + l] for k in range(lo, hi - l + 1)):
            return l
    return span + 1


def effective_l(tree, B2, l):
    """Clip l to the largest offset at which the realized B2 family can
    generate letters: letters at scale k come from B2 cubes at scale
    k + l, so offsets beyond max scale(B2) - k_min leave the coding
    vacuous.  Floored at 1; returns l unchanged when it already fits."""
    top = max((S.scale for S in B2), default=tree.k_min + 1)
    cap = max(1, top - tree.k_min)
    return min(l, cap)


def neighbor_family(tree, B2, l_eff, hat_cache=None):
    """F(Q): same-scale cubes Q' != Q such that Q and Q' both lie inside
    the hat of a common B2 cube one offset up (scale(Q) + l_eff)."""
    F = {c.cube_id: [] for c in tree.all_cubes()}
    by_scale = {}
    for S in B2:
        by_scale.setdefault(S.scale, []).append(S)
    for k_hi, group in sorted(by_scale.items()):
        k = k_hi - l_eff
        if k < tree.k_min:
            continue
        members = tree.cubes_at(k)
        for S in group:
            hp = _hat_rows(tree, S, hat_cache)
            inside = [
                Q for Q in members
                if np.isin(Q.points, hp, assume_unique=True).all()
            ]
            for Q in inside:
                mine = F[Q.cube_id]
                seen = {c.cube_id for c in mine}
                for Qp in inside:
                    if Qp is not Q and Qp.cube_id not in seen:
                        mine.append(Qp)
    return F


def assign_words(tree, F, T):
    """Top-down word assignment over the alphabet {0..T}.

    Scan order is scale-major (coarse to fine), ordinal-minor.  A cube
    with empty F keeps its parent's word; otherwise it appends the
    smallest letter that, against every already-fixed partner word,
    avoids equal-word collisions and prefix relations in both
    directions.  Letter-independent conflicts and exhausted alphabets
    raise AlphabetExhausted."""
    words = {}
    for k in range(tree.k_max, tree.k_min - 1, -1):
        for Q in tree.cubes_at(k):
            base = () if Q.parent is None else words[Q.parent.cube_id]
            partners = F[Q.cube_id]
            if not partners:
                words[Q.cube_id] = base
                continue
            cand_len = len(base) + 1
            forbidden = set()
            for Qp in partners:
                w = words.get(Qp.cube_id)
                if w is None:
                    continue
                if len(w) >= cand_len:
                    if w[: len(base)] == base:
                        forbidden.add(w[len(base)])
                elif w == base[: len(w)]:
                    raise AlphabetExhausted(
                        f"word of {Qp.cube_id} is a prefix of the stem of "
                        f"{Q.cube_id}; no letter can fix it"
                    )
            letter = next(
                (a for a in range(T + 1) if a not in forbidden), None
            )
            if letter is None:
                raise AlphabetExhausted(
                    f"all {T + 1} letters conflict at {Q.cube_id}"
                )
            words[Q.cube_id] = base + (letter,)
    _audit_words(tree, F, words)
    return words


def _audit_words(tree, F, words):
    for Q in tree.all_cubes():
        w = words[Q.cube_id]
        for Qp in F[Q.cube_id]:
            wp = words[Qp.cube_id]
            if len(w) == len(wp) and w == wp:
                raise AssertionError(
                    f"equal words on partners {Q.cube_id}, {Qp.cube_id}"
                )
            shorter, longer = (w, wp) if len(w) <= len(wp) else (wp, w)
            if shorter == longer[: len(shorter)]:
                raise AssertionError(
                    f"prefix relation on partners {Q.cube_id}, {Qp.cube_id}"
                )


def extract_pieces(f, tree, coding, r1_rows, r2_info, B2, hat_cache=None):
    """Key the surviving points by their bottom-cube words.

    Z collects R1, R2, and the unresolved points: hats of B2 cubes
    whose letters would only appear below the realized bottom scale
    (scale < k_min + l_effective), where the code cannot have
    stabilized."""
    size = tree.lattice.size
    unresolved_mask = np.zeros(size, dtype=bool)
    for S in B2:
        if tree.k_min <= S.scale < tree.k_min + coding.l_effective:
            unresolved_mask[_hat_rows(tree, S, hat_cache)] = True
    z_mask = unresolved_mask.copy()
    z_mask[r1_rows] = True
    z_mask[r2_info["rows"]] = True
    pieces = {}
    for Q in tree.cubes_at(tree.k_min):
        rows = np.asarray(Q.points)
        keep = rows[~z_mask[rows]]
        if len(keep) == 0:
            continue
        word = coding.words[Q.cube_id]
        pieces.setdefault(word, []).append(keep)
    pieces = {w: np.sort(np.concatenate(parts)) for w, parts in pieces.items()}
    z_rows = np.flatnonzero(z_mask)
    covered = np.zeros(size, dtype=int)
    covered[z_rows] += 1
    for rows in pieces.values():
        covered[rows] += 1
    if not np.all(covered == 1):
        raise AssertionError("pieces and Z do not partition the sample set")
    mult = r2_info["mult"]
    for w, rows in pieces.items():
        if np.any(mult[rows] < len(w)):
            raise AssertionError(
                "word length exceeds the multiplicity of a surviving point"
            )
    report = {
        "piece_count": len(pieces),
        "piece_sizes": {".".join(map(str, w)) or "-": int(len(r)) for w, r in pieces.items()},
        "z_size": int(len(z_rows)),
        "r1_size": int(len(np.unique(r1_rows))) if len(r1_rows) else 0,
        "r2_size": int(len(r2_info["rows"])),
        "unresolved_size": int(unresolved_mask.sum()),
        "survivors": int(size - len(z_rows)),
    }
    return pieces, z_rows, {
        "r1": np.unique(np.asarray(r1_rows, dtype=int)),
        "r2": r2_info["rows"],
        "unresolved": np.flatnonzero(unresolved_mask),
    }, report


def _pair_ratios(alg, pts, vals, target_dist, ii, jj):
    d = dist_infty(alg, pts[ii], pts[jj], None)
    di = target_dist(vals[ii], vals[jj])
    good = d > 0
    return d[good], di[good], ii[good], jj[good]


def certify(f, tree, pieces, z_rows, delta, max_pairs=10_000_000,
            sample_pairs=100_000, seed=0, content_grid=None):
    """A-posteriori check that every piece satisfies the delta lower
    bound pairwise, plus the image-content estimate of the garbage set.

    Pieces with at most max_pairs pairs are checked exhaustively; larger
    pieces fall back to a seeded sample (reported).  The empirical
    garbage constant is content / (delta * R^N)."""
    lattice = tree.lattice
    alg = lattice.algebra
    N = homogeneous_dimension(alg)
    per_piece = {}
    overall = True
    for word, rows in sorted(pieces.items()):
        n = len(rows)
        total = n * (n - 1) // 2
        mode = "exhaustive" if total <= max_pairs else "sampled"
        pts = lattice.points[rows]
        vals = f.values[rows]
        min_ratio = np.inf
        worst = None
        checked = 0
        if n >= 2 and mode == "exhaustive":
            for i in range(n - 1):
                ii = np.full(n - 1 - i, i)
                jj = np.arange(i + 1, n)
                d, di, ii, jj = _pair_ratios(alg, pts, vals, f.target.dist, ii, jj)
                checked += len(d)
                if len(d) == 0:
                    continue
                r = di / d
                k = int(np.argmin(r))
                if r[k] < min_ratio:
                    min_ratio = float(r[k])
                    worst = (int(rows[ii[k]]), int(rows[jj[k]]))
        elif n >= 2:
            rng = np.random.default_rng(seed)
            want = min(sample_pairs, total)
            while checked < want:
                m = min(want - checked, 50_000) * 2
                ii = rng.integers(0, n, size=m)
                jj = rng.integers(0, n, size=m)
                keep = ii < jj
                ii, jj = ii[keep], jj[keep]
                if len(ii) == 0:
                    continue
                d, di, ii, jj = _pair_ratios(alg, pts, vals, f.target.dist, ii, jj)
                checked += len(d)
                if len(d) == 0:
                    continue
                r = di / d
                k = int(np.argmin(r))
                if r[k] < min_ratio:
                    min_ratio = float(r[k])
                    worst = (int(rows[ii[k]]), int(rows[jj[k]]))
        passed = bool(n < 2 or min_ratio >= delta)
        overall = overall and passed
        per_piece[".".join(map(str, word)) or "-"] = {
            "size": int(n),
            "mode": mode,
            "pairs_checked": int(checked),
            "min_ratio": None if min_ratio is np.inf else float(min_ratio),
            "passed": passed,
            "witness": worst if not passed else None,
        }
    if len(z_rows):
        grid = content_grid or radius_grid_for(float(lattice.R), float(lattice.h))
        est = content_upper(f.values[z_rows], N, grid, f.target.dist)
        z_content = est.upper
    else:
        z_content = 0.0
    c_emp = z_content / (delta * float(lattice.R) ** N)
    return {
        "delta": delta,
        "passed": bool(overall),
        "pieces": per_piece,
        "z_content_upper": float(z_content),
        "c_empirical": float(c_emp),
        "dimension": N,
    }


def decompose(f, tree, *, delta, c1=1.0, alpha_threshold=0.03, L_mult=12,
              alpha_params=None, b_pairs=10_000, seed=0, alpha_cache=None,
              max_pairs=10_000_000, sample_pairs=100_000,
              max_word_retries=8, certify_seed=None, mode="single"):
    """End-to-end pipeline over the working cubes of the tree.

    Orchestrates: alpha computation, bad-family classification, the
    multiplicity set, the scale offset, neighbor families, word
    assignment (with alphabet retries), piece extraction, and
    certification.  Deterministic given the seeds.  Mode "single"
    requires a unique root; "union" classifies every top-scale cube."""
    from .coarse import AlphaParams

    working = tree.cubes_at(tree.k_max) if mode == "union" else [tree.root()]
    params = alpha_params if alpha_params is not None else AlphaParams(L=1.0)
    cache = alpha_cache if alpha_cache is not None else alpha_all(f, tree, params)
    families = None
    for S in working:
        part = classify_bad_cubes(
            f, tree, S, delta, c1, alpha_threshold, cache
        )
        if families is None:
            families = part
        else:
            families.b1.extend(part.b1)
            families.b2.extend(part.b2)
            families.content.update(part.content)
            families.measure.update(part.measure)
    hat_cache = {}
    r2_info = compute_R2(tree, families.b2, L_mult, hat_cache)
    rng = np.random.default_rng(seed)
    b = estimate_b(tree, b_pairs, rng)
    l = choose_l(tree, b)
    l_eff = effective_l(tree, families.b2, l)
    F = neighbor_family(tree, families.b2, l_eff, hat_cache)
    T = max((len(v) for v in F.values()), default=0)
    T_use = T
    words = None
    for _ in range(max_word_retries):
        try:
            words = assign_words(tree, F, T_use)
            break
        except AlphabetExhausted:
            T_use += 1
    if words is None:
        words = assign_words(tree, F, T_use)  # propagate the error
    coding = Coding(
        alphabet_size=T_use + 1, l=l, l_effective=l_eff, words=words,
        family=F, T=T,
    )
    r1_cubes = maximal_cubes(families.b1)
    r1_rows = (
        np.unique(np.concatenate([np.asarray(c.points) for c in r1_cubes]))
        if r1_cubes else np.array([], dtype=int)
    )
    pieces, z_rows, z_parts, report = extract_pieces(
        f, tree, coding, r1_rows, r2_info, families.b2, hat_cache
    )
    margin = 3.0 * params.L * tree.side(tree.k_min)
    norms = dist_infty(
        tree.lattice.algebra,
        tree.lattice.points[[c.center for c in tree.cubes_at(tree.k_min)]],
        np.zeros(tree.lattice.algebra.dim),
        None,
    )
    core = int(np.sum(norms + margin <= float(tree.lattice.R)))
    report.update({
        "T": T,
        "alphabet_size": T_use + 1,
        "l": l,
        "l_effective": l_eff,
        "b": b,
        "core_cubes": core,
        "core_fraction": core / max(1, len(tree.cubes_at(tree.k_min))),
        "b1_count": len(families.b1),
        "b2_count": len(families.b2),
        "piece_bound": float((T_use + 1) ** (L_mult + 1)),
        "alpha": {cid: cache[cid]["alpha"] for cid in cache},
    })
    cert = certify(
        f, tree, pieces, z_rows, delta,
        max_pairs=max_pairs, sample_pairs=sample_pairs,
        seed=seed if certify_seed is None else certify_seed,
    )
    return Decomposition(
        pieces=pieces,
        z_rows=z_rows,
        z_parts=z_parts,
        coding=coding,
        families=families,
        mult=r2_info["mult"],
        b=b,
        report=report,
        certification=cert,
    )
