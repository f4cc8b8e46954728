"""Map-adapted spanning trees, homotopy inverses, and collapsed forms.

Three upgrades for a validated presentation, each consumed by the
coupling stage:

* `build_end_invariant_tree` chooses a spanning tree of the level-one
  window that the map carries into itself as far as the data allows,
  recording the defects when it cannot.
* `homotopy_inverse` presents a homotopy inverse of the same infinite
  graph.  The repeating sides pin most of the inverse; the remaining
  window is inverted through a fold decomposition and certified by
  round-trip identities on a deep truncation.
* `boundary_collapse` re-presents the map so that every block component
  is a single vertex and no core vertex hangs on one edge.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import (BasepointMove, InvalidPresentation,
                     NotHomotopyEquivalence, Valence1Vertex)
from .folding import HOMEOMORPHISM, TYPE2, fold_decompose
from .graph import EdgePath, FiniteGraph, Step, inverse_path, reduce_path
from .maps import GraphMap, compose, subdivide_for
from .pi1 import (SpanningTree, Word, basis_index, induced_pi1_map,
                  invert_word, loop_to_word, pi1_basis, reduce_word,
                  substitute)
from .presentation import (ATTRACTING, REPELLING, BlockGraph, EndRecord,
                           EndPeriodicPresentation, ValidationReport)
from .unrolling import level_name, rebase_once, unroll


# ----- block forests -----

@dataclass(frozen=True)
class _Forest:
    """BFS tree of one block component, rooted at its least vertex."""
    root: str
    edges: tuple[str, ...]
    parent: dict[str, Step]


def _block_forests(block: BlockGraph) -> dict[str, _Forest]:
    """One forest per component, keyed by the component's leading end."""
    out: dict[str, _Forest] = {}
    for comp in block.components():
        root = comp.vertices[0]
        adj: dict[str, list[Step]] = {v: [] for v in comp.vertices}
        for eid in comp.edges:
            rec = block.edges[eid]
            if rec.is_joining:
                continue
            adj[rec.tail].append((eid, 1))
            adj[rec.head].append((eid, -1))
        for steps in adj.values():
            steps.sort(key=lambda s: (s[0], 0 if s[1] > 0 else 1))
        parent: dict[str, Step] = {}
        edges: list[str] = []
        seen = {root}
        queue = [root]
        while queue:
            v = queue.pop(0)
            for eid, sign in adj[v]:
                rec = block.edges[eid]
                w = rec.head if sign > 0 else rec.tail
                if w in seen:
                    continue
                seen.add(w)
                parent[w] = (eid, -sign)
                edges.append(eid)
                queue.append(w)
        out[comp.end] = _Forest(root, tuple(edges), parent)
    return out


def _forest_path_to_root(block: BlockGraph, forest: _Forest,
                         v: str) -> EdgePath:
    steps: list[Step] = []
    cur = v
    while cur != forest.root:
        s = forest.parent[cur]
        steps.append(s)
        rec = block.edges[s[0]]
        cur = rec.head if s[1] > 0 else rec.tail
    return tuple(steps)


def _forest_route(block: BlockGraph, forest: _Forest,
                  frm: str, to: str) -> EdgePath:
    """Path inside the forest from one component vertex to another."""
    up = _forest_path_to_root(block, forest, frm)
    down = inverse_path(_forest_path_to_root(block, forest, to))
    return reduce_path(up + down)


# ----- end-invariant trees -----

@dataclass(frozen=True)
class EndInvariantTree:
    """A spanning tree of the level-one window adapted to the map.

    `t0_edges` is the part inside the core, `forest_pos`/`forest_neg`
    are the per-component block forests, and `critical_pos` and
    `critical_neg` record the one joining edge kept per component.
    `lifts` assigns to each positive tree edge the signed edge mapping
    onto it in one step, where such an edge exists.  `shift_invariant`
    says whether the map carries the tree into itself: positive tree
    cells have lifts inside the tree and negative tree cells map into
    it.  `enlarged` marks that the presentation had to absorb one level
    into the core before an acceptable tree existed.
    """
    presentation: EndPeriodicPresentation
    enlarged: bool
    graph: FiniteGraph
    t0_edges: frozenset[str]
    forest_pos: dict[str, tuple[str, ...]]
    forest_neg: dict[str, tuple[str, ...]]
    critical_pos: dict[str, str]
    critical_neg: dict[str, str]
    lifts: dict[str, Step]
    tree_edges: frozenset[str]
    shift_invariant: bool


def _single_step_preimages(pres: EndPeriodicPresentation,
                           target: str) -> list[Step]:
    """Signed lower edges whose stored image is one step on target."""
    out = []
    for e in sorted(pres.edge_map):
        path = pres.edge_map[e]
        if len(path) == 1 and path[0][0] == target:
            out.append((e, path[0][1]))
    return out


def _admissible_joinings(pres: EndPeriodicPresentation,
                         f_pos: set[str], f_neg: set[str],
                         ) -> tuple[set[str], set[str]]:
    """Joining edges that can sit in a tree the map preserves.

    A positive joining needs a one-step preimage inside the tree, a
    negative one needs its image inside the tree.  The two conditions
    feed each other, so start from everything and prune to the largest
    stable pair of sets.
    """
    adm_pos = {rec.id for rec in pres.block_pos.joining_edges()}
    adm_neg = {rec.id for rec in pres.block_neg.joining_edges()}
    core_edges = set(pres.core.edges)
    changed = True
    while changed:
        changed = False
        for j in sorted(adm_pos):
            ok = any(e in core_edges or e in f_neg or e in adm_neg
                     for e, _ in _single_step_preimages(pres, j))
            if not ok:
                adm_pos.discard(j)
                changed = True
        for j in sorted(adm_neg):
            target = pres.edge_map[j][0][0]
            if not (target in core_edges or target in f_pos
                    or target in adm_pos):
                adm_neg.discard(j)
                changed = True
    return adm_pos, adm_neg


def _build_tree(pres: EndPeriodicPresentation, report: ValidationReport,
                pool: set[str], root: str,
                enlarged: bool) -> EndInvariantTree | None:
    """One tree-building pass; None when the lift pattern has a cycle."""
    core_edges = set(pres.core.edges)
    forests_pos = _block_forests(pres.block_pos)
    forests_neg = _block_forests(pres.block_neg)
    f_pos = {e for f in forests_pos.values() for e in f.edges}
    f_neg = {e for f in forests_neg.values() for e in f.edges}
    adm_pos, adm_neg = _admissible_joinings(pres, f_pos, f_neg)

    critical_pos: dict[str, str] = {}
    for comp in report.positive_components:
        good = [j for j in comp.joining if j in adm_pos]
        critical_pos[comp.end] = good[0] if good else comp.joining[0]
    critical_neg: dict[str, str] = {}
    for comp in report.negative_components:
        good = [j for j in comp.joining if j in adm_neg]
        critical_neg[comp.end] = good[0] if good else comp.joining[0]
    chosen_neg = set(critical_neg.values())
    chosen_pos = set(critical_pos.values())

    shift_invariant = True
    lifts: dict[str, Step] = {}
    for x in sorted(f_pos | chosen_pos):
        cands = _single_step_preimages(pres, x)
        if not cands:
            shift_invariant = False
            continue
        invariant = [s for s in cands
                     if s[0] in core_edges or s[0] in f_neg
                     or s[0] in chosen_neg]
        lifts[x] = invariant[0] if invariant else cands[0]
        if not invariant:
            shift_invariant = False
    for x in sorted(f_neg | chosen_neg):
        target = pres.edge_map[x][0][0]
        if not (target in core_edges or target in f_pos
                or target in chosen_pos):
            shift_invariant = False

    # the forced part of the tree inside the core: preimages of the
    # positive tree cells and images of the negative ones
    forced = {s[0] for s in lifts.values() if s[0] in core_edges}
    for x in sorted(f_neg | chosen_neg):
        target = pres.edge_map[x][0][0]
        if target in core_edges:
            forced.add(target)

    parent: dict[str, str] = {v: v for v in pres.core.vertices}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in sorted(forced):
        t, h = pres.core.edge_ends(e)
        rt, rh = find(t), find(h)
        if rt == rh:
            return None
        parent[rt] = rh

    members: dict[str, list[str]] = {}
    for v in pres.core.vertices:
        members.setdefault(find(v), []).append(v)
    t0 = set(forced)
    reached = set(members[find(root)])
    queue = sorted(reached)
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        for eid, sgn in pres.core.star(v):
            if eid not in pool or eid in t0:
                continue
            w = pres.core.step_ends((eid, sgn))[1]
            if w in reached:
                continue
            t0.add(eid)
            group = members[find(w)]
            reached.update(group)
            queue.extend(group)
    if len(reached) != len(pres.core.vertices):
        return None

    tree_edges = (frozenset(t0) | f_pos | f_neg | chosen_pos | chosen_neg)
    graph = pres.level_one_graph()
    spanning = SpanningTree(graph, root, allowed_edges=tree_edges)
    assert spanning.tree_edges == tree_edges, "tree assembly out of step"
    return EndInvariantTree(
        presentation=pres,
        enlarged=enlarged,
        graph=graph,
        t0_edges=frozenset(t0),
        forest_pos={end: f.edges for end, f in sorted(forests_pos.items())},
        forest_neg={end: f.edges for end, f in sorted(forests_neg.items())},
        critical_pos=critical_pos,
        critical_neg=critical_neg,
        lifts=lifts,
        tree_edges=tree_edges,
        shift_invariant=shift_invariant)


def build_end_invariant_tree(pres: EndPeriodicPresentation,
                             ) -> EndInvariantTree:
    """Spanning tree of the level-one window respected by the map.

    When the preimages of the chosen positive tree cells close a cycle
    in the core, one level is absorbed into the core first and the
    construction runs again on the enlarged presentation.
    """
    report = pres.validate()
    tree = _build_tree(pres, report, set(pres.core.edges),
                       pres.basepoint(), enlarged=False)
    if tree is not None:
        return tree
    bigger = rebase_once(pres)
    report = bigger.validate()
    tree = _build_tree(bigger, report, set(bigger.core.edges),
                       bigger.basepoint(), enlarged=True)
    if tree is None:
        raise InvalidPresentation(
            ["the lift pattern stays cyclic after absorbing a level;"
             " no end-invariant tree exists for this data"])
    return tree


# ----- homotopy inverses -----

@dataclass
class HomotopyInverseResult:
    """A presented homotopy inverse together with its certificates.

    `tau` holds, per leading end, the loop the inverse twists across
    that end's junction, written in the window basis of the inverse's
    side.  The three flags record checks that raise on failure, so a
    returned result always carries True in each.
    """
    presentation: EndPeriodicPresentation
    tau: dict[str, Word]
    basepoint: str
    basepoint_move: BasepointMove | None
    pi1_identity: bool
    shift_identity: bool
    composite_identity: bool


def _copy_block(block: BlockGraph) -> BlockGraph:
    out = BlockGraph()
    for v in block.vertices:
        out.add_vertex(v, block.vertex_ends[v])
    for rec in (block.edges[e] for e in block.edge_ids):
        out.add_edge(rec.id, rec.tail, rec.head, rec.end, rec.kind)
    return out


def _flip_ends(ends) -> list[EndRecord]:
    return [EndRecord(r.id,
                      ATTRACTING if r.sign == REPELLING else REPELLING,
                      r.period, r.orbit_leader)
            for r in ends]


def _one_to_one(m: GraphMap) -> bool:
    """Bijective on cells; meaningful only for combinatorial maps."""
    if (m.domain.num_vertices() != m.codomain.num_vertices()
            or m.domain.num_edges() != m.codomain.num_edges()):
        return False
    if len(set(m.vertex_images.values())) != m.domain.num_vertices():
        return False
    hit = {p[0][0] for p in m.edge_images.values() if len(p) == 1}
    return len(hit) == m.domain.num_edges()


def _window_namer(mirrored: bool):
    """Window cell names of the inverse, from (base, level) here."""
    if mirrored:
        return lambda base, lvl: level_name(base, -lvl)

    def name(base: str, lvl: int) -> str:
        if abs(lvl) <= 1:
            return level_name(base, lvl)
        if lvl >= 2:
            return level_name(level_name(base, 2), -(lvl - 1))
        return level_name(level_name(base, -2), -lvl - 1)
    return name


def _window_unnamer(mirrored: bool):
    """Window cell names here, from the inverse's (base, level)."""
    if mirrored:
        return lambda base, lvl: level_name(base, -lvl)

    def name(base: str, lvl: int) -> str:
        if lvl == 0:
            return base
        if lvl >= 1:
            return level_name(base[:-len("@-2")], -(lvl + 1))
        return level_name(base[:-len("@2")], -lvl + 1)
    return name


def _rename_steps(path: EdgePath, levels: dict[str, int],
                  namer) -> EdgePath:
    out = []
    for c, s in path:
        lvl = levels[c]
        base = c if lvl == 0 else c[:-len(f"@{lvl}")]
        out.append((namer(base, lvl), s))
    return tuple(out)


def _unfold(step) -> GraphMap:
    """Right inverse of one fold: re-route through the surviving edge."""
    q = step.quotient
    (e1, s1), (e2, s2) = step.pair
    before = q.domain
    h1 = before.step_ends((e1, s1))[1]
    h2 = before.step_ends((e2, s2))[1]
    detour: EdgePath = ((e1, -s1), (e2, s2))
    verts = {v: v for v in q.codomain.vertices}
    edges = {}
    for x in q.codomain.edges:
        t, h = before.edge_ends(x)
        pre = detour if t == h2 else ()
        post = inverse_path(detour) if h == h2 else ()
        edges[x] = pre + ((x, 1),) + post
    return GraphMap(q.codomain, before, verts, edges)


def _invert_folds(m: GraphMap, seq) -> GraphMap:
    """Run a fold sequence backwards into a homotopy inverse of m."""
    start, collapse = subdivide_for(m)
    assert start.domain == seq.start.domain, "subdivision out of step"
    term = seq.terminal
    inv_v = {img: v for v, img in term.vertex_images.items()}
    inv_e: dict[str, EdgePath] = {}
    for e, path in term.edge_images.items():
        (f, s), = path
        inv_e[f] = ((e, s),)
    out = GraphMap(term.codomain, term.domain, inv_v, inv_e)
    for step in reversed(seq.steps):
        out = compose(_unfold(step), out)
    return compose(collapse, out)


def _matching_conjugator(words: list[Word]) -> Word | None:
    """A word c with words[i] = c (i+1) c^-1 for all i, if one exists.

    The middle letter of the first non-identity entry fixes c up to a
    trailing power of that letter, so only finitely many candidates
    need the full check.
    """
    if all(w == (i + 1,) for i, w in enumerate(words)):
        return ()
    seed: Word | None = None
    letter = 0
    for i, w in enumerate(words):
        if w == (i + 1,):
            continue
        if len(w) % 2 == 0 or w[len(w) // 2] != i + 1:
            return None
        seed = w[:len(w) // 2]
        letter = i + 1
        break
    assert seed is not None
    bound = max(len(w) for w in words)
    candidates = [seed]
    for k in range(1, bound + 1):
        candidates.append(reduce_word(seed + (letter,) * k))
        candidates.append(reduce_word(seed + (-letter,) * k))
    for c in candidates:
        ci = invert_word(c)
        if all(reduce_word(ci + words[i] + c) == (i + 1,)
               for i in range(len(words))):
            return c
    return None


def _forced_images(reb: EndPeriodicPresentation,
                   report: ValidationReport,
                   ) -> tuple[dict[str, str], dict[str, Step]]:
    """Inverse images pinned by the repeating structure.

    Every cell of the deeper attracting block has a unique one-step
    preimage, the repelling side inverts its own shift, endpoints of
    pinned edges follow, and the juncture orbits march backwards along
    both kinds of chains.  Conflicting demands mean no inverse of this
    shape exists.
    """
    fv: dict[str, str] = {}
    fe: dict[str, Step] = {}

    def put_v(key: str, val: str) -> None:
        old = fv.get(key)
        if old is not None and old != val:
            raise InvalidPresentation(
                [f"inverse vertex assignment clash at {key!r}:"
                 f" {old!r} vs {val!r}"])
        fv[key] = val

    def put_e(key: str, val: Step) -> None:
        old = fe.get(key)
        if old is not None and old != val:
            raise InvalidPresentation(
                [f"inverse edge assignment clash at {key!r}:"
                 f" {old!r} vs {val!r}"])
        fe[key] = val

    for x in reb.block_pos.edge_ids:
        pre = _single_step_preimages(reb, x)
        if len(pre) != 1:
            raise InvalidPresentation(
                [f"attracting cell {x!r} has {len(pre)} one-step"
                 " preimages; the deeper level must have exactly one"])
        put_e(x, pre[0])
    for y in reb.block_pos.vertices:
        pre = sorted(v for v, img in reb.vertex_map.items() if img == y)
        if len(pre) != 1:
            raise InvalidPresentation(
                [f"attracting vertex {y!r} has {len(pre)} preimages"])
        put_v(y, pre[0])
    for x in reb.block_neg.edge_ids:
        (c, s), = reb.edge_map[x]
        put_e(c, (x, s))
    for v in reb.block_neg.vertices:
        put_v(reb.vertex_map[v], v)

    upper = reb.upper_graph()
    lower = reb.lower_graph()
    for x in sorted(fe):
        e, s = fe[x]
        ut, uh = upper.edge_ends(x)
        lt, lh = lower.edge_ends(e)
        put_v(ut, lt if s > 0 else lh)
        put_v(uh, lh if s > 0 else lt)

    for j in sorted(report.forward_chains):
        chain = report.forward_chains[j]
        for i in range(len(chain) - 2):
            put_v(chain[i + 1], chain[i])
    for j in sorted(report.backward_chains):
        chain = report.backward_chains[j]
        for i in range(len(chain) - 1):
            put_v(chain[i], chain[i + 1])
    return fv, fe


def _check_deep_shift(pres: EndPeriodicPresentation,
                      gpres: EndPeriodicPresentation,
                      namer, depth: int = 4) -> None:
    """The inverse must shift every repeating cell one level down."""
    gp = unroll(gpres, depth)
    for x in pres.block_pos.vertices:
        for n in range(2, depth + 1):
            img = gp.map.vertex_images[namer(x, n)]
            assert img == namer(x, n - 1), \
                f"deep cell {x}@{n} does not step down"
    for x in pres.block_pos.edge_ids:
        for n in range(2, depth + 1):
            path = gp.map.edge_images[namer(x, n)]
            assert path == ((namer(x, n - 1), 1),), \
                f"deep cell {x}@{n} does not step down"
    for x in pres.block_neg.vertices:
        for n in range(1, depth):
            img = gp.map.vertex_images[namer(x, -n)]
            assert img == namer(x, -(n + 1)), \
                f"deep cell {x}@{-n} does not step down"
    for x in pres.block_neg.edge_ids:
        for n in range(1, depth):
            path = gp.map.edge_images[namer(x, -n)]
            assert path == ((namer(x, -(n + 1)), 1),), \
                f"deep cell {x}@{-n} does not step down"


def _check_round_trips(pres: EndPeriodicPresentation,
                       gpres: EndPeriodicPresentation,
                       namer, unnamer, star: str) -> bool:
    """Both composites must act as inner automorphisms on deep loops."""
    t4 = unroll(pres, 4)
    t3 = unroll(pres, 3)
    gp4 = unroll(gpres, 4)
    tree = SpanningTree(t3.graph, star)
    basis = pi1_basis(t3.graph, tree)
    idx = basis_index(basis)
    got: list[Word] = []
    for _, loop in basis:
        mid = t4.map.evaluate_path(loop)
        mid = _rename_steps(mid, t4.cell_levels, namer)
        back = gp4.map.evaluate_path(mid)
        back = _rename_steps(back, gp4.cell_levels, unnamer)
        got.append(loop_to_word(tree, idx, back))
    if _matching_conjugator(got) is None:
        return False

    t5 = unroll(pres, 5)
    g3 = unroll(gpres, 3)
    tree2 = SpanningTree(g3.graph, star)
    basis2 = pi1_basis(g3.graph, tree2)
    idx2 = basis_index(basis2)
    got2: list[Word] = []
    for _, loop in basis2:
        mid = gp4.map.evaluate_path(loop)
        mid = _rename_steps(mid, gp4.cell_levels, unnamer)
        back = t5.map.evaluate_path(mid)
        back = _rename_steps(back, t5.cell_levels, namer)
        got2.append(loop_to_word(tree2, idx2, back))
    return _matching_conjugator(got2) is not None


def _mirror_inverse(pres: EndPeriodicPresentation) -> HomotopyInverseResult:
    """When the map is a graph isomorphism the inverse is literal."""
    vm = {img: v for v, img in pres.vertex_map.items()}
    em: dict[str, EdgePath] = {}
    for e, path in pres.edge_map.items():
        (f, s), = path
        em[f] = ((e, s),)
    gpres = EndPeriodicPresentation(
        pres.core.copy(), _copy_block(pres.block_neg),
        _copy_block(pres.block_pos), _flip_ends(pres.ends), vm, em,
        name=f"{pres.name}-inverse" if pres.name else "")
    gpres.validate()
    star = pres.basepoint()
    namer = _window_namer(mirrored=True)
    unnamer = _window_unnamer(mirrored=True)
    _check_deep_shift(pres, gpres, namer)
    assert _check_round_trips(pres, gpres, namer, unnamer, star), \
        "mirrored inverse failed its round trip"
    tau = {r.id: () for r in pres.ends if r.orbit_leader == r.id}
    return HomotopyInverseResult(gpres, tau, star, None, True, True, True)


def homotopy_inverse(pres: EndPeriodicPresentation) -> HomotopyInverseResult:
    """Present a homotopy inverse of an end-periodic homotopy equivalence.

    The input is absorbed one level into its core, so the inverse's
    window matches the original's level-one window.  On the repeating
    sides the inverse is the shift read backwards; the window in the
    middle is inverted by unwinding a fold decomposition and realizing
    the resulting loop map along a tree the map respects.  Raises
    NotHomotopyEquivalence when the folds certify an essential defect,
    Valence1Vertex when a hanging edge blocks the fold argument.
    """
    pres.validate()
    gm = pres.graph_map()
    if gm.is_combinatorial() and _one_to_one(gm):
        return _mirror_inverse(pres)

    depth = max(2, max((r.period for r in pres.ends), default=1) + 1)
    probe = unroll(pres, depth)
    for v in probe.graph.vertices:
        if abs(probe.cell_levels[v]) <= 1 and probe.graph.valence(v) == 1:
            raise Valence1Vertex(
                f"vertex {v!r} hangs on a single edge; fold inverses"
                " need valence at least two everywhere")

    reb = rebase_once(pres)
    report = reb.validate()
    fv, fe = _forced_images(reb, report)
    lower = reb.lower_graph()
    upper = reb.upper_graph()

    def inv_v(y: str) -> str:
        return fv.get(y, y)

    fixed = [v for v in pres.core.vertices
             if inv_v(reb.vertex_map[v]) == v]
    star = fixed[0] if fixed else pres.core.vertices[0]

    tree = _build_tree(reb, report, set(pres.core.edges), star,
                       enlarged=True)
    if tree is None or not tree.shift_invariant:
        raise InvalidPresentation(
            ["the absorbed window admits no tree the map preserves"])
    tl_set = (tree.t0_edges
              | {e for f in tree.forest_neg.values() for e in f}
              | set(tree.critical_neg.values()))
    tu_set = (tree.t0_edges
              | {e for f in tree.forest_pos.values() for e in f}
              | set(tree.critical_pos.values()))
    t_l = SpanningTree(lower, star, allowed_edges=tl_set)
    t_u = SpanningTree(upper, star, allowed_edges=tu_set)
    assert t_l.tree_edges == tl_set and t_u.tree_edges == tu_set

    window = reb.graph_map()
    seq = fold_decompose(window)
    for i, step in enumerate(seq.steps):
        if step.kind == TYPE2:
            raise NotHomotopyEquivalence(
                f"fold {i} identifies a pair of parallel edges;"
                " the map kills an essential loop")
    if seq.terminal_kind != HOMEOMORPHISM:
        raise NotHomotopyEquivalence(
            "the fold decomposition ends in a proper immersion,"
            " so the map is not onto up to homotopy")
    eta = _invert_folds(window, seq)

    basis_l = pi1_basis(lower, t_l)
    basis_u = pi1_basis(upper, t_u)
    idx_l = basis_index(basis_l)
    idx_u = basis_index(basis_u)
    fwd = induced_pi1_map(window, t_l, t_u)
    raw = induced_pi1_map(eta, t_u, t_l)
    diag = [reduce_word(substitute(raw, w)) for w in fwd]
    conj = _matching_conjugator(diag)
    if conj is None:
        raise NotHomotopyEquivalence(
            "the unwound folds do not invert the window on loops")
    inv_words = [reduce_word(invert_word(conj) + a + conj) for a in raw]
    ok_l = all(reduce_word(substitute(inv_words, w)) == (i + 1,)
               for i, w in enumerate(fwd))
    ok_u = all(reduce_word(substitute(fwd, a)) == (j + 1,)
               for j, a in enumerate(inv_words))
    if not (ok_l and ok_u):
        raise NotHomotopyEquivalence(
            "window loop maps are one-sided; no two-sided inverse")

    def access_word(v: str) -> Word:
        pushed = window.evaluate_path(t_l.tree_path(star, v))
        return loop_to_word(t_u, idx_u, pushed)

    kappa: dict[str, Word] = {}
    for v in lower.vertices:
        y = reb.vertex_map[v]
        if inv_v(y) != v:
            continue
        word = invert_word(reduce_word(substitute(inv_words,
                                                  access_word(v))))
        assert kappa.get(y, word) == word, "twist words disagree"
        kappa[y] = word

    loop_of = {n + 1: lp for n, (_, lp) in enumerate(basis_l)}

    def realized(word: Word) -> EdgePath:
        path: list[Step] = []
        for n in word:
            lp = loop_of[abs(n)]
            path.extend(lp if n > 0 else inverse_path(lp))
        return tuple(path)

    g_edge: dict[str, EdgePath] = {}
    for e in upper.edges:
        ut, uh = upper.edge_ends(e)
        lam: Word = (idx_u[e],) if e in idx_u else ()
        want = reduce_word(invert_word(kappa.get(ut, ()))
                           + substitute(inv_words, lam)
                           + kappa.get(uh, ()))
        if e in fe:
            le, ls = fe[e]
            have: Word = (idx_l[le] * ls,) if le in idx_l else ()
            if have != want:
                raise InvalidPresentation(
                    [f"pinned inverse image of {e!r} is off by a loop;"
                     " the window twist cannot be realized"])
            g_edge[e] = ((le, ls),)
            continue
        path = (t_l.tree_path(inv_v(ut), star)
                + realized(want)
                + t_l.tree_path(star, inv_v(uh)))
        g_edge[e] = reduce_path(path)

    tau: dict[str, Word] = {}
    for end_id in sorted(tree.critical_pos):
        j = tree.critical_pos[end_id]
        anchor = lower.step_ends(tree.lifts[j])[0]
        tau[end_id] = reduce_word(substitute(inv_words,
                                             access_word(anchor)))
    for end_id in sorted(tree.critical_neg):
        j = tree.critical_neg[end_id]
        anchor = lower.edge_ends(j)[0]
        tau[end_id] = reduce_word(substitute(inv_words,
                                             access_word(anchor)))

    gpres = EndPeriodicPresentation(
        reb.core.copy(), _copy_block(reb.block_neg),
        _copy_block(reb.block_pos), _flip_ends(reb.ends),
        {v: inv_v(v) for v in upper.vertices}, g_edge,
        name=f"{pres.name}-inverse" if pres.name else "")
    gpres.validate()

    move = None
    h_star = inv_v(reb.vertex_map[star])
    if h_star != star:
        move = BasepointMove(star, h_star, t_l.tree_path(star, h_star))

    namer = _window_namer(mirrored=False)
    unnamer = _window_unnamer(mirrored=False)
    _check_deep_shift(pres, gpres, namer)
    assert _check_round_trips(pres, gpres, namer, unnamer, star), \
        "inverse failed its round trip on the depth-3 window"
    return HomotopyInverseResult(gpres, tau, star, move, True, True, True)


# ----- boundary collapsing -----

@dataclass
class CollapsedRepresentative:
    """A re-presentation with one vertex per block component.

    `projection` returns the quotient of a depth-`depth` window of the
    source onto the same window of the collapsed presentation; forest
    edges and removed hanging edges project to empty paths.
    """
    presentation: EndPeriodicPresentation
    source: EndPeriodicPresentation
    enlarged: bool
    pos_roots: dict[str, str]
    neg_roots: dict[str, str]
    collapsed_pos: frozenset[str]
    collapsed_neg: frozenset[str]
    removed: tuple[tuple[str, str, str], ...]

    def projection(self, depth: int = 2) -> GraphMap:
        src = unroll(self.source, depth)
        dst = unroll(self.presentation, depth)
        retarget: dict[str, str] = {}
        dropped: set[str] = set()
        for v, e, w in self.removed:
            retarget[v] = w
            dropped.add(e)

        def settle(v: str) -> str:
            while v in retarget:
                v = retarget[v]
            return v

        pos_ends = self.source.block_pos.vertex_ends
        neg_ends = self.source.block_neg.vertex_ends
        vmap: dict[str, str] = {}
        emap: dict[str, EdgePath] = {}
        for c in src.graph.vertices:
            lvl = src.cell_levels[c]
            base = c if lvl == 0 else c[:-len(f"@{lvl}")]
            if lvl == 0:
                vmap[c] = settle(base)
            elif lvl >= 1:
                vmap[c] = level_name(
                    self.pos_roots.get(pos_ends[base], base), lvl)
            elif not self.enlarged:
                vmap[c] = c
            elif lvl == -1:
                vmap[c] = settle(self.neg_roots[neg_ends[base]])
            else:
                root = self.neg_roots[neg_ends[base]]
                vmap[c] = level_name(level_name(root, -2), lvl + 1)
        for c in src.graph.edges:
            lvl = src.cell_levels[c]
            base = c if lvl == 0 else c[:-len(f"@{lvl}")]
            if lvl == 0:
                emap[c] = () if base in dropped else ((base, 1),)
            elif lvl >= 1:
                emap[c] = (() if base in self.collapsed_pos
                           else ((c, 1),))
            elif not self.enlarged:
                emap[c] = ((c, 1),)
            elif lvl == -1:
                if base in self.collapsed_neg or base in dropped:
                    emap[c] = ()
                else:
                    emap[c] = ((base, 1),)
            else:
                if base in self.collapsed_neg:
                    emap[c] = ()
                else:
                    emap[c] = ((level_name(level_name(base, -2),
                                           lvl + 1), 1),)
        return GraphMap(src.graph, dst.graph, vmap, emap)


def _quotient_block(block: BlockGraph, forests: dict[str, _Forest],
                    collapsed: frozenset[str]) -> BlockGraph:
    proj = {v: forests[block.vertex_ends[v]].root for v in block.vertices}
    out = BlockGraph()
    for end in sorted(forests):
        root = forests[end].root
        out.add_vertex(root, block.vertex_ends[root])
    for rec in (block.edges[e] for e in block.edge_ids):
        if rec.id in collapsed:
            continue
        tail = rec.tail if rec.is_joining else proj[rec.tail]
        out.add_edge(rec.id, tail, proj[rec.head], rec.end, rec.kind)
    return out


def _mapped_route(pres: EndPeriodicPresentation, forest: _Forest,
                  frm: str, to: str) -> EdgePath:
    """Image of a forest path under the stored one-step block images."""
    out: list[Step] = []
    for f, s in _forest_route(pres.block_neg, forest, frm, to):
        (c, s0), = pres.edge_map[f]
        out.append((c, s0 * s))
    return tuple(out)


def _collapse_positive_only(work: EndPeriodicPresentation,
                            fpos: dict[str, _Forest],
                            f1: frozenset[str]) -> EndPeriodicPresentation:
    posv = {v: fpos[work.block_pos.vertex_ends[v]].root
            for v in work.block_pos.vertices}

    def pv(x: str) -> str:
        return posv.get(x, x)

    def pp(path: EdgePath) -> EdgePath:
        return tuple((e, s) for e, s in path if e not in f1)

    vm = {v: pv(img) for v, img in work.vertex_map.items()}
    em: dict[str, EdgePath] = {}
    for e, path in work.edge_map.items():
        out = pp(path)
        assert out or e not in work.block_neg.edges, \
            "a block image would collapse; enlargement was required"
        em[e] = out
    return EndPeriodicPresentation(
        work.core.copy(), _quotient_block(work.block_pos, fpos, f1),
        _copy_block(work.block_neg), list(work.ends), vm, em,
        name=work.name)


def _collapse_enlarging(work: EndPeriodicPresentation,
                        report: ValidationReport,
                        fpos: dict[str, _Forest],
                        fneg: dict[str, _Forest],
                        f1: frozenset[str],
                        fneg_set: frozenset[str],
                        ) -> EndPeriodicPresentation:
    """Absorb the collapsed repelling level into the core.

    The old repelling block, with its forests squashed, becomes new
    core; a fresh copy one level deeper repeats it.  The map on the new
    core routes through one branch vertex per component, chosen so the
    deeper joining tails still pull back along their chains.
    """
    posv = {v: fpos[work.block_pos.vertex_ends[v]].root
            for v in work.block_pos.vertices}
    negv = {v: fneg[work.block_neg.vertex_ends[v]].root
            for v in work.block_neg.vertices}

    def pv(x: str) -> str:
        return posv.get(x, x)

    def pp(path: EdgePath) -> EdgePath:
        return reduce_path(tuple((e, s) for e, s in path if e not in f1))

    core = work.core.copy()
    for end in sorted(fneg):
        core.add_vertex(fneg[end].root)
    for rec in (work.block_neg.edges[e] for e in work.block_neg.edge_ids):
        if rec.id in fneg_set:
            continue
        if rec.is_joining:
            core.add_edge(rec.id, rec.tail, negv[rec.head])
        else:
            core.add_edge(rec.id, negv[rec.tail], negv[rec.head])

    deeper = BlockGraph()
    for end in sorted(fneg):
        root = fneg[end].root
        deeper.add_vertex(level_name(root, -2),
                          work.block_neg.vertex_ends[root])
    for rec in (work.block_neg.edges[e] for e in work.block_neg.edge_ids):
        if rec.id in fneg_set:
            continue
        nid = level_name(rec.id, -2)
        if rec.is_joining:
            chain = report.backward_chains[rec.id]
            q = len(chain) - 1
            tail = chain[1] if q >= 2 else fneg[rec.end].root
            deeper.add_edge(nid, tail, level_name(negv[rec.head], -2),
                            rec.end, rec.kind)
        else:
            deeper.add_edge(nid, level_name(negv[rec.tail], -2),
                            level_name(negv[rec.head], -2),
                            rec.end, rec.kind)

    comps = {c.end: c for c in work.block_neg.components()}
    branch: dict[str, str] = {}
    for end in sorted(fneg):
        q = work.end(end).period
        if q == 1:
            branch[end] = fneg[end].root
            continue
        pulls = {report.backward_chains[j][q - 1]
                 for j in comps[end].joining}
        if len(pulls) > 1:
            raise InvalidPresentation(
                [f"joinings into {end!r} pull back to different"
                 f" vertices {sorted(pulls)}; the component cannot"
                 " collapse to one point"])
        target = pulls.pop()
        cands = sorted(v for v in comps[end].vertices
                       if work.vertex_map[v] == target)
        if not cands:
            raise InvalidPresentation(
                [f"no vertex of {end!r}'s component maps onto"
                 f" {target!r}; its chains cannot survive collapsing"])
        branch[end] = cands[0]

    vm = {v: pv(work.vertex_map[v]) for v in work.core.vertices}
    em: dict[str, EdgePath] = {}
    for e in work.core.edges:
        em[e] = pp(work.edge_map[e])
    for end in sorted(fneg):
        root = fneg[end].root
        base = branch[end]
        vm[root] = pv(work.vertex_map[base])
        for eid in comps[end].edges:
            if eid in fneg_set:
                continue
            rec = work.block_neg.edges[eid]
            if rec.is_joining:
                track = _mapped_route(work, fneg[end], rec.head, base)
                em[eid] = pp(work.edge_map[eid] + track)
            else:
                pre = _mapped_route(work, fneg[end], base, rec.tail)
                post = _mapped_route(work, fneg[end], rec.head, base)
                em[eid] = pp(pre + work.edge_map[eid] + post)
        vm[level_name(root, -2)] = root
    for eid in work.block_neg.edge_ids:
        if eid not in fneg_set:
            em[level_name(eid, -2)] = ((eid, 1),)

    return EndPeriodicPresentation(
        core, _quotient_block(work.block_pos, fpos, f1), deeper,
        list(work.ends), vm, em, name=work.name)


def _remove_hanging(pres: EndPeriodicPresentation,
                    ) -> tuple[EndPeriodicPresentation,
                               tuple[tuple[str, str, str], ...]]:
    """Strip valence-one core vertices until none are left.

    Valences are read off a window deep enough to see every joining
    copy whose tail is a core vertex, so they agree with the infinite
    graph.  Only a plain core edge can be stripped; a hanging block
    edge, or a core edge carrying a block image, has no finite fix.
    """
    removed: list[tuple[str, str, str]] = []
    while True:
        pres.validate()
        depth = max(2, max((r.period for r in pres.ends), default=1) + 1)
        t = unroll(pres, depth)
        for v in t.graph.vertices:
            if abs(t.cell_levels[v]) == 1 and t.graph.valence(v) == 1:
                raise InvalidPresentation(
                    [f"block vertex {v!r} hangs on a single edge;"
                     " the repeating side is degenerate"])
        hanging = sorted(v for v in pres.core.vertices
                         if t.graph.valence(v) == 1)
        if not hanging:
            return pres, tuple(removed)
        v = hanging[0]
        (eid, sgn), = t.graph.star(v)
        if not pres.core.has_edge(eid):
            raise InvalidPresentation(
                [f"vertex {v!r} hangs on the repeating edge {eid!r};"
                 " no finite re-presentation removes it"])
        blockers = [x for x in pres.block_neg.edge_ids
                    if pres.edge_map[x][0][0] == eid]
        if blockers:
            raise InvalidPresentation(
                [f"edge {eid!r} carries the block image of"
                 f" {blockers[0]!r}; removing it would empty that"
                 " image"])
        w = t.graph.step_ends((eid, sgn))[1]
        core = pres.core.subgraph(
            [u for u in pres.core.vertices if u != v],
            [e for e in pres.core.edges if e != eid])
        vm = {u: (w if img == v else img)
              for u, img in pres.vertex_map.items() if u != v}
        em = {e: tuple(st for st in path if st[0] != eid)
              for e, path in pres.edge_map.items() if e != eid}
        pres = EndPeriodicPresentation(
            core, _copy_block(pres.block_pos),
            _copy_block(pres.block_neg), list(pres.ends), vm, em,
            name=pres.name)
        removed.append((v, eid, w))


def boundary_collapse(pres: EndPeriodicPresentation,
                      ) -> CollapsedRepresentative:
    """Re-present the map with one vertex per block component.

    The block forests of an end-invariant tree are squashed.  When the
    repelling side changes, the squashed level is absorbed into the
    core and the next level repeats it; then hanging core vertices are
    stripped.  The result presents the same map up to homotopy, with
    the projection recoverable from the returned record.
    """
    tree = build_end_invariant_tree(pres)
    work = tree.presentation
    report = work.validate()
    fpos = _block_forests(work.block_pos)
    fneg = _block_forests(work.block_neg)
    f1 = frozenset(e for f in fpos.values() for e in f.edges)
    fneg_set = frozenset(e for f in fneg.values() for e in f.edges)
    need_enlarge = bool(fneg_set) or any(
        work.edge_map[x][0][0] in f1 for x in work.block_neg.edge_ids)

    if not f1 and not need_enlarge:
        cur = work
    elif not need_enlarge:
        cur = _collapse_positive_only(work, fpos, f1)
    else:
        cur = _collapse_enlarging(work, report, fpos, fneg, f1, fneg_set)
    cur.validate()
    final, removed = _remove_hanging(cur)

    for comp in final.block_pos.components():
        assert len(comp.vertices) == 1, "positive component not a point"
    for comp in final.block_neg.components():
        assert len(comp.vertices) == 1, "negative component not a point"
    return CollapsedRepresentative(
        presentation=final,
        source=work,
        enlarged=need_enlarge,
        pos_roots={end: f.root for end, f in sorted(fpos.items())},
        neg_roots={end: f.root for end, f in sorted(fneg.items())},
        collapsed_pos=f1,
        collapsed_neg=fneg_set,
        removed=removed)
