"""Instance generators from hardness reductions, each paired with an
independent ground-truth checker (truth tables, board search, game search,
canonical databases), so engine verdicts can be validated end to end.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .dtd import Dtd, parse_dtd
from .engines.base import CONTAINED, NOT_CONTAINED, Instance
from .syntax import (
    Axis, FOr, LPath, Path, Seq, Step, Union, VarEq, VarNeq, seq, union,
)
from .trees import XmlTree


@dataclass
class GeneratedInstance:
    instance: Instance
    expected: str  # Contained / NotContained
    note: str = ""


def _child(label: str, filters=()) -> Step:
    return Step(Axis.CHILD, label, tuple(filters))


def _desc(label: str, filters=()) -> Step:
    return Step(Axis.DESCENDANT, label, tuple(filters))


def _any_of(labels, axis=Axis.CHILD) -> Path:
    return union([Step(axis, l) for l in labels])


# ---------------------------------------------------------------------------
# Propositional DNF validity


def gen_dnf_validity(disjuncts: list[dict[int, bool]], n_vars: int,
                     variant: str = "child", cap: int = 4) -> GeneratedInstance:
    """Containment instance that holds iff the DNF formula is valid.

    Each disjunct maps variable indices (1-based) to their required truth
    value; an unconstrained variable is free.  Branch labels 0/1 encode the
    assignment along a path of n_vars steps.
    """
    if not disjuncts:
        raise ValueError("a DNF formula needs at least one disjunct")
    if n_vars < 1 or n_vars > cap:
        raise ValueError(f"n_vars must be in 1..{cap}")
    if any(v < 1 or v > n_vars for d in disjuncts for v in d):
        raise ValueError("disjunct mentions an out-of-range variable")

    axis_of = {"child": Axis.CHILD, "descendant": Axis.DESCENDANT}[variant]

    def position_axis(i: int) -> Axis:
        return Axis.CHILD if i == 0 else axis_of

    p = seq([_any_of("01", position_axis(i)) for i in range(n_vars)])

    def encode(disjunct: dict[int, bool]) -> Path:
        items = []
        for i in range(1, n_vars + 1):
            ax = position_axis(i - 1)
            if i in disjunct:
                items.append(Step(ax, "1" if disjunct[i] else "0"))
            else:
                items.append(_any_of("01", ax))
        return seq(items)

    q = union([encode(d) for d in disjuncts])

    valid = all(
        any(all(assignment[v - 1] == val for v, val in d.items())
            for d in disjuncts)
        for assignment in itertools.product([False, True], repeat=n_vars))
    return GeneratedInstance(
        Instance(p, q), CONTAINED if valid else NOT_CONTAINED,
        note="valid" if valid else "falsifiable")


# ---------------------------------------------------------------------------
# Corridor tiling


@dataclass(frozen=True)
class TilingSystem:
    tiles: tuple[str, ...]
    horizontal: frozenset[tuple[str, str]]
    vertical: frozenset[tuple[str, str]]
    bottom: tuple[str, ...]
    top: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.bottom)

    def __post_init__(self):
        if len(self.bottom) != len(self.top):
            raise ValueError("bottom and top rows must have equal width")
        named = set(self.tiles)
        used = set(self.bottom) | set(self.top) \
            | {t for pair in self.horizontal | self.vertical for t in pair}
        if not used <= named:
            raise ValueError(f"unknown tiles {sorted(used - named)}")


def tiling_system(tiles, horizontal, vertical, bottom, top) -> TilingSystem:
    return TilingSystem(tuple(tiles), frozenset(horizontal),
                        frozenset(vertical), tuple(bottom), tuple(top))


def corridor_solvable(ts: TilingSystem) -> bool:
    """Breadth-first search over complete rows: is there a valid tiling of
    some n x m board with the given bottom and top rows?"""
    n = ts.width

    def h_ok(row) -> bool:
        return all((row[i], row[i + 1]) in ts.horizontal for i in range(n - 1))

    def v_ok(lo, hi) -> bool:
        return all((lo[i], hi[i]) in ts.vertical for i in range(n))

    if not (h_ok(ts.bottom) and h_ok(ts.top)):
        return False
    # Boards have at least two rows: the bottom row plus rows stacked on it.
    rows = [r for r in itertools.product(ts.tiles, repeat=n) if h_ok(r)]
    seen: set = set()
    frontier = [ts.bottom]
    while frontier:
        nxt = []
        for row in frontier:
            for row2 in rows:
                if v_ok(row, row2):
                    if row2 == ts.top:
                        return True
                    if row2 not in seen:
                        seen.add(row2)
                        nxt.append(row2)
        frontier = nxt
    return False


def gen_corridor_tiling(ts: TilingSystem, cap: int = 4) -> GeneratedInstance:
    """Finite-alphabet instance that is NotContained iff the corridor can be
    tiled; witnesses decode to row-by-row board strings.

    q is the union of all string-format and constraint errors; a tree
    avoiding every error along some $-terminated branch encodes a tiling.
    """
    if len(ts.tiles) > cap or ts.width > cap:
        raise ValueError("tiling system exceeds the configured cap")
    n = ts.width
    tiles = list(ts.tiles)
    sigma = tiles + ["#", "$"]
    if "#" in ts.tiles or "$" in ts.tiles:
        raise ValueError("tile names '#' and '$' are reserved")

    p = _desc("$")
    disjuncts: list[Path] = []
    # some inner row has too few tiles
    for i in range(n):
        disjuncts.append(seq([_desc("#")] + [_any_of(tiles)] * i + [_child("#")]))
    # the first row has too few tiles
    for i in range(n):
        disjuncts.append(seq([_any_of(tiles)] * i + [_child("#")]))
    # the last row has too few tiles
    for i in range(n):
        disjuncts.append(seq([_desc("#")] + [_any_of(tiles)] * i + [_child("$")]))
    # some row has too many tiles
    disjuncts.append(seq([_any_of(tiles, Axis.DESCENDANT)]
                         + [_any_of(tiles)] * n))
    # the board has a single row (boards need at least two)
    disjuncts.append(seq([_any_of(tiles)] * n + [_child("$")]))
    # '$' occurs inside the string
    disjuncts.append(seq([_desc("$"), _any_of(sigma)]))
    # the string does not begin with the bottom row (any other symbol,
    # including '#' and '$', counts as a mismatch)
    for i in range(1, n + 1):
        prefix = [_child(ts.bottom[j]) for j in range(i - 1)]
        others = [s for s in sigma if s != ts.bottom[i - 1]]
        disjuncts.append(seq(prefix + [_any_of(others)]))
    # the string does not end with the top row
    for i in range(1, n + 1):
        others = [t for t in tiles if t != ts.top[i - 1]]
        if not others:
            continue
        tail = [_child(ts.top[j]) for j in range(i, n)] + [_child("$")]
        disjuncts.append(seq([_any_of(others, Axis.DESCENDANT)] + tail))
    # vertical constraint violations (stride width+1 through the delimiter)
    for d1 in tiles:
        for d2 in tiles:
            if (d1, d2) not in ts.vertical:
                disjuncts.append(seq([_desc(d1)] + [_any_of(tiles + ["#"])] * n
                                     + [_child(d2)]))
    # horizontal constraint violations
    for d1 in tiles:
        for d2 in tiles:
            if (d1, d2) not in ts.horizontal:
                disjuncts.append(seq([_desc(d1), _child(d2)]))

    q = union(disjuncts)
    solvable = corridor_solvable(ts)
    return GeneratedInstance(
        Instance(p, q, alphabet=frozenset(sigma)),
        NOT_CONTAINED if solvable else CONTAINED,
        note="solvable" if solvable else "unsolvable")


def decode_corridor_witness(t: XmlTree) -> list[tuple[str, ...]]:
    """Rows of the board encoded on the witness branch ending in '$'."""
    labels: list[str] = []
    node = t
    while node.children:
        node = node.children[0]
        labels.append(node.label)
    if not labels or labels[-1] != "$":
        raise ValueError("witness branch does not end in '$'")
    rows, row = [], []
    for sym in labels[:-1]:
        if sym == "#":
            rows.append(tuple(row))
            row = []
        else:
            row.append(sym)
    rows.append(tuple(row))
    return rows


# ---------------------------------------------------------------------------
# Two-player corridor tiling


def _cell(tile: str, player: int) -> str:
    return f"{tile}_{player}"


def gen_two_player_tiling(ts: TilingSystem, cap: int = 3) -> GeneratedInstance:
    """DTD instance that is NotContained iff the first player can force a
    tiling; trees are strategy trees with all opponent replies as siblings.

    The width must be even so that the starting player always plays the odd
    columns.  Wrong-length rows, constraint violations at the first
    player's cells, and unjustified protest moves are the q-errors.
    """
    n = ts.width
    if n % 2 != 0:
        raise ValueError("the board width must be even")
    if len(ts.tiles) > cap or n > cap + 1:
        raise ValueError("tiling system exceeds the configured cap")
    tiles = list(ts.tiles)
    for t in tiles:
        if any(c in t for c in "#$!_"):
            raise ValueError(f"tile name {t!r} uses a reserved character")

    ones = [_cell(d, 1) for d in tiles]
    twos = [_cell(d, 2) for d in tiles]
    pairs = ones + twos
    pairs_dollar = pairs + ["$"]

    lines = [f"S -> {' | '.join(ones)}", f"$ -> {' | '.join(ones)}"]
    for d in tiles:
        lines.append(f"{_cell(d, 1)} -> {' '.join(twos)}")
    for d in tiles:
        lines.append(f"{_cell(d, 2)} -> {' | '.join(ones + ['#', '$', '!'])}")
    lines.append("! -> eps")
    lines.append("# -> eps")
    dtd = parse_dtd("\n".join(lines))

    p = Step(Axis.SELF, "S")
    disjuncts: list[Path] = []
    # a row does not contain exactly n cells
    disjuncts.append(seq([_any_of(pairs, Axis.DESCENDANT)]
                         + [_any_of(pairs)] * n))
    for i in range(n):
        end = [union([_child("$"), _child("#")])]
        disjuncts.append(seq([_any_of(pairs)] * i + end))               # first row
        disjuncts.append(seq([_desc("$")] + [_any_of(pairs)] * i + end))
    # vertical constraints against the fixed bottom row (player-one cells)
    for i in range(1, n + 1):
        for d in tiles:
            if (ts.bottom[i - 1], d) not in ts.vertical:
                disjuncts.append(seq([_any_of(pairs)] * (i - 1)
                                     + [_child(_cell(d, 1))]))
    # vertical constraints against the fixed top row
    for i in range(1, n + 1):
        for d in tiles:
            if (d, ts.top[i - 1]) not in ts.vertical:
                disjuncts.append(seq([_desc(_cell(d, 1))]
                                     + [_any_of(pairs)] * (n - i)
                                     + [_child("#")]))
    # vertical constraints between played rows (player-one cells)
    for d1 in tiles:
        for d2 in tiles:
            if (d1, d2) not in ts.vertical:
                disjuncts.append(seq([_desc(_cell(d1, 1))]
                                     + [_any_of(pairs_dollar)] * n
                                     + [_child(_cell(d2, 1))]))
    # horizontal constraints at player-one cells
    for d1 in tiles:
        for d2 in tiles:
            if (d1, d2) not in ts.horizontal:
                disjuncts.append(seq([_desc(_cell(d1, 2)),
                                      _child(_cell(d2, 1))]))
    # protest although the opponent's tile was consistent
    for d in tiles:
        for d1 in tiles:
            if (d1, d) not in ts.vertical:
                continue
            for d2 in tiles:
                if (d2, d) not in ts.horizontal:
                    continue
                disjuncts.append(seq(
                    [_desc(_cell(d1, 2))] + [_any_of(pairs_dollar)] * (n - 1)
                    + [_child(_cell(d2, 1)), _child(_cell(d, 2)),
                       _child("!")]))
    for i in range(2, n + 1):
        for d in tiles:
            if (ts.bottom[i - 1], d) not in ts.vertical:
                continue
            for d2 in tiles:
                if (d2, d) not in ts.horizontal:
                    continue
                disjuncts.append(seq(
                    [_any_of(pairs)] * (i - 2)
                    + [_child(_cell(d2, 1)), _child(_cell(d, 2)),
                       _child("!")]))

    q = union(disjuncts)
    wins = player_one_wins(ts)
    return GeneratedInstance(
        Instance(p, q, dtd=dtd),
        NOT_CONTAINED if wins else CONTAINED,
        note="player one wins" if wins else "player one cannot win")


def player_one_wins(ts: TilingSystem) -> bool:
    """Attractor computation for the encoded game.

    Player one fills odd columns, the opponent even ones; rows stack above
    the fixed bottom row.  Player one wins a play by completing a row that
    is compatible with the fixed top row at her cells and ending the play,
    or by correctly protesting an inconsistent opponent move.  Her own
    moves must respect the horizontal/vertical constraints at her cells;
    infinite play is a loss for her.
    """
    n = ts.width
    tiles = ts.tiles

    states = []
    for below in itertools.product(tiles, repeat=n):
        for cur_len in range(n + 1):
            for cur in itertools.product(tiles, repeat=cur_len):
                states.append((below, cur))
    states = [s for s in states]

    def one_moves(below, cur):
        """(kind, payload) options for player one; kind in tile/new_row."""
        c = len(cur) + 1
        out = []
        if len(cur) < n:
            for d in tiles:
                if (below[c - 1], d) not in ts.vertical:
                    continue
                if len(cur) >= 1 and (cur[-1], d) not in ts.horizontal:
                    continue
                out.append(("tile", d))
        else:
            for d in tiles:
                if (cur[0], d) in ts.vertical:
                    out.append(("new_row", d))
        return out

    def one_immediate_win(below, cur) -> bool:
        if len(cur) >= 2 and len(cur) % 2 == 0:
            d = cur[-1]
            bad_v = (below[len(cur) - 1], d) not in ts.vertical
            bad_h = (cur[-2], d) not in ts.horizontal
            if bad_v or bad_h:
                return True  # justified protest
        if len(cur) == n:
            if all((cur[i], ts.top[i]) in ts.vertical
                   for i in range(0, n, 2)):
                return True  # end the play under the top row
        return False

    win: set = set()
    changed = True
    while changed:
        changed = False
        for below, cur in states:
            if (below, cur) in win:
                continue
            to_move_one = len(cur) % 2 == 0
            if to_move_one:
                if one_immediate_win(below, cur):
                    win.add((below, cur))
                    changed = True
                    continue
                ok = False
                for kind, d in one_moves(below, cur):
                    succ = (below, cur + (d,)) if kind == "tile" \
                        else (cur, (d,))
                    if succ in win:
                        ok = True
                        break
                if ok:
                    win.add((below, cur))
                    changed = True
            else:
                if all((below, cur + (d,)) in win for d in tiles):
                    win.add((below, cur))
                    changed = True
    return (ts.bottom, ()) in win


# ---------------------------------------------------------------------------
# 3SAT via variables with XPath semantics


Literal = tuple[int, bool]  # (variable index, positive)


def _check_cnf(clauses: list[tuple[Literal, Literal, Literal]], m: int,
               cap: int) -> None:
    if m < 1 or m > cap or len(clauses) > cap:
        raise ValueError("formula exceeds the configured cap")
    for clause in clauses:
        if len(clause) != 3:
            raise ValueError("clauses must have exactly three literals")
        for var, _ in clause:
            if var < 1 or var > m:
                raise ValueError("literal mentions an out-of-range variable")


def cnf_satisfiable(clauses, m: int) -> bool:
    for assignment in itertools.product([False, True], repeat=m):
        if all(any(assignment[v - 1] == pos for v, pos in clause)
               for clause in clauses):
            return True
    return False


def gen_sat_xvars(clauses: list[tuple[Literal, Literal, Literal]], m: int,
                  variant: str = "childFilter", cap: int = 3) -> GeneratedInstance:
    """Instance under XPath variable semantics, Contained iff the 3CNF
    formula is unsatisfiable.

    The shared variable y carries "true"; y_i = y encodes x_i true.  q
    finds a clause path whose three literal cells all evaluate false.
    """
    _check_cnf(clauses, m, cap)

    def lit_filter(lit: Literal):
        var, pos = lit
        cls = VarEq if pos else VarNeq
        return cls(f"y{var}", "a")

    if variant == "childFilter":
        clause_paths = [
            seq([Step(Axis.CHILD, "b", (lit_filter(l),)) for l in clause])
            for clause in clauses]
        p = Step(Axis.CHILD, "b",
                 (VarEq("y", "a"),) + tuple(LPath(cp) for cp in clause_paths))
        q = seq([Step(Axis.CHILD, "b", (VarEq("y", "a"),))]
                + [Step(Axis.CHILD, "b", (VarNeq("y", "a"),))] * 3)
    elif variant == "childDescendant":
        blocks = []
        for clause in clauses:
            blocks.append(Step(Axis.CHILD, "c"))
            blocks.extend(Step(Axis.CHILD, "b", (lit_filter(l),))
                          for l in clause)
        p = seq([Step(Axis.CHILD, "b", (VarEq("y", "a"),))] + blocks)
        q = seq([Step(Axis.CHILD, "b", (VarEq("y", "a"),)),
                 Step(Axis.DESCENDANT, "c")]
                + [Step(Axis.CHILD, "b", (VarNeq("y", "a"),))] * 3)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    sat = cnf_satisfiable(clauses, m)
    return GeneratedInstance(
        Instance(p, q, semantics="xvars"),
        NOT_CONTAINED if sat else CONTAINED,
        note="satisfiable" if sat else "unsatisfiable")


# ---------------------------------------------------------------------------
# Boolean conjunctive query containment via existential variables


@dataclass(frozen=True)
class Bcq:
    atoms: tuple[tuple[str, tuple[str, ...]], ...]
    inequalities: tuple[tuple[str, str], ...] = ()

    def variables(self) -> list[str]:
        out = {v for _, vs in self.atoms for v in vs}
        return sorted(out)

    def __post_init__(self):
        atom_vars = {v for _, vs in self.atoms for v in vs}
        for x, y in self.inequalities:
            if x not in atom_vars or y not in atom_vars:
                raise ValueError(
                    f"inequality {x!r} != {y!r} uses a variable that occurs "
                    "in no relational atom")


def bcq_encode(q: Bcq) -> Path:
    """Tree encoding: one child per atom under an S root, with positional
    attributes @1..@arity; an inequality x != y hangs off an occurrence of
    x as [y != @position]."""
    filters = []
    ineq_slots: dict[int, list] = {}
    for x, y in q.inequalities:
        for i, (_, vs) in enumerate(q.atoms):
            if x in vs:
                ineq_slots.setdefault(i, []).append(
                    VarNeq(y, str(vs.index(x) + 1)))
                break
    for i, (rel, vs) in enumerate(q.atoms):
        constraints = [VarEq(v, str(j + 1)) for j, v in enumerate(vs)]
        constraints.extend(ineq_slots.get(i, []))
        filters.append(LPath(Step(Axis.CHILD, rel, tuple(constraints))))
    return Step(Axis.CHILD, "S", tuple(filters))


def bcq_contained(q1: Bcq, q2: Bcq, cap: int = 5) -> bool:
    """Canonical-database containment test, complete with inequalities:
    q1 is contained in q2 iff every identification of q1's variables that
    satisfies q1 also satisfies q2."""
    from .engines.vars import set_partitions

    vars1 = q1.variables()
    if len(vars1) > cap:
        raise ValueError("too many variables for the brute-force check")
    for partition in set_partitions(vars1):
        rep = {v: min(block) for block in partition for v in block}
        facts = {(rel, tuple(rep[v] for v in vs)) for rel, vs in q1.atoms}
        if not _bcq_holds(q1, facts):
            continue
        if not _bcq_holds(q2, facts):
            return False
    return True


def _bcq_holds(q: Bcq, facts: set) -> bool:
    values = sorted({v for _, vs in facts for v in vs})
    variables = q.variables()
    for combo in itertools.product(values, repeat=len(variables)):
        h = dict(zip(variables, combo))
        if any(h[x] == h[y] for x, y in q.inequalities):
            continue
        if all((rel, tuple(h[v] for v in vs)) in facts for rel, vs in q.atoms):
            return True
    return False


def gen_bcq(q1: Bcq, q2: Bcq, cap: int = 3) -> GeneratedInstance:
    """Existential-variables instance equivalent to BCQ containment."""
    if len(q1.atoms) > cap or len(q2.atoms) > cap:
        raise ValueError("too many atoms for the configured cap")
    if any(len(vs) > cap for _, vs in q1.atoms + q2.atoms):
        raise ValueError("relation arity exceeds the configured cap")
    contained = bcq_contained(q1, q2)
    return GeneratedInstance(
        Instance(bcq_encode(q1), bcq_encode(q2), semantics="evars"),
        CONTAINED if contained else NOT_CONTAINED)


# ---------------------------------------------------------------------------
# Forall-exists 3SAT via existential variables


@dataclass(frozen=True)
class ForallExists:
    """forall x1..xm exists y1..ym' : conjunction of 3-literal clauses.

    A literal is (kind, index, positive) with kind 'x' or 'y'.
    """

    universal: int
    existential: int
    clauses: tuple[tuple[tuple[str, int, bool], ...], ...]


def forall_exists_valid(phi: ForallExists) -> bool:
    def clause_true(clause, xs, ys) -> bool:
        for kind, i, pos in clause:
            val = xs[i - 1] if kind == "x" else ys[i - 1]
            if val == pos:
                return True
        return False

    for xs in itertools.product([False, True], repeat=phi.universal):
        if not any(
                all(clause_true(c, xs, ys) for c in phi.clauses)
                for ys in itertools.product([False, True],
                                            repeat=phi.existential)):
            return False
    return True


def gen_forall_exists(phi: ForallExists, cap: int = 2) -> GeneratedInstance:
    """Existential-variables instance, Contained iff the formula is valid.

    Trees matching p carry the two truth values as root attributes and an
    assignment to the universal variables along a path; q existentially
    picks values for the y's and checks every clause.
    """
    if phi.universal > cap or phi.existential > cap or len(phi.clauses) > cap + 1:
        raise ValueError("formula exceeds the configured cap")
    for clause in phi.clauses:
        if len(clause) != 3:
            raise ValueError("clauses must have exactly three literals")
        for kind, i, _ in clause:
            limit = phi.universal if kind == "x" else phi.existential
            if kind not in ("x", "y") or not 1 <= i <= limit:
                raise ValueError(f"bad literal ({kind}, {i})")

    p = seq([Step(Axis.CHILD, "b", (VarEq("z1", "T"), VarEq("z0", "F")))]
            + [Step(Axis.CHILD, "b",
                    (FOr((VarEq("z1", "c"), VarEq("z0", "c"))),))
               for _ in range(phi.universal)])

    def literal(kind: str, i: int, pos: bool):
        return VarEq(f"{kind}{i}", "T" if pos else "F")

    clause_filters = [FOr(tuple(literal(*lit) for lit in clause))
                      for clause in phi.clauses]
    y_filters = [FOr((VarEq(f"y{i}", "T"), VarEq(f"y{i}", "F")))
                 for i in range(1, phi.existential + 1)]
    q = seq([Step(Axis.CHILD, "b",
                  tuple(clause_filters)
                  + (VarEq("z1", "T"), VarEq("z0", "F"))
                  + tuple(y_filters))]
            + [Step(Axis.CHILD, "b", (VarEq(f"x{i}", "c"),))
               for i in range(1, phi.universal + 1)])

    valid = forall_exists_valid(phi)
    return GeneratedInstance(
        Instance(p, q, semantics="evars"),
        CONTAINED if valid else NOT_CONTAINED,
        note="valid" if valid else "invalid")
