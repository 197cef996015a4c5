"""Modular symbols valued in log-extended functions.

A symbol is stored by its value on {0, oo}; ``symbol_eval`` recovers any
other value from a unimodular path.  The total symbol of a divisor is the
sum over tree levels of the functions ``Phi_l{0, oo}``; level 0 is kept as
exact log atoms, higher levels as series modulo P_n.

Two streams are carried: ``X`` holds the levels of the divisor itself and
``Y`` the levels of ``-varpi D``.  Each level of one stream is the recursion
image of the previous level of the other one.
"""
from __future__ import annotations

import logging
import os
import time
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from greens.affinoid import INF, LogLaurentFunction, dump, from_atoms, load, slash
from greens.errors import CheckpointError, DegreeObstruction, NotPrincipal, SymbolError
from greens.matrices import S, U, adjugate, cusp, det, mat_mul
from greens.poly_weight import PolyN, slash_matrix
from greens.quadforms import deg_check, level0_atoms

logger = logging.getLogger("greens.symbols")


def _convergent_chain(c):
    """Cusps oo = c_{-1}, c_0, ..., c from the continued fraction of c."""
    chain = [(1, 0)]
    x, y = c
    if y == 0:
        return chain
    h2, h1 = 0, 1
    k2, k1 = 1, 0
    while y:
        a, r = divmod(x, y)
        h2, h1 = h1, a * h1 + h2
        k2, k1 = k1, a * k1 + k2
        chain.append(cusp((h1, k1)))
        x, y = y, r
    return chain


def _unimodular(c1, c2):
    return abs(c1[0] * c2[1] - c1[1] * c2[0]) == 1


def _simplify(seq):
    changed = True
    while changed:
        changed = False
        i = 1
        while i < len(seq):
            if seq[i] == seq[i - 1]:
                del seq[i]
                changed = True
            elif i + 1 < len(seq) and seq[i - 1] == seq[i + 1]:
                del seq[i : i + 2]
                changed = True
            elif i + 1 < len(seq) and _unimodular(seq[i - 1], seq[i + 1]):
                del seq[i]
                changed = True
            else:
                i += 1
    return seq


def cusp_sequence(r, s):
    """A unimodular chain of cusps from r to s."""
    r, s = cusp(r), cusp(s)
    if r == s:
        return [r]
    seq = list(reversed(_convergent_chain(r))) + _convergent_chain(s)[1:]
    return _simplify(seq)


def unimodular_path(r, s):
    """Matrices g_i in SL2(Z) with g_i{0, oo} = {c_i, c_{i+1}} along a chain from r to s."""
    seq = cusp_sequence(r, s)
    path = []
    for (x0, y0), (x1, y1) in zip(seq, seq[1:]):
        gamma = ((x1, x0), (y1, y0))
        if det(gamma) == -1:
            gamma = ((x1, -x0), (y1, -y0))
        path.append(gamma)
    return path


def translate_atoms(atoms, gamma):
    """Atoms of Phi{0, oo} | gamma^(-1): the forms of gamma * w with unchanged weights."""
    inv = adjugate(gamma)
    return [(form.compose(inv), weight) for form, weight in atoms]


def path_atoms(atoms, r, s):
    """Level-0 style atoms crossing {r, s}, from the atoms crossing {0, oo}."""
    weights = Counter()
    for gamma in unimodular_path(r, s):
        for form, weight in translate_atoms(atoms, gamma):
            weights[form] += weight
    return sorted((form, weight) for form, weight in weights.items() if weight)


def atom_class(form, p):
    """Residue class of the root of a form of level >= 1; INF when p | a."""
    if form.a % p == 0:
        return INF
    return -form.b * pow(2 * form.a, -1, p) % p


def recursion_matrix(c, p):
    """Adjugate of the matrix of the recursion into class c."""
    if c == INF:
        return ((p, 0), (0, 1))
    return ((1, -c), (0, p))


def lift_atoms(atoms, p, level):
    """Atoms one level up, grouped by the residue class they land in.

    ``atoms`` are the forms crossing {0, oo} at ``level``.  Class ``a`` receives
    the atoms crossing {-a/p, oo}, class INF the atoms crossing {0, oo}, each
    composed with its recursion matrix.
    """
    out = {}
    targets = list(range(p)) + [INF]
    for c in targets:
        if c == INF:
            sources = atoms
        else:
            sources = path_atoms(atoms, Fraction(-c, p), None)
        A = recursion_matrix(c, p)
        lifted = Counter()
        for form, weight in sources:
            if level >= 1:
                src = atom_class(form, p)
                if (c == INF and src == 0) or (c != INF and src == INF):
                    continue
            new = form.compose(A)
            if new.level(p) != form.level(p) + 1:
                raise SymbolError(
                    f"{form.as_list()} composed into class {c} has level {new.level(p)}, expected {form.level(p) + 1}"
                )
            lifted[new] += weight
        kept = sorted((form, weight) for form, weight in lifted.items() if weight)
        if kept:
            out[c] = kept
    return out


def orbit_slice(forms, disc):
    """Crossing forms of discriminant `disc` in the SL2(Z)-classes of `forms`, with intersection signs."""
    from greens.quadforms import crossing_forms, intersection_sign, same_class

    reps = []
    for form in forms:
        if form.disc == disc and not any(same_class(form, rep) for rep in reps):
            reps.append(form)
    return sorted(
        (g, intersection_sign(g)) for g in crossing_forms(disc) if any(same_class(g, rep) for rep in reps)
    )


@dataclass(frozen=True)
class Level0Symbol:
    atoms: tuple
    function: LogLaurentFunction
    parity: int = 0

    @classmethod
    def build(cls, divisor, parity, field, n, order):
        atoms = tuple(level0_atoms(divisor, parity))
        return cls(atoms, from_atoms(atoms, field, n, order, mode="symbolic"), parity)


@dataclass(frozen=True)
class SymbolFamily:
    """Level-l value on {0, oo} of one stream, as a series modulo P_n."""

    level: int
    stream: str
    function: LogLaurentFunction

    def components(self):
        return self.function.components()

    def tail_valuation(self):
        return self.function.tail_valuation()


def _other(stream):
    return "Y" if stream == "X" else "X"


def symbol_eval(F, r, s):
    """Phi{r, s} for the SL2(Z)-invariant symbol with Phi{0, oo} = F."""
    if isinstance(F, (SymbolFamily, Level0Symbol)):
        F = F.function
    total = None
    for gamma in unimodular_path(r, s):
        term = slash(F, adjugate(gamma))
        total = term if total is None else total + term
    if total is None:
        return LogLaurentFunction.zero(F.field, F.n, F.order, F.weight, F.mod_degree, F.branch)
    return total


def series_part(f, tolerance=None):
    """Drop rational log atoms, which cancel disk by disk for strong degree zero divisors."""
    if f.rational_logs:
        worst = min(Q.valuation() for Q in f.rational_logs.values())
        logger.debug(f"dropping rational log atoms at {sorted(f.rational_logs)}, min valuation {worst}")
        if tolerance is not None and worst < tolerance:
            raise SymbolError(f"rational log atoms of valuation {worst} do not cancel")
    b = f._builder()
    b.add_function(f)
    b.rational_logs = {}
    return b.build()


def _lift_level0(symbol, field, n, order, tolerance=None):
    flat = [atom for atoms in lift_atoms(list(symbol.atoms), field.p, 0).values() for atom in atoms]
    return series_part(from_atoms(flat, field, n, order, mode="absorbed"), tolerance)


def _descend(f):
    """One application of the recursion to a series-only level function."""
    p = f.field.p
    total = None
    for a in range(p):
        translated = symbol_eval(f, Fraction(-a, p), None) if a else f
        finite = [c for c in translated.classes() if c != INF]
        if not finite:
            continue
        term = slash(translated.restrict(finite), recursion_matrix(a, p))
        total = term if total is None else total + term
    sources = [c for c in f.classes() if c != 0]
    if sources:
        term = slash(f.restrict(sources), recursion_matrix(INF, p))
        total = term if total is None else total + term
    if total is None:
        return LogLaurentFunction.zero(f.field, f.n, f.order, f.weight, f.n, f.branch)
    return total


def recursion_step(source, field=None, order=None, tolerance=None):
    """Next level of the opposite stream.

    A :class:`Level0Symbol` is lifted exactly on forms and then expanded; a
    :class:`SymbolFamily` is carried through the det-p slash recursion.
    Leftover rational log mass below `tolerance` raises :class:`SymbolError`.
    """
    if isinstance(source, Level0Symbol):
        f = source.function
        field = field or f.field
        order = order or f.order
        stream = "X" if source.parity == 1 else "Y"
        return SymbolFamily(1, stream, _lift_level0(source, field, f.n, order, tolerance))
    return SymbolFamily(source.level + 1, _other(source.stream), _descend(source.function))


@dataclass
class Assembly:
    total: LogLaurentFunction
    rows: list = dc_field(default_factory=list)
    symmetric: bool = False
    levels: int = 0
    resumed_from: int = 0


def _rows(family):
    f = family.function
    rows = []
    for c in f.classes():
        part = f.restrict({c})
        rows.append(
            {
                "level": family.level,
                "stream": family.stream,
                "class": "inf" if c == INF else str(c),
                "min_valuation": part.tail_valuation(),
                "nonzero_terms": part.nonzero_terms(),
            }
        )
    return rows


def assemble_total(
    divisor, field, n, order, level_cutoff, stop_valuation=None, checkpoint_dir=None, check_degree=True, tolerance=None
):
    """T = F_0 + sum of the level functions of the divisor's stream, modulo P_n."""
    check = deg_check(divisor, n + 2, field.p, field) if check_degree else None
    if check is not None and not check:
        raise DegreeObstruction(f"degree symbol does not vanish at {', '.join(check.witness)}", check.witness)

    X0 = Level0Symbol.build(divisor, 0, field, n, order)
    Y0 = Level0Symbol.build(divisor, 1, field, n, order)
    symmetric = list(Y0.atoms) == sorted((g, -w) for g, w in X0.atoms)
    assembly = Assembly(X0.function, symmetric=symmetric)
    if not X0.atoms and not Y0.atoms:
        logger.info("empty divisor, total symbol is zero")
        return assembly
    logger.info(f"level 0: {len(X0.atoms)} atoms in X, {len(Y0.atoms)} in Y, symmetric={symmetric}")

    start = 1
    series_total = None
    resumed = load_checkpoint(checkpoint_dir, field, n) if checkpoint_dir else None
    if resumed is not None:
        start, families, series_total = resumed
        X, Y = families["X"], families.get("Y")
        if Y is None:
            Y = SymbolFamily(start, "Y", -X.function)
        assembly.resumed_from = start
        for level in range(1, start + 1):
            stored = families if level == start else read_checkpoint_level(checkpoint_dir, level, field)
            assembly.rows.extend(_rows(stored["X"]))
            if not symmetric and "Y" in stored:
                assembly.rows.extend(_rows(stored["Y"]))
        logger.info(f"resuming from checkpoint level {start}")
        if start >= level_cutoff:
            assembly.levels = start
            assembly.total = X0.function + series_total
            return assembly
        X, Y = _advance(X, Y, symmetric)
        start += 1
    else:
        X = recursion_step(Y0, field, order, tolerance)
        Y = SymbolFamily(1, "Y", -X.function) if symmetric else recursion_step(X0, field, order, tolerance)

    for level in range(start, level_cutoff + 1):
        series_total = X.function if series_total is None else series_total + X.function
        assembly.rows.extend(_rows(X))
        if not symmetric:
            assembly.rows.extend(_rows(Y))
        assembly.levels = level
        if checkpoint_dir:
            save_checkpoint(checkpoint_dir, level, {"X": X, "Y": Y}, series_total)
        tail = min(X.tail_valuation(), Y.tail_valuation())
        logger.info(f"level {level}: increment valuation {tail}")
        if stop_valuation is not None and tail >= stop_valuation:
            logger.info(f"stopping at level {level}, tail valuation {tail} >= {stop_valuation}")
            break
        if level < level_cutoff:
            began = time.perf_counter()
            X, Y = _advance(X, Y, symmetric)
            logger.debug(f"level {level + 1} computed in {time.perf_counter() - began:.2f}s")

    if series_total is not None:
        assembly.total = X0.function + series_total
    return assembly


def _advance(X, Y, symmetric):
    if symmetric:
        nxt = recursion_step(X)
        X = SymbolFamily(nxt.level, "X", -nxt.function)
        return X, SymbolFamily(nxt.level, "Y", nxt.function)
    return recursion_step(Y), recursion_step(X)


@dataclass
class RelationSolution:
    function: LogLaurentFunction
    correction: PolyN
    kernel: list
    residuals: dict
    post_residuals: dict
    defects: dict


def relation_matrix(n):
    """Rows of [1 + S; 1 + U + U^2] acting on P_n coefficient vectors."""
    U2 = mat_mul(U, U)
    mS, mU, mU2 = slash_matrix(S, n), slash_matrix(U, n), slash_matrix(U2, n)
    rows = []
    for i in range(n + 1):
        rows.append([Fraction(i == j) + mS[i][j] for j in range(n + 1)])
    for i in range(n + 1):
        rows.append([Fraction(i == j) + mU[i][j] + mU2[i][j] for j in range(n + 1)])
    return rows


def _eliminate(rows, rhs):
    """Reduced row echelon form of `rows`, with the same operations applied to `rhs`."""
    rows = [list(r) for r in rows]
    rhs = list(rhs)
    ncols = len(rows[0])
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rhs[r], rhs[pivot] = rhs[pivot], rhs[r]
        scale = 1 / rows[r][col]
        rows[r] = [x * scale for x in rows[r]]
        rhs[r] = rhs[r] * scale
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
                rhs[i] = rhs[i] - rhs[r] * factor
        pivots.append(col)
        r += 1
    return rows, rhs, pivots


def kernel_basis(n):
    """Rational basis of the solutions of Q + Q|S = 0 and Q + Q|U + Q|U^2 = 0."""
    rows, _, pivots = _eliminate(relation_matrix(n), [Fraction(0)] * (2 * n + 2))
    basis = []
    for free in range(n + 1):
        if free in pivots:
            continue
        vec = [Fraction(0)] * (n + 1)
        vec[free] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -rows[i][free]
        basis.append(vec)
    return basis


def defect_templates(DS, DU):
    """Valuations of the coefficients that must vanish for the weight 4 defect shapes."""
    s0, s1, s2 = DS.coeffs[:3]
    u0, u1, u2 = DU.coeffs[:3]
    return {
        "S:c1": s1.valuation,
        "S:c0-c2": (s0 - s2).valuation,
        "U:c0-c2": (u0 - u2).valuation,
        "U:c0+c1": (u0 + u1).valuation,
    }


def _defects(f):
    DS = f + slash(f, S)
    DU = f + slash(f, U) + slash(f, mat_mul(U, U))
    return DS, DU


def solve_relations(T, tolerance):
    """Pin the polynomial part of T so the two- and three-term relations hold."""
    field, n = T.field, T.n
    T0 = T.with_polynomial(PolyN.zero(field, n))
    DS, DU = _defects(T0)
    nonpoly = {"S": DS.nonpolynomial_valuation(), "U": DU.nonpolynomial_valuation()}
    logger.info(f"relation defects: non-polynomial valuations {nonpoly}")
    if min(nonpoly.values()) < tolerance:
        raise NotPrincipal(f"relation defects are not polynomials to valuation {tolerance}", nonpoly)

    PS, PU = DS.low_polynomial(), DU.low_polynomial()
    rows, rhs, pivots = _eliminate(relation_matrix(n), list(PS.coeffs) + list(PU.coeffs))
    residuals = {f"row {i}": rhs[i].valuation for i in range(len(pivots), len(rhs))}
    if n == 2:
        residuals.update(defect_templates(PS, PU))
    low = min(residuals.values(), default=None)
    if low is not None and low < tolerance:
        logger.warning(f"relation system is inconsistent to valuation {low}")

    q = [field.zero() for _ in range(n + 1)]
    for i, col in enumerate(pivots):
        q[col] = rhs[i]
    Q = PolyN(field, q)
    J = T0.with_polynomial(-Q)
    kernel = [PolyN.from_rationals(field, vec) for vec in kernel_basis(n)]

    PS2, PU2 = _defects(J)
    post = {
        "S": min(PS2.nonpolynomial_valuation(), PS2.low_polynomial().valuation()),
        "U": min(PU2.nonpolynomial_valuation(), PU2.low_polynomial().valuation()),
    }
    logger.info(f"post-solve residual valuations {post}, kernel dimension {len(kernel)}")
    return RelationSolution(J, Q, kernel, residuals, post, {"S": PS, "U": PU})


def _checkpoint_path(directory, level, stream):
    return os.path.join(directory, f"level_{level:03d}_{stream}.txt")


def save_checkpoint(directory, level, families, total=None):
    """Write each stream of `level` (and the running series total) in the dump format."""
    os.makedirs(directory, exist_ok=True)
    items = {stream: family.function for stream, family in families.items()}
    if total is not None:
        items["T"] = total
    for stream, f in items.items():
        path = _checkpoint_path(directory, level, stream)
        tmp = path + ".tmp"
        with open(tmp, "w") as handle:
            handle.write(dump(f))
        os.replace(tmp, path)
    logger.debug(f"checkpoint written for level {level} in {directory}")


def _read_level(directory, level, field):
    loaded = {}
    try:
        for stream in ("X", "Y", "T"):
            path = _checkpoint_path(directory, level, stream)
            if os.path.exists(path):
                with open(path) as handle:
                    loaded[stream] = load(handle.read(), field)
    except (OSError, ValueError, KeyError) as exc:
        raise CheckpointError(f"unreadable checkpoint at level {level}: {exc}") from exc
    return loaded


def read_checkpoint_level(directory, level, field):
    """{stream: SymbolFamily} stored for one level."""
    loaded = _read_level(directory, level, field)
    if "X" not in loaded:
        raise CheckpointError(f"checkpoint for level {level} is missing in {directory}")
    return {s: SymbolFamily(level, s, f) for s, f in loaded.items() if s != "T"}


def load_checkpoint(directory, field, n):
    """(level, {stream: SymbolFamily}, series total) for the deepest complete level, or None."""
    if not directory or not os.path.isdir(directory):
        return None
    levels = set()
    for name in os.listdir(directory):
        if name.startswith("level_") and name.endswith("_X.txt"):
            try:
                levels.add(int(name[6:9]))
            except ValueError:
                continue
    for level in sorted(levels, reverse=True):
        if not os.path.exists(_checkpoint_path(directory, level, "T")):
            continue
        loaded = _read_level(directory, level, field)
        if loaded["X"].n != n:
            raise CheckpointError(f"checkpoint has n={loaded['X'].n}, run has n={n}")
        families = {s: SymbolFamily(level, s, f) for s, f in loaded.items() if s != "T"}
        return level, families, loaded["T"]
    return None
