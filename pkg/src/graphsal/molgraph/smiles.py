"""Reader and writer for a practical SMILES subset.

Supported: organic-subset atoms (B C N O P S F Cl Br I and aromatic
b c n o p s), bracket atoms with hydrogen count and charge, bonds ``- = # :``
(``/`` and ``\\`` read as single bonds), branches, ring closures ``1``-``9``
and ``%nn``.  Chirality marks and atom classes inside brackets are skipped.
Hydrogens are never materialized and aromaticity is taken from the notation.
"""

from __future__ import annotations

from .graph import Atom, Bond, MolecularGraph

ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe
    Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg
    Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg
    Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og""".split()
)
ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
AROMATIC_BRACKET = ("se", "as", "te", "b", "c", "n", "o", "p", "s")
BOND_SYMBOLS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic", "/": "single", "\\": "single"}


class SmilesError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def _default_order(a: Atom, b: Atom) -> str:
    return "aromatic" if a.aromatic and b.aromatic else "single"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.atoms: list[Atom] = []
        self.bonds: dict[tuple[int, int], str] = {}

    def error(self, message, offset=None):
        raise SmilesError(message, self.pos if offset is None else offset)

    def add_bond(self, i, j, order, offset):
        key = (min(i, j), max(i, j))
        if i == j:
            self.error("ring closure bonds an atom to itself", offset)
        if key in self.bonds:
            self.error(f"duplicate bond between atoms {i} and {j}", offset)
        if order is None:
            order = _default_order(self.atoms[i], self.atoms[j])
        self.bonds[key] = order

    def read_atom(self) -> Atom | None:
        t, p = self.text, self.pos
        if t[p] == "[":
            return self.read_bracket()
        for sym in ORGANIC:
            if t.startswith(sym, p):
                self.pos += len(sym)
                return Atom(sym)
        for sym in AROMATIC_ORGANIC:
            if t.startswith(sym, p):
                self.pos += 1
                return Atom(sym.upper(), aromatic=True)
        return None

    def read_bracket(self) -> Atom:
        t = self.text
        start = self.pos
        end = t.find("]", start)
        if end < 0:
            self.error("unterminated bracket atom", start)
        p = start + 1
        if p < end and t[p].isdigit():
            self.error("isotope labels are not supported", p)
        symbol = None
        aromatic = False
        for sym in AROMATIC_BRACKET:
            if t.startswith(sym, p):
                symbol, aromatic = sym.capitalize(), True
                break
        if symbol is None:
            if p + 1 < end and t[p : p + 2] in ELEMENTS and t[p + 1].islower():
                symbol = t[p : p + 2]
            elif p < end and t[p] in ELEMENTS:
                symbol = t[p]
            else:
                self.error(f"unknown element in bracket atom {t[start:end + 1]!r}", p)
        p += len(symbol)
        while p < end and t[p] == "@":
            p += 1
        if p < end and t[p] == "H":
            p += 1
            while p < end and t[p].isdigit():
                p += 1
        charge = 0
        if p < end and t[p] in "+-":
            sign = 1 if t[p] == "+" else -1
            q = p + 1
            if q < end and t[q].isdigit():
                while q < end and t[q].isdigit():
                    q += 1
                charge = sign * int(t[p + 1 : q])
            else:
                while q < end and t[q] == t[p]:
                    q += 1
                charge = sign * (q - p)
            p = q
        if p < end and t[p] == ":":
            p += 1
            while p < end and t[p].isdigit():
                p += 1
        if p != end:
            self.error(f"unexpected {t[p]!r} in bracket atom", p)
        self.pos = end + 1
        return Atom(symbol, charge, aromatic)

    def parse(self) -> MolecularGraph:
        t = self.text
        if not t:
            raise SmilesError("empty SMILES", 0)
        prev: int | None = None
        branches: list[tuple[int, int]] = []  # (atom, offset of '(')
        rings: dict[int, tuple[int, str | None, int]] = {}
        pending: tuple[str, int] | None = None  # bond symbol awaiting an atom

        while self.pos < len(t):
            c = t[self.pos]
            offset = self.pos
            if c == "(":
                if prev is None:
                    self.error("branch opened before any atom")
                if pending is not None:
                    self.error(f"dangling bond {pending[0]!r}", pending[1])
                branches.append((prev, offset))
                self.pos += 1
                if self.pos < len(t) and t[self.pos] == ")":
                    self.error("empty branch")
            elif c == ")":
                if not branches:
                    self.error("unbalanced ')'")
                if pending is not None:
                    self.error(f"dangling bond {pending[0]!r}", pending[1])
                prev = branches.pop()[0]
                self.pos += 1
            elif c in BOND_SYMBOLS:
                if prev is None:
                    self.error(f"bond {c!r} without a preceding atom")
                if pending is not None:
                    self.error(f"consecutive bond symbols {pending[0]!r}{c!r}")
                pending = (c, offset)
                self.pos += 1
            elif c.isdigit() or c == "%":
                if prev is None:
                    self.error("ring closure before any atom")
                if c == "%":
                    digits = t[self.pos + 1 : self.pos + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        self.error("'%' must be followed by two digits")
                    label = int(digits)
                    self.pos += 3
                else:
                    label = int(c)
                    self.pos += 1
                order = BOND_SYMBOLS[pending[0]] if pending else None
                pending = None
                if label in rings:
                    other, other_order, _ = rings.pop(label)
                    if order and other_order and order != other_order:
                        self.error(f"conflicting bond types on ring closure {label}", offset)
                    self.add_bond(other, prev, order or other_order, offset)
                else:
                    rings[label] = (prev, order, offset)
            elif c == ".":
                self.error("multi-fragment SMILES ('.') is not supported")
            else:
                atom = self.read_atom()
                if atom is None:
                    self.error(f"unknown element or symbol {c!r}")
                self.atoms.append(atom)
                idx = len(self.atoms) - 1
                if prev is not None:
                    order = BOND_SYMBOLS[pending[0]] if pending else None
                    self.add_bond(prev, idx, order, offset)
                elif pending is not None:
                    self.error(f"dangling bond {pending[0]!r}", pending[1])
                pending = None
                prev = idx

        if pending is not None:
            self.error(f"dangling bond {pending[0]!r}", pending[1])
        if branches:
            self.error("unbalanced '('", branches[-1][1])
        if rings:
            label, (_, _, off) = min(rings.items(), key=lambda kv: kv[1][2])
            self.error(f"unclosed ring closure {label}", off)

        bonds = tuple(Bond(i, j, order) for (i, j), order in self.bonds.items())
        return MolecularGraph(tuple(self.atoms), bonds)


def parse_smiles(text: str) -> MolecularGraph:
    return _Parser(text.strip()).parse()


def _atom_token(atom: Atom) -> str:
    if atom.charge == 0:
        if atom.aromatic and atom.element.lower() in AROMATIC_ORGANIC:
            return atom.element.lower()
        if not atom.aromatic and atom.element in ORGANIC:
            return atom.element
    sym = atom.element.lower() if atom.aromatic else atom.element
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        mag = abs(atom.charge)
        sym += sign if mag == 1 else f"{sign}{mag}"
    return f"[{sym}]"


def _bond_token(order: str, a: Atom, b: Atom) -> str:
    if order == _default_order(a, b):
        return ""
    return {"single": "-", "double": "=", "triple": "#", "aromatic": ":"}[order]


def write_smiles(graph: MolecularGraph, root: int = 0) -> str:
    """Emit SMILES that re-parses to a graph isomorphic to ``graph``.

    Deterministic for a given graph and root: neighbors are visited in
    ascending atom index.
    """
    n = len(graph.atoms)
    if n == 0:
        raise ValueError("cannot write an empty graph")
    if not graph.is_connected():
        raise ValueError("cannot write a multi-fragment graph")
    atoms = graph.atoms
    nbrs = [sorted(nb) for nb in graph.neighbors]

    # DFS spanning tree first, so ring-closure edges are known before emitting
    parent = [-1] * n
    order: list[int] = []
    visited = [False] * n

    def visit(u):
        visited[u] = True
        order.append(u)
        for v, _ in nbrs[u]:
            if not visited[v]:
                parent[v] = u
                visit(v)

    visit(root)
    rank = {u: k for k, u in enumerate(order)}
    tree = {(min(u, parent[u]), max(u, parent[u])) for u in range(n) if parent[u] >= 0}

    # ring closures: opened at the earlier atom in DFS order
    closures_at: dict[int, list[tuple[int, str]]] = {u: [] for u in range(n)}
    for b in graph.bonds:
        key = (min(b.i, b.j), max(b.i, b.j))
        if key in tree:
            continue
        first, second = sorted((b.i, b.j), key=rank.__getitem__)
        closures_at[first].append((second, b.order))
        closures_at[second].append((first, b.order))

    free_labels = list(range(1, 100))
    open_labels: dict[tuple[int, int], int] = {}
    out: list[str] = []

    def label_text(k):
        return str(k) if k < 10 else f"%{k}"

    def emit(u):
        out.append(_atom_token(atoms[u]))
        for v, bond_order in sorted(closures_at[u], key=lambda x: rank[x[0]]):
            key = (min(u, v), max(u, v))
            if key in open_labels:
                k = open_labels.pop(key)
                out.append(_bond_token(bond_order, atoms[u], atoms[v]) + label_text(k))
                free_labels.append(k)
                free_labels.sort()
            else:
                k = free_labels.pop(0)
                open_labels[key] = k
                out.append(_bond_token(bond_order, atoms[u], atoms[v]) + label_text(k))
        children = [v for v, _ in nbrs[u] if parent[v] == u]
        for idx, v in enumerate(children):
            tok = _bond_token(graph.bond_order(u, v), atoms[u], atoms[v])
            if idx < len(children) - 1:
                out.append("(" + tok)
                emit(v)
                out.append(")")
            else:
                out.append(tok)
                emit(v)

    emit(root)
    return "".join(out)
