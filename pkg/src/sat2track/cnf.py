"""CNF formulas: DIMACS parsing, width normalization, and a brute-force
satisfiability oracle.

The oracle enumerates assignments exhaustively and is intentionally capped at a
small variable count; it exists to cross-check the track pipeline on desk-scale
inputs, not to compete with real SAT solvers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_ORACLE_LIMIT = 24


class DimacsError(ValueError):
    """Raised for malformed DIMACS input."""


class OracleLimitError(RuntimeError):
    """Raised when a formula exceeds the exhaustive oracle's variable cap."""


@dataclass(frozen=True)
class Literal:
    variable: int
    positive: bool

    def __post_init__(self) -> None:
        if self.variable < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable}")

    @classmethod
    def from_int(cls, lit: int) -> Literal:
        if lit == 0:
            raise ValueError("literal 0 is reserved as the DIMACS terminator")
        return cls(abs(lit), lit > 0)

    def to_int(self) -> int:
        return self.variable if self.positive else -self.variable

    def negated(self) -> Literal:
        return Literal(self.variable, not self.positive)


@dataclass(frozen=True)
class Clause:
    """Disjunction of exactly three literals (duplicates allowed)."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self) -> None:
        if len(self.literals) != 3:
            raise ValueError(f"clause must hold exactly 3 literals, got {len(self.literals)}")

    @classmethod
    def from_ints(cls, lits: Sequence[int]) -> Clause:
        return cls(tuple(Literal.from_int(v) for v in lits))  # type: ignore[arg-type]

    def to_ints(self) -> tuple[int, int, int]:
        a, b, c = self.literals
        return (a.to_int(), b.to_int(), c.to_int())


@dataclass(frozen=True)
class Formula:
    """Exactly-3-CNF over variables 1..num_variables."""

    num_variables: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if self.num_variables < 0:
            raise ValueError("num_variables must be >= 0")
        for i, clause in enumerate(self.clauses):
            for lit in clause.literals:
                if lit.variable > self.num_variables:
                    raise ValueError(
                        f"clause {i} uses variable {lit.variable} above num_variables "
                        f"{self.num_variables}"
                    )

    @classmethod
    def from_ints(cls, num_variables: int, clauses: Iterable[Sequence[int]]) -> Formula:
        return cls(num_variables, tuple(Clause.from_ints(c) for c in clauses))

    def to_ints(self) -> tuple[tuple[int, int, int], ...]:
        return tuple(clause.to_ints() for clause in self.clauses)


@dataclass(frozen=True)
class RawFormula:
    """CNF as parsed: clauses of arbitrary width, including empty ones."""

    num_variables: int
    clauses: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Assignment:
    """Truth values for variables 1..n; values[i] belongs to variable i+1."""

    values: tuple[bool, ...]

    def value(self, variable: int) -> bool:
        return self.values[variable - 1]

    def to_ints(self) -> tuple[int, ...]:
        return tuple(i + 1 if v else -(i + 1) for i, v in enumerate(self.values))

    @classmethod
    def from_index(cls, num_variables: int, index: int) -> Assignment:
        """Assignment number `index` in the canonical order: variable 1 is the
        least significant bit, False sorts before True."""
        return cls(tuple(bool((index >> k) & 1) for k in range(num_variables)))

    @classmethod
    def from_ints(cls, num_variables: int, lits: Iterable[int]) -> Assignment:
        seen: dict[int, bool] = {}
        for lit in lits:
            var = abs(lit)
            if lit == 0 or var > num_variables:
                raise ValueError(f"literal {lit} out of range for {num_variables} variables")
            if var in seen and seen[var] != (lit > 0):
                raise ValueError(f"contradictory values for variable {var}")
            seen[var] = lit > 0
        missing = [v for v in range(1, num_variables + 1) if v not in seen]
        if missing:
            raise ValueError(f"no value for variable(s) {missing}")
        return cls(tuple(seen[v] for v in range(1, num_variables + 1)))


@dataclass(frozen=True)
class Normalized:
    """Exactly-3-CNF produced from a raw formula; fresh helper variables are
    numbered above source_variables."""

    formula: Formula
    source_variables: int

    def project(self, assignment: Assignment) -> Assignment:
        """Restrict an assignment of the normalized formula to the source variables."""
        return Assignment(assignment.values[: self.source_variables])


def parse_dimacs(text: str) -> RawFormula:
    """Parse DIMACS CNF. Comment lines start with 'c'; the header line is
    'p cnf <vars> <clauses>'; literals are nonzero ints and 0 closes a clause.
    Clauses may span lines and several may share one line."""
    num_variables: int | None = None
    num_clauses: int | None = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("p"):
            if num_variables is not None:
                raise DimacsError(f"line {line_no}: duplicate header")
            fields = stripped.split()
            if len(fields) != 4 or fields[0] != "p" or fields[1] != "cnf":
                raise DimacsError(f"line {line_no}: header must be 'p cnf <vars> <clauses>'")
            try:
                num_variables, num_clauses = int(fields[2]), int(fields[3])
            except ValueError as exc:
                raise DimacsError(f"line {line_no}: non-integer header field") from exc
            if num_variables < 0 or num_clauses < 0:
                raise DimacsError(f"line {line_no}: negative header count")
            continue
        if num_variables is None:
            raise DimacsError(f"line {line_no}: clause data before header")
        for token in stripped.split():
            if token == "-0":
                raise DimacsError(f"line {line_no}: literal -0")
            try:
                lit = int(token)
            except ValueError as exc:
                raise DimacsError(f"line {line_no}: bad token {token!r}") from exc
            if lit == 0:
                clauses.append(tuple(pending))
                pending.clear()
            else:
                if abs(lit) > num_variables:
                    raise DimacsError(
                        f"line {line_no}: literal {lit} exceeds declared {num_variables} variables"
                    )
                pending.append(lit)
    if pending:
        raise DimacsError("unterminated clause at end of input")
    if num_variables is None:
        raise DimacsError("missing 'p cnf' header")
    if num_clauses != len(clauses):
        raise DimacsError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    return RawFormula(num_variables, tuple(clauses))


def print_dimacs(formula: RawFormula | Formula) -> str:
    if isinstance(formula, Formula):
        clauses: tuple[tuple[int, ...], ...] = formula.to_ints()
    else:
        clauses = formula.clauses
    lines = [f"p cnf {formula.num_variables} {len(clauses)}"]
    for clause in clauses:
        lines.append(" ".join(str(lit) for lit in (*clause, 0)))
    return "\n".join(lines) + "\n"


def normalize_to_3cnf(raw: RawFormula) -> Normalized:
    """Rewrite into exactly-3 clauses, preserving satisfiability.

    Width 1 and 2 clauses pad by repeating a literal, width > 3 splits into a
    chain with fresh linking variables, and an empty clause becomes a
    contradiction pair over one fresh variable.
    """
    next_fresh = raw.num_variables + 1
    out: list[tuple[int, int, int]] = []
    for clause in raw.clauses:
        width = len(clause)
        if width == 0:
            y = next_fresh
            next_fresh += 1
            out.append((y, y, y))
            out.append((-y, -y, -y))
        elif width == 1:
            out.append((clause[0], clause[0], clause[0]))
        elif width == 2:
            out.append((clause[0], clause[1], clause[1]))
        elif width == 3:
            out.append((clause[0], clause[1], clause[2]))
        else:
            y = next_fresh
            next_fresh += 1
            out.append((clause[0], clause[1], y))
            prev = y
            for lit in clause[2:-2]:
                y = next_fresh
                next_fresh += 1
                out.append((-prev, lit, y))
                prev = y
            out.append((-prev, clause[-2], clause[-1]))
    formula = Formula.from_ints(next_fresh - 1, out)
    return Normalized(formula, raw.num_variables)


def evaluate(clauses: Iterable[Sequence[int]], assignment: Assignment) -> bool:
    """Truth of a clause list (signed-int form) under an assignment. An empty
    clause is false; an empty clause list is true."""
    for clause in clauses:
        if not any(assignment.value(abs(lit)) == (lit > 0) for lit in clause):
            return False
    return True


def sat_oracle(formula: Formula, limit: int = DEFAULT_ORACLE_LIMIT) -> Assignment | None:
    """First satisfying assignment in the canonical enumeration order
    (variable 1 = least significant bit, False before True), or None."""
    n = formula.num_variables
    if n > limit:
        raise OracleLimitError(f"{n} variables exceed the oracle limit of {limit}")
    masks = []
    for clause in formula.to_ints():
        pos = neg = 0
        for lit in clause:
            if lit > 0:
                pos |= 1 << (lit - 1)
            else:
                neg |= 1 << (-lit - 1)
        masks.append((pos, neg))
    universe = (1 << n) - 1
    for index in range(1 << n):
        inverse = universe & ~index
        if all(index & pos or inverse & neg for pos, neg in masks):
            return Assignment.from_index(n, index)
    return None
