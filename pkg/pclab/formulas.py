"""
Quantified Boolean formulas in a DIMACS-like text format, with brute-force oracles.

    c comment
    p cnf 4 2        # or dnf; number of variables and clauses
    a 1 0            # universal block
    e 2 3 0          # existential block
    1 -2 3 0         # clause, terminated by 0

A file without quantifier lines declares every variable existential.
"""
import itertools
import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from pclab.parser import ParseError

logger = logging.getLogger(__name__)

QUANTIFIERS = ('a', 'e')
MATRICES = ('cnf', 'dnf')


class OracleCapError(ValueError):
    """ Raised when a brute-force oracle would have to enumerate too many variables or vertices """


@dataclass(frozen=True)
class QBFFormula:
    """
    A prenex formula: quantifier blocks over variables 1..n and a matrix of clauses, read
    as a conjunction of disjunctions (cnf) or a disjunction of conjunctions (dnf)
    """
    blocks: Tuple[Tuple[str, Tuple[int, ...]], ...]
    clauses: Tuple[Tuple[int, ...], ...]
    matrix: str = 'cnf'

    def __post_init__(self):
        object.__setattr__(self, 'blocks', tuple((quantifier, tuple(variables)) for quantifier, variables in self.blocks))
        object.__setattr__(self, 'clauses', tuple(tuple(clause) for clause in self.clauses))
        if self.matrix not in MATRICES:
            raise ValueError(f"Unknown matrix kind {self.matrix}")
        declared = set()
        for quantifier, variables in self.blocks:
            if quantifier not in QUANTIFIERS:
                raise ValueError(f"Unknown quantifier {quantifier}")
            for variable in variables:
                if variable <= 0:
                    raise ValueError(f"Variables are positive integers, got {variable}")
                if variable in declared:
                    raise ValueError(f"Variable {variable} is quantified twice")
                declared.add(variable)
        for clause in self.clauses:
            for literal in clause:
                if literal == 0 or abs(literal) not in declared:
                    raise ValueError(f"Literal {literal} does not refer to a quantified variable")

    @property
    def variables(self) -> List[int]:
        return [variable for _, variables in self.blocks for variable in variables]

    def prefix(self, pattern: str) -> List[List[int]]:
        """
        The variables of each quantifier in pattern, e.g. 'ae' for a forall-exists formula.
        Adjacent blocks with the same quantifier merge; absent blocks are empty.
        """
        merged = []
        for quantifier, variables in self.blocks:
            if not variables:
                continue
            if merged and merged[-1][0] == quantifier:
                merged[-1][1].extend(variables)
            else:
                merged.append((quantifier, list(variables)))
        result = []
        position = 0
        for quantifier in pattern:
            if position < len(merged) and merged[position][0] == quantifier:
                result.append(merged[position][1])
                position += 1
            else:
                result.append([])
        if position != len(merged):
            shape = ''.join(quantifier for quantifier, _ in merged)
            raise ValueError(f"Quantifier prefix '{shape}' does not fit the pattern '{pattern}'")
        return result

    def padded_clauses(self, width: int = 3) -> List[Tuple[int, ...]]:
        """ Clauses with exactly width literals; short clauses repeat their literals """
        padded = []
        for clause in self.clauses:
            if not clause:
                raise ValueError("Empty clauses cannot be padded")
            if len(clause) > width:
                raise ValueError(f"Clause {' '.join(str(literal) for literal in clause)} has more than {width} literals")
            padded.append(tuple(clause[position % len(clause)] for position in range(width)))
        return padded

    def evaluate_matrix(self, assignment: Dict[int, bool]) -> bool:
        def holds(literal):
            return assignment[abs(literal)] == (literal > 0)

        if self.matrix == 'cnf':
            return all(any(holds(literal) for literal in clause) for clause in self.clauses)
        return any(all(holds(literal) for literal in clause) for clause in self.clauses)

    def to_text(self) -> str:
        lines = [f'p {self.matrix} {max(self.variables, default=0)} {len(self.clauses)}']
        for quantifier, variables in self.blocks:
            lines.append(' '.join([quantifier] + [str(variable) for variable in variables] + ['0']))
        for clause in self.clauses:
            lines.append(' '.join([str(literal) for literal in clause] + ['0']))
        return '\n'.join(lines) + '\n'

    def save(self, file_path: str):
        with open(file_path, 'w') as file:
            file.write(self.to_text())


def _integers(words: Sequence[str], number: int) -> List[int]:
    try:
        values = [int(word) for word in words]
    except ValueError:
        raise ParseError(f"Expected integers, found '{' '.join(words)}'", number) from None
    if not values or values[-1] != 0 or 0 in values[:-1]:
        raise ParseError("Lines end with a single 0", number)
    return values[:-1]


def parse_formula(text: str) -> QBFFormula:
    header = None
    blocks = []
    clauses = []
    for number, raw in enumerate(text.splitlines(), start=1):
        words = raw.split()
        if not words or words[0] == 'c':
            continue
        if words[0] == 'p':
            if header is not None:
                raise ParseError("Second header line", number)
            if len(words) != 4 or words[1] not in MATRICES:
                raise ParseError("Expected 'p cnf|dnf <variables> <clauses>'", number)
            try:
                header = (words[1], int(words[2]), int(words[3]))
            except ValueError:
                raise ParseError("The header counts must be integers", number) from None
            continue
        if header is None:
            raise ParseError("The header line must come first", number)
        if words[0] in QUANTIFIERS:
            if clauses:
                raise ParseError("Quantifier lines must precede the clauses", number)
            blocks.append((words[0], tuple(_integers(words[1:], number))))
            continue
        clause = tuple(_integers(words, number))
        for literal in clause:
            if abs(literal) > header[1]:
                raise ParseError(f"Literal {literal} exceeds the declared {header[1]} variables", number)
        clauses.append(clause)
    if header is None:
        raise ParseError("Missing header line")
    matrix, variable_count, clause_count = header
    if len(clauses) != clause_count:
        raise ParseError(f"Header declares {clause_count} clauses, found {len(clauses)}")
    if not blocks:
        blocks = [('e', tuple(range(1, variable_count + 1)))]
    try:
        return QBFFormula(tuple(blocks), tuple(clauses), matrix)
    except ValueError as error:
        raise ParseError(str(error)) from error


def formula_from_file(file_path: str) -> QBFFormula:
    logger.info(f"Loading formula from {file_path}")
    with open(file_path) as file:
        text = file.read()
    try:
        return parse_formula(text)
    except ParseError as error:
        raise error.in_file(file_path) from None


def _check_cap(count: int, cap: int, what: str):
    if count > cap:
        raise OracleCapError(f"{count} {what} exceed the oracle cap of {cap}")


def brute_force_qbf(phi: QBFFormula, cap: int = 16) -> bool:
    """ Evaluates the quantifier prefix by expanding every variable in order """
    _check_cap(len(phi.variables), cap, 'variables')
    order = [(quantifier, variable) for quantifier, variables in phi.blocks for variable in variables]
    assignment = {}

    def value(position: int) -> bool:
        if position == len(order):
            return phi.evaluate_matrix(assignment)
        quantifier, variable = order[position]
        outcomes = []
        for truth in (False, True):
            assignment[variable] = truth
            outcomes.append(value(position + 1))
            if quantifier == 'a' and not outcomes[-1]:
                break
            if quantifier == 'e' and outcomes[-1]:
                break
        del assignment[variable]
        return all(outcomes) if quantifier == 'a' else any(outcomes)

    return value(0)


def brute_force_sat(phi: QBFFormula, cap: int = 16) -> bool:
    """ Whether some assignment satisfies the matrix, ignoring the quantifiers """
    variables = phi.variables
    _check_cap(len(variables), cap, 'variables')
    for truths in itertools.product((False, True), repeat=len(variables)):
        if phi.evaluate_matrix(dict(zip(variables, truths))):
            return True
    return False


def random_formula(rng: random.Random, blocks: Sequence[int], clauses: int, matrix: str = 'cnf',
                   width: int = 3) -> QBFFormula:
    """
    Quantifier blocks of the given sizes alternating from a universal block, and clauses of
    width literals over random variables with random signs
    """
    prefix = []
    next_variable = 1
    for position, size in enumerate(blocks):
        prefix.append((QUANTIFIERS[position % 2], tuple(range(next_variable, next_variable + size))))
        next_variable += size
    variables = list(range(1, next_variable))
    if not variables:
        raise ValueError("A random formula needs at least one variable")
    matrix_clauses = [tuple(rng.choice(variables) * rng.choice((1, -1)) for _ in range(width)) for _ in range(clauses)]
    return QBFFormula(tuple(prefix), tuple(matrix_clauses), matrix)
