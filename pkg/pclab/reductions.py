"""
Generators turning formulas and graphs into queries, instances and policies whose analysis
verdict equals the truth of the input, together with a colouring oracle for graphs.

Truth values appear as the data values "0" and "1" in instances and as the variables w0 and
w1 in queries.
"""
import itertools
import logging
import re
from typing import Dict, List, Sequence, Tuple

import networkx as nx

from pclab.formulas import OracleCapError, QBFFormula
from pclab.policy import ExplicitPolicy
from pclab.query import Atom, ConjunctiveQuery, Instance, atom, fact

logger = logging.getLogger(__name__)

TRUE, FALSE = 'w1', 'w0'
COLOURS = ('r', 'g', 'b')
COLOUR_PAIRS = [(c, d) for c in COLOURS for d in COLOURS if c != d]
PLUS_NODE, MINUS_NODE = 'kplus', 'kminus'

_VERTEX = re.compile(r'[A-Za-z0-9_]+$')


def _require(phi: QBFFormula, matrix: str):
    if phi.matrix != matrix:
        raise ValueError(f"Expected a {matrix} matrix, got {phi.matrix}")


def _names(blocks: Sequence[Sequence[int]], letters: str) -> Dict[int, str]:
    names = {}
    for letter, variables in zip(letters, blocks):
        for position, variable in enumerate(variables, start=1):
            names[variable] = f'{letter}{position}'
    return names


def _literal(literal: int, names: Dict[int, str]) -> str:
    name = names[abs(literal)]
    return name if literal > 0 else 'n' + name


def _truth_constants() -> List[Atom]:
    return [atom('True', TRUE), atom('False', FALSE), atom('Neg', TRUE, FALSE), atom('Neg', FALSE, TRUE)]


def _forall_exists_query(phi: QBFFormula) -> ConjunctiveQuery:
    _require(phi, 'cnf')
    universal, existential = phi.prefix('ae')
    names = _names([universal, existential], 'xy')
    clauses = phi.padded_clauses()

    body = _truth_constants()
    satisfying = [triple for triple in itertools.product((FALSE, TRUE), repeat=3) if TRUE in triple]
    for j in range(1, len(clauses) + 1):
        body.extend(atom(f'C{j}', *triple) for triple in satisfying)
    for variable in universal + existential:
        body.append(atom('Neg', names[variable], 'n' + names[variable]))
    for j, clause in enumerate(clauses, start=1):
        body.append(atom(f'C{j}', *(_literal(literal, names) for literal in clause)))
    head = atom('H', *(names[variable] for variable in universal))
    return ConjunctiveQuery(head, body, 'q_phi')


def _forall_exists_policy(clause_count: int) -> Tuple[Instance, ExplicitPolicy]:
    table = {}
    for f in [fact('True', '1'), fact('False', '0'), fact('Neg', '1', '0'), fact('Neg', '0', '1')]:
        table[f] = [PLUS_NODE]
    for j in range(1, clause_count + 1):
        for bits in itertools.product('01', repeat=3):
            table[fact(f'C{j}', *bits)] = [PLUS_NODE] if '1' in bits else [MINUS_NODE]
    return Instance(table), ExplicitPolicy([PLUS_NODE, MINUS_NODE], table)


def reduce_pi2qbf_to_pci(phi: QBFFormula) -> Tuple[ConjunctiveQuery, Instance, ExplicitPolicy]:
    """
    For a forall-exists formula with a 3-CNF matrix: a query, an instance and a two-node
    policy such that the query is computed correctly on the instance exactly when the
    formula is true. The node kminus holds the falsifying clause facts C_j(0,0,0).
    """
    q = _forall_exists_query(phi)
    instance, policy = _forall_exists_policy(len(phi.clauses))
    logger.info(f"Generated a query with {len(q.body_set)} atoms and an instance of {len(instance)} facts")
    return q, instance, policy


def reduce_pi2qbf_to_pc(phi: QBFFormula) -> Tuple[ConjunctiveQuery, ExplicitPolicy]:
    q, _, policy = reduce_pi2qbf_to_pci(phi)
    return q, policy


def _gates() -> List[Atom]:
    gates = [atom('Neg', FALSE, TRUE), atom('Neg', TRUE, FALSE)]
    for right, left in itertools.product((TRUE, FALSE), repeat=2):
        for last in (TRUE, FALSE):
            output = TRUE if (left, right, last) == (TRUE, TRUE, TRUE) else FALSE
            gates.append(atom('And', left, right, last, output))
    for right, left in itertools.product((TRUE, FALSE), repeat=2):
        gates.append(atom('Or', left, right, TRUE if TRUE in (left, right) else FALSE))
    return gates


def reduce_pi3qbf_to_transfer(phi: QBFFormula) -> Tuple[ConjunctiveQuery, ConjunctiveQuery]:
    """
    For a forall-exists-forall formula with a 3-DNF matrix: a pair (q, q_prime) such that
    parallel-correctness transfers from q to q_prime exactly when the formula is true.

    Both queries fix the universal values of the first block through XVal atoms. q encodes
    the matrix as a circuit of And and Or gates whose output must be 0; q_prime only asks
    for the constant 1 on the output, which q covers when every choice of the first block
    admits values for the second block making the matrix true for all of the third.
    """
    _require(phi, 'dnf')
    xs, ys, zs = phi.prefix('aea')
    if not phi.clauses:
        raise ValueError("The matrix needs at least one clause")
    names = _names([xs, ys, zs], 'xyz')
    x_names = [names[variable] for variable in xs]
    y_names = [names[variable] for variable in ys]

    fix = [atom(f'XVal{g}', name) for g, name in enumerate(x_names, start=1)]
    fix += [atom('True', TRUE), atom('False', FALSE)]

    prime_body = []
    for i in range(1, len(ys) + 1):
        prime_body += [atom(f'YVal{i}', TRUE), atom(f'YVal{i}', FALSE)]
    prime_body += [atom('Res', TRUE)] + fix
    q_prime = ConjunctiveQuery(atom('H', *x_names, TRUE, FALSE), prime_body, 'q_prime_phi')

    circuit = [atom('Neg', names[variable], 'n' + names[variable]) for variable in xs + ys + zs]
    clauses = phi.padded_clauses()
    for j, clause in enumerate(clauses, start=1):
        circuit.append(atom('And', *(_literal(literal, names) for literal in clause), f's{j}'))
    circuit.append(atom('Or', 's1', 's1', 'r1'))
    for j in range(2, len(clauses) + 1):
        circuit.append(atom('Or', f'r{j - 1}', f's{j}', f'r{j}'))

    body = []
    for i, name in enumerate(y_names, start=1):
        body += [atom(f'YVal{i}', name), atom(f'YVal{i}', 'n' + name)]
    body += [atom('Res', FALSE), atom('Res', f'r{len(clauses)}')]
    body += fix + _gates() + circuit
    q = ConjunctiveQuery(atom('H', *x_names, *y_names, TRUE, FALSE), body, 'q_phi')
    logger.info(f"Generated a pair with {len(q.body_set)} and {len(q_prime.body_set)} atoms")
    return q, q_prime


def reduce_3sat_to_strongmin(phi: QBFFormula) -> ConjunctiveQuery:
    """
    For a 3-CNF formula: a query that is strongly minimal exactly when the formula is
    unsatisfiable. The only non-head variables are r0 and r1; a satisfying assignment lets
    a valuation swap them and lose the Struct atoms.
    """
    _require(phi, 'cnf')
    clauses = phi.padded_clauses()
    if not clauses:
        raise ValueError("The formula needs at least one clause")
    occurring = sorted({abs(literal) for clause in clauses for literal in clause})
    names = {variable: f'x{variable}' for variable in occurring}

    def pair(literal: int) -> Tuple[str, str]:
        name = names[abs(literal)]
        return (name, 'n' + name) if literal > 0 else ('n' + name, name)

    body = [atom('Val', 'r0', 'r1'), atom('Val', 'r1', 'r0')]
    for j, clause in enumerate(clauses, start=1):
        for truths in itertools.product((False, True), repeat=3):
            if not any(truths):
                continue
            args = []
            for truth in truths:
                args += [TRUE, FALSE] if truth else [FALSE, TRUE]
            body.append(atom(f'C{j}', TRUE, FALSE, *args))
    for j, clause in enumerate(clauses, start=1):
        args = [arg for literal in clause for arg in pair(literal)]
        body.append(atom(f'C{j}', 'r1', 'r0', *args))
    head_args = [TRUE, FALSE] + [arg for variable in occurring for arg in (names[variable], 'n' + names[variable])]
    return ConjunctiveQuery(atom('H', *head_args), body, 'q_phi')


def graph_from_file(file_path: str) -> nx.Graph:
    """ Reads an edge list, one 'u v' pair per line, '#' starting comments """
    logger.info(f"Loading graph from {file_path}")
    return nx.read_edgelist(file_path, comments='#', nodetype=str)


def _vertex(name) -> str:
    name = str(name)
    if not _VERTEX.match(name):
        raise ValueError(f"Vertex name '{name}' may only use letters, digits and underscores")
    return f'v_{name}'


def _edges(g: nx.Graph) -> List[Tuple[str, str]]:
    """ Every edge once, oriented from the smaller to the larger vertex name """
    edges = set()
    for u, v in g.edges():
        if u == v:
            raise ValueError(f"Self-loop on vertex {u} cannot be coloured")
        left, right = sorted((_vertex(u), _vertex(v)))
        edges.add((left, right))
    return sorted(edges)


def reduce_3col_to_c3_variant1(g: nx.Graph, full_head: bool = False) -> Tuple[ConjunctiveQuery, ConjunctiveQuery]:
    """
    Boolean pair (q, q_prime): q is the coloured triangle pinned by Fix, q_prime adds one E
    atom per edge of g. A certificate exists exactly when g is 3-colourable.
    """
    colours = [atom('E', c, d) for c, d in COLOUR_PAIRS] + [atom('Fix', *COLOURS)]
    graph = [atom('E', u, v) for u, v in _edges(g)]
    q = _closed(colours, full_head, 'q_colours')
    q_prime = ConjunctiveQuery(atom('H'), graph + colours, 'q_graph')
    return q, q_prime


def reduce_3col_to_c3_variant2(g: nx.Graph, full_head: bool = False) -> Tuple[ConjunctiveQuery, ConjunctiveQuery]:
    """
    Boolean pair (q, q_prime) with every edge labelled z1..zm and the labels chained by Fix
    atoms. q_prime has the six coloured E atoms per label; q has the edge itself plus five
    free atoms per label, one for each remaining colour pair.
    """
    edges = _edges(g)
    if len(edges) < 2:
        raise ValueError(f"Needs at least two edges, the graph has {len(edges)}")
    labels = [f'z{i}' for i in range(1, len(edges) + 1)]
    chain = [atom('Fix', labels[i], labels[i + 1], *COLOURS) for i in range(len(labels) - 1)]

    prime_body = [atom('E', z, c, d) for z in labels for c, d in COLOUR_PAIRS] + chain
    body = []
    for i, ((u, v), z) in enumerate(zip(edges, labels), start=1):
        body.append(atom('E', z, u, v))
        body += [atom('E', z, f'u{i}_{k}', f'u{i}_{k + 1}') for k in range(1, 10, 2)]
    q = _closed(body + chain, full_head, 'q_edges')
    q_prime = ConjunctiveQuery(atom('H'), prime_body, 'q_colours')
    return q, q_prime


def _closed(body: List[Atom], full_head: bool, name: str) -> ConjunctiveQuery:
    """ Boolean, or full when the head must list every variable """
    if not full_head:
        return ConjunctiveQuery(atom('H'), body, name)
    variables = list(dict.fromkeys(arg for a in body for arg in a.args))
    return ConjunctiveQuery(atom('H', *variables), body, name)


def brute_force_3col(g: nx.Graph, cap: int = 16) -> bool:
    """ Backtracking over vertices in degree order """
    if g.number_of_nodes() > cap:
        raise OracleCapError(f"{g.number_of_nodes()} vertices exceed the oracle cap of {cap}")
    if nx.number_of_selfloops(g):
        return False
    order = sorted(g.nodes(), key=lambda vertex: (-g.degree(vertex), str(vertex)))
    colouring = {}

    def extend(position: int) -> bool:
        if position == len(order):
            return True
        vertex = order[position]
        for colour in COLOURS:
            if all(colouring.get(neighbour) != colour for neighbour in g.neighbors(vertex)):
                colouring[vertex] = colour
                if extend(position + 1):
                    return True
                del colouring[vertex]
        return False

    return extend(0)
