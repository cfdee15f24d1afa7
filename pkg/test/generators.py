import itertools
import random
from typing import List

from pclab.policy import ExplicitPolicy
from pclab.query import ConjunctiveQuery, Fact, atom

VALUES = ('a', 'b', 'c')


def random_query(rng: random.Random, variables: int = 3, atoms: int = 3, relations=('R', 'S'),
                 head_size: int = None) -> ConjunctiveQuery:
    """ A random binary-relation query; head variables are drawn from the body """
    names = [f'x{n}' for n in range(1, variables + 1)]
    body = [atom(rng.choice(relations), rng.choice(names), rng.choice(names)) for _ in range(atoms)]
    used = sorted({arg for a in body for arg in a.args})
    size = rng.randint(0, len(used)) if head_size is None else min(head_size, len(used))
    head = rng.sample(used, size)
    return ConjunctiveQuery(atom('T', *head), body)


def facts_over(relations, values=VALUES) -> List[Fact]:
    return [Fact(relation, combination) for relation in sorted(relations)
            for combination in itertools.product(values, repeat=relation.arity)]


def random_explicit_policy(rng: random.Random, q: ConjunctiveQuery, nodes: int = 3, facts: int = 6,
                           values=('a', 'b')) -> ExplicitPolicy:
    """ A policy over a few facts of q's relations, each fact on a random set of nodes """
    network = [f'k{n}' for n in range(1, nodes + 1)]
    universe = facts_over(q.relations(), values)
    chosen = rng.sample(universe, min(facts, len(universe)))
    table = {}
    for f in chosen:
        table[f] = [node for node in network if rng.random() < 0.5]
    return ExplicitPolicy(network, table)


def gyo_acyclic(q: ConjunctiveQuery) -> bool:
    """
    GYO reduction: repeatedly drop variables occurring in a single atom and atoms whose
    variables are contained in another atom; acyclic when nothing remains
    """
    edges = [set(a.args) for a in q.body]
    changed = True
    while changed:
        changed = False
        for edge in edges:
            lonely = {variable for variable in edge if sum(variable in other for other in edges) == 1}
            if lonely:
                edge -= lonely
                changed = True
        for position, edge in enumerate(edges):
            if any(edge <= other for index, other in enumerate(edges) if index != position):
                del edges[position]
                changed = True
                break
    return len(edges) <= 1


def looped_chain() -> ConjunctiveQuery:
    return ConjunctiveQuery(atom('T', 'x', 'z'), [atom('R', 'x', 'y'), atom('R', 'y', 'z'), atom('R', 'x', 'x')])


def chain() -> ConjunctiveQuery:
    return ConjunctiveQuery(atom('T', 'x', 'z'), [atom('R', 'x', 'y'), atom('R', 'y', 'z')])
