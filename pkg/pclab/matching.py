"""
Backtracking search for homomorphisms from atoms into ground tuples.

Targets are anything with a relation and terms: facts, or atoms whose variables
are treated as constants (used when mapping one query into another).
"""
import logging
from collections import Counter, defaultdict
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence

import networkx as nx
from networkx.algorithms import bipartite

logger = logging.getLogger(__name__)


def index_facts(facts: Iterable) -> Dict:
    """ Groups targets by relation, each group in printed order """
    index = defaultdict(list)
    for target in sorted(facts, key=str):
        index[target.relation].append(target)
    return index


def match(args: Sequence[str], terms: Sequence[str], assignment: Mapping) -> Optional[Dict[str, str]]:
    """ New bindings under which args map onto terms, or None on a clash """
    new = {}
    for arg, term in zip(args, terms):
        bound = assignment.get(arg)
        if bound is None:
            bound = new.get(arg)
        if bound is None:
            new[arg] = term
        elif bound != term:
            return None
    return new


def homomorphisms(atoms: Sequence, index: Mapping, binding: Mapping = None) -> Iterator[Dict[str, str]]:
    """
    Yields every extension of binding that maps each atom onto a target in the index.
    The most constrained atom is matched first.
    """
    assignment = dict(binding or {})
    yield from _extend(list(atoms), index, assignment)


def _extend(remaining: List, index: Mapping, assignment: Dict[str, str]):
    if not remaining:
        yield dict(assignment)
        return
    best = None
    best_matches = None
    for position, a in enumerate(remaining):
        matches = []
        for target in index.get(a.relation, ()):
            new = match(a.args, target.terms, assignment)
            if new is not None:
                matches.append(new)
        if best_matches is None or len(matches) < len(best_matches):
            best, best_matches = position, matches
            if not matches:
                return
    rest = remaining[:best] + remaining[best + 1:]
    for new in best_matches:
        assignment.update(new)
        yield from _extend(rest, index, assignment)
        for variable in new:
            del assignment[variable]


def first_homomorphism(atoms: Sequence, index: Mapping, binding: Mapping = None) -> Optional[Dict[str, str]]:
    return next(homomorphisms(atoms, index, binding), None)


def _signature(position: int, a, assignment: Mapping, private: set):
    """
    Atoms whose unbound arguments are all private variables are interchangeable when
    their relation and bound arguments agree; such atoms share a signature.
    """
    shape = []
    for arg in a.args:
        if arg in assignment:
            shape.append(('bound', assignment[arg]))
        elif arg in private:
            shape.append(('free', a.args.index(arg)))
        else:
            return 'atom', position
    return a.relation, tuple(shape)


def _matchable(options: Mapping) -> bool:
    """ Every remaining target needs its own atom """
    if len(options) < 2:
        return True
    graph = nx.Graph()
    targets = [('target', n) for n in range(len(options))]
    graph.add_nodes_from(targets)
    for n, candidates in enumerate(options.values()):
        for position, _ in candidates:
            graph.add_edge(('target', n), ('atom', position))
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=targets)
    return sum(1 for node in targets if node in matching) == len(targets)


def coverings(atoms: Sequence, targets: Iterable, binding: Mapping = None) -> Iterator[Dict[str, str]]:
    """
    Yields partial bindings of the atoms' variables under which every target is the
    image of some atom. Only variables of atoms used for covering get bound; each
    distinct binding is yielded once.
    """
    atoms = list(atoms)
    targets = sorted(set(targets), key=str)
    occurrences = Counter(arg for a in atoms for arg in set(a.args))
    private = {arg for arg, count in occurrences.items() if count == 1}
    assignment = dict(binding or {})
    seen = set()
    used = set()

    def candidates(target):
        found = []
        for position, a in enumerate(atoms):
            if position in used or a.relation != target.relation:
                continue
            new = match(a.args, target.terms, assignment)
            if new is not None:
                found.append((position, new))
        return found

    def extend(remaining):
        if not remaining:
            key = frozenset(assignment.items())
            if key not in seen:
                seen.add(key)
                yield dict(assignment)
            return
        options = {target: candidates(target) for target in remaining}
        if any(not found for found in options.values()) or not _matchable(options):
            return
        target = min(remaining, key=lambda t: len(options[t]))
        rest = [t for t in remaining if t != target]
        tried = set()
        for position, new in options[target]:
            signature = _signature(position, atoms[position], assignment, private)
            if signature in tried:
                continue
            tried.add(signature)
            assignment.update(new)
            used.add(position)
            yield from extend(rest)
            used.discard(position)
            for variable in new:
                del assignment[variable]

    yield from extend(targets)
