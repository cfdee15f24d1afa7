import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from pclab.matching import coverings, first_homomorphism, homomorphisms, index_facts
from pclab.query import (Atom, ConjunctiveQuery, Fact, Substitution, Valuation, apply_valuation, compose,
                         is_simplification, substitute)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValuationOrderWitness:
    """ Two valuations deriving the same head fact, the smaller one from strictly fewer facts """
    smaller: Valuation
    larger: Valuation

    def verify(self, q: ConjunctiveQuery) -> bool:
        small_head, small_body = apply_valuation(self.smaller, q)
        large_head, large_body = apply_valuation(self.larger, q)
        return small_head == large_head and small_body < large_body

    def to_json(self) -> dict:
        return {'smaller': self.smaller.to_json(), 'larger': self.larger.to_json()}


@dataclass(frozen=True)
class BoundedDomain:
    """ An ordered, nonempty, finite set of data values """
    values: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(dict.fromkeys(self.values)))
        if not self.values:
            raise ValueError("A bounded domain needs at least one value")

    @classmethod
    def of_size(cls, size: int) -> 'BoundedDomain':
        return cls(tuple(str(value) for value in range(1, size + 1)))

    @property
    def size(self) -> int:
        return len(self.values)


def canonical_key(q: ConjunctiveQuery):
    variables = q.variables()
    return lambda v: tuple(v[variable] for variable in variables)


def _smaller_valuation(q: ConjunctiveQuery, head_binding: Dict[str, str], facts) -> Optional[Dict[str, str]]:
    """ A valuation agreeing with head_binding whose required facts form a strict subset of facts """
    facts = set(facts)
    if first_homomorphism(q.body, index_facts(facts), head_binding) is None:
        return None
    for removed in sorted(facts, key=str):
        found = first_homomorphism(q.body, index_facts(facts - {removed}), head_binding)
        if found is not None:
            return found
    return None


def is_minimal_valuation(q: ConjunctiveQuery, v) -> Tuple[bool, Optional[ValuationOrderWitness]]:
    """
    Decides whether no valuation derives v's head fact from a strict subset of v's required
    facts. Such a valuation only uses values of those facts, so the search stays inside them.
    """
    _, body = apply_valuation(v, q)
    head_binding = {variable: v[variable] for variable in q.head_variables()}
    found = _smaller_valuation(q, head_binding, body)
    if found is None:
        return True, None
    return False, ValuationOrderWitness(Valuation(found), Valuation(v).restrict(q.variables()))


class MinimalValuationSearch:
    """
    Enumerates the minimal valuations of a query whose values come from a fixed list plus
    interchangeable fresh values. Fresh values are used in order, so each pattern of fresh
    values is produced once.

    Head variables are assigned first; afterwards every partial assignment whose completed
    atoms already require strictly more facts than some valuation with the same head is
    abandoned, since no completion of it can be minimal.
    """

    def __init__(self, query: ConjunctiveQuery, values: Iterable[str] = (), fresh: Iterable[str] = ()):
        self.query = query
        self.values = list(dict.fromkeys(values))
        taken = set(self.values)
        self.fresh = [value for value in dict.fromkeys(fresh) if value not in taken]
        self._fresh_index = {value: position for position, value in enumerate(self.fresh)}

    def __plan__(self, assigned) -> Tuple[List[str], List[List[Atom]], List[Atom]]:
        order = [variable for variable in self.query.head_variables() if variable not in assigned]
        placed = set(assigned) | set(order)
        remaining = list(self.query.body)
        while remaining:
            best = min(range(len(remaining)),
                       key=lambda position: len({arg for arg in remaining[position].args if arg not in placed}))
            for arg in remaining.pop(best).args:
                if arg not in placed:
                    placed.add(arg)
                    order.append(arg)
        position_of = {variable: position for position, variable in enumerate(order)}
        completes = [[] for _ in order]
        initial = []
        for a in self.query.body:
            pending = [position_of[arg] for arg in a.args if arg in position_of]
            if pending:
                completes[max(pending)].append(a)
            else:
                initial.append(a)
        return order, completes, initial

    def search(self, binding: Dict[str, str] = None) -> Iterator[Valuation]:
        assignment = dict(binding or {})
        order, completes, initial = self.__plan__(assignment)
        head_variables = self.query.head_variables()
        head_ready = sum(1 for variable in head_variables if variable not in assignment)
        facts = Counter(a.ground(assignment) for a in initial)
        used = max((self._fresh_index[value] + 1 for value in assignment.values() if value in self._fresh_index),
                   default=0)

        def extend(depth: int, used_fresh: int, checked: Optional[int]):
            if depth >= head_ready and facts and len(facts) != checked:
                head_binding = {variable: assignment[variable] for variable in head_variables}
                if _smaller_valuation(self.query, head_binding, facts) is not None:
                    return
                checked = len(facts)
            if depth == len(order):
                yield Valuation(assignment)
                return
            variable = order[depth]
            for value in self.values + self.fresh[:used_fresh + 1]:
                assignment[variable] = value
                added = [a.ground(assignment) for a in completes[depth]]
                facts.update(added)
                position = self._fresh_index.get(value)
                yield from extend(depth + 1, used_fresh if position is None else max(used_fresh, position + 1), checked)
                for f in added:
                    facts[f] -= 1
                    if not facts[f]:
                        del facts[f]
                del assignment[variable]

        yield from extend(0, used, None)


def enumerate_minimal_valuations(q: ConjunctiveQuery, d: BoundedDomain) -> List[Valuation]:
    found = list(MinimalValuationSearch(q, d.values).search())
    logger.debug(f"{len(found)} minimal valuations of {q} over {d.size} values")
    return sorted(found, key=canonical_key(q))


def minimal_covers(q: ConjunctiveQuery, facts: Iterable[Fact], values: Sequence[str] = (),
                   fresh: Sequence[str] = ()) -> Iterator[Valuation]:
    """ Minimal valuations whose required facts include every fact given """
    search = MinimalValuationSearch(q, values, fresh)
    seen = set()
    for binding in coverings(q.body, facts):
        for v in search.search(binding):
            if v not in seen:
                seen.add(v)
                yield v


class _Partition:
    """ Union-find over variables, copied on every branch """

    def __init__(self, parent: Dict[str, str] = None, rank: Dict[str, int] = None):
        self.parent = dict(parent or {})
        self.rank = dict(rank or {})

    def copy(self) -> '_Partition':
        return _Partition(self.parent, self.rank)

    def find(self, variable: str) -> str:
        while self.parent.get(variable, variable) != variable:
            variable = self.parent[variable]
        return variable

    def union(self, left: str, right: str):
        left, right = self.find(left), self.find(right)
        if left == right:
            return
        if self.rank[right] < self.rank[left]:
            left, right = right, left
        self.parent[right] = left

    def image(self, a: Atom):
        return a.relation, tuple(self.find(arg) for arg in a.args)


def _collapsing_partition(q: ConjunctiveQuery, mu: Dict[str, str]) -> Optional[_Partition]:
    """
    Looks for an equality pattern under which mu maps the body into itself while dropping
    at least one atom
    """
    rank = {variable: position for position, variable in enumerate(q.variables())}
    by_relation = defaultdict(list)
    for a in q.body:
        by_relation[a.relation].append(a)
    mapped = [a.substitute(mu) for a in q.body]
    moved = [image for a, image in zip(q.body, mapped) if image != a]

    def strict(partition: _Partition) -> bool:
        images = {partition.image(a) for a in mapped}
        return any(partition.image(a) not in images for a in q.body)

    def search(partition: _Partition, position: int) -> Optional[_Partition]:
        if not strict(partition):
            return None
        if position == len(moved):
            return partition
        target = moved[position]
        candidates = by_relation[target.relation]
        if partition.image(target) in {partition.image(a) for a in candidates}:
            return search(partition, position + 1)
        for a in candidates:
            branch = partition.copy()
            for left, right in zip(target.args, a.args):
                branch.union(left, right)
            found = search(branch, position + 1)
            if found is not None:
                return found
        return None

    return search(_Partition(rank=rank), 0)


def is_strongly_minimal(q: ConjunctiveQuery) -> Tuple[bool, Optional[ValuationOrderWitness]]:
    """
    Decides whether every valuation of q is minimal.

    A smaller valuation only uses values of the larger one, so it can be written as V o mu
    for a substitution mu fixing the head variables. For each such mu the search looks for
    an equality pattern of V under which mu maps the body into the body and loses an atom.
    Queries passing strong_minimality_sufficient are answered without the search.
    """
    if strong_minimality_sufficient(q):
        return True, None
    variables = q.variables()
    movable = q.non_head_variables()
    for targets in itertools.product(variables, repeat=len(movable)):
        mu = {variable: variable for variable in variables}
        mu.update(zip(movable, targets))
        if all(mu[variable] == variable for variable in movable):
            continue
        partition = _collapsing_partition(q, mu)
        if partition is None:
            continue
        values = {}
        for variable in variables:
            values.setdefault(partition.find(variable), str(len(values) + 1))
        larger = Valuation({variable: values[partition.find(variable)] for variable in variables})
        smaller = Valuation({variable: larger[mu[variable]] for variable in variables})
        logger.debug(f"{q} is not strongly minimal: {smaller} < {larger}")
        return False, ValuationOrderWitness(smaller, larger)
    return True, None


def strong_minimality_sufficient(q: ConjunctiveQuery) -> bool:
    """
    A non-head variable at some position of a self-join atom must sit at that position in
    every self-join atom
    """
    atoms = q.self_join_atoms()
    head = set(q.head.args)
    for a in atoms:
        for position, variable in enumerate(a.args):
            if variable in head:
                continue
            if any(len(other.args) <= position or other.args[position] != variable for other in atoms):
                return False
    return True


def enumerate_simplifications(q: ConjunctiveQuery) -> List[Substitution]:
    """ Every substitution fixing the head and mapping the body into itself """
    identity = {variable: variable for variable in q.head_variables()}
    found = [Substitution(h) for h in homomorphisms(q.body, index_facts(q.body), identity)]
    return sorted(found, key=canonical_key(q))


def _merge(q: ConjunctiveQuery) -> Optional[Substitution]:
    """ The first single-variable merge that is a simplification, preferring merges that drop an atom """
    variables = q.variables()
    candidates = []
    for source in sorted(q.non_head_variables()):
        for target in sorted(variables):
            if target == source:
                continue
            theta = Substitution({variable: target if variable == source else variable for variable in variables})
            if is_simplification(theta, q):
                candidates.append(theta)
    if not candidates:
        return None
    size = len(q.body_set)
    shrinking = [theta for theta in candidates if len(substitute(theta, q).body_set) < size]
    return (shrinking or candidates)[0]


def minimize_cq(q: ConjunctiveQuery) -> Tuple[ConjunctiveQuery, Substitution]:
    """
    Computes the core of q together with a folding onto it. Single-variable merges are tried
    first; remaining redundant atoms are removed by mapping the body into itself without them.
    """
    theta = Substitution.identity(q.variables())
    current = q
    while True:
        step = _merge(current)
        if step is None:
            break
        logger.debug(f"Merging with {step}")
        theta = compose(step, theta)
        current = substitute(step, current)

    identity = {variable: variable for variable in q.head_variables()}
    reduced = True
    while reduced:
        reduced = False
        for a in current.body:
            others = [other for other in current.body if other != a]
            h = first_homomorphism(current.body, index_facts(others), identity) if others else None
            if h is not None:
                logger.debug(f"Removing {a} with {Substitution(h)}")
                step = Substitution(h)
                theta = compose(step, theta)
                current = substitute(step, current)
                reduced = True
                break

    # theta permutes the core variables; compose until it fixes them
    core_variables = current.variables()
    permutation = Substitution({variable: theta[variable] for variable in core_variables})
    while any(theta[variable] != variable for variable in core_variables):
        theta = compose(permutation, theta)
    return substitute(theta, q), theta


def is_minimal_cq(q: ConjunctiveQuery) -> bool:
    core, _ = minimize_cq(q)
    return len(core.body_set) == len(q.body_set)


def injective_valuation(q: ConjunctiveQuery, avoid: Iterable[str] = ()) -> Valuation:
    taken = set(avoid)
    values = (str(candidate) for candidate in itertools.count(1) if str(candidate) not in taken)
    return Valuation(dict(zip(q.variables(), values)))


def injective_valuation_minimality_bridge(q: ConjunctiveQuery) -> bool:
    """
    Decides whether q is a minimal query twice: by computing its core, and by testing an
    injective valuation for minimality. Both answers must agree.
    """
    by_core = is_minimal_cq(q)
    by_valuation, _ = is_minimal_valuation(q, injective_valuation(q))
    if by_core != by_valuation:
        raise RuntimeError(f"Minimality of {q} is {by_core} by its core but {by_valuation} by an injective valuation")
    return by_core
