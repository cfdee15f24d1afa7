"""
Distribution policies: total maps from facts to sets of nodes of a network.

A fact mapped to the empty set is skipped. Policies come as explicit tables, as co-finite
tables with a default node set, as Hypercube rules derived from a query and one hash
function per variable, and as user callbacks over a finite fact universe.
"""
import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from pclab.matching import coverings, match
from pclab.parser import ParseError, parse_policy_statements
from pclab.query import ConjunctiveQuery, Fact, Instance, Valuation, apply_valuation
from pclab.utils import by_text

logger = logging.getLogger(__name__)

NodeId = str

SKIP = '-'


def _network(nodes: Iterable[NodeId]) -> Tuple[NodeId, ...]:
    network = tuple(dict.fromkeys(nodes))
    if not network:
        raise ValueError("A network needs at least one node")
    for node in network:
        if not node or any(character.isspace() for character in node) or node in (SKIP, '@'):
            raise ValueError(f"Invalid node id '{node}'")
    return network


def _node_line(nodes: Iterable[NodeId], network: Tuple[NodeId, ...]) -> str:
    ordered = [node for node in network if node in set(nodes)]
    return ' '.join(ordered) if ordered else SKIP


class DistributionPolicy:
    """
    Generic interface for a distribution policy. Subclasses decide which nodes a fact
    is sent to.
    """
    kind = None

    def __init__(self, network: Iterable[NodeId]):
        self.network = _network(network)

    def resolve(self, f: Fact) -> FrozenSet[NodeId]:
        raise NotImplementedError

    def facts(self) -> Optional[FrozenSet[Fact]]:
        """ The facts sent to at least one node, or None when there are infinitely many """
        raise NotImplementedError

    def is_skipping(self) -> bool:
        """ Whether some fact is sent nowhere """
        return True

    def to_text(self) -> str:
        raise NotImplementedError

    def to_explicit(self, universe: Iterable[Fact] = None) -> 'ExplicitPolicy':
        if universe is None:
            universe = self.facts()
            if universe is None:
                raise ValueError("A fact universe is needed to tabulate an unbounded policy")
        return ExplicitPolicy(self.network, {f: self.resolve(f) for f in universe})

    def save(self, file_path: str):
        with open(file_path, 'w') as file:
            file.write(self.to_text())

    def _check_nodes(self, nodes: Iterable[NodeId], context) -> FrozenSet[NodeId]:
        nodes = frozenset(nodes)
        unknown = nodes - set(self.network)
        if unknown:
            raise ValueError(f"{context} is assigned to nodes outside the network: {', '.join(sorted(unknown))}")
        return nodes


class ExplicitPolicy(DistributionPolicy):
    """ A finite table; facts without an entry are skipped """
    kind = 'explicit'

    def __init__(self, network: Iterable[NodeId], table: Mapping[Fact, Iterable[NodeId]]):
        super().__init__(network)
        self.table: Dict[Fact, FrozenSet[NodeId]] = {f: self._check_nodes(nodes, f) for f, nodes in table.items()}

    def resolve(self, f: Fact) -> FrozenSet[NodeId]:
        return self.table.get(f, frozenset())

    def facts(self) -> FrozenSet[Fact]:
        return frozenset(f for f, nodes in self.table.items() if nodes)

    def to_text(self) -> str:
        lines = ['network ' + ' '.join(self.network)]
        for f in by_text(self.table):
            lines.append(f'{f} @ {_node_line(self.table[f], self.network)}')
        return '\n'.join(lines) + '\n'


class CofinitePolicy(DistributionPolicy):
    """ Facts listed as exceptions go to their own nodes, every other fact to the default nodes """
    kind = 'cofinite'

    def __init__(self, network: Iterable[NodeId], default_nodes: Iterable[NodeId],
                 exceptions: Mapping[Fact, Iterable[NodeId]] = None):
        super().__init__(network)
        self.default_nodes = self._check_nodes(default_nodes, 'The default')
        self.exceptions: Dict[Fact, FrozenSet[NodeId]] = {f: self._check_nodes(nodes, f)
                                                          for f, nodes in (exceptions or {}).items()}

    def resolve(self, f: Fact) -> FrozenSet[NodeId]:
        return self.exceptions.get(f, self.default_nodes)

    def facts(self) -> Optional[FrozenSet[Fact]]:
        if self.default_nodes:
            return None
        return frozenset(f for f, nodes in self.exceptions.items() if nodes)

    def is_skipping(self) -> bool:
        return not self.default_nodes or any(not nodes for nodes in self.exceptions.values())

    def to_text(self) -> str:
        lines = ['network ' + ' '.join(self.network),
                 f'default @ {_node_line(self.default_nodes, self.network)}']
        for f in by_text(self.exceptions):
            lines.append(f'{f} @ {_node_line(self.exceptions[f], self.network)}')
        return '\n'.join(lines) + '\n'


class HypercubePolicy(DistributionPolicy):
    """
    The Hypercube distribution of a query. Every variable has a hash function given as a
    finite table; nodes are the addresses in the product of the hash images, one coordinate
    per variable in query order. A fact is sent to every address that agrees with the hashed
    values of some body atom it instantiates; coordinates of variables outside that atom
    range over all buckets.
    """
    kind = 'hypercube'

    def __init__(self, query: ConjunctiveQuery, hash_functions: Mapping[str, Mapping[str, str]]):
        self.query = query
        self.variables = query.variables()
        missing = [variable for variable in self.variables if variable not in hash_functions]
        if missing:
            raise ValueError(f"No hash function for {', '.join(missing)}")
        extra = sorted(set(hash_functions) - set(self.variables))
        if extra:
            raise ValueError(f"Hash functions for variables outside the query: {', '.join(extra)}")
        self.hash_functions = {variable: dict(hash_functions[variable]) for variable in self.variables}
        for variable, table in self.hash_functions.items():
            if not table:
                raise ValueError(f"The hash function for {variable} is empty")
        self.buckets = {variable: sorted(set(table.values())) for variable, table in self.hash_functions.items()}
        self.addresses: Dict[NodeId, Tuple[str, ...]] = {}
        for address in itertools.product(*(self.buckets[variable] for variable in self.variables)):
            self.addresses[self.node_for(address)] = address
        super().__init__(self.addresses)

    @staticmethod
    def node_for(address: Iterable[str]) -> NodeId:
        return '(' + ','.join(address) + ')'

    def resolve(self, f: Fact) -> FrozenSet[NodeId]:
        nodes = set()
        for a in self.query.body:
            if a.relation != f.relation:
                continue
            binding = match(a.args, f.values, {})
            if binding is None:
                continue
            outside = [variable for variable, value in binding.items() if value not in self.hash_functions[variable]]
            if outside:
                logger.warning(f"{f} has values outside the hash domain of {', '.join(sorted(outside))}; "
                               f"the rule for {a} skips it")
                continue
            coordinates = [[self.hash_functions[variable][binding[variable]]] if variable in binding
                           else self.buckets[variable] for variable in self.variables]
            nodes.update(self.node_for(address) for address in itertools.product(*coordinates))
        return frozenset(nodes)

    def facts(self) -> FrozenSet[Fact]:
        found = set()
        for a in self.query.body:
            variables = a.variables()
            domains = [sorted(self.hash_functions[variable]) for variable in variables]
            for values in itertools.product(*domains):
                found.add(a.ground(dict(zip(variables, values))))
        return frozenset(found)

    def address_valuation(self, node: NodeId) -> Valuation:
        """ The valuation sending every variable to its bucket at this address """
        return Valuation(dict(zip(self.variables, self.addresses[node])))

    def to_text(self) -> str:
        lines = [f'hypercube for {self.query.name or "q"}']
        for variable in self.variables:
            table = self.hash_functions[variable]
            lines.append(f'hash {variable} : ' + ' '.join(f'{value}->{table[value]}' for value in sorted(table)))
        return '\n'.join(lines) + '\n'


class CallbackPolicy(DistributionPolicy):
    """
    A policy computed by a user function on a finite universe of facts; facts outside the
    universe are skipped
    """
    kind = 'callback'

    def __init__(self, network: Iterable[NodeId], assign: Callable[[Fact], Iterable[NodeId]],
                 universe: Iterable[Fact]):
        super().__init__(network)
        self.assign = assign
        self.universe = frozenset(universe)

    def resolve(self, f: Fact) -> FrozenSet[NodeId]:
        if f not in self.universe:
            return frozenset()
        return self._check_nodes(self.assign(f), f)

    def facts(self) -> FrozenSet[Fact]:
        return frozenset(f for f in self.universe if self.resolve(f))

    def to_text(self) -> str:
        return self.to_explicit(self.universe).to_text()


Policy = Union[ExplicitPolicy, CofinitePolicy, HypercubePolicy, CallbackPolicy]


def hypercube_policy(q: ConjunctiveQuery, hash_functions: Mapping[str, Mapping[str, str]]) -> HypercubePolicy:
    return HypercubePolicy(q, hash_functions)


def random_hypercube_policy(q: ConjunctiveQuery, values: Iterable[str], shares: Union[int, Mapping[str, int]] = 2,
                            seed: int = 0) -> HypercubePolicy:
    """ Hashes every value into one of shares buckets per variable, at random but reproducibly """
    rng = random.Random(seed)
    values = sorted(set(values))
    hash_functions = {}
    for variable in q.variables():
        share = shares if isinstance(shares, int) else shares.get(variable, 1)
        if share < 1:
            raise ValueError(f"The share of {variable} must be at least 1")
        hash_functions[variable] = {value: str(rng.randrange(share)) for value in values}
    return HypercubePolicy(q, hash_functions)


def scattered_witness_policy(q: ConjunctiveQuery, i: Instance) -> HypercubePolicy:
    """
    The Hypercube policy with identity hash functions over adom(i): the chunk of i at an
    address is contained in the facts required by the valuation reading the address.
    """
    if not len(i):
        raise ValueError("A scattered policy needs a nonempty instance")
    values = sorted(i.adom())
    return HypercubePolicy(q, {variable: {value: value for value in values} for variable in q.variables()})


@dataclass
class Chunking:
    """ The facts of an instance held by each node """
    per_node: Dict[NodeId, Instance] = field(default_factory=dict)

    def nodes(self) -> List[NodeId]:
        return list(self.per_node)

    def union(self) -> Instance:
        facts = set()
        for chunk in self.per_node.values():
            facts.update(chunk.facts)
        return Instance(facts)


def distribute(p: DistributionPolicy, i: Instance) -> Chunking:
    assigned = {node: [] for node in p.network}
    for f in i:
        for node in p.resolve(f):
            assigned[node].append(f)
    return Chunking({node: Instance(facts) for node, facts in assigned.items()})


def meet(p: DistributionPolicy, facts: Iterable[Fact]) -> FrozenSet[NodeId]:
    """ The nodes receiving every one of the facts; the whole network for no facts """
    nodes = frozenset(p.network)
    for f in facts:
        nodes = nodes & p.resolve(f)
        if not nodes:
            break
    return nodes


def is_generous_for(p: DistributionPolicy, q: ConjunctiveQuery, d) -> Tuple[bool, Optional[Valuation]]:
    """ Whether the facts required by every valuation of q into d meet at some node """
    variables = q.variables()
    values = d.values if hasattr(d, 'values') else tuple(d)
    tried = set()
    for assignment in itertools.product(values, repeat=len(variables)):
        v = Valuation(dict(zip(variables, assignment)))
        _, body = apply_valuation(v, q)
        if body in tried:
            continue
        tried.add(body)
        if not meet(p, body):
            return False, v
    return True, None


def is_scattered_for(p: DistributionPolicy, q: ConjunctiveQuery, i: Instance) -> Tuple[bool, Optional[NodeId]]:
    """ Whether every chunk of i fits inside the facts required by a single valuation of q """
    for node, chunk in distribute(p, i).per_node.items():
        if len(chunk) and next(coverings(q.body, chunk.facts), None) is None:
            return False, node
    return True, None


def parse_policy(text: str, queries: Mapping[str, ConjunctiveQuery] = None) -> DistributionPolicy:
    """
    Reads the line-based policy format. Hypercube policies name their query, which is looked
    up in queries.
    """
    network = None
    default = None
    table = {}
    hypercube = None
    hash_functions = {}
    for kind, content, line in parse_policy_statements(text):
        if kind == 'network':
            if network is not None:
                raise ParseError("The network is declared twice", line)
            network = content
        elif kind == 'hypercube':
            if not queries or content not in queries:
                raise ParseError(f"Unknown query '{content}'", line)
            hypercube = queries[content]
        elif kind == 'hash':
            variable, entries = content
            if variable in hash_functions:
                raise ParseError(f"Second hash function for {variable}", line)
            hash_functions[variable] = dict(entries)
        elif kind == 'default':
            if default is not None:
                raise ParseError("The default is declared twice", line)
            default = content or []
        else:
            f, nodes = content
            if f in table:
                raise ParseError(f"{f} is listed twice", line)
            table[f] = nodes or []

    try:
        if hypercube is not None:
            if network is not None or default is not None or table:
                raise ParseError("A hypercube policy only has hash lines")
            return HypercubePolicy(hypercube, hash_functions)
        if hash_functions:
            raise ParseError("Hash lines need a 'hypercube for' line")
        if network is None:
            raise ParseError("Missing 'network' line")
        if default is not None:
            return CofinitePolicy(network, default, table)
        return ExplicitPolicy(network, table)
    except ParseError:
        raise
    except ValueError as error:
        raise ParseError(str(error)) from error


def policy_from_file(file_path: str, queries: Mapping[str, ConjunctiveQuery] = None) -> DistributionPolicy:
    logger.info(f"Loading policy from {file_path}")
    with open(file_path) as file:
        text = file.read()
    try:
        return parse_policy(text, queries)
    except ParseError as error:
        raise error.in_file(file_path) from None
