import logging
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import pandas as pd

logger = logging.getLogger(__name__)

PRESENT_COLUMN = 'present'


class SchemaError(ValueError):
    """ Raised when relation names are used inconsistently or a query is not well-formed """


@dataclass(frozen=True, order=True)
class RelationName:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("A relation name cannot be empty")
        if self.arity < 0:
            raise ValueError(f"Relation {self.name} has a negative arity")

    def __str__(self):
        return f'{self.name}/{self.arity}'


@dataclass(frozen=True)
class Atom:
    """ A relation name applied to a sequence of variables """
    relation: RelationName
    args: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'args', tuple(self.args))
        if len(self.args) != self.relation.arity:
            raise SchemaError(f"{self.relation.name} expects {self.relation.arity} arguments, got {len(self.args)}")

    @property
    def terms(self) -> Tuple[str, ...]:
        return self.args

    def variables(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(self.args))

    def substitute(self, mapping: Mapping) -> 'Atom':
        return Atom(self.relation, tuple(mapping[arg] for arg in self.args))

    def ground(self, mapping: Mapping) -> 'Fact':
        return Fact(self.relation, tuple(mapping[arg] for arg in self.args))

    def __str__(self):
        return f"{self.relation.name}({','.join(self.args)})"


@dataclass(frozen=True)
class Fact:
    """ A relation name applied to a sequence of data values """
    relation: RelationName
    values: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(self.values))
        if len(self.values) != self.relation.arity:
            raise SchemaError(f"{self.relation.name} expects {self.relation.arity} values, got {len(self.values)}")

    @property
    def terms(self) -> Tuple[str, ...]:
        return self.values

    def rename(self, mapping: Mapping) -> 'Fact':
        return Fact(self.relation, tuple(mapping.get(value, value) for value in self.values))

    def __str__(self):
        return f"{self.relation.name}({','.join(self.values)})"


def atom(name: str, *args: str) -> Atom:
    return Atom(RelationName(name, len(args)), args)


def fact(name: str, *values: str) -> Fact:
    return Fact(RelationName(name, len(values)), values)


def _check_arities(items: Iterable, schema: Dict[str, int] = None) -> Dict[str, int]:
    schema = {} if schema is None else schema
    for item in items:
        relation = item.relation
        known = schema.setdefault(relation.name, relation.arity)
        if known != relation.arity:
            raise SchemaError(f"Arity conflict for {relation.name}: used with {known} and {relation.arity} arguments")
    return schema


class Instance:
    """
    A finite set of facts over one schema. Instances are immutable and compare by their facts.
    """

    def __init__(self, facts: Iterable[Fact] = ()):
        self._facts: FrozenSet[Fact] = frozenset(facts)
        self._schema = _check_arities(self._facts)

    @property
    def facts(self) -> FrozenSet[Fact]:
        return self._facts

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.sorted())

    def __len__(self):
        return len(self._facts)

    def __contains__(self, item):
        return item in self._facts

    def __eq__(self, other):
        if isinstance(other, Instance):
            return self._facts == other._facts
        return NotImplemented

    def __hash__(self):
        return hash(self._facts)

    def __repr__(self):
        return 'Instance({' + ', '.join(str(f) for f in self.sorted()) + '})'

    def sorted(self) -> List[Fact]:
        return sorted(self._facts, key=str)

    def schema(self) -> Dict[str, int]:
        return dict(self._schema)

    def adom(self) -> FrozenSet[str]:
        return frozenset(value for f in self._facts for value in f.values)

    def union(self, other: 'Instance') -> 'Instance':
        return Instance(self._facts | other.facts)

    def issubset(self, other: 'Instance') -> bool:
        return self._facts <= other.facts

    def rename(self, mapping: Mapping) -> 'Instance':
        """ Applies a map on data values; values outside the map are kept """
        return Instance(f.rename(mapping) for f in self._facts)

    def to_text(self) -> str:
        return ''.join(str(f) + '\n' for f in self.sorted())

    def save(self, file_path: str):
        with open(file_path, 'w') as file:
            file.write(self.to_text())

    def to_data_frames(self) -> Dict[str, pd.DataFrame]:
        """
        One DataFrame per relation with columns c0..c{n-1}; zero-arity relations get a
        single 'present' column holding one row when the fact is in the instance
        """
        rows = defaultdict(list)
        relations = {}
        for f in self.sorted():
            rows[f.relation.name].append(f.values if f.values else ('1',))
            relations[f.relation.name] = f.relation
        return {name: pd.DataFrame(rows[name], columns=column_names(relation))
                for name, relation in relations.items()}


def column_names(relation: RelationName) -> List[str]:
    if relation.arity == 0:
        return [PRESENT_COLUMN]
    return [f'c{position}' for position in range(relation.arity)]


class _Assignment(Mapping):
    """ An immutable map from variables, hashable and comparable with plain dicts """

    def __init__(self, mapping: Optional[Mapping] = None):
        self._mapping = dict(mapping or {})

    def __getitem__(self, key):
        return self._mapping[key]

    def __iter__(self):
        return iter(self._mapping)

    def __len__(self):
        return len(self._mapping)

    def __hash__(self):
        return hash(frozenset(self._mapping.items()))

    def __str__(self):
        return '{' + ', '.join(f'{key}->{self._mapping[key]}' for key in sorted(self._mapping)) + '}'

    def __repr__(self):
        return f'{type(self).__name__}({self})'

    def restrict(self, variables: Iterable[str]):
        return type(self)({variable: self._mapping[variable] for variable in variables})

    def to_json(self) -> Dict[str, str]:
        return {key: self._mapping[key] for key in sorted(self._mapping)}


class Valuation(_Assignment):
    """ A total map from the variables of a query to data values """


class Substitution(_Assignment):
    """ A map from variables to variables """

    @classmethod
    def identity(cls, variables: Iterable[str]) -> 'Substitution':
        return cls({variable: variable for variable in variables})

    def is_idempotent(self) -> bool:
        return all(self.get(target, target) == target for target in self.values())


def compose(outer: _Assignment, inner: Substitution) -> _Assignment:
    """ (outer o inner)(x) = outer(inner(x)), of the same kind as outer """
    missing = sorted({target for target in inner.values() if target not in outer})
    if missing:
        raise ValueError(f"Cannot compose: {', '.join(missing)} outside the domain of the outer map")
    return type(outer)({variable: outer[target] for variable, target in inner.items()})


class ConjunctiveQuery:
    """
    A conjunctive query head <- body over variables only. The body is a set: duplicate
    atoms collapse, textual order is kept for deterministic output.
    """

    def __init__(self, head: Atom, body: Iterable[Atom], name: str = None):
        self._head = head
        self._body: Tuple[Atom, ...] = tuple(dict.fromkeys(body))
        self._name = name
        self.__validate__()

    def __validate__(self):
        if not self._body:
            raise SchemaError("A query needs a nonempty body")
        schema = _check_arities(self._body)
        if self._head.relation.name in schema:
            raise SchemaError(f"Head relation {self._head.relation.name} also occurs in the body")
        body_variables = {variable for a in self._body for variable in a.args}
        for variable in self._head.args:
            if variable not in body_variables:
                raise SchemaError(f"Unsafe head variable {variable}")

    @property
    def head(self) -> Atom:
        return self._head

    @property
    def body(self) -> Tuple[Atom, ...]:
        return self._body

    @property
    def body_set(self) -> FrozenSet[Atom]:
        return frozenset(self._body)

    @property
    def name(self) -> Optional[str]:
        return self._name

    def named(self, name: str) -> 'ConjunctiveQuery':
        return ConjunctiveQuery(self._head, self._body, name)

    def variables(self) -> Tuple[str, ...]:
        """ Variables in order of first occurrence, head first """
        ordered = list(self._head.args)
        for a in self._body:
            ordered.extend(a.args)
        return tuple(dict.fromkeys(ordered))

    def head_variables(self) -> Tuple[str, ...]:
        return self._head.variables()

    def non_head_variables(self) -> Tuple[str, ...]:
        head = set(self._head.args)
        return tuple(variable for variable in self.variables() if variable not in head)

    def relations(self) -> FrozenSet[RelationName]:
        return frozenset(a.relation for a in self._body)

    def schema(self) -> Dict[str, int]:
        return {relation.name: relation.arity for relation in self.relations()}

    def is_full(self) -> bool:
        return not self.non_head_variables()

    def is_boolean(self) -> bool:
        return self._head.relation.arity == 0

    def self_join_atoms(self) -> Tuple[Atom, ...]:
        counts = defaultdict(int)
        for a in self._body:
            counts[a.relation] += 1
        return tuple(a for a in self._body if counts[a.relation] > 1)

    def __eq__(self, other):
        if isinstance(other, ConjunctiveQuery):
            return self._head == other.head and self.body_set == other.body_set
        return NotImplemented

    def __hash__(self):
        return hash((self._head, self.body_set))

    def __str__(self):
        return f"{self._head} :- {', '.join(str(a) for a in self._body)}."

    def __repr__(self):
        return f'ConjunctiveQuery({self})'

    def to_text(self) -> str:
        if self._name:
            return f'query {self._name} {{ {self} }}\n'
        return f'{self}\n'

    def save(self, file_path: str):
        with open(file_path, 'w') as file:
            file.write(self.to_text())


def apply_valuation(v: Mapping, q: ConjunctiveQuery) -> Tuple[Fact, FrozenSet[Fact]]:
    """ Returns (V(head), V(body)), the body as a set """
    missing = [variable for variable in q.variables() if variable not in v]
    if missing:
        raise ValueError(f"Valuation is not total: no value for {', '.join(missing)}")
    return q.head.ground(v), frozenset(a.ground(v) for a in q.body)


def substitute(theta: Mapping, q: ConjunctiveQuery) -> ConjunctiveQuery:
    return ConjunctiveQuery(q.head.substitute(theta), (a.substitute(theta) for a in q.body), q.name)


def is_simplification(theta: Mapping, q: ConjunctiveQuery) -> bool:
    if any(variable not in theta for variable in q.variables()):
        return False
    if q.head.substitute(theta) != q.head:
        return False
    body = q.body_set
    return all(a.substitute(theta) in body for a in q.body)


def is_folding(theta: Mapping, q: ConjunctiveQuery) -> bool:
    if not is_simplification(theta, q):
        return False
    return all(theta.get(theta[variable], theta[variable]) == theta[variable] for variable in q.variables())
