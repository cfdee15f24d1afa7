"""
Deciding parallel-correctness of a query under a distribution policy.

A query is parallel-correct under a policy exactly when the facts required by each of its
minimal valuations meet at some node. Requiring this of every valuation is sufficient but
not necessary.
"""
import itertools
import logging
from typing import FrozenSet, Iterator, List, Optional, Tuple

from pclab.configuration import Configuration
from pclab.matching import homomorphisms, index_facts
from pclab.policy import CofinitePolicy, DistributionPolicy, is_generous_for, meet
from pclab.query import ConjunctiveQuery, Fact, Instance, Valuation, apply_valuation
from pclab.utils import by_text, fresh_values
from pclab.valuations import is_minimal_valuation, minimal_covers

logger = logging.getLogger(__name__)


class PCVerdict:
    """
    The answer to a parallel-correctness question. A failing verdict carries a minimal
    valuation whose facts do not meet and an instance on which the query is not computed
    correctly.
    """

    def __init__(self, holds: bool, witness: Optional[Tuple[Valuation, Instance]] = None):
        self.holds = holds
        self.witness = witness

    def __bool__(self):
        return self.holds

    def __repr__(self):
        return f'PCVerdict(holds={self.holds}, witness={self.witness})'

    def to_json(self) -> dict:
        result = {'holds': self.holds}
        if self.witness is not None:
            valuation, instance = self.witness
            result['witness'] = {
                'valuation': valuation.to_json(),
                'instance': [str(f) for f in instance],
            }
        return result


def check_c0(q: ConjunctiveQuery, p: DistributionPolicy, d) -> bool:
    """ Whether the facts of every valuation into d meet; sufficient for parallel-correctness """
    holds, _ = is_generous_for(p, q, d)
    return holds


def _satisfying(q: ConjunctiveQuery, facts) -> Iterator[Tuple[Valuation, FrozenSet[Fact]]]:
    """ Valuations whose required facts are among facts, one per distinct required set and head """
    seen = set()
    for binding in homomorphisms(q.body, index_facts(facts)):
        v = Valuation(binding)
        head, body = apply_valuation(v, q)
        if (head, body) in seen:
            continue
        seen.add((head, body))
        yield v, body


def _first_failure(q: ConjunctiveQuery, p: DistributionPolicy, facts) -> Optional[Tuple[Valuation, Instance]]:
    for v, body in _satisfying(q, facts):
        if meet(p, body):
            continue
        minimal, _ = is_minimal_valuation(q, v)
        if minimal:
            logger.debug(f"Minimal valuation {v} of {q} needs facts that do not meet")
            return v, Instance(body)
    return None


def _separating_groups(p: CofinitePolicy, exceptions: List[Fact], largest: int) -> Iterator[Tuple[Fact, ...]]:
    """
    Inclusion-minimal sets of exception facts that share no node with each other and with
    the default nodes, smallest first
    """
    found = []
    for size in range(0, min(largest, len(exceptions)) + 1):
        for group in itertools.combinations(exceptions, size):
            if any(set(smaller) <= set(group) for smaller in found):
                continue
            nodes = set(p.default_nodes)
            for f in group:
                nodes &= p.exceptions[f]
            if not nodes:
                found.append(group)
                yield group


def _cofinite_failure(q: ConjunctiveQuery, p: CofinitePolicy) -> Optional[Tuple[Valuation, Instance]]:
    """
    A failing valuation either includes a non-exception fact, so its exception facts must
    avoid the default nodes, or consists of exception facts only, which then avoid the
    default nodes as well. Either way it covers a separating group.
    """
    relations = q.relations()
    exceptions = by_text(f for f in p.exceptions if f.relation in relations)
    pool = sorted({value for f in exceptions for value in f.values})
    fresh = fresh_values(len(q.variables()), pool)
    for group in _separating_groups(p, exceptions, len(q.body_set)):
        logger.debug(f"Looking for minimal valuations covering {', '.join(str(f) for f in group) or 'no exception'}")
        for v in minimal_covers(q, group, pool, fresh):
            _, body = apply_valuation(v, q)
            if not meet(p, body):
                return v, Instance(body)
    return None


def is_parallel_correct(q: ConjunctiveQuery, p: DistributionPolicy) -> PCVerdict:
    """
    Decides parallel-correctness on every instance. Policies with finitely many assigned
    facts are checked on the minimal valuations inside those facts; co-finite policies on
    minimal valuations over the exception values plus as many fresh values as q has variables.
    """
    logger.info(f"Checking parallel-correctness of {q} under a {p.kind} policy")
    if isinstance(p, CofinitePolicy):
        failure = _cofinite_failure(q, p)
    else:
        facts = p.facts()
        if facts is None:
            raise ValueError(f"Cannot decide parallel-correctness under an unbounded {p.kind} policy")
        relations = q.relations()
        failure = _first_failure(q, p, [f for f in facts if f.relation in relations])
    return PCVerdict(failure is None, failure)


PCI_MODES = ('single', 'hereditary')


def is_parallel_correct_on_instance(q: ConjunctiveQuery, i: Instance, p: DistributionPolicy, mode: str = 'single',
                                    configuration: Configuration = None) -> PCVerdict:
    """
    single: the distributed evaluation of q on i equals its central evaluation.
    hereditary: the same holds on every subinstance of i, which is decided on the minimal
    valuations satisfied by i.
    """
    if mode not in PCI_MODES:
        raise ValueError(f"Unknown mode {mode}; choose one of {', '.join(PCI_MODES)}")
    if mode == 'hereditary':
        failure = _first_failure(q, p, i.facts)
        return PCVerdict(failure is None, failure)

    from pclab.simulator import one_round_evaluate
    report = one_round_evaluate(q, p, i, configuration)
    if report.equal:
        return PCVerdict(True)
    missing = by_text(report.missing)[0]
    for v, _ in _satisfying(q, i.facts):
        head, _ = apply_valuation(v, q)
        if head == missing and is_minimal_valuation(q, v)[0]:
            return PCVerdict(False, (v, i))
    raise RuntimeError(f"No valuation derives the missing fact {missing}")
