"""
One-round distributed evaluation, run in-process: distribute an instance, evaluate the
query on every chunk, and compare the union of the local results with the central result.
"""
import itertools
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional

import pandas as pd

from pclab.configuration import Configuration
from pclab.evaluation import evaluator_for
from pclab.policy import Chunking, CofinitePolicy, DistributionPolicy, NodeId, distribute
from pclab.query import ConjunctiveQuery, Fact, Instance
from pclab.utils import by_text, fresh_values

logger = logging.getLogger(__name__)


class RunReport:
    """
    The outcome of a distributed run: the central result, the result of every node, their
    union, and the head facts the nodes missed
    """

    def __init__(self, centralized: Instance, per_node: Dict[NodeId, Instance], chunks: Chunking = None):
        self.centralized = centralized
        self.per_node = per_node
        self.chunks = chunks
        facts = set()
        for result in per_node.values():
            facts.update(result.facts)
        self.union_result = Instance(facts)
        self.missing = frozenset(centralized.facts - self.union_result.facts)
        self.equal = not self.missing and self.union_result == centralized

    def to_text(self) -> str:
        if self.equal:
            lines = ['EQUAL']
        else:
            lines = ['MISSING: ' + ' '.join(str(f) for f in by_text(self.missing))]
        lines.append(f'-- {len(self.centralized)} facts centrally, {len(self.union_result)} facts distributed')
        for node, result in self.per_node.items():
            chunk = len(self.chunks.per_node[node]) if self.chunks is not None else '?'
            derived = ' '.join(str(f) for f in result) or '-'
            lines.append(f'{node} [{chunk} facts]: {derived}')
        return '\n'.join(lines) + '\n'

    def to_json(self) -> dict:
        return {
            'equal': self.equal,
            'missing': [str(f) for f in by_text(self.missing)],
            'centralized': [str(f) for f in self.centralized],
            'per_node': {node: [str(f) for f in result] for node, result in self.per_node.items()},
        }

    def to_data_frame(self) -> pd.DataFrame:
        """ One row per node and derived fact """
        rows = [(node, str(f)) for node, result in self.per_node.items() for f in result]
        return pd.DataFrame(rows, columns=['node', 'fact'])


def one_round_evaluate(q: ConjunctiveQuery, p: DistributionPolicy, i: Instance,
                       configuration: Configuration = None) -> RunReport:
    configuration = configuration or Configuration()
    evaluator = evaluator_for(configuration)
    chunks = distribute(p, i)
    nodes = chunks.nodes()
    if configuration.workers > 1:
        with ThreadPoolExecutor(max_workers=configuration.workers) as executor:
            results = list(executor.map(lambda node: evaluator.evaluate(q, chunks.per_node[node]), nodes))
    else:
        results = [evaluator.evaluate(q, chunks.per_node[node]) for node in nodes]
    report = RunReport(evaluator.evaluate(q, i), dict(zip(nodes, results)), chunks)
    if not report.equal:
        logger.debug(f"Distributed run of {q} misses {len(report.missing)} facts")
    return report


def sample_universe(q: ConjunctiveQuery, p: DistributionPolicy, configuration: Configuration = None) -> List[Fact]:
    """
    The facts random instances are drawn from. Co-finite policies use their exceptions and
    every fact over the exception values plus two fresh values; other policies use the facts
    they assign, restricted to the relations of q.
    """
    configuration = configuration or Configuration()
    relations = q.relations()
    if isinstance(p, CofinitePolicy):
        exceptions = [f for f in p.exceptions if f.relation in relations]
        values = sorted({value for f in exceptions for value in f.values})
        values += fresh_values(2, values)
        universe = set(exceptions)
        for relation in sorted(relations):
            for combination in itertools.product(values, repeat=relation.arity):
                universe.add(Fact(relation, combination))
                if len(universe) > configuration.universe_cap:
                    break
    else:
        facts = p.facts()
        if facts is None:
            raise ValueError(f"Cannot sample instances for an unbounded {p.kind} policy")
        universe = {f for f in facts if f.relation in relations}
    universe = by_text(universe)
    if len(universe) > configuration.universe_cap:
        logger.warning(f"Fact universe of {len(universe)} facts truncated to {configuration.universe_cap}")
        universe = universe[:configuration.universe_cap]
    return universe


def search_counterexample(q: ConjunctiveQuery, p: DistributionPolicy, budget: int = None, seed: int = None,
                          configuration: Configuration = None) -> Optional[Instance]:
    """
    Draws random instances, each fact included with probability 1/2, and returns the first
    one on which the distributed run misses a fact
    """
    configuration = configuration or Configuration()
    budget = configuration.budget if budget is None else budget
    seed = configuration.seed if seed is None else seed
    if budget < 1:
        raise ValueError("The search budget must be at least 1")
    rng = random.Random(seed)
    universe = sample_universe(q, p, configuration)
    logger.info(f"Searching {budget} random instances over {len(universe)} facts")
    for trial in range(budget):
        i = Instance(f for f in universe if rng.random() < 0.5)
        if not one_round_evaluate(q, p, i, configuration).equal:
            logger.info(f"Counterexample found after {trial + 1} trials")
            return i
    return None


def exhaustive_counterexample(q: ConjunctiveQuery, p: DistributionPolicy, universe: Iterable[Fact] = None,
                              configuration: Configuration = None) -> Optional[Instance]:
    """ Tries every subinstance of a finite universe, smallest first """
    if universe is None:
        universe = sample_universe(q, p, configuration)
    universe = by_text(set(universe))
    for size in range(len(universe) + 1):
        for facts in itertools.combinations(universe, size):
            i = Instance(facts)
            if not one_round_evaluate(q, p, i, configuration).equal:
                return i
    return None
