import logging
import os
from typing import Dict, Tuple

from pclab.parser import instance_from_file, queries_from_file
from pclab.policy import DistributionPolicy, policy_from_file
from pclab.query import ConjunctiveQuery, Instance
from pclab.validation import WorkspaceValidator

logger = logging.getLogger(__name__)


def split_reference(reference: str) -> Tuple[str, str]:
    """
    'queries.cq:chain' names the block chain of queries.cq. A reference without a block
    name, or whose suffix is part of an existing path, refers to the whole file.
    """
    path, separator, name = reference.rpartition(':')
    if not separator or not path or not name or os.path.exists(reference) or os.sep in name:
        return reference, None
    return path, name


class Workspace:
    """
    The queries, instances and policies one command works on, each under a unique name.
    Queries are loaded first so policies can refer to them.
    """

    def __init__(self):
        self.queries: Dict[str, ConjunctiveQuery] = {}
        self.known_queries: Dict[str, ConjunctiveQuery] = {}
        self.instances: Dict[str, Instance] = {}
        self.policies: Dict[str, DistributionPolicy] = {}

    @staticmethod
    def __store__(kind: str, collection: Dict, name: str, item):
        if name in collection:
            raise ValueError(f"A {kind} named '{name}' is already loaded")
        collection[name] = item
        return item

    def load_query(self, reference: str) -> ConjunctiveQuery:
        path, name = split_reference(reference)
        queries = queries_from_file(path)
        if name is None:
            if len(queries) != 1:
                raise ValueError(f"{path} holds {len(queries)} queries; select one with {path}:<name>")
            name, q = next(iter(queries.items()))
        else:
            if name not in queries:
                raise ValueError(f"{path} has no query named '{name}'")
            q = queries[name]
        # Queries that share a file are also available to hypercube policies
        for other, query in queries.items():
            self.known_queries.setdefault(other, query)
        self.known_queries[name] = q
        self.queries[name] = q
        logger.debug(f"Loaded query {name}: {q}")
        return q

    def load_instance(self, path: str) -> Instance:
        return self.__store__('instance', self.instances, path, instance_from_file(path))

    def load_policy(self, path: str) -> DistributionPolicy:
        return self.__store__('policy', self.policies, path, policy_from_file(path, self.known_queries))

    def validate(self):
        return WorkspaceValidator(self.queries, self.instances, self.policies).validate()
