import logging
from typing import Dict, Mapping

from pclab.policy import DistributionPolicy
from pclab.query import ConjunctiveQuery, Instance

logger = logging.getLogger(__name__)


class WorkspaceValidator:
    """
    Checks that the queries, instances and policies loaded together agree on the arity of
    every input relation. Head relations are outputs, so queries may use the same head name
    with different arities.
    """

    def __init__(self,
                 queries: Mapping[str, ConjunctiveQuery],
                 instances: Mapping[str, Instance] = None,
                 policies: Mapping[str, DistributionPolicy] = None
                 ):
        self.queries = queries
        self.instances = instances or {}
        self.policies = policies or {}
        self.errors = []
        self.warnings = []
        self.schema: Dict[str, int] = {}
        self.origin: Dict[str, str] = {}

    def __record__(self, relation: str, arity: int, source: str):
        known = self.schema.get(relation)
        if known is None:
            self.schema[relation] = arity
            self.origin[relation] = source
        elif known != arity:
            self.errors.append(f"Validation error: {relation} has arity {arity} in {source} "
                               f"but {known} in {self.origin[relation]}")

    def __head_relations__(self):
        return {q.head.relation.name for q in self.queries.values()}

    def check_queries(self):
        """ Body relations must have one arity across all queries """
        for name, q in self.queries.items():
            for relation, arity in sorted(q.schema().items()):
                self.__record__(relation, arity, f"query '{name}'")

    def check_instances(self):
        heads = self.__head_relations__()
        for name, i in self.instances.items():
            for relation, arity in sorted(i.schema().items()):
                self.__record__(relation, arity, f"instance '{name}'")
                if relation in heads:
                    self.warnings.append(f"Validation warning: instance '{name}' has facts over the head relation {relation}")
            if self.queries and not any(q.schema().keys() & i.schema().keys() for q in self.queries.values()):
                self.warnings.append(f"Validation warning: instance '{name}' shares no relation with any query")

    def check_policies(self):
        for name, p in self.policies.items():
            facts = getattr(p, 'table', None) or getattr(p, 'exceptions', None) or {}
            for f in facts:
                self.__record__(f.relation.name, f.relation.arity, f"policy '{name}'")

    def validate(self):
        """
        Runs every check, logs the findings and raises ValueError when an error was found
        :return: True if no validation errors are found
        """
        self.check_queries()
        self.check_instances()
        self.check_policies()
        for warning in self.warnings:
            logger.warning(warning)
        for validation_error in self.errors:
            logger.error(validation_error)
        if len(self.errors) != 0:
            raise ValueError("Workspace validation failed - check the logs for details")
        return True
