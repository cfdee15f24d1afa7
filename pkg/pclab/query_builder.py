import logging
from typing import Dict, List

from pypika import Criterion, SQLLiteQuery as Query, Table
from pypika.terms import ValueWrapper

from pclab.query import ConjunctiveQuery, column_names

logger = logging.getLogger(__name__)


class QueryBuilder:
    """
    Generic interface for a query builder. Subclass this to translate a conjunctive
    query into the language of another engine.
    """
    def __init__(self, query: ConjunctiveQuery):
        self.query = query

    def create_query(self) -> str:
        raise NotImplementedError


class SqlQueryBuilder(QueryBuilder):
    """
    Translates a conjunctive query into a SELECT DISTINCT over one aliased table per body
    atom. Tables are named after relations and have the columns c0..c{n-1}; a zero-arity
    relation has a single 'present' column.
    """
    def __init__(self, query: ConjunctiveQuery):
        super().__init__(query)
        self.tables = [Table(a.relation.name, alias=f'a{position}') for position, a in enumerate(query.body)]
        logger.debug(f"Query builder using {len(self.tables)} tables for {query}")

    def __bind_variables__(self) -> [Dict[str, object], List[Criterion]]:
        """
        The first occurrence of a variable gives its column; later occurrences
        become equality criteria
        """
        fields = {}
        criteria = []
        for table, a in zip(self.tables, self.query.body):
            for variable, column in zip(a.args, column_names(a.relation)):
                field = table.field(column)
                if variable in fields:
                    criteria.append(fields[variable] == field)
                else:
                    fields[variable] = field
        return fields, criteria

    def create_query(self) -> str:
        fields, criteria = self.__bind_variables__()
        if self.query.is_boolean():
            selections = [ValueWrapper(1, alias='h')]
        else:
            selections = [fields[variable].as_(f'h{position}') for position, variable in enumerate(self.query.head.args)]

        q = Query.from_(self.tables[0])
        for table in self.tables[1:]:
            q = q.from_(table)
        q = q.select(*selections).distinct()
        if criteria:
            q = q.where(Criterion.all(criteria))
        return q.get_sql()
