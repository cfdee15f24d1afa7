"""
Evaluation of conjunctive queries on instances.

evaluate() is the reference semantics: the set of head facts derived by every valuation
satisfying the body. The DataFrame and SQL evaluators compute the same set through
pandas merges and through SQLite, and are selected with Configuration.evaluator.
"""
import logging
from typing import Dict

import pandas as pd
from sqlalchemy import create_engine

from pclab.configuration import Configuration
from pclab.matching import homomorphisms, index_facts
from pclab.query import ConjunctiveQuery, Fact, Instance, SchemaError, column_names
from pclab.query_builder import SqlQueryBuilder

logger = logging.getLogger(__name__)


def check_schema(q: ConjunctiveQuery, i: Instance):
    schema = i.schema()
    for name, arity in q.schema().items():
        if schema.get(name, arity) != arity:
            raise SchemaError(f"{name} has arity {arity} in the query but {schema[name]} in the instance")
    if q.head.relation.name in schema:
        logger.debug(f"Head relation {q.head.relation.name} also occurs in the instance")


def evaluate(q: ConjunctiveQuery, i: Instance) -> Instance:
    check_schema(q, i)
    index = index_facts(i.facts)
    return Instance(q.head.ground(v) for v in homomorphisms(q.body, index))


class Evaluator:
    """
    Generic interface for an evaluator. Subclass this to evaluate queries on another engine
    and pass the class to a Configuration.
    """
    def __init__(self, configuration: Configuration = None):
        self.configuration = configuration or Configuration()

    def evaluate(self, q: ConjunctiveQuery, i: Instance) -> Instance:
        raise NotImplementedError


class BacktrackingEvaluator(Evaluator):
    """ Valuation search with the most constrained atom matched first """

    def evaluate(self, q: ConjunctiveQuery, i: Instance) -> Instance:
        return evaluate(q, i)


def _head_facts(q: ConjunctiveQuery, rows: pd.DataFrame, columns) -> Instance:
    if q.is_boolean():
        return Instance([Fact(q.head.relation, ())] if len(rows) else [])
    return Instance(Fact(q.head.relation, tuple(str(value) for value in row))
                    for row in rows[list(columns)].itertuples(index=False, name=None))


class DataFrameEvaluator(Evaluator):
    """
    Joins one DataFrame per body atom. Columns are renamed to variable names so that
    merges on common columns implement the joins; repeated variables inside an atom
    become row filters. Zero-arity atoms only decide whether anything is derived.
    """

    def __atom_frame__(self, a, frames: Dict[str, pd.DataFrame]) -> pd.DataFrame:
        frame = frames.get(a.relation.name)
        if frame is None:
            frame = pd.DataFrame(columns=column_names(a.relation), dtype=str)
        keep = {}
        for variable, column in zip(a.args, column_names(a.relation)):
            if variable in keep:
                frame = frame[frame[keep[variable]] == frame[column]]
            else:
                keep[variable] = column
        return frame[list(keep.values())].rename(columns={column: variable for variable, column in keep.items()})

    def evaluate(self, q: ConjunctiveQuery, i: Instance) -> Instance:
        check_schema(q, i)
        frames = i.to_data_frames()
        for a in q.body:
            if a.relation.arity == 0 and a.relation.name not in frames:
                return Instance()
        result = None
        for a in q.body:
            if a.relation.arity == 0:
                continue
            frame = self.__atom_frame__(a, frames)
            if result is None:
                result = frame
                continue
            common = [column for column in frame.columns if column in result.columns]
            if common:
                result = result.merge(frame, on=common, how='inner')
            else:
                result = result.merge(frame, how='cross')
            if result.empty:
                break
        if result is None:
            return Instance([Fact(q.head.relation, ())])
        logger.debug(f"DataFrame join produced {len(result)} rows for {q}")
        return _head_facts(q, result, q.head.args)


class SqlEvaluator(Evaluator):
    """
    Loads the instance into an in-memory SQLite database and runs the SQL built by a
    SqlQueryBuilder
    """

    def evaluate(self, q: ConjunctiveQuery, i: Instance) -> Instance:
        check_schema(q, i)
        frames = i.to_data_frames()
        sql = SqlQueryBuilder(q).create_query()
        logger.debug(f"Executing {sql}")
        engine = create_engine('sqlite://')
        with engine.connect() as connection:
            for relation in q.relations():
                frame = frames.get(relation.name)
                if frame is None:
                    frame = pd.DataFrame(columns=column_names(relation), dtype=str)
                frame.to_sql(relation.name, connection, index=False)
            rows = pd.read_sql(sql, connection)
        engine.dispose()
        return _head_facts(q, rows, [f'h{position}' for position in range(q.head.relation.arity)])


ENGINES = {
    'backtrack': BacktrackingEvaluator,
    'pandas': DataFrameEvaluator,
    'sql': SqlEvaluator,
}


def evaluator_for(configuration: Configuration = None) -> Evaluator:
    configuration = configuration or Configuration()
    evaluator_class = configuration.evaluator or BacktrackingEvaluator
    if isinstance(evaluator_class, str):
        if evaluator_class not in ENGINES:
            raise ValueError(f"Unknown evaluator {evaluator_class}; choose one of {', '.join(sorted(ENGINES))}")
        evaluator_class = ENGINES[evaluator_class]
    return evaluator_class(configuration)
