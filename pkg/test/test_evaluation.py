import random

import pytest

from test.generators import chain, looped_chain, facts_over, random_query
from pclab.configuration import Configuration
from pclab.evaluation import (BacktrackingEvaluator, DataFrameEvaluator, SqlEvaluator, evaluate, evaluator_for)
from pclab.parser import parse_instance, parse_query
from pclab.query import Instance, SchemaError, fact

ENGINES = [BacktrackingEvaluator, DataFrameEvaluator, SqlEvaluator]


def test_evaluate():
    i = parse_instance('R(a,b)\nR(b,a)\nR(a,a)')
    assert evaluate(looped_chain(), i) == Instance([fact('T', 'a', 'a'), fact('T', 'a', 'b')])
    assert evaluate(chain(), parse_instance('R(a,b)')) == Instance()


@pytest.mark.parametrize('engine', ENGINES)
def test_engines_on_example(engine):
    i = parse_instance('R(a,b)\nR(b,a)\nR(a,a)')
    assert engine().evaluate(looped_chain(), i) == Instance([fact('T', 'a', 'a'), fact('T', 'a', 'b')])


@pytest.mark.parametrize('engine', ENGINES)
def test_engines_on_boolean_and_nullary(engine):
    q = parse_query('T() :- P(), R(x,y), R(y,x).')
    assert engine().evaluate(q, parse_instance('P()\nR(a,b)\nR(b,a)')) == Instance([fact('T')])
    assert engine().evaluate(q, parse_instance('R(a,b)\nR(b,a)')) == Instance()
    assert engine().evaluate(q, parse_instance('P()\nR(a,b)')) == Instance()


@pytest.mark.parametrize('engine', ENGINES)
def test_engines_on_missing_relations(engine):
    q = parse_query('T(x) :- R(x,y), S(y).')
    assert engine().evaluate(q, parse_instance('R(a,b)')) == Instance()
    assert engine().evaluate(q, Instance()) == Instance()


@pytest.mark.parametrize('engine', ENGINES)
def test_engines_on_repeated_variables_and_cross_products(engine):
    q = parse_query('T(x,z) :- R(x,x), S(z).')
    i = parse_instance('R(a,a)\nR(a,b)\nS(c)\nS(d)')
    assert engine().evaluate(q, i) == Instance([fact('T', 'a', 'c'), fact('T', 'a', 'd')])


def test_engines_agree_on_random_queries():
    rng = random.Random(7)
    for _ in range(25):
        q = random_query(rng)
        facts = facts_over(q.relations(), ('a', 'b'))
        i = Instance(rng.sample(facts, rng.randint(0, len(facts))))
        expected = evaluate(q, i)
        for engine in ENGINES[1:]:
            assert engine().evaluate(q, i) == expected, f"{engine.__name__} disagrees on {q} over {i}"


def test_schema_mismatch():
    with pytest.raises(SchemaError):
        evaluate(chain(), parse_instance('R(a)'))


def test_evaluator_for():
    assert isinstance(evaluator_for(), BacktrackingEvaluator)
    assert isinstance(evaluator_for(Configuration(evaluator='sql')), SqlEvaluator)
    assert isinstance(evaluator_for(Configuration(evaluator=DataFrameEvaluator)), DataFrameEvaluator)
    with pytest.raises(ValueError):
        evaluator_for(Configuration(evaluator='spark'))


def test_configuration_rejects_bad_settings():
    with pytest.raises(ValueError):
        Configuration(budget=0)
    with pytest.raises(ValueError):
        Configuration(workers=0)
    with pytest.raises(ValueError):
        Configuration(output_format='xml')


def test_evaluation_is_generic_and_monotone():
    rng = random.Random(13)
    values = ('a', 'b', 'c')
    for _ in range(1000):
        q = random_query(rng, variables=rng.randint(1, 4), atoms=rng.randint(1, 3))
        facts = facts_over(q.relations(), values)
        i = Instance(rng.sample(facts, rng.randint(0, 6)))
        j = Instance(rng.sample(facts, rng.randint(0, 6)))
        mapping = dict(zip(values, rng.sample(('a', 'b', 'c', 'd'), len(values))))
        result = evaluate(q, i)
        assert evaluate(q, i.rename(mapping)) == result.rename(mapping), f"{q} over {i} renamed by {mapping}"
        assert result.issubset(evaluate(q, i.union(j))), f"{q} over {i} and {j}"
