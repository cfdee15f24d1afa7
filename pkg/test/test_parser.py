import os

import pytest

from pclab.parser import (ParseError, instance_from_file, parse_fact, parse_instance, parse_queries, parse_query,
                          queries_from_file, query_from_file)
from pclab.query import fact


def test_parse_query():
    q = parse_query('T(x, z) :- R(x, y), R(y, z).  # chain')
    assert str(q) == 'T(x,z) :- R(x,y), R(y,z).'
    assert q.name is None


def test_parse_boolean_and_nullary():
    q = parse_query('T() :- P(), R(x,y).')
    assert q.is_boolean()
    assert [a.relation.arity for a in q.body] == [0, 2]


def test_parse_named_blocks():
    queries = parse_queries('query one { T(x) :- R(x,y). }\nquery two { T(x) :- S(x). }')
    assert list(queries) == ['one', 'two']
    with pytest.raises(ParseError):
        parse_queries('query one { T(x) :- R(x,y). }\nquery one { T(x) :- S(x). }')
    with pytest.raises(ParseError):
        parse_queries('T(x) :- R(x,y).\nT(x) :- S(x).')


def test_parse_error_location():
    with pytest.raises(ParseError) as error:
        parse_query('T(x) :- R(x,y)\n  , S(y) S(x).')
    assert error.value.line == 2
    assert error.value.column == 10

    with pytest.raises(ParseError) as error:
        parse_query('T(x) :- R(x,$).')
    assert error.value.line == 1
    assert error.value.column == 13


def test_lexical_rules():
    with pytest.raises(ParseError):
        parse_query('T(x) :- R(x,Y).')
    with pytest.raises(ParseError):
        parse_query('T(x) :- r(x,y).')
    with pytest.raises(ParseError):
        parse_query('T(z) :- R(x,y).')
    with pytest.raises(ParseError):
        parse_query('T(x) :- R(x,1).')


def test_query_is_only_a_keyword_before_a_block():
    q = parse_query('T(query) :- R(query,y).')
    assert q.head_variables() == ('query',)
    assert parse_queries('query query { T(x) :- R(x,y). }')['query'].is_full() is False
    assert fact('R', 'query') in parse_instance('R(query)')
    with pytest.raises(ParseError) as error:
        parse_queries('block one { T(x) :- R(x,y). }')
    assert error.value.line == 1


def test_one_fact_per_line():
    with pytest.raises(ParseError) as error:
        parse_instance('R(a,b)\nR(b,a) R(a,a)\n')
    assert error.value.line == 2
    assert error.value.column == 8


def test_parse_instance():
    i = parse_instance('# a comment\nR(a,b)\nR(b,a)\nR(a,a)\n\nP()\n')
    assert len(i) == 4
    assert fact('P') in i
    assert parse_fact('S(1,x)') == fact('S', '1', 'x')
    with pytest.raises(ParseError):
        parse_instance('R(a,b)\nR(a)')
    with pytest.raises(ParseError):
        parse_instance('T(x) :- R(x,y).')


def test_files():
    corpus = os.path.join('test', 'corpus')
    chain = query_from_file(os.path.join(corpus, 'chain.cq'))
    assert chain.name == 'chain'
    queries = queries_from_file(os.path.join(corpus, 'queries.cq'))
    assert sorted(queries) == ['loops', 'q1', 'q2', 'tail']
    assert query_from_file(os.path.join(corpus, 'queries.cq'), 'q2').is_boolean()
    with pytest.raises(ValueError):
        query_from_file(os.path.join(corpus, 'queries.cq'))
    assert len(instance_from_file(os.path.join(corpus, 'looped.facts'))) == 3


def test_file_errors_name_the_file(tmp_path):
    path = os.path.join(str(tmp_path), 'broken.cq')
    with open(path, 'w') as file:
        file.write('T(x) :- R(x,y)')
    with pytest.raises(ParseError) as error:
        query_from_file(path)
    assert error.value.file_path == path
    assert str(error.value).startswith(path)
