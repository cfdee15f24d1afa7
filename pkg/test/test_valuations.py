import itertools
import random

import pytest

from test.generators import chain, looped_chain, random_query
from pclab.parser import parse_query
from pclab.query import Valuation, apply_valuation, fact, is_folding, is_simplification
from pclab.valuations import (BoundedDomain, _Partition, MinimalValuationSearch, enumerate_minimal_valuations,
                              enumerate_simplifications, injective_valuation, injective_valuation_minimality_bridge,
                              is_minimal_cq, is_minimal_valuation, is_strongly_minimal, minimal_covers, minimize_cq,
                              strong_minimality_sufficient)


def all_valuations(q, values):
    variables = q.variables()
    for combination in itertools.product(values, repeat=len(variables)):
        yield Valuation(dict(zip(variables, combination)))


def equality_patterns(q):
    """ One valuation per partition of the variables of q """
    variables = q.variables()

    def grow(prefix, top):
        if len(prefix) == len(variables):
            yield Valuation(dict(zip(variables, prefix)))
            return
        for value in range(top + 2):
            yield from grow(prefix + [str(value)], max(top, value))

    return grow([], -1)


def test_bounded_domain():
    assert BoundedDomain.of_size(3).values == ('1', '2', '3')
    assert BoundedDomain(('a', 'b', 'a')).size == 2
    with pytest.raises(ValueError):
        BoundedDomain(())


def test_minimal_valuation():
    q = looped_chain()
    minimal, witness = is_minimal_valuation(q, {'x': 'a', 'y': 'b', 'z': 'a'})
    assert not minimal
    assert witness.verify(q)
    assert witness.smaller['y'] == 'a'
    assert is_minimal_valuation(q, {'x': 'a', 'y': 'a', 'z': 'a'}) == (True, None)


def test_enumerate_minimal_valuations():
    found = enumerate_minimal_valuations(looped_chain(), BoundedDomain.of_size(2))
    assert {(v['x'], v['y'], v['z']) for v in found} == {('1', '1', '1'), ('1', '1', '2'), ('2', '2', '1'),
                                                          ('2', '2', '2')}
    assert len(enumerate_minimal_valuations(chain(), BoundedDomain.of_size(2))) == 8


def test_search_matches_brute_force():
    rng = random.Random(11)
    values = ('1', '2')
    for _ in range(20):
        q = random_query(rng, variables=3, atoms=3, relations=('R',))
        expected = {v for v in all_valuations(q, values) if is_minimal_valuation(q, v)[0]}
        assert set(MinimalValuationSearch(q, values).search()) == expected, str(q)


def test_fresh_values_are_used_in_order():
    q = parse_query('T() :- R(x,y).')
    found = list(MinimalValuationSearch(q, (), ('n1', 'n2')).search())
    assert sorted((v['x'], v['y']) for v in found) == [('n1', 'n1'), ('n1', 'n2')]


def test_minimal_covers():
    q = looped_chain()
    covers = list(minimal_covers(q, [fact('R', 'a', 'b')], ('a', 'b'), ('n1',)))
    assert covers
    for v in covers:
        _, body = apply_valuation(v, q)
        assert fact('R', 'a', 'b') in body
        assert is_minimal_valuation(q, v)[0]
    assert len(set(covers)) == len(covers)


@pytest.mark.parametrize('text, expected', [
    ('T() :- R(x1,x2), R(x2,x1).', True),
    ('T(x,z) :- R(x,y), R(y,z), R(x,x).', False),
    ('T(x,z) :- R(x,y), R(y,z).', True),
    ('T(x) :- R(x,x), R(x,y), R(x,z).', False),
    ('T(x,y) :- R(x,y), S(y,z).', True),
])
def test_strong_minimality(text, expected):
    q = parse_query(text)
    strongly_minimal, witness = is_strongly_minimal(q)
    assert strongly_minimal == expected
    if witness is not None:
        assert witness.verify(q)


def test_strong_minimality_against_valuations():
    rng = random.Random(5)
    for _ in range(20):
        q = random_query(rng, variables=3, atoms=3, relations=('R',))
        every_valuation_minimal = all(is_minimal_valuation(q, v)[0] for v in all_valuations(q, ('1', '2', '3')))
        assert is_strongly_minimal(q)[0] == every_valuation_minimal, str(q)


def test_sufficient_condition_implies_strong_minimality():
    assert strong_minimality_sufficient(parse_query('T(x,y) :- R(x,y), R(y,x).'))
    assert strong_minimality_sufficient(parse_query('T(x) :- R(x,y), S(y,x).'))
    assert not strong_minimality_sufficient(parse_query('T() :- R(x1,x2), R(x2,x1).'))
    rng = random.Random(3)
    for _ in range(500):
        q = random_query(rng, variables=rng.randint(2, 4), atoms=rng.randint(1, 3))
        if strong_minimality_sufficient(q):
            assert all(is_minimal_valuation(q, v)[0] for v in equality_patterns(q)), str(q)


def test_minimize():
    q = parse_query('T(x) :- R(x,y), R(y,y), R(z,z), R(u,u).')
    core, theta = minimize_cq(q)
    assert str(core) == 'T(x) :- R(x,y), R(y,y).'
    assert is_folding(theta, q)

    loops = parse_query('T(x) :- R(x,x), R(x,y), R(x,z).')
    core, theta = minimize_cq(loops)
    assert str(core) == 'T(x) :- R(x,x).'
    assert is_folding(theta, loops)

    core, theta = minimize_cq(chain())
    assert core == chain()
    assert all(theta[variable] == variable for variable in chain().variables())


def test_minimize_random_queries():
    rng = random.Random(9)
    for _ in range(30):
        q = random_query(rng, variables=4, atoms=4)
        core, theta = minimize_cq(q)
        assert is_folding(theta, q), str(q)
        assert is_minimal_cq(core), str(q)


def test_enumerate_simplifications():
    q = parse_query('T(x) :- R(x,y), R(y,y), R(z,z).')
    found = enumerate_simplifications(q)
    assert {'x': 'x', 'y': 'y', 'z': 'z'} in [dict(theta) for theta in found]
    assert {'x': 'x', 'y': 'y', 'z': 'y'} in [dict(theta) for theta in found]
    assert all(is_simplification(theta, q) for theta in found)
    assert [dict(theta) for theta in enumerate_simplifications(chain())] == [{'x': 'x', 'y': 'y', 'z': 'z'}]


def test_minimal_queries():
    assert is_minimal_cq(looped_chain())
    assert not is_minimal_cq(parse_query('T(x) :- R(x,x), R(x,y).'))


def test_injective_valuation():
    v = injective_valuation(chain(), avoid=['1'])
    assert len(set(v.values())) == 3
    assert '1' not in v.values()


def test_bridge_agrees():
    assert injective_valuation_minimality_bridge(chain())
    assert not injective_valuation_minimality_bridge(parse_query('T(x) :- R(x,x), R(x,y), R(x,z).'))
    rng = random.Random(13)
    for _ in range(30):
        injective_valuation_minimality_bridge(random_query(rng, variables=4, atoms=4))


def test_sufficient_condition_answers_without_search():
    q = parse_query('T(x,y,z) :- R(x,y), R(y,z), R(z,x).')
    assert strong_minimality_sufficient(q)
    assert is_strongly_minimal(q) == (True, None)
    q = parse_query('T(x) :- R(x,y), S(y,y).')
    assert strong_minimality_sufficient(q)
    assert is_strongly_minimal(q) == (True, None)


def test_partition_copies_are_independent():
    partition = _Partition(rank={'x': 0, 'y': 1, 'z': 2})
    branch = partition.copy()
    branch.union('x', 'y')
    branch.rank['z'] = 5
    assert branch.find('y') == 'x'
    assert partition.find('y') == 'y'
    assert partition.rank == {'x': 0, 'y': 1, 'z': 2}
