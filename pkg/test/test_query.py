import os

import pytest

from pclab.parser import parse_query
from pclab.query import (Atom, ConjunctiveQuery, Instance, RelationName, SchemaError, Substitution, Valuation,
                         apply_valuation, atom, compose, fact, is_folding, is_simplification, substitute)


def test_relation_name():
    assert str(RelationName('R', 2)) == 'R/2'
    with pytest.raises(ValueError):
        RelationName('', 1)
    with pytest.raises(ValueError):
        RelationName('R', -1)


def test_atom_arity():
    with pytest.raises(SchemaError):
        Atom(RelationName('R', 2), ('x',))
    assert str(atom('R', 'x', 'y').substitute({'x': 'z', 'y': 'z'})) == 'R(z,z)'


def test_query_well_formed():
    with pytest.raises(SchemaError):
        ConjunctiveQuery(atom('T', 'x'), [])
    with pytest.raises(SchemaError):
        ConjunctiveQuery(atom('T', 'z'), [atom('R', 'x', 'y')])
    with pytest.raises(SchemaError):
        ConjunctiveQuery(atom('R', 'x', 'y'), [atom('R', 'x', 'y')])
    with pytest.raises(SchemaError):
        ConjunctiveQuery(atom('T'), [atom('R', 'x', 'y'), atom('R', 'x')])


def test_query_accessors():
    q = parse_query('T(x,z) :- R(x,y), R(y,z), R(x,x), R(x,y).')
    assert len(q.body) == 3
    assert q.variables() == ('x', 'z', 'y')
    assert q.head_variables() == ('x', 'z')
    assert q.non_head_variables() == ('y',)
    assert q.schema() == {'R': 2}
    assert not q.is_full()
    assert not q.is_boolean()
    assert len(q.self_join_atoms()) == 3
    assert str(q) == 'T(x,z) :- R(x,y), R(y,z), R(x,x).'


def test_query_equality_ignores_body_order():
    q1 = parse_query('T(x) :- R(x,y), S(y).')
    q2 = parse_query('T(x) :- S(y), R(x,y).')
    assert q1 == q2
    assert hash(q1) == hash(q2)
    assert q1 != parse_query('T(y) :- R(x,y), S(y).')


def test_self_join_atoms():
    q = parse_query('T() :- R(x,y), S(y,z), R(z,x).')
    assert [str(a) for a in q.self_join_atoms()] == ['R(x,y)', 'R(z,x)']


def test_apply_valuation():
    q = parse_query('T(x,z) :- R(x,y), R(y,z), R(x,x).')
    head, body = apply_valuation({'x': 'a', 'y': 'a', 'z': 'a'}, q)
    assert head == fact('T', 'a', 'a')
    assert body == {fact('R', 'a', 'a')}
    with pytest.raises(ValueError):
        apply_valuation({'x': 'a'}, q)


def test_compose():
    theta = Substitution({'x': 'x', 'y': 'x', 'z': 'y'})
    v = Valuation({'x': '1', 'y': '2', 'z': '3'})
    composed = compose(v, theta)
    assert isinstance(composed, Valuation)
    assert dict(composed) == {'x': '1', 'y': '1', 'z': '2'}
    with pytest.raises(ValueError):
        compose(Valuation({'x': '1'}), theta)


def test_simplifications_and_foldings():
    q = parse_query('T(x) :- R(x,y), R(y,y), R(z,z), R(u,u).')
    theta3 = {'x': 'x', 'y': 'y', 'z': 'y', 'u': 'z'}
    theta4 = {'x': 'x', 'y': 'y', 'z': 'y', 'u': 'y'}
    assert is_simplification(theta3, q)
    assert not is_folding(theta3, q)
    assert is_folding(theta4, q)
    assert str(substitute(theta4, q)) == 'T(x) :- R(x,y), R(y,y).'

    chain = parse_query('T(x) :- R(x,y), R(y,z).')
    assert is_simplification({'x': 'x', 'y': 'y', 'z': 'z'}, chain)
    assert not is_simplification({'x': 'x', 'y': 'x', 'z': 'x'}, chain)
    assert not is_simplification({'x': 'y', 'y': 'y', 'z': 'y'}, chain)


def test_substitution_idempotence():
    assert Substitution({'x': 'x', 'y': 'x'}).is_idempotent()
    assert not Substitution({'x': 'y', 'y': 'z', 'z': 'z'}).is_idempotent()


def test_instance():
    i = Instance([fact('R', 'b', 'a'), fact('R', 'a', 'b'), fact('S', 'a')])
    assert len(i) == 3
    assert fact('S', 'a') in i
    assert [str(f) for f in i] == ['R(a,b)', 'R(b,a)', 'S(a)']
    assert i.adom() == {'a', 'b'}
    assert i.schema() == {'R': 2, 'S': 1}
    assert i.to_text() == 'R(a,b)\nR(b,a)\nS(a)\n'
    assert i.rename({'a': 'c'}) == Instance([fact('R', 'b', 'c'), fact('R', 'c', 'b'), fact('S', 'c')])
    assert Instance([fact('S', 'a')]).issubset(i)
    with pytest.raises(SchemaError):
        Instance([fact('R', 'a'), fact('R', 'a', 'b')])


def test_instance_data_frames():
    i = Instance([fact('R', 'a', 'b'), fact('R', 'b', 'c'), fact('P')])
    frames = i.to_data_frames()
    assert list(frames['R'].columns) == ['c0', 'c1']
    assert frames['R'].values.tolist() == [['a', 'b'], ['b', 'c']]
    assert list(frames['P'].columns) == ['present']
    assert len(frames['P']) == 1


def test_save_reads_back(tmp_path):
    q = parse_query('query chain { T(x,z) :- R(x,y), R(y,z). }')
    path = os.path.join(str(tmp_path), 'chain.cq')
    q.save(path)
    with open(path) as file:
        text = file.read()
    assert text == 'query chain { T(x,z) :- R(x,y), R(y,z). }\n'
    again = parse_query(text)
    assert again == q
    assert again.name == 'chain'
