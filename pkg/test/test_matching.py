from pclab.matching import coverings, first_homomorphism, homomorphisms, index_facts, match
from pclab.parser import parse_instance, parse_query


def test_match():
    assert match(('x', 'y'), ('a', 'b'), {}) == {'x': 'a', 'y': 'b'}
    assert match(('x', 'x'), ('a', 'b'), {}) is None
    assert match(('x', 'y'), ('a', 'b'), {'x': 'a'}) == {'y': 'b'}
    assert match(('x', 'y'), ('a', 'b'), {'x': 'c'}) is None


def test_homomorphisms():
    q = parse_query('T(x,z) :- R(x,y), R(y,z).')
    i = parse_instance('R(a,b)\nR(b,c)\nR(c,a)')
    found = sorted((h['x'], h['y'], h['z']) for h in homomorphisms(q.body, index_facts(i.facts)))
    assert found == [('a', 'b', 'c'), ('b', 'c', 'a'), ('c', 'a', 'b')]
    assert first_homomorphism(q.body, index_facts(i.facts), {'x': 'a', 'z': 'a'}) is None


def test_homomorphism_between_queries():
    chain = parse_query('T(x,z) :- R(x,y), R(y,z), R(x,x).')
    loop = parse_query('T(x,z) :- R(x,x).')
    assert first_homomorphism(chain.body, index_facts(loop.body), {'x': 'x', 'z': 'x'}) == {'x': 'x', 'y': 'x', 'z': 'x'}


def test_coverings_bind_used_atoms_only():
    q = parse_query('T(x) :- R(x,y), R(y,z), S(w).')
    found = list(coverings(q.body, parse_instance('R(a,b)').facts))
    assert sorted(sorted(binding.items()) for binding in found) == [[('x', 'a'), ('y', 'b')], [('y', 'a'), ('z', 'b')]]


def test_coverings_need_one_atom_per_target():
    q = parse_query('T(x) :- R(x,y), R(y,z).')
    assert list(coverings(q.body, parse_instance('R(a,b)\nR(b,c)\nR(c,d)').facts)) == []
    assert list(coverings(q.body, parse_instance('R(a,b)\nR(b,c)').facts)) == [{'x': 'a', 'y': 'b', 'z': 'c'}]


def test_coverings_skip_interchangeable_atoms():
    q = parse_query('T() :- E(z,u1,u2), E(z,u3,u4), E(z,u5,u6).')
    found = list(coverings(q.body, parse_instance('E(l,a,b)').facts, {'z': 'l'}))
    assert len(found) == 1
    assert len(list(coverings(q.body, parse_instance('E(l,a,b)').facts))) == 3
