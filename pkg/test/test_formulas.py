import os
import random

import pytest

from pclab.formulas import (OracleCapError, QBFFormula, brute_force_qbf, brute_force_sat, formula_from_file,
                            parse_formula, random_formula)
from pclab.parser import ParseError

CORPUS = os.path.join('test', 'corpus')


def test_parse_formula():
    phi = formula_from_file(os.path.join(CORPUS, 'aea_dnf.qbf'))
    assert phi.matrix == 'dnf'
    assert phi.blocks == (('a', (1,)), ('e', (2, 3)), ('a', (4,)))
    assert phi.clauses == ((1, 2, 4), (-1, 3, 4))
    assert phi.variables == [1, 2, 3, 4]
    assert phi.prefix('aea') == [[1], [2, 3], [4]]
    with pytest.raises(ValueError):
        phi.prefix('ae')


def test_formula_without_quantifiers_is_existential():
    phi = formula_from_file(os.path.join(CORPUS, 'sat.cnf'))
    assert phi.blocks == (('e', (1, 2, 3)),)
    assert phi.prefix('ae') == [[], [1, 2, 3]]


def test_prefix_merges_adjacent_blocks():
    phi = QBFFormula((('a', (1,)), ('a', (2,)), ('e', ())), ((1, 2),))
    assert phi.prefix('aea') == [[1, 2], [], []]


@pytest.mark.parametrize('name, expected', [
    ('pi2_true.qbf', True),
    ('pi2_false.qbf', False),
    ('aea_dnf.qbf', False),
])
def test_brute_force_qbf(name, expected):
    assert brute_force_qbf(formula_from_file(os.path.join(CORPUS, name))) == expected


def test_brute_force_sat():
    assert brute_force_sat(formula_from_file(os.path.join(CORPUS, 'sat.cnf')))
    assert not brute_force_sat(formula_from_file(os.path.join(CORPUS, 'unsat.cnf')))
    assert brute_force_sat(formula_from_file(os.path.join(CORPUS, 'pi2_false.qbf')))


def test_oracle_cap():
    phi = formula_from_file(os.path.join(CORPUS, 'sat.cnf'))
    with pytest.raises(OracleCapError):
        brute_force_sat(phi, cap=2)
    with pytest.raises(ValueError):
        brute_force_qbf(phi, cap=2)


def test_padded_clauses():
    phi = QBFFormula((('e', (1, 2)),), ((1,), (1, -2)))
    assert phi.padded_clauses() == [(1, 1, 1), (1, -2, 1)]
    with pytest.raises(ValueError):
        QBFFormula((('e', (1, 2, 3, 4)),), ((1, 2, 3, 4),)).padded_clauses()


def test_formula_validation():
    with pytest.raises(ValueError):
        QBFFormula((('a', (1,)), ('e', (1,))), ())
    with pytest.raises(ValueError):
        QBFFormula((('e', (1,)),), ((2,),))
    with pytest.raises(ValueError):
        QBFFormula((('x', (1,)),), ())
    with pytest.raises(ValueError):
        QBFFormula((('e', (1,)),), (), 'anf')


@pytest.mark.parametrize('text, line', [
    ('1 0\n', 1),
    ('p cnf 2 1\n1 3 0\n', 2),
    ('p cnf 1 1\n1\n', 2),
    ('p cnf 2 1\n1 0\na 1 0\n', 3),
    ('p xnf 1 1\n', 1),
    ('p cnf 1 1\np cnf 1 1\n', 2),
    ('p cnf 1 1\n1 x 0\n', 2),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as error:
        parse_formula(text)
    assert error.value.line == line


def test_parse_errors_without_location():
    with pytest.raises(ParseError):
        parse_formula('c only a comment\n')
    with pytest.raises(ParseError):
        parse_formula('p cnf 1 2\n1 0\n')
    with pytest.raises(ParseError):
        parse_formula('p cnf 1 1\na 1 0\ne 1 0\n1 0\n')


def test_save_reads_back(tmp_path):
    phi = formula_from_file(os.path.join(CORPUS, 'aea_dnf.qbf'))
    path = os.path.join(str(tmp_path), 'copy.qbf')
    phi.save(path)
    assert formula_from_file(path) == phi


def test_random_formula():
    phi = random_formula(random.Random(3), (1, 2, 1), 4, matrix='dnf')
    assert [quantifier for quantifier, _ in phi.blocks] == ['a', 'e', 'a']
    assert phi.variables == [1, 2, 3, 4]
    assert len(phi.clauses) == 4
    assert all(len(clause) == 3 for clause in phi.clauses)
    assert random_formula(random.Random(3), (1, 2, 1), 4, matrix='dnf') == phi
    with pytest.raises(ValueError):
        random_formula(random.Random(3), (), 1)
