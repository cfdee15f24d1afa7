"""
Lexer and parsers for the query, instance and policy text formats.

Queries:   T(x,z) :- R(x,y), R(y,z), R(x,x).
Blocks:    query chain { T(x,z) :- R(x,y), R(y,z). }
Instances: one fact per line, e.g. R(a,b); '#' starts a comment.
Policies:  line based: 'network k1 k2', 'default @ k1', 'R(a,b) @ k2', 'R(b,a) @ -',
           or 'hypercube for chain' followed by 'hash x : a->0 b->1' lines.
"""
import logging
import os
import threading
from typing import Dict, List, Optional

import ply.lex as lex
import ply.yacc as yacc

from pclab.query import Atom, ConjunctiveQuery, Fact, Instance, RelationName, SchemaError

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """ A syntax or well-formedness error, located by 1-based line and column """

    def __init__(self, message: str, line: int = None, column: int = None, file_path: str = None):
        self.message = message
        self.line = line
        self.column = column
        self.file_path = file_path
        location = ''
        if file_path is not None:
            location += f'{file_path}:'
        if line is not None:
            location += f'{line}:{column}: ' if column is not None else f'{line}: '
        elif file_path is not None:
            location += ' '
        super().__init__(location + message)

    def in_file(self, file_path: str) -> 'ParseError':
        return ParseError(self.message, self.line, self.column, file_path)


def _column(data: str, position: int) -> int:
    return position - data.rfind('\n', 0, position)


class Lexer:
    """ Keywords such as 'query' are plain names; the grammar decides where they count """

    tokens = ['NAME', 'IMPLIES', 'LPAREN', 'RPAREN', 'LBRACE', 'RBRACE', 'COMMA', 'PERIOD']

    t_NAME = r'[A-Za-z0-9_]+'
    t_IMPLIES = r':-'
    t_LPAREN = r'\('
    t_RPAREN = r'\)'
    t_LBRACE = r'\{'
    t_RBRACE = r'\}'
    t_COMMA = r','
    t_PERIOD = r'\.'
    t_ignore = ' \t\r'
    t_ignore_COMMENT = r'\#.*'

    newlines = False

    def t_newline(self, t):
        r'\n+'
        t.lexer.lineno += len(t.value)
        if self.newlines:
            t.type = 'NEWLINE'
            return t

    def t_error(self, t):
        raise ParseError(f"Illegal character '{t.value[0]}'", t.lineno, _column(t.lexer.lexdata, t.lexpos))

    def build(self):
        self.lexer = lex.lex(module=self)
        return self.lexer


class PolicyLexer(Lexer):
    """ Line ends are tokens in policy files """

    tokens = Lexer.tokens + ['AT', 'SKIP', 'ARROW', 'COLON', 'NEWLINE']

    t_AT = r'@'
    t_ARROW = r'->'
    t_SKIP = r'-'
    t_COLON = r':'

    newlines = True


class _AtomGrammar:
    """ Rules shared by every format; nodes are (name, terms, line, column) """

    def p_atom(self, p):
        'atom : NAME LPAREN terms RPAREN'
        p[0] = (p[1], p[3], p.lineno(1), _column(p.lexer.lexdata, p.lexpos(1)))

    def p_atom_nullary(self, p):
        'atom : NAME LPAREN RPAREN'
        p[0] = (p[1], [], p.lineno(1), _column(p.lexer.lexdata, p.lexpos(1)))

    def p_terms_more(self, p):
        'terms : terms COMMA NAME'
        p[0] = p[1] + [p[3]]

    def p_terms_one(self, p):
        'terms : NAME'
        p[0] = [p[1]]

    def p_error(self, p):
        if p is None:
            raise ParseError("Unexpected end of input")
        if p.type == 'NEWLINE':
            raise ParseError("Unexpected end of line", p.lineno)
        raise ParseError(f"Syntax error at '{p.value}'", p.lineno, _column(self.lexer.lexer.lexdata, p.lexpos))

    def __build__(self, lexer: Lexer):
        self.lexer = lexer
        self.lexer.build()
        self.tokens = self.lexer.tokens
        self.parser = yacc.yacc(module=self, start=self.start, write_tables=False, debug=False,
                                errorlog=yacc.NullLogger())

    def parse(self, text: str) -> list:
        self.lexer.lexer.lineno = 1
        return self.parser.parse(text, lexer=self.lexer.lexer)


class Parser(_AtomGrammar):
    """
    LALR parser producing plain tuples; the load functions below turn them into
    queries, facts and instances and enforce the lexical rules of each format.
    """
    start = 'document'

    def __init__(self):
        self.__build__(Lexer())

    def p_document(self, p):
        'document : statements'
        p[0] = p[1]

    def p_statements_more(self, p):
        'statements : statements statement'
        p[0] = p[1] + [p[2]]

    def p_statements_empty(self, p):
        'statements : '
        p[0] = []

    def p_statement_rule(self, p):
        'statement : rule'
        p[0] = ('rule', None, p[1])

    def p_statement_block(self, p):
        'statement : NAME NAME LBRACE rule RBRACE'
        if p[1] != 'query':
            raise ParseError(f"Expected 'query' before a block, found '{p[1]}'", p.lineno(1),
                             _column(p.lexer.lexdata, p.lexpos(1)))
        p[0] = ('rule', p[2], p[4])

    def p_statement_fact(self, p):
        'statement : atom'
        p[0] = ('fact', None, p[1])

    def p_rule(self, p):
        'rule : atom IMPLIES atoms PERIOD'
        p[0] = (p[1], p[3])

    def p_atoms_more(self, p):
        'atoms : atoms COMMA atom'
        p[0] = p[1] + [p[3]]

    def p_atoms_one(self, p):
        'atoms : atom'
        p[0] = [p[1]]


class PolicyParser(_AtomGrammar):
    """
    One statement per line: ('network', nodes, line), ('hypercube', name, line),
    ('hash', (variable, entries), line), ('default', nodes, line) and ('fact', (fact, nodes), line).
    A node list of None stands for '-'.
    """
    start = 'policy'

    def __init__(self):
        self.__build__(PolicyLexer())

    def p_policy_more(self, p):
        'policy : policy line'
        p[0] = p[1] + ([p[2]] if p[2] is not None else [])

    def p_policy_empty(self, p):
        'policy : '
        p[0] = []

    def p_line_blank(self, p):
        'line : NEWLINE'
        p[0] = None

    def p_line_words(self, p):
        'line : NAME names NEWLINE'
        keyword, words, line = p[1], p[2], p.lineno(1)
        if keyword == 'network':
            p[0] = ('network', words, line)
        elif keyword == 'hypercube' and len(words) == 2 and words[0] == 'for':
            p[0] = ('hypercube', words[1], line)
        elif keyword == 'hypercube':
            raise ParseError("Expected 'hypercube for <query name>'", line)
        else:
            raise ParseError(f"Unrecognised policy line starting with '{keyword}'", line)

    def p_line_hash(self, p):
        'line : NAME NAME COLON entries NEWLINE'
        if p[1] != 'hash':
            raise ParseError(f"Expected 'hash <variable> : ...', found '{p[1]}'", p.lineno(1))
        p[0] = ('hash', (p[2], p[4]), p.lineno(1))

    def p_line_default(self, p):
        'line : NAME AT targets NEWLINE'
        if p[1] != 'default':
            raise ParseError(f"Expected a fact or 'default' before '@', found '{p[1]}'", p.lineno(1))
        p[0] = ('default', p[3], p.lineno(1))

    def p_line_fact(self, p):
        'line : atom AT targets NEWLINE'
        p[0] = ('fact', (_to_fact(p[1]), p[3]), p[1][2])

    def p_line_unknown(self, p):
        'line : NAME NEWLINE'
        raise ParseError(f"Unrecognised policy line '{p[1]}'", p.lineno(1))

    def p_targets_nodes(self, p):
        'targets : names'
        p[0] = p[1]

    def p_targets_skip(self, p):
        'targets : SKIP'
        p[0] = None

    def p_names_more(self, p):
        'names : names NAME'
        p[0] = p[1] + [p[2]]

    def p_names_one(self, p):
        'names : NAME'
        p[0] = [p[1]]

    def p_entries_more(self, p):
        'entries : entries entry'
        p[0] = p[1] + [p[2]]

    def p_entries_empty(self, p):
        'entries : '
        p[0] = []

    def p_entry(self, p):
        'entry : NAME ARROW NAME'
        p[0] = (p[1], p[3])


_local = threading.local()


def _parser(kind):
    parser = getattr(_local, kind.__name__, None)
    if parser is None:
        parser = kind()
        setattr(_local, kind.__name__, parser)
    return parser


def _parse(text: str) -> list:
    return _parser(Parser).parse(text)


def parse_policy_statements(text: str) -> list:
    """ The statements of a policy file, in order """
    if not text.endswith('\n'):
        text += '\n'
    return _parser(PolicyParser).parse(text)


def _relation(name: str, line: int, column: int):
    if not name[0].isalpha() or not name[0].isupper():
        raise ParseError(f"Relation names begin with an uppercase letter: '{name}'", line, column)


def _to_atom(node) -> Atom:
    name, terms, line, column = node
    _relation(name, line, column)
    for term in terms:
        if not term[0].isalpha():
            raise ParseError(f"Constants are not allowed in queries: '{term}'", line, column)
        if not term[0].islower():
            raise ParseError(f"Variables begin with a lowercase letter: '{term}'", line, column)
    return Atom(RelationName(name, len(terms)), tuple(terms))


def _to_fact(node) -> Fact:
    name, values, line, column = node
    _relation(name, line, column)
    return Fact(RelationName(name, len(values)), tuple(values))


def _to_query(rule, name: Optional[str]) -> ConjunctiveQuery:
    head, body = rule
    try:
        return ConjunctiveQuery(_to_atom(head), [_to_atom(node) for node in body], name)
    except SchemaError as error:
        raise ParseError(str(error), head[2], head[3]) from error


def parse_queries(text: str, default_name: str = None) -> Dict[str, ConjunctiveQuery]:
    """
    Parses one unnamed query or any number of named 'query <name> { ... }' blocks.
    An unnamed query takes default_name.
    """
    queries = {}
    for kind, name, node in _parse(text):
        if kind != 'rule':
            raise ParseError("Expected a query, found a fact", node[2], node[3])
        head = node[0]
        if name is None:
            if default_name is None and queries:
                raise ParseError("Only one unnamed query is allowed per file", head[2], head[3])
            name = default_name
        if name in queries:
            raise ParseError(f"Duplicate query name '{name}'", head[2], head[3])
        queries[name] = _to_query(node, name)
    if not queries:
        raise ParseError("No query found")
    return queries


def parse_query(text: str) -> ConjunctiveQuery:
    queries = parse_queries(text)
    if len(queries) != 1:
        raise ParseError(f"Expected one query, found {len(queries)}")
    return next(iter(queries.values()))


def _facts(text: str) -> List[Fact]:
    facts = []
    lines = set()
    for kind, _, node in _parse(text):
        if kind != 'fact':
            head = node[0]
            raise ParseError("Expected a fact, found a query", head[2], head[3])
        if node[2] in lines:
            raise ParseError("Instances hold one fact per line", node[2], node[3])
        lines.add(node[2])
        facts.append(_to_fact(node))
    return facts


def parse_fact(text: str) -> Fact:
    facts = _facts(text)
    if len(facts) != 1:
        raise ParseError(f"Expected one fact, found {len(facts)}")
    return facts[0]


def parse_instance(text: str) -> Instance:
    facts = _facts(text)
    try:
        return Instance(facts)
    except SchemaError as error:
        raise ParseError(str(error)) from error


def queries_from_file(file_path: str) -> Dict[str, ConjunctiveQuery]:
    logger.info(f"Loading queries from {file_path}")
    with open(file_path) as file:
        text = file.read()
    stem = os.path.splitext(os.path.basename(file_path))[0]
    try:
        return parse_queries(text, default_name=stem)
    except ParseError as error:
        raise error.in_file(file_path) from None


def query_from_file(file_path: str, name: str = None) -> ConjunctiveQuery:
    queries = queries_from_file(file_path)
    if name is not None:
        if name not in queries:
            raise ValueError(f"No query named '{name}' in {file_path}")
        return queries[name]
    if len(queries) > 1:
        raise ValueError(f"{file_path} holds several queries; select one with {file_path}:<name>")
    return next(iter(queries.values()))


def instance_from_file(file_path: str) -> Instance:
    logger.info(f"Loading instance from {file_path}")
    with open(file_path) as file:
        text = file.read()
    try:
        return parse_instance(text)
    except ParseError as error:
        raise error.in_file(file_path) from None
