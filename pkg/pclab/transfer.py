"""
Transfer of parallel-correctness from a query q to a query q_prime: q_prime is
parallel-correct under every policy under which q is.

Transfer holds exactly when the facts of every minimal valuation of q_prime are contained
in the facts of some minimal valuation of q. A syntactic certificate (a simplification of
q_prime and a substitution of q embedding one body into the other) is necessary, and also
sufficient when q is strongly minimal.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

from pclab.configuration import Configuration
from pclab.matching import coverings
from pclab.policy import CofinitePolicy, HypercubePolicy, scattered_witness_policy
from pclab.query import (ConjunctiveQuery, Fact, Instance, SchemaError, Substitution, Valuation, apply_valuation,
                         compose, is_simplification)
from pclab.utils import by_text, fresh_values
from pclab.valuations import (MinimalValuationSearch, injective_valuation, is_minimal_valuation, is_strongly_minimal,
                              minimal_covers, minimize_cq)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class C3Certificate:
    """ A simplification theta of q_prime and a substitution rho of q with theta(q_prime) inside rho(q) """
    theta: Substitution
    rho: Substitution

    def verify(self, q: ConjunctiveQuery, q_prime: ConjunctiveQuery) -> bool:
        if not is_simplification(self.theta, q_prime):
            return False
        if any(variable not in self.rho for variable in q.variables()):
            return False
        embedded = {a.substitute(self.rho) for a in q.body}
        return all(a.substitute(self.theta) in embedded for a in q_prime.body)

    def to_json(self) -> dict:
        return {'theta': self.theta.to_json(), 'rho': self.rho.to_json()}


class TransferVerdict:
    """
    The answer to a transfer question. A failing verdict carries a minimal valuation of
    q_prime that no minimal valuation of q covers, and a policy separating the two queries.
    """

    def __init__(self, holds: bool, c2_witness: Optional[Valuation] = None,
                 policy_witness: Optional[CofinitePolicy] = None, certificate: Optional[C3Certificate] = None):
        self.holds = holds
        self.c2_witness = c2_witness
        self.policy_witness = policy_witness
        self.certificate = certificate

    def __bool__(self):
        return self.holds

    def __repr__(self):
        return f'TransferVerdict(holds={self.holds}, c2_witness={self.c2_witness})'

    def to_json(self) -> dict:
        result = {'holds': self.holds}
        if self.c2_witness is not None:
            result['c2_witness'] = self.c2_witness.to_json()
        if self.policy_witness is not None:
            result['policy_witness'] = self.policy_witness.to_text()
        if self.certificate is not None:
            result['certificate'] = self.certificate.to_json()
        return result


class FamilyVerdict:
    """
    Parallel-correctness of q_prime for every Hypercube policy of q: a certificate when it
    holds, otherwise a Hypercube policy and an instance on which q_prime is computed wrongly
    """

    def __init__(self, certificate: Optional[C3Certificate], policy: Optional[HypercubePolicy] = None,
                 instance: Optional[Instance] = None):
        self.certificate = certificate
        self.policy = policy
        self.instance = instance

    @property
    def holds(self) -> bool:
        return self.certificate is not None

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        result = {'holds': self.holds}
        if self.certificate is not None:
            result['certificate'] = self.certificate.to_json()
        if self.policy is not None:
            result['policy'] = self.policy.to_text()
            result['instance'] = [str(f) for f in self.instance]
        return result


def check_same_schema(q: ConjunctiveQuery, q_prime: ConjunctiveQuery):
    schema = q.schema()
    for name, arity in q_prime.schema().items():
        if schema.get(name, arity) != arity:
            raise SchemaError(f"{name} has arity {schema[name]} in one query and {arity} in the other")


def check_c3(q: ConjunctiveQuery, q_prime: ConjunctiveQuery) -> Optional[C3Certificate]:
    """
    Searches for a certificate. Every certificate can be rebuilt on the core of q_prime,
    so theta is the folding onto the core and only rho is searched for: atoms of q are
    mapped onto the core atoms until all of them are covered.
    """
    check_same_schema(q, q_prime)
    core, theta = minimize_cq(q_prime)
    if len(core.body_set) > len(q.body_set):
        logger.debug(f"The core of {q_prime} has more atoms than {q}")
        return None
    binding = next(coverings(q.body, core.body), None)
    if binding is None:
        return None
    rho = Substitution({variable: binding.get(variable, variable) for variable in q.variables()})
    return C3Certificate(theta, rho)


def _witness_policy(required: List[Fact]) -> CofinitePolicy:
    """
    One required fact: a single node receiving everything but that fact. More facts: one
    node per fact, every fact going everywhere except that fact's node.
    """
    if len(required) == 1:
        return CofinitePolicy(['k1'], ['k1'], {required[0]: []})
    network = [f'k{position}' for position in range(1, len(required) + 1)]
    exceptions = {f: [node for node in network if node != network[position]] for position, f in enumerate(required)}
    return CofinitePolicy(network, network, exceptions)


def _covered(q: ConjunctiveQuery, facts) -> bool:
    pool = sorted({value for f in facts for value in f.values})
    fresh = fresh_values(len(q.variables()), pool)
    return next(minimal_covers(q, facts, pool, fresh), None) is not None


def witness_policy_for_nontransfer(q: ConjunctiveQuery, q_prime: ConjunctiveQuery, v_prime,
                                   allow_skip: bool = True) -> CofinitePolicy:
    """ A policy under which q is parallel-correct and q_prime is not, built from an uncovered minimal valuation """
    minimal, _ = is_minimal_valuation(q_prime, v_prime)
    if not minimal:
        raise ValueError(f"{Valuation(v_prime)} is not a minimal valuation of {q_prime}")
    _, required = apply_valuation(v_prime, q_prime)
    if _covered(q, required):
        raise ValueError(f"The facts of {Valuation(v_prime)} are covered by a minimal valuation of {q}")
    policy = _witness_policy(by_text(required))
    if not allow_skip and policy.is_skipping():
        raise ValueError(f"The facts of {Valuation(v_prime)} admit no witness policy that skips no facts")
    return policy


def _failing(q: ConjunctiveQuery, q_prime: ConjunctiveQuery, v_prime: Valuation, allow_skip: bool) -> TransferVerdict:
    logger.info(f"Transfer fails: {v_prime} is not covered")
    policy = witness_policy_for_nontransfer(q, q_prime, v_prime, allow_skip)
    return TransferVerdict(False, v_prime, policy)


def transfers(q: ConjunctiveQuery, q_prime: ConjunctiveQuery, allow_skip: bool = None,
              configuration: Configuration = None) -> TransferVerdict:
    """
    Decides transfer from q to q_prime. Without skipping, minimal valuations of q_prime that
    require a single fact need not be covered.

    Minimal valuations of q_prime are taken one per equality pattern of its variables; a
    covering valuation of q may use the values of the covered facts and fresh ones.
    """
    configuration = configuration or Configuration()
    allow_skip = configuration.allow_skip if allow_skip is None else allow_skip
    check_same_schema(q, q_prime)
    logger.info(f"Checking transfer from {q} to {q_prime}")

    core, theta = minimize_cq(q_prime)
    certificate = check_c3(q, q_prime)
    if certificate is None and (allow_skip or len(core.body_set) > 1):
        v_prime = compose(injective_valuation(q_prime), theta)
        return _failing(q, q_prime, Valuation(v_prime), allow_skip)

    fresh = [str(value) for value in range(1, len(q_prime.variables()) + 1)]
    patterns = 0
    for v_prime in MinimalValuationSearch(q_prime, fresh=fresh).search():
        patterns += 1
        _, required = apply_valuation(v_prime, q_prime)
        if len(required) == 1 and not allow_skip:
            continue
        if not _covered(q, required):
            return _failing(q, q_prime, v_prime, allow_skip)
    logger.debug(f"All {patterns} minimal valuation patterns of {q_prime} are covered")
    return TransferVerdict(True, certificate=certificate)


def transfers_strongly_minimal(q: ConjunctiveQuery, q_prime: ConjunctiveQuery) -> TransferVerdict:
    """ Transfer from a strongly minimal q, decided by the certificate alone """
    strongly_minimal, _ = is_strongly_minimal(q)
    if not strongly_minimal:
        raise ValueError(f"{q} is not strongly minimal")
    certificate = check_c3(q, q_prime)
    if certificate is not None:
        return TransferVerdict(True, certificate=certificate)
    _, theta = minimize_cq(q_prime)
    return _failing(q, q_prime, Valuation(compose(injective_valuation(q_prime), theta)), True)


def hypercube_family_pc(q: ConjunctiveQuery, q_prime: ConjunctiveQuery) -> FamilyVerdict:
    """
    Decides whether q_prime is parallel-correct under every Hypercube policy of q. Without
    a certificate, the identity-hash policy over the facts of an injective valuation of
    q_prime refutes it on those facts.
    """
    certificate = check_c3(q, q_prime)
    if certificate is not None:
        return FamilyVerdict(certificate)
    _, required = apply_valuation(injective_valuation(q_prime), q_prime)
    instance = Instance(required)
    return FamilyVerdict(None, scattered_witness_policy(q, instance), instance)
