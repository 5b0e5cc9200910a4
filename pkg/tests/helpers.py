"""Independent oracles and generators shared by the test modules."""

import itertools
from pathlib import Path

from hypothesis import strategies as st

from vdatalog.syntax import PcAnd, PcFalse, PcId, PcNot, PcOr, PcTrue

ROOT = Path(__file__).resolve().parent.parent
TRAVEL = ROOT / "data" / "travel"

FEATURES8 = [f"x{i}" for i in range(8)]


def truth(e, env):
    """Evaluate a syntactic PC directly, without BDDs."""
    if isinstance(e, PcTrue):
        return True
    if isinstance(e, PcFalse):
        return False
    if isinstance(e, PcId):
        return env[e.name]
    if isinstance(e, PcNot):
        return not truth(e.operand, env)
    if isinstance(e, PcAnd):
        return truth(e.left, env) and truth(e.right, env)
    if isinstance(e, PcOr):
        return truth(e.left, env) or truth(e.right, env)
    raise TypeError(e)


def assignments(features):
    for bits in itertools.product((False, True), repeat=len(features)):
        yield dict(zip(features, bits))


def truth_table(e, features):
    return tuple(truth(e, env) for env in assignments(features))


def models(e, features):
    return [env for env in assignments(features) if truth(e, env)]


def pc_exprs(features=FEATURES8, max_leaves=12):
    leaves = st.one_of(
        st.sampled_from(features).map(PcId),
        st.just(PcTrue()),
        st.just(PcFalse()),
    )
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            sub.map(PcNot),
            st.tuples(sub, sub).map(lambda p: PcAnd(*p)),
            st.tuples(sub, sub).map(lambda p: PcOr(*p)),
        ),
        max_leaves=max_leaves,
    )


def transitive_closure(edges):
    """Reachability pairs by repeated squaring over a dict of successor sets."""
    succ = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
    reach = {a: set(bs) for a, bs in succ.items()}
    changed = True
    while changed:
        changed = False
        for a in list(reach):
            extra = set()
            for b in reach[a]:
                extra |= reach.get(b, set())
            if not extra <= reach[a]:
                reach[a] |= extra
                changed = True
    return {(a, b) for a, bs in reach.items() for b in bs}


TRAVEL_FM_TEXT = r"(Air \/ Land \/ Sea) /\ !(Air /\ Land) /\ !(Land /\ Sea) /\ !(Sea /\ Air)"
