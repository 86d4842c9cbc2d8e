"""Inductive case schedule for the weighted-energy estimates.

The estimates proceed by induction on the derivative order n = |alpha|.
Orders at most 2 are supplied by the solution's regularity class (the
"primer" pool); each later case consumes time-integrated prime or
double-prime brackets of strictly earlier cases:

    [a1, a2]'  feeds the case (a1 + 1, a2)
    [a1, a2]'' feeds the case (a1 - 1, a2 + 1)

so a case (a, b) is admissible once (a-1, b)' or (a+1, b-1)'' is available.
The order-3 block needs the one antiderivative case (-1, 3) (fed by
(0, 2)''), then treats (2,1), (1,2), (0,3) jointly in one application of
Gronwall's lemma.  At order 4, (4,0) closes on its own; (3,1), (2,2), (1,3)
are joint; (0,4) follows from (1,3)''.  For orders m >= 5 the pattern is a
single joint group (m,0)..(1,m-1) followed by (0,m) alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .errors import BrokenChain, InvalidOrder

Index = tuple[int, int]


@dataclass(frozen=True)
class Dep:
    """A consumed smoothing integral: bracket of ``alpha`` with ``kind``."""

    alpha: Index
    kind: str  # "prime" | "double_prime"

    def label(self) -> str:
        mark = "'" if self.kind == "prime" else "''"
        return f"[{self.alpha[0]},{self.alpha[1]}]{mark}"


@dataclass
class CaseGroup:
    order: int
    members: list
    gronwall_joint: bool = False
    primer: bool = False
    dependencies: list = field(default_factory=list)
    member_feeds: dict = field(default_factory=dict)  # member -> list[Dep]

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "members": [list(m) for m in self.members],
            "gronwall_joint": self.gronwall_joint,
            "primer": self.primer,
            "dependencies": [{"alpha": list(d.alpha), "kind": d.kind}
                             for d in self.dependencies],
        }


def _group(order, members, joint=False, primer=False, feeds=None):
    feeds = feeds or {}
    deps = []
    seen = set()
    for lst in feeds.values():
        for d in lst:
            if (d.alpha, d.kind) not in seen:
                seen.add((d.alpha, d.kind))
                deps.append(d)
    return CaseGroup(order=order, members=list(members), gronwall_joint=joint,
                     primer=primer, dependencies=deps, member_feeds=dict(feeds))


def case_schedule(n: int, merge_order4: bool = False) -> list[CaseGroup]:
    """Ordered case groups needed to control all brackets of order <= n.

    ``merge_order4`` folds (4,0) into the joint order-4 group instead of
    treating it on its own (both variants close; the standalone (4,0) is
    the default).
    """
    if n < 3:
        raise InvalidOrder(f"schedule starts at n = 3, got {n}")

    groups = [
        _group(2, [(2, 0)], primer=True),
        _group(2, [(1, 1)], primer=True),
        _group(2, [(0, 2)], primer=True),
        _group(2, [(-1, 3)], feeds={(-1, 3): [Dep((0, 2), "double_prime")]}),
        _group(3, [(3, 0)], feeds={(3, 0): [Dep((2, 0), "prime")]}),
        _group(3, [(2, 1), (1, 2), (0, 3)], joint=True, feeds={
            (2, 1): [Dep((1, 1), "prime")],
            (1, 2): [Dep((0, 2), "prime")],
            (0, 3): [Dep((-1, 3), "prime"), Dep((1, 1), "double_prime")],
        }),
    ]
    if n >= 4:
        if merge_order4:
            groups.append(_group(4, [(4, 0), (3, 1), (2, 2), (1, 3)], joint=True,
                                 feeds={
                                     (4, 0): [Dep((3, 0), "prime")],
                                     (3, 1): [Dep((2, 1), "prime")],
                                     (2, 2): [Dep((1, 2), "prime")],
                                     (1, 3): [Dep((0, 3), "prime")],
                                 }))
        else:
            groups.append(_group(4, [(4, 0)], feeds={
                (4, 0): [Dep((3, 0), "prime"), Dep((2, 0), "prime")]}))
            groups.append(_group(4, [(3, 1), (2, 2), (1, 3)], joint=True, feeds={
                (3, 1): [Dep((2, 1), "prime")],
                (2, 2): [Dep((1, 2), "prime")],
                (1, 3): [Dep((0, 3), "prime")],
            }))
        groups.append(_group(4, [(0, 4)], feeds={
            (0, 4): [Dep((1, 3), "double_prime")]}))
    for m in range(5, n + 1):
        members = [(m - j, j) for j in range(m)]  # (m,0) .. (1,m-1)
        feeds = {(a, b): [Dep((a - 1, b), "prime")] for (a, b) in members}
        groups.append(_group(m, members, joint=True, feeds=feeds))
        groups.append(_group(m, [(0, m)], feeds={
            (0, m): [Dep((1, m - 1), "double_prime")]}))
    return groups


def monitored_indices(n: int) -> list[Index]:
    """All member indices of the schedule up to order n, in group order."""
    out = []
    for grp in case_schedule(n):
        out.extend(grp.members)
    return out


# ---------------------------------------------------------------------------
# Leibniz expansion of the nonlinear term
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeibnizTerm:
    coef: int
    beta: Index   # derivative on the plain factor
    gamma: Index  # derivative under the extra d/dx

    def factors(self) -> tuple[Index, Index]:
        """The two derivative indices of the product, unordered-normalized."""
        g1 = (self.gamma[0] + 1, self.gamma[1])
        return tuple(sorted((self.beta, g1)))  # type: ignore[return-value]


def leibniz_terms(alpha) -> list[LeibnizTerm]:
    """Bivariate Leibniz expansion d^alpha(u du/dx) = sum coef d^beta u d^(gamma+e1) u.

    Coefficients are the binomial products C(a1, b1) C(a2, b2); every term
    satisfies |beta| + |gamma| = |alpha| and the coefficients sum to 2^|alpha|.
    """
    a1, a2 = int(alpha[0]), int(alpha[1])
    if a1 < 0:
        raise ValueError("Leibniz expansion requires alpha_1 >= 0")
    out = []
    for b1 in range(a1 + 1):
        for b2 in range(a2 + 1):
            coef = comb(a1, b1) * comb(a2, b2)
            out.append(LeibnizTerm(coef=coef, beta=(b1, b2),
                                   gamma=(a1 - b1, a2 - b2)))
    return out


def grouped_leibniz(alpha) -> dict:
    """Combine Leibniz terms with identical (unordered) factor pairs.

    This is the form the case-by-case estimates write the expansion in,
    e.g. alpha = (2,0) gives {((0,0),(3,0)): 1, ((1,0),(2,0)): 3}.
    """
    out: dict = {}
    for t in leibniz_terms(alpha):
        key = t.factors()
        out[key] = out.get(key, 0) + t.coef
    return out


# ---------------------------------------------------------------------------
# dependency closure
# ---------------------------------------------------------------------------

def _feed_candidates(member: Index) -> list[Dep]:
    """Smoothing integrals that can supply the A1/A2 bound for ``member``."""
    a, b = member
    cands = []
    src = (a - 1, b)
    if src[0] >= -1 and not (src[0] == -1 and src[1] < 1):
        cands.append(Dep(src, "prime"))
    src = (a + 1, b - 1)
    if b - 1 >= 0:
        cands.append(Dep(src, "double_prime"))
    return cands


@dataclass
class ClosureReport:
    n: int
    ok: bool
    checked: int
    notes: list

    def to_dict(self) -> dict:
        return {"n": self.n, "ok": self.ok, "checked": self.checked,
                "notes": self.notes}


def dependency_closure(n: int, groups: list | None = None) -> ClosureReport:
    """Verify the schedule's dependency DAG closes.

    Every non-primer member must have a recorded feed that (a) is one of its
    admissible feed candidates and (b) is supplied by a member of a strictly
    earlier group or by the order <= 2 pool the regularity class provides.
    Raises :class:`BrokenChain` naming the first unsatisfied member.
    """
    if groups is None:
        groups = case_schedule(n)
    available: set = set()
    # order <= 2 cases with a1 >= 0 come with the well-posedness class
    pool = {(a, b) for a in range(0, 3) for b in range(0, 3 - a)}
    available |= pool
    checked = 0
    notes = []
    for gi, grp in enumerate(groups):
        if not grp.primer:
            for member in grp.members:
                member = tuple(member)
                cands = {(d.alpha, d.kind) for d in _feed_candidates(member)}
                feeds = grp.member_feeds.get(member, [])
                ok_feed = None
                for d in feeds:
                    if (tuple(d.alpha), d.kind) in cands and tuple(d.alpha) in available:
                        ok_feed = d
                        break
                if ok_feed is None:
                    raise BrokenChain(
                        f"case {member} (group {gi}, order {grp.order}): no recorded "
                        f"feed among earlier cases; candidates "
                        f"{[c.label() for c in _feed_candidates(member)]}"
                    )
                notes.append(f"{member} <- {ok_feed.label()}")
                checked += 1
        available |= {tuple(m) for m in grp.members}
    return ClosureReport(n=n, ok=True, checked=checked, notes=notes)


def schedule_to_dot(groups: list) -> str:
    """DOT digraph of the dependency structure (for documentation figures)."""
    lines = ["digraph schedule {", "  rankdir=LR;"]
    for gi, grp in enumerate(groups):
        style = "dashed" if grp.primer else "solid"
        label = ", ".join(f"({a},{b})" for a, b in grp.members)
        joint = " joint" if grp.gronwall_joint else ""
        lines.append(f'  g{gi} [label="{label}{joint}", style={style}, shape=box];')
    pos = {}
    for gi, grp in enumerate(groups):
        for m in grp.members:
            pos[tuple(m)] = gi
    for gi, grp in enumerate(groups):
        for d in grp.dependencies:
            src = pos.get(tuple(d.alpha))
            if src is not None and src != gi:
                lines.append(f'  g{src} -> g{gi} [label="{d.label()}"];')
    lines.append("}")
    return "\n".join(lines)
