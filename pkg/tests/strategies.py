"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from beliefattr.elot import And, Color, Empty, EpistemicFormula, Exists, Inside, IsColor, Modal, Not, Or, Var

BOXES = ("box1", "box2", "box3")
COLORS = ("red", "blue")


def _atoms(scope, boxes=BOXES):
    boxes = st.sampled_from(boxes)
    colors = st.sampled_from(COLORS)
    keys = colors.map(Color)
    if scope:
        keys = st.one_of(keys, st.sampled_from(sorted(scope)).map(Var))
    return st.one_of(
        st.builds(Inside, keys, boxes),
        st.builds(IsColor, keys, colors),
        st.builds(Empty, boxes),
    )


@st.composite
def inners(draw, depth=3, scope=frozenset(), boxes=BOXES):
    if depth == 0:
        return draw(_atoms(scope, boxes))
    kind = draw(st.sampled_from(["atom", "not", "and", "or", "exists"]))
    if kind == "atom":
        return draw(_atoms(scope, boxes))
    if kind == "not":
        return Not(draw(inners(depth - 1, scope, boxes)))
    if kind == "exists":
        var = draw(st.sampled_from(["K", "L", "Key2"]))
        return Exists(var, draw(inners(depth - 1, scope | {var}, boxes)))
    cls = And if kind == "and" else Or
    return cls(draw(inners(depth - 1, scope, boxes)), draw(inners(depth - 1, scope, boxes)))


@st.composite
def statements(draw, depth=2, boxes=BOXES):
    return EpistemicFormula(draw(st.sampled_from(list(Modal))), "player", draw(inners(depth, boxes=boxes)))
