import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccite.query import (
    And,
    Complement,
    Not,
    Or,
    Phrase,
    QueryIndex,
    QuerySyntaxError,
    Ref,
    Same,
    UnresolvedReference,
    Year,
    evaluate_query,
    parse_affiliation_query,
    render,
)
from fraccite.records import PublicationRecord


def rec(rid, *addresses, year=2005):
    return PublicationRecord(rid, year, addresses=tuple(addresses), ref_count=1)


CORPUS = [
    rec("phys", "Tsinghua Univ, Dep Phys, Beijing, Peoples R China"),
    rec("split", "Tsinghua Univ, Beijing", "Peking Univ, Dep Phys"),
    rec("chem", "Tsinghua Univ, Dep Chem, Beijing 100084, Peoples R China"),
    rec("chemeng", "Tsinghua Univ, Dep Chem Engn, Beijing, Peoples R China"),
    rec("taiwan", "Natl Tsing Hua Univ, Dep Phys, Hsinchu, Taiwan", "Tsinghua Univ, Dep Phys, Beijing, Peoples R China"),
    rec("old", "Tsinghua Univ, Dep Phys, Beijing, Peoples R China", year=2004),
]


def ids(query, named=None):
    return set(evaluate_query(parse_affiliation_query(query), CORPUS, named))


def test_footnote_style_query_tree():
    tree = parse_affiliation_query("ad=(tsinghua univ same dep phys) and ad=(china not taiwan) and py=2005")
    assert tree == And(
        And(Same((Phrase("tsinghua univ"), Phrase("dep phys"))), Not(Phrase("china"), Phrase("taiwan"))),
        Year(2005),
    )


def test_year_and_reference_atoms():
    assert parse_affiliation_query("py=2005") == Year(2005)
    assert parse_affiliation_query("#1 not #2") == Not(Ref(1), Ref(2))


def test_keywords_case_insensitive():
    assert parse_affiliation_query("AD=(a SAME b) AND PY=2005") == And(Same((Phrase("a"), Phrase("b"))), Year(2005))


def test_same_requires_one_address():
    assert ids("ad=(tsinghua univ same dep phys)") == {"phys", "taiwan", "old"}


def test_not_inside_group_is_record_level():
    assert ids("ad=(dep phys not taiwan)") == {"phys", "split", "old"}


def test_whole_word_matching():
    assert ids("ad=(dep chem)") == {"chem", "chemeng"}
    assert ids("ad=(dep che)") == set()
    assert ids('ad=("beijing 100084")') == {"chem"}


def test_three_step_construction_isolates_chemistry():
    named = {
        1: evaluate_query(parse_affiliation_query("ad=(tsinghua univ same dep chem)"), CORPUS),
        2: evaluate_query(parse_affiliation_query("ad=(tsinghua univ same dep chem engn)"), CORPUS),
    }
    assert ids("#1 not #2", named) == {"chem"}


def test_unresolved_reference_named_in_error():
    tree = parse_affiliation_query("#3 or py=2005")
    with pytest.raises(UnresolvedReference, match="#3"):
        evaluate_query(tree, CORPUS, {})


def test_leading_not_is_complement():
    assert parse_affiliation_query("not py=2005") == Complement(Year(2005))
    assert ids("not py=2005") == {"old"}


def test_precedence_same_not_and_or():
    tree = parse_affiliation_query("py=2004 or ad=(a) and ad=(b) not ad=(c)")
    assert tree == Or(Year(2004), And(Phrase("a"), Not(Phrase("b"), Phrase("c"))))


@pytest.mark.parametrize("text,offset", [
    ("", 0),
    ("ad=(tsinghua univ", 17),
    ("py=20x5", 3),
    ("zz=(x)", 0),
    ("ad=(a) and", 10),
    ("ad=(a)) ", 6),
    ("ad=((a or b) same c)", 4),
])
def test_syntax_errors_carry_offset(text, offset):
    with pytest.raises(QuerySyntaxError) as info:
        parse_affiliation_query(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_quoted_phrases_protect_keywords():
    tree = parse_affiliation_query('ad=("sch publ policy and management" same tsinghua)')
    assert tree == Same((Phrase("sch publ policy and management"), Phrase("tsinghua")))
    assert parse_affiliation_query(render(tree)) == tree


# --- properties ------------------------------------------------------------

words = st.sampled_from(["tsinghua", "univ", "dep", "phys", "chem", "engn", "and", "or", "not", "same", "beijing"])
phrases = st.lists(words, min_size=1, max_size=3).map(lambda ws: Phrase(" ".join(ws)))
leaf = st.one_of(phrases, st.integers(2000, 2010).map(Year), st.lists(phrases, min_size=2, max_size=3).map(lambda p: Same(tuple(p))))
exprs = st.recursive(
    leaf,
    lambda sub: st.one_of(
        st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Not, sub, sub), st.builds(Complement, sub)
    ),
    max_leaves=8,
)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_render_parse_round_trip(expr):
    assert parse_affiliation_query(render(expr)) == expr


addresses = st.lists(words, min_size=1, max_size=5).map(" ".join)
corpora = st.lists(
    st.builds(lambda i, y, a: (i, y, a), st.integers(0, 10**6), st.integers(2003, 2006), st.lists(addresses, max_size=3)),
    max_size=12,
    unique_by=lambda t: t[0],
).map(lambda rows: [PublicationRecord(f"r{i}", y, addresses=tuple(a)) for i, y, a in rows])


@settings(max_examples=150, deadline=None)
@given(corpora, exprs, exprs, st.randoms(use_true_random=False))
def test_de_morgan_and_order_independence(corpus, a, b, rnd):
    index = QueryIndex(corpus)
    lhs = evaluate_query(Complement(Or(a, b)), index)
    rhs = evaluate_query(And(Complement(a), Complement(b)), index)
    assert lhs == rhs
    shuffled = list(corpus)
    rnd.shuffle(shuffled)
    assert evaluate_query(Or(a, b), shuffled) == evaluate_query(Or(a, b), index) == evaluate_query(Or(a, b), index)
