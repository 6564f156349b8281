import pytest
from hypothesis import given
from hypothesis import strategies as st

from urlsift.errors import DataError
from urlsift.tokenizer import DEFAULT_DELIMITERS, Tokenizer, tokenize, tokenize_batch

GWU = "www.seas.gwu.edu/~mfeldman?"

url_text = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), min_size=1, max_size=120).filter(
    lambda s: s.strip()
)


@pytest.mark.parametrize(
    "url, expected",
    [
        (GWU, ["www", "seas", "gwu", "edu", "mfeldman"]),
        ("HTTP://A.b", ["http", "a", "b"]),
        ("http://x.com/a=1&b=2", ["http", "x", "com", "a", "1", "b", "2"]),
        ("http://a.com/%20x", ["http", "a", "com", "20x"]),
        ("192.168.0.1:8080/bins", ["192", "168", "0", "1", "8080", "bins"]),
    ],
)
def test_tokenize_examples(url, expected):
    assert list(tokenize(url).tokens) == expected


def test_source_len_and_truncation():
    long = "a" * 70
    seq = tokenize(f"x.com/{long}")
    assert seq.tokens[-1] == "a" * 64
    assert seq.source_len == 6 + 70


@pytest.mark.parametrize("bad", ["", "   ", "\t\n"])
def test_empty_rejected(bad):
    with pytest.raises(DataError):
        tokenize(bad)


def test_batch():
    assert tokenize_batch([]) == []
    assert [list(s) for s in tokenize_batch(["a.b", "c.d"])] == [["a", "b"], ["c", "d"]]
    assert all(list(s) == ["www", "seas", "gwu", "edu", "mfeldman"] for s in tokenize_batch([GWU] * 5))


def test_batch_error_carries_index():
    with pytest.raises(DataError) as err:
        tokenize_batch(["a.b", "ok.com", " "])
    assert err.value.index == 2


def test_custom_delimiters():
    tok = Tokenizer(delimiters="/", max_token_len=3)
    assert tok.tokenize("ab.cd/efgh").tokens == ("ab.", "efg")


@given(url_text)
def test_case_insensitive(u):
    assert tokenize(u).tokens == tokenize(u.upper()).tokens


@given(url_text)
def test_tokens_are_clean(u):
    for t in tokenize(u).tokens:
        assert t and len(t) <= 64
        assert not set(t) & set(DEFAULT_DELIMITERS)
        assert t == t.lower()


@given(url_text)
def test_batch_scalar_agree(u):
    assert tokenize_batch([u])[0] == tokenize(u)
