"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st


@st.composite
def legal_sequences(draw, max_entry=20, max_len=15):
    n = draw(st.integers(1, max_len))
    ms = [draw(st.integers(0, max_entry // 2))]
    for i in range(1, n):
        if i % 2:
            ms.append(ms[-1])
        else:
            if ms[-1] >= max_entry:
                break
            ms.append(draw(st.integers(ms[-1] + 1, max_entry)))
    return tuple(ms)


def random_legal_sequence(rng, max_len=15, max_entry=20):
    """Numpy-driven twin of :func:`legal_sequences` for bulk sampling."""
    n = int(rng.integers(1, max_len + 1))
    ms = [int(rng.integers(0, max_entry // 2 + 1))]
    for i in range(1, n):
        if i % 2:
            ms.append(ms[-1])
        else:
            if ms[-1] >= max_entry:
                break
            ms.append(int(rng.integers(ms[-1] + 1, max_entry + 1)))
    return tuple(ms)
