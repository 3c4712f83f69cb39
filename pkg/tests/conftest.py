import numpy as np
from hypothesis import strategies as st


def lattice_pvalues(min_k=2, max_k=10, max_n=40):
    """Raw p-value vectors on a random conformal lattice (1 + j)/(1 + n)."""

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        K = draw(st.integers(min_k, max_k))
        js = draw(st.lists(st.integers(0, n), min_size=K, max_size=K))
        return np.array([(1 + j) / (1 + n) for j in js])

    return build()


def prob_vectors(min_k=2, max_k=8):
    @st.composite
    def build(draw):
        K = draw(st.integers(min_k, max_k))
        w = draw(st.lists(st.floats(0.01, 10.0), min_size=K, max_size=K))
        p = np.array(w) / sum(w)
        return p

    return build()


# acceptance criteria report --------------------------------------------------------

ACCEPTANCE: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
