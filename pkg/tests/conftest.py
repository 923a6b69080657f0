import math

from distill.fock import OperatorState

R = math.sqrt


def fock_over(state: OperatorState, modes) -> dict:
    """Fock amplitudes keyed by pattern string in the given mode order."""
    state = state.reorder(modes) if tuple(modes) != state.modes else state
    return {"".join(map(str, m)): a for m, a in state.to_fock().items()}


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
