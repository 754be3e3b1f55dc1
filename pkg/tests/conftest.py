import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ARCTAN = "(1+x^2)*D = 1 ; y(0)=0"
ARCCOT1 = "(1+x^2)*D = -1 ; y(0)=pi/2"
LN = "x*D = 1 ; y(1)=0"
FIVE_LN = "x*D = 5 ; y(1)=0"
SQRT = "x*D - 1/2 = 0 ; y(1)=1"
HARDER = "x*(1+x^4)*D^2 + (3*x^4-1)*D = 0 ; y(0)=0, y'(0)=0, y''(0)=2"
HARDER_INHOM = "D = 2*x/(1+x^4) ; y(0)=0"

CORPUS = {
    "arctan": ARCTAN,
    "arccot1": ARCCOT1,
    "ln": LN,
    "five_ln": FIVE_LN,
    "sqrt": SQRT,
    "harder": HARDER,
    "harder_inhom": HARDER_INHOM,
}


@pytest.fixture(scope="session")
def analyses():
    from branchcut.pipeline import analyze

    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = analyze(CORPUS[name])
        return cache[name]

    return get


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
