"""Python bindings for the evex model checker."""

import json
from dataclasses import dataclass

from . import _evex
from ._evex import Program, ProgramError, SpaceCapExceeded, has_post_race

__all__ = [
    "Program",
    "ProgramError",
    "SpaceCapExceeded",
    "DcsReport",
    "load_program",
    "load_program_file",
    "gen_random",
    "has_post_race",
    "explore",
    "enumerate_all",
    "verify_dcs",
    "check_covering_set",
]


@dataclass
class DcsReport:
    ok: bool
    states_checked: int
    sequences_checked: int
    witness: str


def load_program(doc):
    """Load a program from a dict or a JSON string."""
    if not isinstance(doc, str):
        doc = json.dumps(doc)
    return _evex.load_program(doc)


def load_program_file(path):
    return _evex.load_program_file(str(path))


def gen_random(seed):
    return _evex.gen_random(seed)


def explore(program, algo="emdpor", *, read_read_indep=False, lock_indep=False, fork_hb=True, cap=2_000_000):
    """Run an explorer and return its statistics as a dict."""
    return json.loads(_evex.explore(program, algo, read_read_indep, lock_indep, fork_hb, cap))


def enumerate_all(program, cap=2_000_000):
    """Every maximal sequence, as lists of transition labels."""
    return _evex.enumerate(program, cap)


def verify_dcs(program, algo="emdpor", *, read_read_indep=False, lock_indep=False, fork_hb=True, cap=2_000_000):
    return DcsReport(*_evex.verify_dcs(program, algo, read_read_indep, lock_indep, fork_hb, cap))


def check_covering_set(program, threads, cap=2_000_000):
    """Check the first transitions of the given threads as a covering set at the initial state."""
    ok, witness = _evex.check_covering_set(program, list(threads), cap)
    return ok, witness
