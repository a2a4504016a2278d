"""Standalone solve worker: ``python -m swcopt.external_worker in.lp out.sol``.

Reads an interchange file, solves it with the HiGHS backend, and writes the
plain-text solution file.  Doubles as the reference external solver for the
subprocess adapter (point SWC_EXTERNAL_SOLVER at this invocation).
"""
from __future__ import annotations

import sys
from pathlib import Path

from .interchange import parse_interchange, write_solution
from .lp import solve_highs


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    if len(args) != 2:
        print("usage: python -m swcopt.external_worker INPUT.lp OUTPUT.sol", file=sys.stderr)
        return 2
    lp = parse_interchange(Path(args[0]).read_text())
    res = solve_highs(lp)
    write_solution(res, lp, args[1])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
