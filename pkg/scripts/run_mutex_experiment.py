"""Explore the mutex program and check its safety and liveness properties.

Prints the state count, both verdicts, the liveness counterexample and
wall-clock times. Usage: python scripts/run_mutex_experiment.py [path]
"""

import sys
import time
from pathlib import Path

from pisem.core import initial_configuration
from pisem.imp import compile_source
from pisem.ltl import eval_on_lasso, model_check, parse_ltl
from pisem.statespace import explore, format_props

ROOT = Path(__file__).resolve().parent.parent
FORMULAS = {
    "safety": "[] ~(p1 == crit /\\ p2 == crit)",
    "liveness": "[](p1 == try -> <> p1 == crit)",
}


def main(path: Path) -> int:
    m = compile_source(path.read_text())
    t0 = time.perf_counter()
    k = explore(initial_configuration(m.dec, m.cmd), 10_000, m.props)
    print(f"{m.name}: {len(k)} states, {sum(map(len, k.transitions))} edges "
          f"({time.perf_counter() - t0:.3f}s)")
    for name, text in FORMULAS.items():
        f = parse_ltl(text, m.props, m.consts)
        t0 = time.perf_counter()
        v = model_check(k, f)
        dt = time.perf_counter() - t0
        print(f"{name:9s} {text:36s} {'holds' if v.holds else 'violated'} ({dt:.3f}s)")
        if not v.holds:
            lasso = v.counterexample
            assert not eval_on_lasso(f, *lasso.word(k))
            for part, ids in (("stem", lasso.stem), ("cycle", lasso.cycle)):
                print(f"  {part}:")
                for i in ids:
                    print(f"    S{i} {format_props(k.labels[i])}")
    return 0


if __name__ == "__main__":
    sys.exit(main(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "programs" / "mutex.imp"))
