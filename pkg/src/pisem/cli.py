"""Batch and REPL driver: load, exec, trace, mc, dump-kripke, set.

Both modes funnel through ``run_command`` so the same command sequence
produces the same standard output either way.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from dataclasses import dataclass, field

from .core import PiError, initial_configuration
from .imp import CompiledModule, FrontendError, ModuleDecl, compile_module, parse_source
from .lib import StepLimitExceeded, exec_program
from .ltl import (
    LTLSyntaxError, PropositionOutsideUniverse, UnknownProposition, format_formula,
    model_check, parse_ltl,
)
from .pretty import format_configuration, format_control
from .statespace import (
    DEFAULT_MAX_STATES, Kripke, StateSpaceExceeded, explore, format_props,
    lookup_var,
)

PROMPT = "pi> "

OK, VIOLATED, INPUT_ERROR, RUNTIME_ERROR = 0, 1, 2, 3


@dataclass
class Result:
    command: str
    status: str  # ok | holds | violated | aborted | error
    text: str = ""
    diag: str = ""
    data: dict = field(default_factory=dict)
    code: int = OK
    quit: bool = False

    def as_json(self) -> str:
        data = dict(self.data)
        if self.diag:
            data.setdefault("message", self.diag)
        return json.dumps({"command": self.command, "status": self.status, "data": data})


@dataclass
class Session:
    module: tuple[ModuleDecl, CompiledModule] | None = None
    message: str = ""
    granularity: str = "collapsed"
    max_states: int = DEFAULT_MAX_STATES
    max_steps: int = 10_000
    last_trace: list = field(default_factory=list)
    _kripke: Kripke | None = None

    def invalidate(self) -> None:
        self._kripke = None

    def kripke(self) -> Kripke:
        if self._kripke is None:
            _, m = self.module
            self._kripke = explore(initial_configuration(m.dec, m.cmd), self.max_states,
                                   m.props, self.granularity)
        return self._kripke


def _error(command, message, code) -> Result:
    return Result(command, "error", diag=message, code=code)


def _state_entries(k: Kripke, ids) -> list[dict]:
    return [{"state": s, "props": sorted(map(str, k.labels[s]))} for s in ids]


def _cmd_load(s: Session, args: list[str]) -> Result:
    if len(args) != 1:
        return _error("load", "usage: load <path>", INPUT_ERROR)
    path = args[0]
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        s.module, s.last_trace = None, []
        s.invalidate()
        return _error("load", f"cannot open {path}: {e.strerror or e}", INPUT_ERROR)
    try:
        ast = parse_source(text)
        compiled = compile_module(ast)
    except FrontendError as e:
        s.module, s.last_trace = None, []
        s.invalidate()
        return _error("load", f"{path}:{e}", INPUT_ERROR)
    s.module, s.last_trace = (ast, compiled), []
    s.invalidate()
    return Result("load", "ok", f"Module {compiled.name} loaded.\n",
                  data={"module": compiled.name, "variables": compiled.variables})


def _cmd_exec(s: Session, args: list[str]) -> Result:
    seed = None
    if args:
        if len(args) != 2 or args[0] != "--seed" or not args[1].lstrip("-").isdigit():
            return _error("exec", "usage: exec [--seed N]", INPUT_ERROR)
        seed = int(args[1])
    _, m = s.module
    strategy = "leftmost" if seed is None else "random"
    try:
        outcome = exec_program(m.dec, m.cmd, strategy, seed, s.max_steps, s.granularity)
    except StepLimitExceeded as e:
        s.last_trace = e.outcome.trace if e.outcome else []
        return _error("exec", str(e), RUNTIME_ERROR)
    s.last_trace = outcome.trace
    final = outcome.final
    store = {}
    lines = []
    for v in m.variables:
        value = lookup_var(final, v)
        shown = "undefined" if value is None else str(value)
        store[v] = shown
        lines.append(f"{v} = {shown}")
    output = [str(v) for v in final.out]
    lines.append(f"output: [{', '.join(output)}]")
    lines.append(f"status: {'aborted' if outcome.aborted else 'ok'}")
    diag = ""
    if outcome.error is not None:
        e = outcome.error
        where = f" at {format_control(e.head)}" if e.head is not None else ""
        diag = f"runtime error: {e}{where}"
    elif outcome.aborted:
        diag = "program aborted by exit"
    data = {"store": store, "output": output, "aborted": outcome.aborted,
            "steps": outcome.steps}
    return Result("exec", "aborted" if outcome.aborted else "ok", "\n".join(lines) + "\n",
                  diag, data, RUNTIME_ERROR if outcome.aborted else OK)


def _cmd_trace(s: Session, args: list[str]) -> Result:
    if not s.last_trace:
        return _error("trace", "no trace: run exec first", INPUT_ERROR)
    blocks = [f"C{i}:\n{format_configuration(c)}" for i, c in enumerate(s.last_trace)]
    return Result("trace", "ok", "\n".join(blocks) + "\n",
                  data={"configurations": blocks})


def _cmd_mc(s: Session, rest: str) -> Result:
    _, m = s.module
    try:
        f = parse_ltl(rest, m.props, m.consts)
    except (LTLSyntaxError, UnknownProposition) as e:
        return _error("mc", f"formula: {e}", INPUT_ERROR)
    try:
        k = s.kripke()
        verdict = model_check(k, f)
    except StateSpaceExceeded as e:
        return _error("mc", str(e), RUNTIME_ERROR)
    except PropositionOutsideUniverse as e:
        return _error("mc", str(e), INPUT_ERROR)
    data = {"formula": format_formula(f), "holds": verdict.holds, "states": len(k)}
    if verdict.holds:
        return Result("mc", "holds", "holds\n", data=data)
    lasso = verdict.counterexample
    lines = ["violated", "stem:"]
    lines += [f"S{i} {format_props(k.labels[i])}" for i in lasso.stem]
    lines.append("cycle:")
    lines += [f"S{i} {format_props(k.labels[i])}" for i in lasso.cycle]
    data["counterexample"] = {"stem": _state_entries(k, lasso.stem),
                              "cycle": _state_entries(k, lasso.cycle)}
    return Result("mc", "violated", "\n".join(lines) + "\n", data=data, code=VIOLATED)


def _cmd_dump(s: Session, args: list[str]) -> Result:
    try:
        k = s.kripke()
    except StateSpaceExceeded as e:
        return _error("dump-kripke", str(e), RUNTIME_ERROR)
    data = {"states": _state_entries(k, range(len(k))),
            "edges": [[i, j] for i, succ in enumerate(k.transitions) for j in succ]}
    return Result("dump-kripke", "ok", k.dump(), data=data)


def _cmd_set(s: Session, args: list[str]) -> Result:
    if len(args) == 2 and args[0] == "granularity" and args[1] in ("full", "collapsed"):
        s.granularity = args[1]
    elif len(args) == 2 and args[0] in ("max-states", "max-steps") and args[1].isdigit() \
            and int(args[1]) > 0:
        setattr(s, args[0].replace("-", "_"), int(args[1]))
    else:
        return _error("set", "usage: set granularity full|collapsed | set max-states N"
                      " | set max-steps N", INPUT_ERROR)
    s.invalidate()
    return Result("set", "ok", data={"option": args[0], "value": args[1]})


_NEEDS_MODULE = {"exec", "trace", "mc", "dump-kripke"}


def run_command(s: Session, line: str) -> Result:
    """Run one command line against the session. The session survives every error."""
    line = line.strip()
    if not line or line.startswith("--"):
        return Result("", "ok")
    name, _, rest = line.partition(" ")
    rest = rest.strip()
    if name in _NEEDS_MODULE and s.module is None:
        return _error(name, "no module loaded", INPUT_ERROR)
    try:
        if name == "mc":
            return _cmd_mc(s, rest)
        args = shlex.split(rest)
        if name == "load":
            r = _cmd_load(s, args)
        elif name == "exec":
            r = _cmd_exec(s, args)
        elif name == "trace":
            r = _cmd_trace(s, args)
        elif name == "dump-kripke":
            r = _cmd_dump(s, args)
        elif name == "set":
            r = _cmd_set(s, args)
        elif name == "quit":
            r = Result("quit", "ok", quit=True)
        else:
            r = _error(name, f"unknown command {name!r}", INPUT_ERROR)
    except KeyboardInterrupt:
        s.invalidate()
        r = _error(name, "interrupted", RUNTIME_ERROR)
    except (PiError, ValueError) as e:
        r = _error(name, str(e), RUNTIME_ERROR)
    s.message = r.diag or r.text
    return r


def _emit(r: Result, fmt: str, out, err) -> None:
    if not r.command:
        return
    if fmt == "json":
        out.write(r.as_json() + "\n")
    else:
        out.write(r.text)
    if r.diag:
        err.write(r.diag + "\n")
    out.flush()


def _combine(codes: list[int]) -> int:
    for code in (INPUT_ERROR, RUNTIME_ERROR, VIOLATED):
        if code in codes:
            return code
    return OK


def repl(session: Session, fmt: str = "text", stdin=None, out=None, err=None) -> int:
    stdin = stdin or sys.stdin
    out = out or sys.stdout
    err = err or sys.stderr
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    codes = []
    while True:
        if interactive:
            out.write(PROMPT)
            out.flush()
        try:
            line = stdin.readline()
        except KeyboardInterrupt:
            out.write("\n")
            continue
        if not line:
            break
        r = run_command(session, line)
        _emit(r, fmt, out, err)
        codes.append(r.code)
        if r.quit:
            break
    return _combine(codes)


def batch_commands(ns: argparse.Namespace) -> list[str]:
    cmds = [f"load {shlex.quote(ns.file)}"]
    if ns.granularity:
        cmds.append(f"set granularity {ns.granularity}")
    if ns.max_states:
        cmds.append(f"set max-states {ns.max_states}")
    if ns.max_steps:
        cmds.append(f"set max-steps {ns.max_steps}")
    want_exec = ns.exec or ns.trace or not (ns.mc or ns.dump_kripke)
    if want_exec:
        cmds.append("exec" + (f" --seed {ns.seed}" if ns.seed is not None else ""))
    if ns.trace:
        cmds.append("trace")
    if ns.dump_kripke:
        cmds.append("dump-kripke")
    for f in ns.mc or ():
        cmds.append(f"mc {f}")
    return cmds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pic", description="Run and model check IMP programs. No arguments: REPL.")
    p.add_argument("file", nargs="?", help="IMP module to load")
    p.add_argument("--exec", action="store_true", help="execute the module")
    p.add_argument("--mc", action="append", metavar="FORMULA",
                   help="model check an LTL formula (repeatable)")
    p.add_argument("--trace", action="store_true", help="print the execution trace")
    p.add_argument("--dump-kripke", action="store_true", help="print the state graph")
    p.add_argument("--granularity", choices=("collapsed", "full"))
    p.add_argument("--max-states", type=int, metavar="N")
    p.add_argument("--max-steps", type=int, metavar="N")
    p.add_argument("--seed", type=int, help="pick branches at random with this seed")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    session = Session()
    if ns.file is None:
        if ns.exec or ns.mc or ns.trace or ns.dump_kripke:
            parser.print_usage(sys.stderr)
            sys.stderr.write("pic: error: a file is required with action flags\n")
            return INPUT_ERROR
        return repl(session, ns.format)
    codes = []
    for line in batch_commands(ns):
        r = run_command(session, line)
        _emit(r, ns.format, sys.stdout, sys.stderr)
        codes.append(r.code)
        if r.command == "load" and r.code != OK:
            break
    return _combine(codes)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
