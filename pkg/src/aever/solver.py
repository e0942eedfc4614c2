"""Client for an external SMT solver speaking SMT-LIB2 over stdin/stdout.

Validity of a formula is decided by asserting its negation and checking for
unsatisfiability; a satisfying assignment of the negation is the falsifying
model.  Each query spawns a fresh solver process and tears it down, keeping
queries isolated and reproducible.  The command defaults to ``z3`` when one
is on PATH and otherwise to the bundled solver subprocess; either can be
overridden per config or through the ``AEVER_SOLVER`` environment variable.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ProtocolError, SolverSpawnError, SortMismatch
from .terms import (
    BOOL,
    Term,
    eval_term,
    free_vars,
    parse_sexprs,
    smt_symbol,
    sort_of,
    to_smtlib,
)

SOLVER_ENV_VAR = "AEVER_SOLVER"


def bundled_solver_command() -> tuple[str, ...]:
    return (sys.executable, "-m", "aever.smtlib_solver")


def default_solver_command() -> tuple[str, ...]:
    override = os.environ.get(SOLVER_ENV_VAR)
    if override:
        return tuple(shlex.split(override))
    if shutil.which("z3"):
        return ("z3", "-smt2", "-in")
    return bundled_solver_command()


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...]
    timeout_ms: int = 30_000
    logic: str = "ALL"

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")


def default_config(**overrides) -> SolverConfig:
    cfg = SolverConfig(command=default_solver_command())
    return replace(cfg, **overrides) if overrides else cfg


@dataclass(frozen=True)
class Verdict:
    status: str  # "valid" | "invalid" | "unknown"
    model: Mapping[str, int] | None = None
    reason: str | None = None  # for unknown: timeout | solver-unknown | solver-error

    @property
    def is_valid(self) -> bool:
        return self.status == "valid"

    @property
    def is_invalid(self) -> bool:
        return self.status == "invalid"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"

    def __str__(self) -> str:
        if self.is_invalid and self.model is not None:
            inner = ", ".join(f"{k} = {v}" for k, v in sorted(self.model.items()))
            return f"invalid [{inner}]"
        if self.is_unknown:
            return f"unknown ({self.reason})"
        return self.status


VALID = Verdict("valid")


def _decl_symbol(name: str) -> str:
    # '!' is legal in simple symbols, but namespaced names are declared in
    # quoted form; solvers treat |x| and x as the same symbol.
    return f"|{name}|" if "!" in name else smt_symbol(name)


def render_script(t: Term, config: SolverConfig) -> str:
    lines = [f"(set-logic {config.logic})"] if config.logic else []
    lines.append("(set-option :produce-models true)")
    lines.append(f"(set-option :timeout {config.timeout_ms})")
    for name in sorted(free_vars(t)):
        lines.append(f"(declare-const {_decl_symbol(name)} Int)")
    lines.append(f"(assert (not {to_smtlib(t)}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def _subprocess_env() -> dict[str, str]:
    env = os.environ.copy()
    src = str(Path(__file__).resolve().parents[1])
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    return env


def verify(t: Term, config: SolverConfig | None = None) -> Verdict:
    """Check validity of ``t`` over the integers."""
    if sort_of(t) != BOOL:
        raise SortMismatch("verify needs a Bool-sorted term")
    config = config or default_config()
    script = render_script(t, config)
    hard_timeout = config.timeout_ms / 1000.0 * 1.5 + 10.0
    try:
        proc = subprocess.run(
            list(config.command),
            input=script,
            capture_output=True,
            text=True,
            timeout=hard_timeout,
            env=_subprocess_env(),
        )
    except FileNotFoundError as exc:
        raise SolverSpawnError(f"cannot spawn solver {config.command!r}: {exc}") from None
    except subprocess.TimeoutExpired:
        return Verdict("unknown", reason="timeout")
    return _interpret_output(proc.stdout, proc.stderr, t)


def _interpret_output(stdout: str, stderr: str, t: Term) -> Verdict:
    if not stdout.strip():
        raise ProtocolError("solver produced no output", stderr)
    try:
        sxs = parse_sexprs(stdout)
    except Exception:
        raise ProtocolError("unparseable solver output", stdout) from None

    answer = None
    answer_at = None
    for i, sx in enumerate(sxs):
        if isinstance(sx, str) and sx in ("sat", "unsat", "unknown"):
            answer, answer_at = sx, i
            break
    if answer is None:
        if any(isinstance(sx, list) and sx[:1] == ["error"] for sx in sxs):
            return Verdict("unknown", reason="solver-error")
        raise ProtocolError("no check-sat answer in solver output", stdout)
    if answer == "unsat":
        return VALID
    if answer == "unknown":
        return Verdict("unknown", reason="solver-unknown")

    for sx in sxs[answer_at + 1 :]:
        if isinstance(sx, list) and sx[:1] != ["error"]:
            model = _model_from_sexpr(sx, stdout)
            full = {name: model.get(name, 0) for name in free_vars(t)}
            full.update(model)
            return Verdict("invalid", model=full)
    raise ProtocolError("sat answer without a model", stdout)


def parse_model(text: str) -> dict[str, int]:
    """Extract integer constant assignments from a get-model response."""
    try:
        sxs = parse_sexprs(text)
    except Exception:
        raise ProtocolError("unparseable model text", text) from None
    for sx in sxs:
        if isinstance(sx, list) and sx[:1] != ["error"]:
            return _model_from_sexpr(sx, text)
    raise ProtocolError("no model in solver response", text)


def _model_from_sexpr(sx: list, raw: str) -> dict[str, int]:
    entries = sx[1:] if sx[:1] == ["model"] else sx
    model: dict[str, int] = {}
    for entry in entries:
        if not (isinstance(entry, list) and entry[:1] == ["define-fun"] and len(entry) == 5):
            raise ProtocolError(f"malformed model entry {entry!r}", raw)
        _, name, params, sort, value = entry
        if params != [] or sort != "Int":
            continue  # non-integer-constant entries are ignored
        v = _int_value(value)
        if v is None:
            continue
        model[str(name)] = v
    return model


def _int_value(sx) -> int | None:
    if isinstance(sx, str):
        try:
            return int(sx)
        except ValueError:
            return None
    if isinstance(sx, list) and len(sx) == 2 and sx[0] == "-":
        inner = _int_value(sx[1])
        return None if inner is None else -inner
    return None


def model_falsifies(t: Term, model: Mapping[str, int], qdomain: Iterable[int]) -> bool:
    """Does substituting ``model`` make ``t`` false?  Residual quantifiers are
    checked by bounded enumeration over ``qdomain``."""
    return eval_term(t, dict(model), qdomain) is False
