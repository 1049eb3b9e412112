"""Interactive proving sessions and the wire protocol.

Messages are plain dicts (the transports in :mod:`floret.service` move them
as newline-delimited JSON): a request carries ``method`` plus parameters, a
response either ``result`` or ``error``.  Action ids are stamped with the
digest of the state they were listed against, so a stale click can never be
applied to a different goal.

One logical owner per session; the manager serializes concurrent requests to
the same session with a lock while distinct sessions stay fully parallel.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import threading
from dataclasses import dataclass, field

from .derivations import Derivation, digest, format_proof
from .parse import parse_bouquet
from .paths import Path, PISTIL, iter_areas, pollination_candidates, split
from .rules import ALL_RULES, RuleInstance, RuleName, applicable_instances, apply_rule
from .syntax import (
    Bloom, Bouquet, FloretError, Signature, bouquet_text, flower_text,
)

PROTOCOL_VERSION = 1


class BadSession(FloretError):
    pass


class StaleAction(FloretError):
    pass


@dataclass
class Session:
    id: str
    goal: Bouquet
    current: Bouquet
    sig: Signature
    undo_stack: list[tuple[RuleInstance, Bouquet]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def state_digest(self) -> str:
        return digest(self.current)


def _action_id(state_digest: str, inst: RuleInstance) -> str:
    h = hashlib.sha256(f"{state_digest}|{inst.describe()}".encode()).hexdigest()[:12]
    return f"{state_digest}:{h}"


def describe_nodes(b: Bouquet) -> list[dict]:
    """Rendering metadata: every area and flower with path, kind, polarity."""
    nodes = []
    for steps, area in iter_areas(b):
        inv = sum(1 for _, p in steps if p == PISTIL)
        nodes.append({
            "path": Path(steps, None).serialize(),
            "kind": "area",
            "polarity": "positive" if inv % 2 == 0 else "negative",
            "size": len(area),
        })
        for i, f in enumerate(area):
            nodes.append({
                "path": Path(steps, frozenset({i})).serialize(),
                "kind": "atom" if not isinstance(f, Bloom) else "flower",
                "polarity": "positive" if inv % 2 == 0 else "negative",
                "text": flower_text(f),
                "formula": _tooltip(f),
                "petals": len(f.petals) if isinstance(f, Bloom) else 0,
                "pistil_binders": [v.display for v in f.pistil.binders] if isinstance(f, Bloom) else [],
                "petal_binders": [[v.display for v in p.binders] for p in f.petals] if isinstance(f, Bloom) else [],
            })
    return nodes


def _tooltip(f) -> str:
    from .formulas import decode, formula_text
    return formula_text(decode((f,)))


class SessionManager:
    """In-memory sessions; pass ``snapshot_dir`` for crash recovery: the
    action log of every session is mirrored to ``<dir>/<sid>.json`` after
    each mutation and can be replayed in order."""

    def __init__(self, sig: Signature, snapshot_dir: str | None = None):
        self.sig = sig
        self.snapshot_dir = snapshot_dir
        self._sessions: dict[str, Session] = {}
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def _persist(self, sid: str) -> None:
        if self.snapshot_dir is None:
            return
        import pathlib
        data = self.snapshot(sid)
        path = pathlib.Path(self.snapshot_dir) / f"{sid}.json"
        path.write_text(json.dumps(data, indent=2) + "\n")

    # --- protocol methods --------------------------------------------------

    def new(self, goal_text: str) -> dict:
        goal = parse_bouquet(goal_text, self.sig)
        with self._lock:
            sid = f"s{next(self._ids)}"
            self._sessions[sid] = Session(sid, goal, goal, self.sig)
        return self.state(sid)

    def _get(self, sid: str) -> Session:
        s = self._sessions.get(sid)
        if s is None:
            raise BadSession(f"no session {sid!r}")
        return s

    def state(self, sid: str) -> dict:
        s = self._get(sid)
        with s.lock:
            return {
                "session": s.id,
                "digest": s.state_digest(),
                "goal": bouquet_text(s.goal),
                "bouquet": bouquet_text(s.current),
                "closed": s.current == (),
                "depth": len(s.undo_stack),
                "nodes": describe_nodes(s.current),
            }

    def actions(self, sid: str, path_text: str | None = None) -> dict:
        s = self._get(sid)
        with s.lock:
            at = Path.parse(path_text) if path_text else None
            insts = applicable_instances(s.current, at=at, fragment=ALL_RULES,
                                         include_nondup=True)
            dig = s.state_digest()
            listed = [{
                "id": _action_id(dig, inst),
                "rule": inst.rule.value,
                "path": inst.path.serialize(),
                "caption": _caption(inst),
                "params": inst.describe(),
            } for inst in insts]
            cands: list[str] = []
            if at is not None:
                ctx, _ = split(s.current, Path(at.steps, at.selection or frozenset()))
                cands = sorted({flower_text(f) for f in pollination_candidates(ctx)})
            return {"session": sid, "digest": dig, "actions": listed, "candidates": cands}

    def apply(self, sid: str, action_id: str, payload_text: str | None = None) -> dict:
        s = self._get(sid)
        with s.lock:
            dig = s.state_digest()
            if not action_id.startswith(dig + ":"):
                raise StaleAction(f"action {action_id!r} was listed against another state")
            inst = self._find_action(s, dig, action_id)
            prior = s.current
            s.current = apply_rule(s.current, inst)
            s.undo_stack.append((inst, prior))
        self._persist(sid)
        return self.state(sid)

    def apply_instance(self, sid: str, inst: RuleInstance) -> dict:
        """Direct application (scripting convenience; same undo semantics)."""
        s = self._get(sid)
        with s.lock:
            prior = s.current
            s.current = apply_rule(s.current, inst)
            s.undo_stack.append((inst, prior))
        self._persist(sid)
        return self.state(sid)

    def step(self, sid: str, line: str) -> dict:
        """Apply one proof-file step line (``<rule> @ <path> [params...]``),
        the replay path used when walking a stored proof."""
        from .derivations import _parse_steps, _resolve_raw
        s = self._get(sid)
        with s.lock:
            body = line.split("=>", 1)[0].strip()
            _goal, raws = _parse_steps(f"goal:\n{body} => 00000000")
            inst = _resolve_raw(raws[0], s.current, self.sig)
            prior = s.current
            s.current = apply_rule(s.current, inst)
            s.undo_stack.append((inst, prior))
        self._persist(sid)
        return self.state(sid)

    def _find_action(self, s: Session, dig: str, action_id: str) -> RuleInstance:
        for inst in applicable_instances(s.current, fragment=ALL_RULES):
            if _action_id(dig, inst) == action_id:
                return inst
        raise StaleAction(f"action {action_id!r} not available")

    def undo(self, sid: str) -> dict:
        s = self._get(sid)
        with s.lock:
            if not s.undo_stack:
                raise FloretError("nothing to undo")
            _inst, prior = s.undo_stack.pop()
            s.current = prior
        self._persist(sid)
        return self.state(sid)

    def export(self, sid: str) -> dict:
        s = self._get(sid)
        with s.lock:
            if s.current != ():
                raise FloretError("cannot export: the garden is not empty yet")
            cur = s.goal
            steps = []
            for inst, _prior in s.undo_stack:
                cur = apply_rule(cur, inst)
                steps.append((inst, digest(cur)))
            d = Derivation(s.goal, tuple(steps))
            return {"session": sid, "proof": format_proof(d)}

    def snapshot(self, sid: str) -> dict:
        """Action log for crash recovery (replayable in order)."""
        s = self._get(sid)
        with s.lock:
            return {
                "session": sid,
                "goal": bouquet_text(s.goal),
                "log": [inst.describe() for inst, _ in s.undo_stack],
            }

    # --- dispatch ----------------------------------------------------------

    def handle(self, request: dict) -> dict:
        rid = request.get("id")
        try:
            method = request.get("method")
            params = request.get("params") or {}
            if method == "version":
                result = {"protocol": PROTOCOL_VERSION}
            elif method == "new":
                result = self.new(params["goal"])
            elif method == "state":
                result = self.state(params["session"])
            elif method == "actions":
                result = self.actions(params["session"], params.get("path"))
            elif method == "apply":
                result = self.apply(params["session"], params["action"])
            elif method == "step":
                result = self.step(params["session"], params["step"])
            elif method == "undo":
                result = self.undo(params["session"])
            elif method == "export":
                result = self.export(params["session"])
            elif method == "snapshot":
                result = self.snapshot(params["session"])
            else:
                raise FloretError(f"unknown method {method!r}")
            return {"id": rid, "result": result}
        except StaleAction as e:
            return {"id": rid, "error": {"code": "stale_action", "message": str(e)}}
        except BadSession as e:
            return {"id": rid, "error": {"code": "bad_session", "message": str(e)}}
        except KeyError as e:
            return {"id": rid, "error": {"code": "bad_request", "message": f"missing parameter {e}"}}
        except FloretError as e:
            return {"id": rid, "error": {"code": "rule_error", "message": str(e)}}


def _caption(inst: RuleInstance) -> str:
    captions = {
        RuleName.poll_down: "erase (justified by pollination)",
        RuleName.poll_up: "copy in (pollination)",
        RuleName.epis: "wrap in a fresh petal",
        RuleName.epet: "erase flower with an empty petal",
        RuleName.srep: "split on the cases",
        RuleName.ipis: "instantiate a pistil binder",
        RuleName.ipet: "instantiate a petal binder",
        RuleName.grow: "insert anything (positive)",
        RuleName.crop: "erase anything (negative)",
        RuleName.pull: "drop petals (positive)",
        RuleName.glue: "add petals (negative)",
        RuleName.apis: "abstract pistil variables",
        RuleName.apet: "abstract petal variables",
    }
    base = captions[inst.rule]
    if inst.subst:
        base += " " + ", ".join(f"{k}:={v}" for k, v in inst.subst)
    return base
