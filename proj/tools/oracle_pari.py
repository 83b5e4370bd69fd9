#!/usr/bin/env python3
"""JSON-lines bridge between hassehunter and PARI/GP.

Reads one request object per line on stdin, answers one response object per
line on stdout (pass the command via --oracle-cmd, e.g.
`--oracle-cmd 'python3 tools/oracle_pari.py'`):

  {"id": n, "op": "class_group", "p": p, "c": c}
    -> {"id": n, "ok": true, "invariants": [d1, ...]}
  {"id": n, "op": "ideal_class_order", "p": p, "c": c, "ell": l, "root": a}
    -> {"id": n, "ok": true, "order": m}
  {"id": n, "op": "is_principal", "p": p, "c": c, "hnf": [[...], ...]}
    -> {"id": n, "ok": true, "principal": b, "generator": [...] | null}
  failures -> {"id": n, "ok": false, "error": "..."}

Integers may arrive as JSON numbers or decimal strings; replies stringify
anything that could overflow a double.  The `hnf` matrix is column-style
over the power basis 1, y, ..., y^(p-1) of Z[y]/(y^p - c); columns are read
as ideal generators, so the answer concerns the O_K-ideal they generate.

Needs the `gp` binary (PARI/GP 2.11+).  Class groups come from bnfinit; a
30-second bnfcertify attempt upgrades them to unconditional, otherwise they
stand under GRH (reported in the error message only if certification was
explicitly requested via ORACLE_REQUIRE_CERTIFY=1).
"""

import json
import math
import os
import subprocess
import sys

SENTINEL = "@@DONE@@"


class GP:
    def __init__(self):
        try:
            self.proc = subprocess.Popen(
                ["gp", "-q", "-f", "-s", "512M"],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except FileNotFoundError:
            sys.stderr.write("oracle_pari: the gp binary is not on PATH\n")
            sys.exit(127)
        self.eval("default(breakloop, 0)")

    def eval(self, expr):
        """Evaluate an expression; return whatever gp printed."""
        self.proc.stdin.write(f'{expr};print("{SENTINEL}")\n')
        self.proc.stdin.flush()
        lines = []
        while True:
            line = self.proc.stdout.readline()
            if not line:
                raise RuntimeError("gp terminated unexpectedly")
            line = line.rstrip("\n")
            if line == SENTINEL:
                break
            lines.append(line)
        out = "\n".join(lines)
        if "***" in out:
            raise RuntimeError(f"gp error: {out}")
        return out


gp = GP()
state = {"key": None, "cyc": None, "certified": False}


def as_int(v):
    return int(v) if not isinstance(v, bool) else int(v)


def ensure_bnf(p, c):
    key = (p, c)
    if state["key"] == key:
        return
    gp.eval(f"B = bnfinit('y^{p} - {c}, 1)")
    certified = False
    try:
        out = gp.eval("print(iferr(alarm(30, bnfcertify(B)), E, -1))")
        certified = out.strip() == "1"
    except RuntimeError:
        pass
    if os.environ.get("ORACLE_REQUIRE_CERTIFY") == "1" and not certified:
        state["key"] = None
        raise RuntimeError("bnfcertify failed or timed out")
    cyc_text = gp.eval("print(B.clgp.cyc)").strip()
    inside = cyc_text[1:-1].strip()
    cyc = [int(t) for t in inside.split(",")] if inside else []
    state.update(key=key, cyc=cyc, certified=certified)


def parse_vector(text):
    """'[a, b/c, d]' -> list of 'a', 'b/c', 'd' strings."""
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise RuntimeError(f"unexpected gp vector: {text}")
    inside = text[1:-1].strip()
    return [t.strip() for t in inside.split(",")] if inside else []


def class_order(dlog):
    ord_ = 1
    for d, v in zip(state["cyc"], dlog):
        ord_ = math.lcm(ord_, d // math.gcd(d, v % d))
    return ord_


def handle(req):
    op = req["op"]
    p = as_int(req["p"])
    c = as_int(req["c"])
    ensure_bnf(p, c)

    if op == "class_group":
        # ascending divisibility chain; PARI reports descending
        return {"invariants": sorted(state["cyc"])}

    if op == "ideal_class_order":
        ell = as_int(req["ell"])
        root = as_int(req["root"])
        gp.eval(
            f"Qsel = [P | P <- idealprimedec(B.nf, {ell}),"
            f" P.f == 1 && nfeltval(B.nf, 'y - {root}, P) > 0]"
        )
        if gp.eval("print(#Qsel)").strip() != "1":
            raise RuntimeError("no unique degree-1 prime with that root")
        dlog_text = gp.eval("print(bnfisprincipal(B, Qsel[1], 0)~)")
        dlog = [int(t) for t in parse_vector(dlog_text)]
        return {"order": class_order(dlog)}

    if op == "is_principal":
        hnf = req["hnf"]
        if len(hnf) != p or any(len(row) != p for row in hnf):
            raise RuntimeError("hnf must be a p x p matrix")
        cols = []
        for j in range(p):
            coeffs = ", ".join(str(as_int(hnf[i][j])) for i in range(p))
            cols.append(f"nfalgtobasis(B.nf, Polrev([{coeffs}], 'y))")
        gp.eval(f"I = idealhnf(B.nf, Mat([{', '.join(cols)}]))")
        ans = gp.eval("print(bnfisprincipal(B, I))")
        # "[~[e1, ...], [a1, ...]~]" — split the dlog part from the element
        dlog_text = gp.eval("print(bnfisprincipal(B, I, 0)~)")
        dlog = [int(t) for t in parse_vector(dlog_text)]
        del ans
        if any(v % d != 0 for d, v in zip(state["cyc"], dlog)):
            return {"principal": False, "generator": None}
        gen_text = gp.eval(
            "print(Vecrev(lift(nfbasistoalg(B.nf,"
            f" bnfisprincipal(B, I)[2])), {p}))"
        )
        return {"principal": True, "generator": parse_vector(gen_text)}

    raise RuntimeError(f"unknown op: {op}")


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        rid = None
        try:
            req = json.loads(line)
            rid = req.get("id")
            resp = handle(req)
            resp.update(id=rid, ok=True)
        except Exception as e:  # noqa: BLE001 - everything becomes a reply
            resp = {"id": rid, "ok": False, "error": str(e)}
        sys.stdout.write(json.dumps(resp) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
