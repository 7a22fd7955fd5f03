"""Batch front end: mesh and cochain I/O, operator export, invariant checks, solvers.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 data error.
Errors are written to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import meshes
from .complex import SimplicialComplex, build_complex
from .errors import DECError
from .forms import DUAL, PRIMAL, Cochain, codifferential_matrix, d_matrix, hodge_matrix, laplacian_matrix
from .geometry import Geometry, build_dual

log = logging.getLogger("dec")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# ------------------------------------------------------------------ meshes


def _drop_flat_axes(coords: np.ndarray, dim: int) -> np.ndarray:
    """Drop trailing all-zero coordinate columns, keeping at least ``dim`` of them."""
    while coords.shape[1] > max(dim, 1) and not np.any(coords[:, -1]):
        coords = coords[:, :-1]
    return coords


def read_off(text: str) -> tuple[list[tuple[int, ...]], np.ndarray]:
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    if not tokens or not tokens[0][0].endswith("OFF"):
        raise DataError("OFF file must start with an OFF header")
    head = tokens[0][1:] or tokens[1]
    body = tokens[1:] if tokens[0][1:] else tokens[2:]
    try:
        nv, nf = int(head[0]), int(head[1])
        coords = np.array([[float(v) for v in row] for row in body[:nv]], dtype=float)
        cells = []
        for row in body[nv : nv + nf]:
            m = int(row[0])
            cells.append(tuple(int(v) for v in row[1 : 1 + m]))
    except (ValueError, IndexError) as exc:
        raise DataError(f"malformed OFF file: {exc}") from None
    if len(coords) != nv or len(cells) != nf:
        raise DataError("OFF file is truncated")
    return cells, coords


def read_obj(text: str) -> tuple[list[tuple[int, ...]], np.ndarray]:
    coords, cells = [], []
    try:
        for line in text.splitlines():
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                coords.append([float(v) for v in parts[1:]])
            elif parts[0] in ("f", "l"):
                cells.append(tuple(int(p.split("/")[0]) - 1 for p in parts[1:]))
    except ValueError as exc:
        raise DataError(f"malformed OBJ file: {exc}") from None
    return cells, np.array(coords, dtype=float)


def load_mesh(path: str | Path) -> tuple[SimplicialComplex, np.ndarray, list[tuple[int, ...]]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read mesh: {exc}") from None
    cells, coords = (read_obj if path.suffix.lower() == ".obj" else read_off)(text)
    if not cells:
        raise DataError("mesh has no cells")
    if any(v < 0 or v >= len(coords) for c in cells for v in c):
        raise DataError("cell references a missing vertex")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        K = build_complex(cells)
    return K, _drop_flat_axes(coords, K.dim), cells


def write_off(cells, coords) -> str:
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    pad = np.zeros((len(coords), max(0, 3 - coords.shape[1])))
    X = np.hstack([coords, pad])
    out = io.StringIO()
    out.write(f"OFF\n{len(X)} {len(cells)} 0\n")
    for row in X:
        out.write(" ".join(format(float(v), ".17g") for v in row) + "\n")
    for c in cells:
        out.write(f"{len(c)} " + " ".join(str(int(v)) for v in c) + "\n")
    return out.getvalue()


def mesh_hash(K: SimplicialComplex, coords: np.ndarray) -> str:
    """sha256 over canonical vertex coordinates and sorted top simplices."""
    h = hashlib.sha256()
    for row in np.asarray(coords, dtype=float):
        h.update((" ".join(format(float(v), ".17g") for v in row) + "\n").encode())
    h.update(b"--\n")
    n = K.dim
    for row, s in zip(K.simplices(n).tolist(), K.orientation(n).tolist()):
        h.update((" ".join(map(str, row)) + f" {int(s)}\n").encode())
    return h.hexdigest()


def _absmax(M) -> float:
    M = sp.csr_matrix(M)
    return float(abs(M).max()) if M.nnz else 0.0


def geometry_for(K, coords, signed: bool) -> Geometry:
    return build_dual(K, coords, signed_volumes=signed)


# ------------------------------------------------------------------ files


def write_matrix_market(M) -> str:
    """Coordinate Matrix Market text with entries sorted by (row, col)."""
    A = sp.coo_matrix(M)
    A.sum_duplicates()
    A.eliminate_zeros()
    order = np.lexsort((A.col, A.row))
    integer = np.issubdtype(A.dtype, np.integer)
    out = io.StringIO()
    out.write(f"%%MatrixMarket matrix coordinate {'integer' if integer else 'real'} general\n")
    out.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
    for q in order:
        v = int(A.data[q]) if integer else format(float(A.data[q]), ".17g")
        out.write(f"{A.row[q] + 1} {A.col[q] + 1} {v}\n")
    return out.getvalue()


def dump_cochain(K: SimplicialComplex, coords, c: Cochain) -> str:
    """JSON cochain keyed by canonical vertex lists, values with 17 digits."""
    k = c.degree if c.side == PRIMAL else K.dim - c.degree
    S = K.simplices(k)
    lines = [
        "{",
        f'  "degree": {c.degree},',
        f'  "side": "{c.side}",',
        f'  "mesh_hash": "{mesh_hash(K, coords)}",',
        '  "entries": [',
    ]
    # values are stated on the sorted vertex list, not the stored orientation
    vals = c.values * K.orientation(k)
    ent = [f"    [{json.dumps(row)}, {format(float(v), '.17g')}]" for row, v in zip(S.tolist(), vals)]
    lines.append(",\n".join(ent))
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def load_cochain(K: SimplicialComplex, coords, text: str) -> Cochain:
    try:
        doc = json.loads(text)
        degree, side, entries = int(doc["degree"]), doc.get("side", PRIMAL), doc["entries"]
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"malformed cochain file: {exc}") from None
    if side not in (PRIMAL, DUAL):
        raise DataError(f"unknown side {side!r}")
    if doc.get("mesh_hash") != mesh_hash(K, coords):
        raise DataError("cochain mesh_hash does not match the mesh")
    k = degree if side == PRIMAL else K.dim - degree
    if not 0 <= k <= K.dim:
        raise DataError(f"degree {degree} out of range")
    values = np.zeros(K.num(k))
    for verts, v in entries:
        try:
            i, s = K.find([int(x) for x in verts])
        except (KeyError, ValueError, TypeError):
            raise DataError(f"simplex {verts} is not in the mesh") from None
        values[i] = s * float(v)
    return Cochain(degree, values, side)


# ---------------------------------------------------------------- operator


def operator_matrix(name: str, K, coords, degree: int, signed: bool, target=None, variant="barycentric"):
    n = K.dim
    if name == "boundary":
        if not 1 <= degree <= n:
            raise UsageError(f"boundary degree must lie in 1..{n}")
        return K.boundary_matrix(degree)
    if name == "d":
        if not 0 <= degree < n:
            raise UsageError(f"d degree must lie in 0..{n - 1}")
        return d_matrix(K, degree)
    if not 0 <= degree <= n:
        raise UsageError(f"degree must lie in 0..{n}")
    G = geometry_for(K, coords, signed)
    if name == "star":
        return hodge_matrix(G, degree)
    if name == "delta":
        if degree < 1:
            raise UsageError("delta acts on degrees >= 1")
        return codifferential_matrix(G, degree - 1)
    if name == "laplacian":
        return laplacian_matrix(G, degree)
    from .fields import flat_matrix, sharp_matrix

    if name == "flat":
        return flat_matrix(G)
    if name == "sharp":
        return sharp_matrix(G, variant)
    if name == "div":
        return (-codifferential_matrix(G, 0) @ flat_matrix(G)).tocsr()
    if name == "transfer":
        if target is None:
            raise UsageError("transfer needs --target")
        from .remesh import transfer_matrix

        KM, XM, _ = target
        return transfer_matrix(G, geometry_for(KM, XM, signed), degree)
    raise UsageError(f"unknown operator {name!r}")


# ------------------------------------------------------------------- check


def _check_dd(K, G, rng):
    worst = 0
    for k in range(2, K.dim + 1):
        worst = max(worst, int(_absmax(K.boundary_matrix(k - 1) @ K.boundary_matrix(k))))
    return worst == 0, float(worst)


def _check_stokes(K, G, rng, trials=200):
    worst = 0
    for k in range(K.dim):
        D = d_matrix(K, k)
        B = K.boundary_matrix(k + 1)
        for _ in range(trials):
            a = rng.integers(-5, 6, K.num(k))
            c = rng.integers(-3, 4, K.num(k + 1))
            worst = max(worst, abs(int((D @ a) @ c) - int(a @ (B @ c))))
    return worst == 0, float(worst)


def _check_starstar(K, G, rng):
    n = K.dim
    worst = 0.0
    for k in range(n + 1):
        a = rng.normal(size=K.num(k))
        back = hodge_matrix(G, n - k, DUAL) @ (hodge_matrix(G, k) @ a)
        worst = max(worst, float(np.max(np.abs(back - (-1) ** (k * (n - k)) * a), initial=0.0)))
    return worst < 1e-12, worst


def _check_wedge(K, G, rng):
    from .wedge import wedge_pp

    n = K.dim
    worst = 0.0
    ok = True
    for k in range(n + 1):
        for l in range(n + 1 - k):
            a = Cochain(k, rng.normal(size=K.num(k)))
            b = Cochain(l, rng.normal(size=K.num(l)))
            for variant in ("natural", "geometric"):
                ab = wedge_pp(K, a, b, variant, G).values
                ba = wedge_pp(K, b, a, variant, G).values
                r = float(np.max(np.abs(ab - (-1) ** (k * l) * ba), initial=0.0))
                worst = max(worst, r)
                ok &= r < 1e-12
            if k + l < n:
                da = Cochain(k + 1, d_matrix(K, k) @ a.values)
                db = Cochain(l + 1, d_matrix(K, l) @ b.values)
                lhs = d_matrix(K, k + l) @ wedge_pp(K, a, b, "natural").values
                rhs = wedge_pp(K, da, b, "natural").values + (-1) ** k * wedge_pp(K, a, db, "natural").values
                r = float(np.max(np.abs(lhs - rhs), initial=0.0))
                worst = max(worst, r)
                ok &= r < 1e-10
    return ok, worst


def _check_divergence(K, G, rng):
    from .fields import divergence, divergence_expanded

    X = rng.normal(size=(K.num(K.dim), G.top_points.shape[2]))
    a = divergence(G, X).values
    b = divergence_expanded(G, X).values
    r = float(np.max(np.abs(a - b), initial=0.0))
    return r < 1e-12, r


def _check_poincare(K, G, rng):
    from .homotopy import (
        cone_identity_defect,
        first_betti_number,
        greedy_script,
        augmented_cone,
        homology_defect_witness,
        poincare_solve,
        star_cone,
        detect_trivially_star_shaped,
    )
    from .errors import NoConeStructure, EnumerationOrderViolation

    beta1 = first_betti_number(K)
    if beta1 > 0:
        # counterexample harness: the defect must be a cycle that bounds nothing
        table = augmented_cone(K, greedy_script(K, strict=False), strict=False)
        w = homology_defect_witness(table)
        ok = bool(w["nonzero"] and w["is_cycle"] and not w["is_boundary"])
        log.info("poincare: expected failure on a complex with first Betti number %d", beta1)
        return ok, float(beta1)
    try:
        if detect_trivially_star_shaped(K) is not None:
            table = star_cone(K)
        else:
            table = augmented_cone(K, greedy_script(K))
    except (NoConeStructure, EnumerationOrderViolation) as exc:
        # no augmentation order found; the suite does not apply
        log.warning("poincare skipped: %s", exc)
        return None, float("nan")
    worst = 0
    for k in range(K.dim + 1):
        worst = max(worst, int(_absmax(cone_identity_defect(table, k))))
    for k in range(1, K.dim + 1):
        a = d_matrix(K, k - 1) @ rng.integers(-4, 5, K.num(k - 1))
        b = poincare_solve(table, k, a)
        back = d_matrix(K, k - 1) @ np.array([int(x) for x in b], dtype=np.int64)
        worst = max(worst, int(np.max(np.abs(back - a), initial=0)))
    return worst == 0, float(worst)


SUITES = {
    "dd": (_check_dd, False),
    "stokes": (_check_stokes, False),
    "starstar": (_check_starstar, True),
    "wedge": (_check_wedge, True),
    "divergence": (_check_divergence, True),
    "poincare": (_check_poincare, False),
}


def run_checks(K, coords, suites, signed: bool, seed: int = 0) -> list[dict]:
    G = None
    if any(SUITES[s][1] for s in suites):
        G = geometry_for(K, coords, signed)
    report = []
    for name in suites:
        fn, _ = SUITES[name]
        rng = np.random.default_rng(seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ok, res = fn(K, G, rng)
        status = "skip" if ok is None else ("pass" if ok else "fail")
        report.append({"suite": name, "status": status, "max_residual": res})
    return report


# ------------------------------------------------------------------- solve


def _boundary_values(bc: dict, vertices: np.ndarray, coords: np.ndarray) -> np.ndarray:
    if "constant" in bc:
        return np.full(len(vertices), float(bc["constant"]))
    if "linear" in bc:
        c = np.asarray(bc["linear"], dtype=float)
        if len(c) != coords.shape[1] + 1:
            raise DataError("linear boundary needs one coefficient per axis plus a constant")
        return coords[vertices] @ c[:-1] + c[-1]
    raise DataError("boundary needs 'constant', 'linear' or 'values'")


def solve_harmonic_config(cfg: dict, K, coords, signed: bool):
    from .variational import DirichletProblem, harmonic_el_residual, solve_harmonic

    G = geometry_for(K, coords, signed)
    bc = cfg.get("boundary", {})
    if "values" in bc:
        pairs = bc["values"]
        verts = np.array([int(v) for v, _ in pairs], dtype=np.int64)
        vals = np.array([float(x) for _, x in pairs])
    else:
        verts = np.flatnonzero(K.boundary_flags[0])
        vals = _boundary_values(bc, verts, coords)
    phi = solve_harmonic(DirichletProblem(G, verts, vals))
    res = harmonic_el_residual(G, phi.values)
    interior = np.setdiff1d(np.arange(K.num(0)), verts)
    return phi, {"interior_residual": float(np.max(np.abs(res[interior]), initial=0.0))}


def solve_maxwell_config(cfg: dict, K, coords, signed: bool):
    from .variational import PrismalComplex, maxwell_el_residual, solve_maxwell

    times = cfg.get("times")
    if not isinstance(times, list) or len(times) < 2:
        raise DataError("maxwell config needs a 'times' list with at least two entries")
    P = PrismalComplex(K, coords, np.asarray(times, dtype=float), signed_volumes=signed)
    bc = cfg.get("boundary", {})
    A0 = np.zeros(P.num(1))
    if "gauge" in bc:
        chi = np.asarray(bc["gauge"], dtype=float)
        if chi.shape != (P.num(0),):
            raise DataError(f"gauge needs {P.num(0)} vertex values")
        A0 = P.d_matrix(0) @ chi
    elif "values" in bc:
        for i, v in bc["values"]:
            A0[int(i)] = float(v)
    A = solve_maxwell(P, A0)
    bnd = P.boundary_cells(1)
    res = maxwell_el_residual(P, A)
    F = P.d_matrix(1) @ A
    report = {
        "interior_residual": float(np.max(np.abs(res[~bnd]), initial=0.0)),
        "max_abs_F": float(np.max(np.abs(F), initial=0.0)),
        "dF": float(np.max(np.abs(P.d_matrix(2) @ F), initial=0.0)),
    }
    return P, A, report


def dump_prismal(P, A, K, coords) -> str:
    lines = ["{", '  "degree": 1,', '  "side": "primal",', f'  "mesh_hash": "{mesh_hash(K, coords)}",']
    lines.append(f'  "times": [{", ".join(format(float(t), ".17g") for t in P.times)}],')
    lines.append('  "entries": [')
    ent = []
    for (kind, i, j), v in zip(P.cells(1), A):
        verts = K.simplices(1 if kind == "h" else 0)[i].tolist()
        if kind == "h":
            v = v * K.orientation(1)[i]
        ent.append(f'    [["{kind}", {json.dumps(verts)}, {j}], {format(float(v), ".17g")}]')
    lines.append(",\n".join(ent))
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def kappa_table(P, K) -> str:
    """Causality sign of every prismal cell, one JSON entry per cell."""
    out = {"times": [float(t) for t in P.times], "cells": []}
    for p in range(P.n + 1):
        for (kind, i, j), kap in zip(P.cells(p), P.kappa(p)):
            verts = K.simplices(p if kind == "h" else p - 1)[i].tolist()
            out["cells"].append({"degree": p, "kind": kind, "vertices": verts, "time": j, "kappa": int(kap)})
    return json.dumps(out, indent=1) + "\n"


# --------------------------------------------------------------- generate

FAMILIES = {
    "fan": lambda a, rng: meshes.fan(a.size or 6),
    "lattice": lambda a, rng: meshes.triangular_lattice(a.size or 4, a.size or 4),
    "hexdisk": lambda a, rng: meshes.hex_disk(a.size or 2),
    "disk": lambda a, rng: meshes.random_disk(a.size or 30, 20, rng),
    "sunflower": lambda a, rng: meshes.sunflower_disk(a.size or 50),
    "annulus": lambda a, rng: meshes.pinched_annulus(a.size or 6),
    "cube": lambda a, rng: meshes.cube_tets(a.size or 1),
    "kuhn": lambda a, rng: meshes.kuhn_cube(a.size or 2),
    "ball": lambda a, rng: meshes.icosahedral_ball(),
    "segments": lambda a, rng: meshes.segments(np.linspace(0.0, 1.0, (a.size or 4) + 1)),
}


# -------------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dec", description="Discrete exterior calculus batch tool.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    op = sub.add_parser("operator", help="export an operator as a Matrix Market file")
    op.add_argument("name", choices=["boundary", "d", "star", "delta", "laplacian", "div", "flat", "sharp", "transfer"])
    op.add_argument("--mesh", required=True)
    op.add_argument("--degree", type=int, default=0)
    op.add_argument("--out")
    op.add_argument("--signed-volumes", action="store_true")
    op.add_argument("--target", help="second mesh for transfer")
    op.add_argument("--variant", default="barycentric", choices=["barycentric", "normal"])

    ck = sub.add_parser("check", help="run invariant suites")
    ck.add_argument("--mesh", required=True)
    ck.add_argument("--suite", action="append", choices=sorted(SUITES) + ["all"])
    ck.add_argument("--signed-volumes", action="store_true")
    ck.add_argument("--seed", type=int, default=0)

    sv = sub.add_parser("solve", help="solve a harmonic or Maxwell problem")
    sv.add_argument("problem", choices=["harmonic", "maxwell"])
    sv.add_argument("--mesh", required=True)
    sv.add_argument("--config", required=True)
    sv.add_argument("--out")
    sv.add_argument("--signed-volumes", action="store_true")
    sv.add_argument("--kappa-out", help="write the causality sign table (maxwell only)")

    gn = sub.add_parser("generate", help="write a built-in test mesh as OFF")
    gn.add_argument("family", choices=sorted(FAMILIES))
    gn.add_argument("--size", type=int, default=0)
    gn.add_argument("--seed", type=int, default=0)
    gn.add_argument("--out")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    if args.command == "generate":
        tops, coords = FAMILIES[args.family](args, np.random.default_rng(args.seed))
        _emit(write_off(tops, coords), args.out)
        return EXIT_OK

    K, coords, _ = load_mesh(args.mesh)
    log.info("loaded %r", K)
    if args.command == "operator":
        target = load_mesh(args.target) if args.target else None
        M = operator_matrix(args.name, K, coords, args.degree, args.signed_volumes, target, args.variant)
        _emit(write_matrix_market(M), args.out)
        return EXIT_OK

    if args.command == "check":
        suites = args.suite or ["all"]
        if "all" in suites:
            suites = list(SUITES)
        report = run_checks(K, coords, suites, args.signed_volumes, args.seed)
        for r in report:
            print(f"{r['suite']:<11} {r['status'].upper():<4}  max_residual={r['max_residual']:.3e}")
        return EXIT_CHECK if any(r["status"] == "fail" for r in report) else EXIT_OK

    if args.command == "solve":
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read config: {exc}") from None
        if not isinstance(cfg, dict):
            raise DataError("config must be a JSON object")
        try:
            if args.problem == "harmonic":
                phi, report = solve_harmonic_config(cfg, K, coords, args.signed_volumes)
                text = dump_cochain(K, coords, phi)
            else:
                P, A, report = solve_maxwell_config(cfg, K, coords, args.signed_volumes)
                text = dump_prismal(P, A, K, coords)
                if args.kappa_out:
                    Path(args.kappa_out).write_text(kappa_table(P, K))
        except (ValueError, TypeError, KeyError, IndexError) as exc:
            if isinstance(exc, DECError):
                raise
            raise DataError(f"config schema violation: {exc}") from None
        _emit(text, args.out)
        print(json.dumps(report, sort_keys=True), file=sys.stderr if not args.out else sys.stdout)
        return EXIT_OK
    raise UsageError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("DEC_LOG", "WARNING").upper()
    logging.basicConfig(
        level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
        return _run(args)
    except UsageError as exc:
        code, kind, msg = EXIT_USAGE, "UsageError", str(exc)
    except DataError as exc:
        code, kind, msg = EXIT_DATA, "DataError", str(exc)
    except DECError as exc:
        code, kind, msg = EXIT_DATA, type(exc).__name__, str(exc)
    print(json.dumps({"error": kind, "message": msg, "exit_code": code}), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
