"""``vqsvd`` command line.

Every command reads its inputs, runs one driver and writes its outputs
atomically into ``--out-dir``.  Options come from three layers: built-in
defaults, a JSON ``--config`` file (``{"schema_version": 1, ...}``) and
explicit flags, later layers winning.  Errors end the process with a nonzero
status and one ``vqsvd: error: ...`` line on stderr.
"""

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import pad_to_power_of_two
from .applications import (
    bench_table_csv,
    benchmark_ansatz,
    compress_image,
    polar_via_vqsvd,
    recommend,
)
from .circuit import AnsatzSpec
from .estimator import EstimatorConfig
from .io import (
    FormatError,
    atomic_write_text,
    format_lcu,
    image_to_unit,
    read_lcu,
    read_matrix,
    read_pgm,
    unit_to_image,
    write_pgm,
)
from .linalg import classical_svd
from .pauli import circulant_decompose, circulant_matrix, lcu_reconstruct, pauli_decompose
from .solver import VqsvdConfig, extract_vectors, fold_signs, run
from .verification import quality_report, vqfne_run

SCHEMA_VERSION = 1

DEFAULTS = {
    "rank": None,
    "weights": None,
    "ansatz": "a",
    "depth": 20,
    "mode": "auto",
    "max_iterations": 200,
    "tolerance": 1e-6,
    "learning_rate": 0.05,
    "estimator": "exact",
    "shots": 0,
    "term_samples": 0,
    "seed": None,
    "decomposition": "pauli",
    "solver": "variational",
    "row": None,
    "samples": 0,
    "candidates": "abcd",
    "refine_iterations": 300,
    "binary": False,
    "vqfne": False,
}


#: polar needs every triple converged tightly, so it trains longer by default
COMMAND_DEFAULTS = {"polar": {"max_iterations": 1000, "tolerance": 1e-14}}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"vqsvd: error: {' '.join(message.split())}\n")


# ---------------------------------------------------------------------------
# option handling


def load_config(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise CliError(f"{path}: config must be a JSON object")
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise CliError(f"{path}: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise CliError(f"{path}: unknown config keys {', '.join(unknown)}")
    return data


def merged_options(args):
    opts = dict(DEFAULTS, **COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        opts.update(load_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            opts[key] = value
    return opts


def require_seed(opts, command):
    seed = opts["seed"]
    if seed is None:
        raise CliError(f"'{command}' is stochastic: pass --seed or set \"seed\" in the config")
    if not isinstance(seed, int) or seed < 0:
        raise CliError(f"seed must be a non-negative integer, got {seed!r}")
    return seed


def estimator_config(opts, seed):
    return EstimatorConfig(opts["estimator"], int(opts["shots"]), int(opts["term_samples"]), seed)


def solver_config(opts, rank, is_complex, seed):
    mode = opts["mode"]
    if mode == "auto":
        mode = "complex" if is_complex else "real"
    return VqsvdConfig(
        rank=rank,
        weights=opts["weights"],
        ansatz=AnsatzSpec(opts["ansatz"], int(opts["depth"]), mode),
        max_iterations=int(opts["max_iterations"]),
        tolerance=float(opts["tolerance"]),
        learning_rate=float(opts["learning_rate"]),
        seed=seed,
        estimator=estimator_config(opts, seed),
    )


def config_hash(obj):
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _complex_block(a):
    a = np.asarray(a)
    return {"real": a.real.tolist(), "imag": a.imag.tolist()}


def _from_block(block):
    return np.asarray(block["real"], dtype=float) + 1j * np.asarray(block["imag"], dtype=float)


def _out(args, name):
    return Path(args.out_dir) / name


def _stem(path):
    return Path(path).name.split(".")[0] or "out"


def _trace_csv(rows, rank):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iter", "loss"] + [f"m_{j + 1}" for j in range(rank)])
    for it, value, m in rows:
        writer.writerow([it, repr(float(value))] + [repr(float(x)) for x in m])
    return buf.getvalue()


class _Trace:
    def __init__(self):
        self.rows = []

    def __call__(self, it, value, m):
        self.rows.append((it, value, np.asarray(m, dtype=float)))


def _is_lcu_file(path):
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        body = line.split("#", 1)[0].split()
        if body:
            return len(body) == 2
    raise FormatError(path, 1, "empty file")


def _load_problem(path, decomposition):
    """``(lcu, dense_padded, original_shape, is_complex)`` from a matrix or LCU file."""
    if _is_lcu_file(path):
        lcu = read_lcu(path)
        dense = lcu_reconstruct(lcu)
        is_complex = bool(np.any(np.abs(dense.imag) > 1e-12))
        return lcu, dense, dense.shape, is_complex
    m = read_matrix(path)
    padded = pad_to_power_of_two(m)
    return _decompose(padded, decomposition, path), padded, m.shape, np.iscomplexobj(m)


def _decompose(padded, decomposition, path):
    if decomposition == "pauli":
        return pauli_decompose(padded)
    if decomposition == "circulant":
        row = padded[0]
        if not np.allclose(circulant_matrix(row), padded, atol=1e-10, rtol=0):
            raise CliError(f"{path}: matrix is not circulant")
        return circulant_decompose(row)
    raise CliError(f"unknown decomposition {decomposition!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_decompose(args, opts):
    m = read_matrix(args.input)
    if opts["decomposition"] == "circulant" and m.shape[0] & (m.shape[0] - 1):
        raise CliError("circulant LCU files need a power-of-two dimension")
    lcu = _decompose(pad_to_power_of_two(m), opts["decomposition"], args.input)
    target = _out(args, f"{_stem(args.input)}.lcu")
    atomic_write_text(target, format_lcu(lcu))
    return [target]


def _classical_result(dense, rank):
    svd = classical_svd(dense)
    values, lefts, rights = svd.truncate(rank)
    return {
        "m_values": values,
        "singular_values": values,
        "lefts": lefts,
        "rights": rights,
        "converged": True,
        "iterations": 0,
        "final_loss": None,
        "alpha": [],
        "beta": [],
        "column_order": list(range(rank)),
        "trace": [],
    }


def cmd_svd(args, opts):
    lcu, dense, shape, is_complex = _load_problem(args.input, opts["decomposition"])
    rank = opts["rank"] or dense.shape[0]
    classical = opts["solver"] == "classical"
    seed = None if classical else require_seed(opts, "svd")
    config = solver_config(opts, rank, is_complex, seed)
    if classical:
        out = _classical_result(dense, rank)
    else:
        trace = _Trace()
        result = run(lcu, config, callback=trace)
        lefts, rights = extract_vectors(result)
        values, lefts, rights = fold_signs(result.m_values, lefts, rights)
        out = {
            "m_values": result.m_values,
            "singular_values": values,
            "lefts": lefts,
            "rights": rights,
            "converged": result.converged,
            "iterations": result.iterations,
            "final_loss": result.final_loss,
            "alpha": result.alpha.tolist(),
            "beta": result.beta.tolist(),
            "column_order": result.column_order.tolist(),
            "trace": trace.rows,
        }
    cfg = dict(config.to_dict(), decomposition=opts["decomposition"], solver=opts["solver"])
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "vqsvd-result",
        "provenance": {
            "package_version": __version__,
            "input": Path(args.input).name,
            "input_sha256": file_hash(args.input),
            "config_hash": config_hash(cfg),
            "seed": seed,
            "estimator_mode": config.estimator.mode,
        },
        "config": cfg,
        "shape": list(shape),
        "padded_dim": int(dense.shape[0]),
        "converged": bool(out["converged"]),
        "iterations": int(out["iterations"]),
        "final_loss": out["final_loss"],
        "m_values": [float(x) for x in out["m_values"]],
        "singular_values": [float(x) for x in out["singular_values"]],
        "left_vectors": _complex_block(out["lefts"]),
        "right_vectors": _complex_block(out["rights"]),
        "alpha": out["alpha"],
        "beta": out["beta"],
        "column_order": out["column_order"],
    }
    stem = _stem(args.input)
    target = _out(args, f"{stem}.result.json")
    atomic_write_text(target, dump_json(doc))
    csv_path = Path(args.log_csv) if args.log_csv else _out(args, f"{stem}.convergence.csv")
    atomic_write_text(csv_path, _trace_csv(out["trace"], rank))
    return [target, csv_path]


def load_result(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if doc.get("kind") != "vqsvd-result" or doc.get("schema_version") != SCHEMA_VERSION:
        raise CliError(f"{path}: not a schema-{SCHEMA_VERSION} vqsvd result")
    return doc


def cmd_verify(args, opts):
    _, dense, _, is_complex = _load_problem(args.matrix, opts["decomposition"])
    doc = load_result(args.result)
    if doc["padded_dim"] != dense.shape[0]:
        raise CliError(f"{args.result}: result is for a {doc['padded_dim']}-dim problem")
    lefts = _from_block(doc["left_vectors"])
    rights = _from_block(doc["right_vectors"])
    values = np.asarray(doc["singular_values"], dtype=float)
    vqfne_value = None
    extra = {}
    if opts["vqfne"]:
        seed = require_seed(opts, "verify --vqfne")
        lcu = _decompose(dense, "pauli", args.matrix)
        spec = doc["config"]["ansatz"]
        config = solver_config(dict(opts, ansatz=spec["kind"], depth=spec["depth"], mode=spec["mode"]),
                               values.size, is_complex, seed)
        fne = vqfne_run(lcu, config)
        vqfne_value = fne.value
        extra = {"vqfne_iterations": fne.iterations, "vqfne_converged": fne.converged,
                 "vqfne_seed": seed}
    report = quality_report(dense, values, lefts, rights, vqfne_value=vqfne_value)
    text = report.to_text() + "".join(f"{k} = {v}\n" for k, v in extra.items())
    name = Path(args.result).name
    name = name[:-5] if name.endswith(".json") else name
    target = _out(args, f"{name}.quality.txt")
    atomic_write_text(target, text)
    sys.stdout.write(text)
    return [target]


def cmd_compress(args, opts):
    pixels, maxval = read_pgm(args.input)
    img = image_to_unit(pixels, maxval)
    h, w = img.shape
    side = max(h, w)
    padded = np.zeros((side, side))
    padded[:h, :w] = img
    padded = pad_to_power_of_two(padded)
    seed = require_seed(opts, "compress")
    rank = opts["rank"] or 5
    trace = _Trace()
    report, recon = compress_image(
        padded, rank, int(opts["depth"]),
        mode="complex" if opts["mode"] == "complex" else "real",
        max_iterations=int(opts["max_iterations"]),
        tolerance=float(opts["tolerance"]),
        learning_rate=float(opts["learning_rate"]),
        seed=seed,
        ansatz=opts["ansatz"],
        estimator=estimator_config(opts, seed),
        callback=trace,
    )
    stem = _stem(args.input)
    image_path = _out(args, f"{stem}.rank{rank}.pgm")
    write_pgm(image_path, unit_to_image(recon[:h, :w]), binary=bool(opts["binary"]))
    report_path = _out(args, f"{stem}.compress.txt")
    atomic_write_text(report_path, report.to_text())
    written = [image_path, report_path]
    if args.log_csv:
        atomic_write_text(args.log_csv, _trace_csv(trace.rows, rank))
        written.append(Path(args.log_csv))
    return written


def cmd_recommend(args, opts):
    a = read_matrix(args.input)
    if opts["row"] is None:
        raise CliError("recommend needs --row")
    if opts["rank"] is None:
        raise CliError("recommend needs --rank")
    seed = require_seed(opts, "recommend")
    trace = _Trace()
    out, result = recommend(
        a, int(opts["rank"]), int(opts["row"]),
        samples=int(opts["samples"]),
        depth=int(opts["depth"]),
        mode=opts["mode"],
        max_iterations=int(opts["max_iterations"]),
        tolerance=float(opts["tolerance"]),
        learning_rate=float(opts["learning_rate"]),
        seed=seed,
        ansatz=opts["ansatz"],
        estimator=estimator_config(opts, seed),
        callback=trace,
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "vqsvd-recommendation",
        "provenance": {"package_version": __version__, "input": Path(args.input).name,
                       "input_sha256": file_hash(args.input), "seed": seed},
        "row": int(opts["row"]),
        "rank": int(opts["rank"]),
        "converged": result.converged,
        "iterations": result.iterations,
        **out.to_dict(),
    }
    target = _out(args, f"{_stem(args.input)}.recommend.json")
    atomic_write_text(target, dump_json(doc))
    written = [target]
    if args.log_csv:
        atomic_write_text(args.log_csv, _trace_csv(trace.rows, int(opts["rank"])))
        written.append(Path(args.log_csv))
    return written


def cmd_polar(args, opts):
    m = read_matrix(args.input)
    seed = require_seed(opts, "polar")
    trace = _Trace()
    res = polar_via_vqsvd(
        m,
        rank=opts["rank"],
        depth=int(opts["depth"]),
        mode=opts["mode"],
        max_iterations=int(opts["max_iterations"]),
        tolerance=float(opts["tolerance"]),
        learning_rate=float(opts["learning_rate"]),
        refine_iterations=int(opts["refine_iterations"]),
        seed=seed,
        ansatz=opts["ansatz"],
        estimator=estimator_config(opts, seed),
        callback=trace,
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "vqsvd-polar",
        "provenance": {"package_version": __version__, "input": Path(args.input).name,
                       "input_sha256": file_hash(args.input), "seed": seed},
        **res.to_dict(),
        "w": _complex_block(res.w),
        "p": _complex_block(res.p),
    }
    target = _out(args, f"{_stem(args.input)}.polar.json")
    atomic_write_text(target, dump_json(doc))
    written = [target]
    if args.log_csv:
        atomic_write_text(args.log_csv, _trace_csv(trace.rows, m.shape[0]))
        written.append(Path(args.log_csv))
    return written


def cmd_bench_ansatz(args, opts):
    if args.log_csv:
        raise CliError("bench-ansatz writes its own table; --log-csv is not supported")
    m = read_matrix(args.input)
    seed = require_seed(opts, "bench-ansatz")
    mode = opts["mode"]
    if mode == "auto":
        mode = "complex" if np.iscomplexobj(m) else "real"
    rows = benchmark_ansatz(
        m, opts["candidates"], mode, seed,
        iterations=int(opts["max_iterations"]),
        learning_rate=float(opts["learning_rate"]),
        estimator=estimator_config(opts, seed),
    )
    target = _out(args, f"{_stem(args.input)}.bench.csv")
    atomic_write_text(target, bench_table_csv(rows))
    return [target]


# ---------------------------------------------------------------------------
# parser


def _shared(p):
    p.add_argument("--config", help="JSON config file (schema_version 1); flags override it")
    p.add_argument("--seed", type=int, help="seed for initial angles and estimator noise")
    p.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")
    p.add_argument("--estimator", choices=["exact", "shots", "sampled"])
    p.add_argument("--shots", type=int, help="Hadamard-test shots per LCU term")
    p.add_argument("--term-samples", dest="term_samples", type=int,
                   help="LCU terms drawn per estimate in sampled mode")
    p.add_argument("--log-csv", help="write the per-iteration trace iter,loss,m_1..m_T here")


def _training(p):
    p.add_argument("--rank", "-T", type=int)
    p.add_argument("--depth", "-D", type=int)
    p.add_argument("--ansatz", choices=["a", "b", "c", "d", "layers"])
    p.add_argument("--mode", choices=["auto", "real", "complex"])
    _optimizer(p)


def _optimizer(p):
    p.add_argument("--max-iter", dest="max_iterations", type=int)
    p.add_argument("--tol", dest="tolerance", type=float)
    p.add_argument("--lr", dest="learning_rate", type=float)


def build_parser():
    parser = _Parser(prog="vqsvd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vqsvd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="write a matrix file as an LCU file")
    p.add_argument("input")
    p.add_argument("--decomposition", choices=["pauli", "circulant"])
    _shared(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("svd", help="learn the top-T singular triples")
    p.add_argument("input", help="matrix or LCU file")
    p.add_argument("--decomposition", choices=["pauli", "circulant"])
    p.add_argument("--weights", type=lambda s: [float(x) for x in s.split(",")],
                   help="comma-separated, strictly decreasing")
    p.add_argument("--solver", choices=["variational", "classical"],
                   help="'classical' writes the reference SVD in the same format")
    _training(p)
    _shared(p)
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("verify", help="error bounds for a result file")
    p.add_argument("matrix")
    p.add_argument("result")
    p.add_argument("--vqfne", action="store_true", help="bound with a variational mass estimate")
    _optimizer(p)
    _shared(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compress", help="low-rank compression of a PGM image")
    p.add_argument("input")
    p.add_argument("--binary", action="store_true", help="write P5 instead of P2")
    _training(p)
    _shared(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("recommend", help="project a customer row onto learned item vectors")
    p.add_argument("input")
    p.add_argument("--row", type=int)
    p.add_argument("--samples", type=int)
    _training(p)
    _shared(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("polar", help="polar factors M = W P from full-rank factors")
    p.add_argument("input")
    p.add_argument("--refine-iter", dest="refine_iterations", type=int)
    _training(p)
    _shared(p)
    p.set_defaults(func=cmd_polar)

    p = sub.add_parser("bench-ansatz", help="equal-budget comparison of candidates a-d")
    p.add_argument("input")
    p.add_argument("--candidates")
    _training(p)
    _shared(p)
    p.set_defaults(func=cmd_bench_ansatz)
    return parser


def _one_line(exc):
    if isinstance(exc, OSError) and exc.filename:
        return f"{exc.filename}: {exc.strerror or exc}"
    return " ".join(str(exc).split()) or type(exc).__name__


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        opts = merged_options(args)
        for path in args.func(args, opts):
            print(path)
    except (CliError, FormatError, ValueError, OSError, IndexError, KeyError, TypeError) as exc:
        sys.stderr.write(f"vqsvd: error: {_one_line(exc)}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
