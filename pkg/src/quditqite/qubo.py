"""Binary (one-hot) formulation of a Min-d-Cut instance for external solvers.

Variable ``x_{i,k}`` (index ``i * d + k``) is 1 when vertex i sits in
partition k. The one-hot rows ``sum_k x_{i,k} = 1`` are always emitted as
hard equalities. Capacity is either folded into the objective with the
same unbalanced-penalization scalars the qudit solver uses
(``penalized``), or emitted as ``sum_i x_{i,k} <= C_max`` rows (``hard``).

JSON schema (``format: "quditqite-qubo"``, ``version: 1``)::

    {
      "format": "quditqite-qubo", "version": 1,
      "constraint_mode": "penalized" | "hard",
      "num_vertices": N, "num_partitions": d, "c_max": C,
      "lambda1": float, "lambda2": float,
      "variables": ["x_0_0", ...],              # index i*d + k
      "offset": float,
      "linear": [[var, coeff], ...],            # sorted by var
      "quadratic": [[u, v, coeff], ...],        # u < v, sorted
      "equalities": [{"name", "vars", "coeffs", "rhs"}, ...],
      "inequalities": [{"name", "vars", "coeffs", "sense": "<=", "rhs"}, ...]
    }

Objective value of a binary vector ``x`` is
``offset + sum linear[v] x_v + sum quadratic[u,v] x_u x_v``.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

QUBO_SCHEMA_VERSION = 1
CONSTRAINT_MODES = ("penalized", "hard")


@dataclass
class QuboModel:
    num_vertices: int
    num_partitions: int
    c_max: int
    lambda1: float
    lambda2: float
    constraint_mode: str
    offset: float
    linear: dict
    quadratic: dict
    equalities: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)

    @property
    def num_variables(self):
        return self.num_vertices * self.num_partitions

    def var_index(self, i, k):
        return i * self.num_partitions + k

    def var_name(self, index):
        i, k = divmod(index, self.num_partitions)
        return f"x_{i}_{k}"

    def objective(self, x):
        x = np.asarray(x, dtype=np.float64)
        val = self.offset
        for v, c in self.linear.items():
            val += c * x[v]
        for (u, v), c in self.quadratic.items():
            val += c * x[u] * x[v]
        return val

    def satisfies_constraints(self, x):
        x = np.asarray(x)
        for row in self.equalities:
            if sum(c * x[v] for v, c in zip(row["vars"], row["coeffs"])) != row["rhs"]:
                return False
        for row in self.inequalities:
            if sum(c * x[v] for v, c in zip(row["vars"], row["coeffs"])) > row["rhs"]:
                return False
        return True


def _add(table, key, value):
    table[key] = table.get(key, 0.0) + value


def export_qubo(instance, constraint_mode="penalized"):
    if constraint_mode not in CONSTRAINT_MODES:
        raise ValueError(f"constraint_mode must be one of {CONSTRAINT_MODES}")
    n, d = instance.num_vertices, instance.num_partitions
    pen = instance.penalty
    c = float(pen.c_max)
    linear, quadratic = {}, {}
    offset = float(instance.graph.weights.sum())
    for (i, j), w in zip(instance.graph.edges.tolist(), instance.graph.weights.tolist()):
        for k in range(d):
            _add(quadratic, (i * d + k, j * d + k), -float(w))

    inequalities = []
    if constraint_mode == "penalized":
        # -l1 (C - s) + l2 (C - s)^2 with s = sum_i x_ik and x^2 = x
        offset += d * (pen.lambda2 * c * c - pen.lambda1 * c)
        for k in range(d):
            for i in range(n):
                _add(linear, i * d + k, pen.lambda1 - 2.0 * pen.lambda2 * c + pen.lambda2)
                for i2 in range(i + 1, n):
                    _add(quadratic, (i * d + k, i2 * d + k), 2.0 * pen.lambda2)
    else:
        for k in range(d):
            inequalities.append(
                {"name": f"cap_{k}", "vars": [i * d + k for i in range(n)], "coeffs": [1] * n,
                 "sense": "<=", "rhs": pen.c_max}
            )
    equalities = [
        {"name": f"onehot_{i}", "vars": [i * d + k for k in range(d)], "coeffs": [1] * d, "rhs": 1}
        for i in range(n)
    ]
    quadratic = {key: v for key, v in sorted(quadratic.items()) if v != 0.0}
    linear = {key: v for key, v in sorted(linear.items()) if v != 0.0}
    return QuboModel(n, d, pen.c_max, pen.lambda1, pen.lambda2, constraint_mode, offset,
                     linear, quadratic, equalities, inequalities)


def qubo_to_dict(model):
    return {
        "format": "quditqite-qubo",
        "version": QUBO_SCHEMA_VERSION,
        "constraint_mode": model.constraint_mode,
        "num_vertices": model.num_vertices,
        "num_partitions": model.num_partitions,
        "c_max": model.c_max,
        "lambda1": model.lambda1,
        "lambda2": model.lambda2,
        "variables": [model.var_name(v) for v in range(model.num_variables)],
        "offset": model.offset,
        "linear": [[v, c] for v, c in model.linear.items()],
        "quadratic": [[u, v, c] for (u, v), c in model.quadratic.items()],
        "equalities": model.equalities,
        "inequalities": model.inequalities,
    }


def qubo_from_dict(data):
    if data.get("format") != "quditqite-qubo" or data.get("version") != QUBO_SCHEMA_VERSION:
        raise ValueError("not a quditqite-qubo v1 document")
    return QuboModel(
        data["num_vertices"], data["num_partitions"], data["c_max"], data["lambda1"], data["lambda2"],
        data["constraint_mode"], data["offset"],
        {int(v): c for v, c in data["linear"]},
        {(int(u), int(v)): c for u, v, c in data["quadratic"]},
        data["equalities"], data["inequalities"],
    )


def _fmt(x):
    return repr(float(x))


def _signed(coeff, term):
    sign = "-" if coeff < 0 else "+"
    return f"{sign} {_fmt(abs(coeff))} {term}"


def to_lp(model):
    """CPLEX/Gurobi LP text. Quadratic terms use the ``[ ... ] / 2`` convention."""
    name = model.var_name
    lines = [f"\\ quditqite Min-d-Cut export, constraint_mode={model.constraint_mode}",
             f"\\ N={model.num_vertices} d={model.num_partitions} c_max={model.c_max} "
             f"lambda1={_fmt(model.lambda1)} lambda2={_fmt(model.lambda2)}",
             "Minimize", " obj:"]
    terms = [_signed(c, name(v)) for v, c in model.linear.items()]
    for t in terms:
        lines.append(f"   {t}")
    if model.quadratic:
        lines.append("   + [")
        for (u, v), c in model.quadratic.items():
            lines.append(f"   {_signed(2.0 * c, f'{name(u)} * {name(v)}')}")
        lines.append("   ] / 2")
    lines.append(f"   {_signed(model.offset, '').rstrip()}")
    lines.append("Subject To")
    for row in model.equalities + model.inequalities:
        lhs = " ".join(_signed(c, name(v)) for v, c in zip(row["vars"], row["coeffs"]))
        sense = "=" if "sense" not in row else row["sense"]
        lines.append(f" {row['name']}: {lhs} {sense} {row['rhs']}")
    lines.append("Binary")
    for v in range(model.num_variables):
        lines.append(f" {name(v)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_exports(instance, constraint_mode, out_dir, stem):
    out_dir = Path(out_dir)
    model = export_qubo(instance, constraint_mode)
    lp_path = out_dir / f"{stem}.{constraint_mode}.lp"
    json_path = out_dir / f"{stem}.{constraint_mode}.qubo.json"
    manifest_path = out_dir / f"{stem}.{constraint_mode}.manifest.json"
    lp_path.write_text(to_lp(model))
    json_path.write_text(json.dumps(qubo_to_dict(model), indent=1) + "\n")
    manifest = {
        "format": "quditqite-qubo-manifest",
        "version": QUBO_SCHEMA_VERSION,
        "constraint_mode": constraint_mode,
        "seed": instance.seed,
        "num_vertices": model.num_vertices,
        "num_partitions": model.num_partitions,
        "num_variables": model.num_variables,
        "c_max": model.c_max,
        "lambda1": model.lambda1,
        "lambda2": model.lambda2,
        "objective_offset": model.offset,
        "files": {"lp": lp_path.name, "qubo_json": json_path.name},
    }
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")
    return lp_path, json_path, manifest_path
