"""Named fixtures, a random model generator and JSON (de)serialisation."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DTodaError, ValidationError
from .hydro import HodographData, SpaceTimePoint, parse_axis, seed_data
from .potential import LGPotential, critical_frame, validate_potential


def toda_1d(b=(3.0, 1.0)) -> LGPotential:
    """lambda = p - (b1 + b2) + b1 b2/p."""
    return validate_potential("I", 1, (1, 1), b)


def ablowitz_ladik(b=(1.0, 2.0)) -> LGPotential:
    return validate_potential("I", -1, (1, -1), b)


def case2_simple(b=1.0, c=5.0) -> LGPotential:
    """lambda = (p - b) exp(c/p)."""
    return validate_potential("II", 1, (1,), (b,), (c,))


def k1_fixture(b=2.0) -> LGPotential:
    """lambda = (p - b)**2/p, one critical value -4b at gamma = -b."""
    return validate_potential("I", 1, (2,), (b,))


def dz_k3(b=(1.0, 2.0, 3.0)) -> LGPotential:
    return validate_potential("I", 1, (1, 1, 1), b)


def case2_k3() -> LGPotential:
    return validate_potential("II", 1, (1, 1), (1.0, 2.5 + 0.5j), (3.0,))


FIXTURES = {"toda_1d": toda_1d, "ablowitz_ladik": ablowitz_ladik, "case2_simple": case2_simple,
            "k1": k1_fixture, "dz_k3": dz_k3, "case2_k3": case2_k3}


def well_separated(P: LGPotential, margin: float = 0.05) -> bool:
    """Frame exists, critical points and values are comfortably distinct."""
    try:
        F = critical_frame(P)
    except DTodaError:
        return False
    s = max(P.scale, 1.0)
    pts = np.concatenate([[0.0], P.b])
    if np.min(np.abs(F.gamma[:, None] - pts[None, :])) < margin * s:
        return False
    if P.K > 1:
        off = ~np.eye(P.K, dtype=bool)
        if np.min(np.abs(F.gamma[:, None] - F.gamma[None, :])[off]) < margin * s:
            return False
        lam = np.abs(F.lam[:, None] - F.lam[None, :])[off]
        if np.min(lam) < margin * np.max(np.abs(F.lam)):
            return False
    return True


def random_model(rng: np.random.Generator, case: str | None = None, max_tries: int = 200) -> LGPotential:
    """A random valid potential with K = 2 or 3 and well-separated critical data.

    Non-integer exponents come with genuinely complex b_i so that no
    p - b_i used below sits on a logarithm's branch cut.
    """
    for _ in range(max_tries):
        cs = case or rng.choice(["I", "II"])
        integer = rng.uniform() < 0.5
        if cs == "I":
            M = int(rng.integers(2, 4))
            N = int(rng.choice([1, 2, -1]))
            kappa = rng.integers(1, 3, M).astype(float) if integer else np.round(rng.uniform(0.5, 2.5, M), 2)
            if sum(kappa) - N <= 0:
                continue
        else:
            M = int(rng.integers(1, 3))
            N = int(rng.integers(1, 3))
            if M + N > 3:
                continue
            kappa = rng.integers(1, 3, M).astype(float) if integer else np.round(rng.uniform(0.5, 2.5, M), 2)
        r = rng.uniform(0.6, 2.0, M)
        ang = rng.uniform(0.15, 2 * np.pi - 0.15, M)
        b = r * np.exp(1j * ang)
        c = ()
        if cs == "II":
            c = rng.uniform(0.5, 2.0, N) * np.exp(1j * rng.uniform(0.15, 2 * np.pi - 0.15, N))
        try:
            P = validate_potential(cs, N, kappa, b, c)
        except ValidationError:
            continue
        if well_separated(P):
            return P
    raise ValidationError("could not draw a well-separated random model")


# JSON ---------------------------------------------------------------------------


def _cplx(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValidationError(f"{where}: expected a number or [re, im], got {v!r}")


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def model_from_dict(d: dict) -> LGPotential:
    if not isinstance(d, dict):
        raise ValidationError("model must be a JSON object")
    unknown = set(d) - {"case", "N", "kappa", "b", "c", "name"}
    if unknown:
        raise ValidationError(f"unknown model keys: {sorted(unknown)}")
    for key in ("case", "N", "kappa", "b"):
        if key not in d:
            raise ValidationError(f"model is missing {key!r}")
    if d["case"] not in ("I", "II"):
        raise ValidationError("case must be 'I' or 'II'")
    if not isinstance(d["N"], int) or isinstance(d["N"], bool):
        raise ValidationError("N must be an integer")
    kappa = d["kappa"]
    if not isinstance(kappa, list) or not all(isinstance(k, (int, float)) for k in kappa):
        raise ValidationError("kappa must be a list of real numbers")
    b = [_cplx(v, f"b[{i}]") for i, v in enumerate(d["b"])]
    c = [_cplx(v, f"c[{i}]") for i, v in enumerate(d.get("c", []))]
    return validate_potential(d["case"], d["N"], kappa, b, c)


def model_to_dict(P: LGPotential) -> dict:
    out = {"case": P.case, "N": P.N, "kappa": list(P.kappa), "b": [_pair(x) for x in P.b]}
    if P.case == "II":
        out["c"] = [_pair(x) for x in P.c]
    return out


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_model(path) -> LGPotential:
    d = read_json(path)
    try:
        return model_from_dict(d)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _flow_map(d, where: str) -> dict:
    if not isinstance(d, dict):
        raise ValidationError(f"{where} must be an object keyed by flow index")
    out = {}
    for k, v in d.items():
        try:
            idx = int(k)
        except ValueError:
            raise ValidationError(f"{where}: bad flow index {k!r}") from None
        out[idx] = _cplx(v, f"{where}[{k}]")
    return out


def _point_from_dict(d: dict) -> SpaceTimePoint:
    if not isinstance(d, dict):
        raise ValidationError("solve_for.point must be an object")
    s = float(d.get("s", 0.0))
    axes = {k: float(v) for k, v in d.items() if k != "s"}
    for k in axes:
        parse_axis(k)
    return SpaceTimePoint(s).replace(**axes)


def hodograph_from_dict(d: dict, P: LGPotential | None = None) -> HodographData:
    """``{"a0": .., "a": {"1": ..}, "abar": {..}}``; an optional
    ``"solve_for": {"point": {"s": 2.0}, "free": ["t1"]}`` recomputes a0 and the
    listed coefficients so that ``P`` solves that point exactly."""
    if not isinstance(d, dict):
        raise ValidationError("hodograph data must be a JSON object")
    unknown = set(d) - {"a0", "a", "abar", "solve_for"}
    if unknown:
        raise ValidationError(f"unknown hodograph keys: {sorted(unknown)}")
    data = HodographData(_cplx(d.get("a0", 0.0), "a0"), _flow_map(d.get("a", {}), "a"),
                         _flow_map(d.get("abar", {}), "abar"))
    if "solve_for" in d:
        if P is None:
            raise ValidationError("solve_for needs the model")
        sf = d["solve_for"]
        point = _point_from_dict(sf.get("point", {}))
        free = []
        for name in sf.get("free", []):
            kind, k = parse_axis(name)
            if kind == "s":
                raise ValidationError("s cannot be a free flow")
            free.append(("z" if kind == "t" else "zbar", k))
        data = seed_data(P, point, data, free)
    return data


def load_hodograph(path, P: LGPotential | None = None) -> HodographData:
    d = read_json(path)
    try:
        return hodograph_from_dict(d, P)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
