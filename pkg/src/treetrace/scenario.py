"""Scenario files: JSON documents validated against ``scenario.schema.json``."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import jsonschema

from .errors import InputError, InvalidLetter, ParseError, ValidationError
from .graph_of_groups import AMALGAM, HLETTER, HNN, SIDE_A, SIDE_B, TLETTER, AmalgamSpec, GraphOfGroups, HNNSpec
from .groups import (
    FiniteGroup,
    check_group_axioms,
    check_hom,
    from_permutations,
    identity_hom,
    subgroup_generated,
)

SYNTHETIC = "synthetic_index"


@dataclass
class RunParams:
    seed: int = 0
    radius: int = 5
    trials: int = 500
    max_support: int = 8
    max_word_length: int = 4
    ball_budget: int = 200_000
    jv_samples: int = 500
    poly_trials: int = 50
    poly_degree: int = 3
    poly_max_support: int = 3
    poly_max_word_length: int = 2
    cyclicity_trials: int = 100
    index_pairs: int = 200
    index_max_m: int = 4
    index_max_n: int = 2
    norm_trials: int = 100
    scalar_budget: int = 512


@dataclass
class Scenario:
    kind: str
    name: str
    spec: Optional[GraphOfGroups]
    index_groups: list[FiniteGroup]
    letters: dict
    run: RunParams
    digest: str
    raw: dict = field(repr=False, default_factory=dict)

    def echo(self) -> dict:
        return {"name": self.name, "kind": self.kind, "sha256": self.digest}


def load_schema() -> dict:
    return json.loads(resources.files("treetrace").joinpath("scenario.schema.json").read_text("utf-8"))


def build_group(payload: dict) -> FiniteGroup:
    if "table" in payload:
        return check_group_axioms(payload["table"], labels=payload.get("labels"))
    return from_permutations(payload["permutations"], degree=payload.get("degree"))


def _ref(group: FiniteGroup, ref, what: str) -> int:
    try:
        return group.index_of(ref)
    except InputError as exc:
        raise ValidationError(f"{what}: {exc}") from None


def _refs(group: FiniteGroup, refs, what: str) -> list[int]:
    return [_ref(group, r, f"{what}[{i}]") for i, r in enumerate(refs)]


def _build_amalgam(doc: dict, name: str) -> AmalgamSpec:
    if "A" not in doc or "U" not in doc:
        raise ValidationError("amalgam scenario needs 'A' and 'U'")
    A = build_group(doc["A"])
    B = build_group(doc["B"]) if "B" in doc else A
    U_sub = subgroup_generated(A, _refs(A, doc["U"]["generators"], "U.generators"))
    U, embed_A = U_sub.as_group()
    if "embed_U_B" in doc:
        imgs = _refs(B, doc["embed_U_B"], "embed_U_B")
        try:
            embed_B = check_hom(U, B, imgs)
        except InputError as exc:
            raise ValidationError(f"embed_U_B: {exc}") from None
    elif B is A:
        embed_B = embed_A
    else:
        raise ValidationError("embed_U_B is required when B is given separately")
    if isinstance(doc.get("H"), list):
        raise ValidationError("amalgam scenario takes a single group H")
    H = build_group(doc["H"]) if "H" in doc else A

    def alpha(key, G):
        if key in doc:
            try:
                return check_hom(G, H, _refs(H, doc[key], key))
            except ValidationError:
                raise
            except InputError as exc:
                raise ValidationError(f"{key}: {exc}") from None
        if G is H:
            return identity_hom(G)
        raise ValidationError(f"{key} is required when its factor is not H itself")

    return AmalgamSpec(A, B, U, embed_A, embed_B, H, alpha("alpha_A", A), alpha("alpha_B", B), name=name)


def _build_hnn(doc: dict, name: str) -> HNNSpec:
    for key in ("H", "U", "conjugator"):
        if key not in doc:
            raise ValidationError(f"hnn scenario needs {key!r}")
    if isinstance(doc["H"], list):
        raise ValidationError("hnn scenario takes a single group H")
    H = build_group(doc["H"])
    U = subgroup_generated(H, _refs(H, doc["U"]["generators"], "U.generators"))
    g = _ref(H, doc["conjugator"], "conjugator")
    phi = None
    if "phi" in doc:
        phi = {}
        for i, (u, v) in enumerate(doc["phi"]):
            uu = _ref(H, u, f"phi[{i}][0]")
            if uu not in U:
                raise ValidationError(f"phi[{i}]: {u!r} is not in U")
            phi[uu] = _ref(H, v, f"phi[{i}][1]")
    return HNNSpec(H, U, g, phi=phi, name=name)


def _build_letters(doc: dict, spec: Optional[GraphOfGroups]) -> dict:
    out = {}
    if spec is None:
        return out
    if spec.kind == HNN:
        out["t"] = (TLETTER, 1)
    for label, (tag, ref) in doc.get("letters", {}).items():
        if spec.kind == AMALGAM and tag in ("A", "B"):
            side = SIDE_A if tag == "A" else SIDE_B
            out[label] = (side, _ref(spec.sides[side], ref, f"letters.{label}"))
        elif spec.kind == HNN and tag == "H":
            out[label] = (HLETTER, _ref(spec.H, ref, f"letters.{label}"))
        elif spec.kind == HNN and tag == "t" and ref in (1, -1):
            out[label] = (TLETTER, ref)
        else:
            raise ValidationError(f"letter {label!r}: tag {tag!r} not valid for a {spec.kind} scenario")
    return out


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, f"{source}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(1, f"{source}: top level must be a JSON object")
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.path) or "<root>"
        raise ValidationError(f"{source}: schema violation at {where}: {err.message}")
    kind = doc["kind"]
    name = doc.get("name", Path(source).stem)
    spec = None
    if kind == AMALGAM:
        spec = _build_amalgam(doc, name)
        index_groups = [spec.H]
    elif kind == HNN:
        spec = _build_hnn(doc, name)
        index_groups = [spec.H]
    else:
        if "H" not in doc:
            raise ValidationError("synthetic_index scenario needs 'H'")
        hs = doc["H"] if isinstance(doc["H"], list) else [doc["H"]]
        index_groups = [build_group(h) for h in hs]
    run = RunParams(**doc.get("run", {}))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Scenario(kind, name, spec, index_groups, _build_letters(doc, spec), run, digest, doc)


def parse_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(1, f"{path}: not UTF-8 ({exc.reason})") from None
    return parse_scenario_text(text, str(path))


def override_run(scenario: Scenario, **changes) -> Scenario:
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(scenario, run=dataclasses.replace(scenario.run, **changes))


def parse_word(scenario: Scenario, text: str) -> list:
    """Whitespace-separated letters: ``label``, ``label^k``, or ``A:ref`` style."""
    spec = scenario.spec
    if spec is None:
        raise InvalidLetter("this scenario has no group G")
    word = []
    for token in text.split():
        base, _, power = token.partition("^")
        try:
            k = int(power) if power else 1
        except ValueError:
            raise InvalidLetter(f"bad exponent in {token!r}") from None
        if base in scenario.letters:
            letter = scenario.letters[base]
        elif ":" in base:
            tag, _, ref = base.partition(":")
            ref = int(ref) if ref.isdigit() else ref
            if spec.kind == AMALGAM and tag in ("A", "B"):
                side = SIDE_A if tag == "A" else SIDE_B
                letter = (side, _ref(spec.sides[side], ref, token))
            elif spec.kind == HNN and tag == "H":
                letter = (HLETTER, _ref(spec.H, ref, token))
            else:
                raise InvalidLetter(f"unknown letter {token!r}")
        else:
            raise InvalidLetter(f"unknown letter {token!r}")
        letter = spec.check_letter(letter)
        if k < 0:
            letter, k = spec.invert_letter(letter), -k
        word.extend([letter] * k)
    return word
