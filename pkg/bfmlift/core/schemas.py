"""
BFMLIFT — Pydantic Schemas: job document and report
"""
from __future__ import annotations

import difflib
from math import gcd
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Type, Union

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from bfmlift.core.exceptions import BfmliftError, JobValidationError
from bfmlift.services.laurent import LaurentPoly, MonomialMap
from bfmlift.services.mirror import ToricInput, image_space
from bfmlift.services.novikov import GaussianRational
from bfmlift.services.rootdata import RootDatum, preset, preset_names

SCHEMA_VERSION = "1"


# --- Enums ---
class NovikovModeEnum(str, Enum):
    unit = "unit"
    formal = "formal"


class StageEnum(str, Enum):
    mirror = "mirror"
    lift = "lift"
    verify = "verify"
    all = "all"


class PresentationEnum(str, Enum):
    parametrized = "parametrized"
    image = "image"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- Job document ---
class RootDatumSpec(_Strict):
    rank: int = Field(..., ge=1)
    roots: List[List[int]] = Field(default_factory=list)
    coroots: List[List[int]] = Field(default_factory=list)
    name: str = "custom"


class ToricSpec(_Strict):
    n: Optional[int] = Field(default=None, ge=1, description="Complex dimension; inferred from the rays if absent")
    rays: List[List[int]]
    areas: Optional[List[Union[int, str]]] = Field(default=None, description="Rational areas, e.g. 0 or \"1/2\"")
    action: List[List[int]] = Field(..., description="r x n integer matrix, rows are cocharacters of T")
    holonomy: Optional[List[Tuple[Union[int, str], Union[int, str]]]] = Field(
        default=None, description="Per-ray unit-modulus multipliers [re, im]"
    )
    minimal_maslov_at_least_2: bool = True
    h1_generated: bool = True


class Tolerances(_Strict):
    solver_residual: Optional[float] = Field(default=None, gt=0)
    identity_tol: Optional[float] = Field(default=None, gt=0)
    dedup_tol: Optional[float] = Field(default=None, gt=0)
    witness_tol: Optional[float] = Field(default=None, gt=0)
    hessian_tol: Optional[float] = Field(default=None, gt=0)


class JobOptions(_Strict):
    novikov: NovikovModeEnum = NovikovModeEnum.unit
    seed: int = 0
    budget: Optional[int] = Field(default=None, ge=1)
    newton_starts: Optional[int] = Field(default=None, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    assume_reduced: bool = False
    stages: List[StageEnum] = Field(default_factory=lambda: [StageEnum.all])
    presentation: PresentationEnum = PresentationEnum.parametrized

    def wants(self, stage: str) -> bool:
        names = {s.value for s in self.stages}
        return "all" in names or stage in names


class JobSpec(_Strict):
    version: str = SCHEMA_VERSION
    group: Union[str, RootDatumSpec]
    toric: Optional[ToricSpec] = None
    lagrangian: Optional[List[str]] = Field(
        default=None, description="Explicit (z, h) generators of the image ideal; overrides the mirror construction"
    )
    options: JobOptions = Field(default_factory=JobOptions)


# --- Report sections ---
Complex = List[float]


class ToolInfo(BaseModel):
    name: str
    version: str
    schema_version: str = SCHEMA_VERSION


class MirrorSection(BaseModel):
    superpotential: str
    teleman_matrix: List[List[int]]
    lagrangian: List[str]
    parametrized: List[str]
    image: Optional[List[str]] = None
    graph_of_df: Optional[bool] = None
    hypotheses: Dict[str, bool] = {}


class RewriteOut(BaseModel):
    root: List[int]
    rule: str
    verified: bool


class BlowupSection(BaseModel):
    algebra: str
    relations: List[str]
    negative_roots: List[RewriteOut]
    localizations: List[str]


class WitnessOut(BaseModel):
    point: Dict[str, Complex]
    value: float


class SmoothnessOut(BaseModel):
    samples: int
    ranks: List[int]
    expected_rank: int
    dimension: Optional[int] = None


class CertificateOut(BaseModel):
    root: List[int]
    coroot: List[int]
    coroot_content: int
    status: str
    reason: Optional[str] = None
    target: str
    divisor: str
    normal_form: Optional[str] = None
    cofactor: Optional[str] = None
    coroot_cofactor: Optional[str] = None
    verified: bool
    radical_membership: Optional[bool] = None
    witnesses: List[WitnessOut] = []
    smoothness: SmoothnessOut
    reducedness: str
    negative_root: Optional[str] = None


class Codim2Out(BaseModel):
    roots: List[List[int]]
    dimension: int
    intersection_dimension: int
    ok: bool


class PoissonOut(BaseModel):
    roots: List[List[int]]
    matrix: List[List[str]]
    determinant: str
    nondegenerate: bool


class WeylOut(BaseModel):
    verdict: str
    generators_checked: int
    witness: Optional[Dict[str, str]] = None
    reason: Optional[str] = None


class LiftSection(BaseModel):
    presentation: str
    ideal: List[str]
    groebner: Dict[str, Any] = {}
    verdict: str
    regular_on_Z: bool
    normality: str
    blowup: BlowupSection
    certificates: List[CertificateOut]
    codim2: List[Codim2Out]
    poisson: List[PoissonOut]


class PointOut(BaseModel):
    coordinates: List[Complex]
    fiber: List[Complex]
    teleman_value: List[Complex]
    residual: float
    residual_mp: float
    multiplicity_hint: int


class KernelOut(BaseModel):
    point: int
    root: List[int]
    value: Complex
    deviation: float
    modulus_ok: bool
    phase_ok: bool
    ok: bool


class CenterOut(BaseModel):
    point: int
    in_center: bool
    worst_deviation: float


class MorseOut(BaseModel):
    point: int
    directions: List[List[int]]
    hessian: List[List[Complex]]
    determinant: Complex
    morse: bool
    log_hessian: List[List[Complex]]
    log_hessian_polys: List[List[str]]
    jacobian_rank: int
    expected_rank: int
    jacobian_full_rank: bool


class SolveOut(BaseModel):
    constraint: str
    status: str
    method: str
    seed: int
    points: List[PointOut]
    kernel: List[KernelOut] = []
    center: List[CenterOut] = []
    morse: List[MorseOut] = []


class VerifySection(BaseModel):
    critical: SolveOut
    constrained: List[SolveOut]
    verdict: str


class VerdictSection(BaseModel):
    weyl: Optional[str] = None
    lift: Optional[str] = None
    verify: Optional[str] = None
    overall: str
    exit_code: int


class Report(BaseModel):
    tool: ToolInfo
    echo: JobSpec
    settings: Dict[str, Any]
    mirror: Optional[MirrorSection] = None
    weyl: Optional[WeylOut] = None
    lift: Optional[LiftSection] = None
    verify: Optional[VerifySection] = None
    verdict: VerdictSection
    timing: Optional[Dict[str, float]] = None

    def to_json(self) -> bytes:
        return orjson.dumps(self.model_dump(mode="json"), option=orjson.OPT_INDENT_2)


# ============================================
# DIAGNOSTICS
# ============================================

_UNION_TAGS = {"str", "int", "RootDatumSpec", "list[int]"}


def _vocabulary(models: Tuple[Type[BaseModel], ...] = (JobSpec, RootDatumSpec, ToricSpec, Tolerances, JobOptions)) -> List[str]:
    words: List[str] = []
    for model in models:
        words += [name for name in model.model_fields if name not in words]
    return words


def _path(loc: Tuple[Any, ...]) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        elif part not in _UNION_TAGS and not str(part).startswith(("function-", "tuple[")):
            out += ("." if out else "") + str(part)
    return out or "$"


def format_validation_errors(exc: ValidationError, document: Any = None) -> List[str]:
    errors = exc.errors()
    group_is_object = isinstance(document, dict) and isinstance(document.get("group"), dict)
    messages: List[str] = []
    for err in errors:
        loc = tuple(err["loc"])
        if loc[:2] == ("group", "str") and group_is_object:
            continue
        if err["type"] == "extra_forbidden":
            key = str(loc[-1])
            guess = difflib.get_close_matches(key, _vocabulary(), n=1, cutoff=0.6)
            hint = f", did you mean {guess[0]}" if guess else ""
            message = f"{_path(loc)}: unknown key{hint}"
        else:
            message = f"{_path(loc)}: {err['msg']}"
        if message not in messages:
            messages.append(message)
    return messages


def _fraction(value: Union[int, str], path: str, problems: List[str]) -> Optional[Fraction]:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        problems.append(f"{path}: not a rational number: {value!r}")
        return None


def resolve_group(group: Union[str, RootDatumSpec]) -> RootDatum:
    if isinstance(group, str):
        return preset(group)
    return RootDatum(group.rank, tuple(map(tuple, group.roots)), tuple(map(tuple, group.coroots)), group.name)


def semantic_diagnostics(job: JobSpec) -> List[str]:
    """Cross-field checks the schema cannot express; each names the fields involved."""
    problems: List[str] = []
    datum: Optional[RootDatum] = None
    try:
        datum = resolve_group(job.group)
    except BfmliftError as e:
        if isinstance(job.group, str):
            guess = difflib.get_close_matches(job.group, preset_names(), n=1)
            hint = f", did you mean {guess[0]}" if guess else ""
            problems.append(f"group: unknown preset {job.group!r}{hint}")
        else:
            problems.append(f"group: {e}")

    rank = datum.rank if datum else None
    t = job.toric
    if t is None and job.lagrangian is None:
        problems.append("toric: required unless lagrangian is given")
    explicit = {s.value for s in job.options.stages} & {"mirror", "verify"}
    if t is None and explicit:
        problems.append(f"options.stages: {', '.join(sorted(explicit))} needs toric data")

    if t is not None:
        n = t.n
        n_source = "toric.n"
        if n is None and t.rays:
            n, n_source = len(t.rays[0]), "toric.rays[0]"
        if n is None and t.action:
            n, n_source = len(t.action[0]), "toric.action[0]"
        good_rays = []
        for j, ray in enumerate(t.rays):
            if n is not None and len(ray) != n:
                problems.append(f"toric.rays[{j}]: has {len(ray)} entries but {n_source} gives dimension {n}")
            else:
                good_rays.append((j, tuple(ray)))
        seen: Dict[Tuple[int, ...], int] = {}
        for j, ray in good_rays:
            if gcd(*ray) != 1:
                problems.append(f"toric.rays[{j}]: {list(ray)} is not primitive")
            if ray in seen:
                problems.append(f"toric.rays[{j}]: duplicates toric.rays[{seen[ray]}]")
            seen.setdefault(ray, j)
        if t.areas is not None:
            if len(t.areas) != len(t.rays):
                problems.append(f"toric.areas has {len(t.areas)} entries but toric.rays has {len(t.rays)}")
            for j, a in enumerate(t.areas):
                value = _fraction(a, f"toric.areas[{j}]", problems)
                if value is not None and value < 0:
                    problems.append(f"toric.areas[{j}]: must be nonnegative")
        if not t.action:
            problems.append("toric.action: needs at least one row")
        for k, row in enumerate(t.action):
            if n is not None and len(row) != n:
                problems.append(f"toric.action[{k}] has {len(row)} columns but {n_source} gives dimension {n}")
        if rank is not None and t.action and len(t.action) != rank:
            problems.append(f"group.rank is {rank} but toric.action has {len(t.action)} rows")
        if t.holonomy is not None:
            if len(t.holonomy) != len(t.rays):
                problems.append(f"toric.holonomy has {len(t.holonomy)} entries but toric.rays has {len(t.rays)}")
            for j, (re, im) in enumerate(t.holonomy):
                a = _fraction(re, f"toric.holonomy[{j}][0]", problems)
                b = _fraction(im, f"toric.holonomy[{j}][1]", problems)
                if a is not None and b is not None and a * a + b * b != 1:
                    problems.append(f"toric.holonomy[{j}]: modulus is not 1")

    if job.lagrangian is not None and rank is not None:
        space = image_space(rank)
        for j, text in enumerate(job.lagrangian):
            try:
                LaurentPoly.parse(text, space)
            except BfmliftError as e:
                problems.append(f"lagrangian[{j}]: {e}")
    return problems


def parse_job(document: Union[str, bytes]) -> JobSpec:
    """Parse and validate; raises JobValidationError with every diagnostic."""
    try:
        raw = orjson.loads(document)
    except orjson.JSONDecodeError as e:
        raise JobValidationError([f"line {e.lineno} column {e.colno}: {e.msg}"], "malformed JSON") from None
    try:
        job = JobSpec.model_validate(raw)
    except ValidationError as e:
        raise JobValidationError(format_validation_errors(e, raw)) from None
    problems = semantic_diagnostics(job)
    if problems:
        raise JobValidationError(problems)
    return job


def validate_document(document: Union[str, bytes]) -> List[str]:
    try:
        parse_job(document)
    except JobValidationError as e:
        return e.diagnostics
    return []


def to_toric_input(spec: ToricSpec) -> ToricInput:
    n = spec.n or (len(spec.rays[0]) if spec.rays else len(spec.action[0]))
    areas = [Fraction(a) for a in spec.areas] if spec.areas is not None else [Fraction(0)] * len(spec.rays)
    holonomy = None
    if spec.holonomy is not None:
        holonomy = tuple(GaussianRational(Fraction(re), Fraction(im)) for re, im in spec.holonomy)
    return ToricInput(
        n=n,
        rays=tuple(tuple(r) for r in spec.rays),
        areas=tuple(areas),
        action=MonomialMap(tuple(tuple(row) for row in spec.action)),
        holonomy=holonomy,
        minimal_maslov_at_least_2=spec.minimal_maslov_at_least_2,
        h1_generated=spec.h1_generated,
    )


def job_json_schema() -> Dict[str, Any]:
    return JobSpec.model_json_schema()
