"""
BFMLIFT — Job pipeline

Runs the requested stages of a validated job (mirror, lift, verify) under
per-job settings, converts the service results into the report schema and
derives the overall verdict and process exit code.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import structlog

from bfmlift.core.config import Settings, get_settings, use_settings
from bfmlift.core.exceptions import GroebnerBudgetExceeded
from bfmlift.core.observability import StageTracer, get_metrics
from bfmlift.core.schemas import (
    BlowupSection,
    CenterOut,
    CertificateOut,
    Codim2Out,
    JobSpec,
    KernelOut,
    LiftSection,
    MirrorSection,
    MorseOut,
    PointOut,
    PoissonOut,
    Report,
    RewriteOut,
    SmoothnessOut,
    SolveOut,
    ToolInfo,
    VerdictSection,
    VerifySection,
    WeylOut,
    WitnessOut,
    resolve_group,
    to_toric_input,
)
from bfmlift.services import verify as verification
from bfmlift.services.bfm import (
    WeylInvarianceReport,
    blowup_presentation,
    codim2_check,
    lift_check,
    lift_report,
    poisson_nondegeneracy,
    weyl_invariance,
)
from bfmlift.services.ideals import PolyIdeal
from bfmlift.services.mirror import MirrorData, build_mirror, explicit_image_ideal, graph_of_df_check
from bfmlift.services.rootdata import RootDatum

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2
EXIT_INCONCLUSIVE = 3

REPORTED_SETTINGS = (
    "budget", "novikov_mode", "q_value", "solver_residual", "identity_tol", "dedup_tol",
    "witness_tol", "hessian_tol", "newton_starts", "newton_max_iter", "sample_starts", "mp_bits", "seed",
)


def job_settings(job: JobSpec, base: Optional[Settings] = None) -> Settings:
    """Environment defaults overlaid with the job's options."""
    base = base or get_settings()
    opts = job.options
    update: Dict[str, Any] = {"novikov_mode": opts.novikov.value, "seed": opts.seed}
    if opts.budget is not None:
        update["budget"] = opts.budget
    if opts.newton_starts is not None:
        update["newton_starts"] = opts.newton_starts
    update.update(opts.tolerances.model_dump(exclude_none=True))
    return base.model_copy(update=update)


def _resolved_echo(job: JobSpec, settings: Settings) -> JobSpec:
    tolerances = job.options.tolerances.model_copy(update={
        name: getattr(settings, name)
        for name in ("solver_residual", "identity_tol", "dedup_tol", "witness_tol", "hessian_tol")
    })
    options = job.options.model_copy(update={
        "budget": settings.budget, "newton_starts": settings.newton_starts, "tolerances": tolerances,
    })
    return job.model_copy(update={"options": options})


# ============================================
# CONVERSIONS
# ============================================

def _c(value: complex) -> List[float]:
    value = complex(value)
    return [float(value.real) + 0.0, float(value.imag) + 0.0]


def _cs(values: Sequence[complex]) -> List[List[float]]:
    return [_c(v) for v in values]


def _points(solve: verification.CriticalSolve) -> List[PointOut]:
    return [
        PointOut(
            coordinates=_cs(p.coordinates),
            fiber=_cs(p.fiber),
            teleman_value=_cs(p.teleman_value),
            residual=p.residual,
            residual_mp=p.residual_mp,
            multiplicity_hint=p.multiplicity_hint,
        )
        for p in solve.points
    ]


def _kernel_out(verdicts: Sequence[verification.KernelVerdict], root: Sequence[int]) -> List[KernelOut]:
    return [
        KernelOut(point=v.point, root=list(root), value=_c(v.value), deviation=v.deviation,
                  modulus_ok=v.modulus_ok, phase_ok=v.phase_ok, ok=v.ok)
        for v in verdicts
    ]


def _morse_out(verdicts: Sequence[verification.MorseVerdict]) -> List[MorseOut]:
    return [
        MorseOut(
            point=v.point,
            directions=[list(d) for d in v.directions],
            hessian=[_cs(row) for row in v.hessian],
            determinant=_c(v.determinant),
            morse=v.morse,
            log_hessian=[_cs(row) for row in v.log_hessian],
            log_hessian_polys=v.log_hessian_polys,
            jacobian_rank=v.jacobian_rank,
            expected_rank=v.expected_rank,
            jacobian_full_rank=v.jacobian_full_rank,
        )
        for v in verdicts
    ]


def _weyl_out(report: WeylInvarianceReport) -> WeylOut:
    return WeylOut(verdict=report.verdict, generators_checked=report.generators_checked,
                   witness=report.witness, reason=report.reason)


def _fraction_text(x: Fraction) -> str:
    return str(Fraction(x))


# ============================================
# STAGES
# ============================================

def _mirror_stage(job: JobSpec, mirror: MirrorData, settings: Settings) -> MirrorSection:
    image: Optional[List[str]] = None
    try:
        image = [str(g) for g in mirror.image_ideal(settings.budget).generators]
    except GroebnerBudgetExceeded as e:
        logger.warning("image_ideal_budget_exceeded", steps=e.steps, bound=e.bound)
    t = mirror.toric
    return MirrorSection(
        superpotential=str(mirror.potential),
        teleman_matrix=[list(row) for row in mirror.teleman.matrix],
        lagrangian=[str(g) for g in mirror.lagrangian.generators],
        parametrized=[str(g) for g in mirror.parametrized.generators],
        image=image,
        graph_of_df=graph_of_df_check(mirror),
        hypotheses={"minimal_maslov_at_least_2": t.minimal_maslov_at_least_2, "h1_generated": t.h1_generated},
    )


def _lift_ideal(job: JobSpec, datum: RootDatum, mirror: Optional[MirrorData], settings: Settings) -> Tuple[str, PolyIdeal]:
    if job.lagrangian is not None:
        return "explicit", explicit_image_ideal(job.lagrangian, datum.rank, settings.novikov_mode)
    assert mirror is not None
    if job.options.presentation.value == "image":
        return "image", mirror.image_ideal(settings.budget)
    return "parametrized", mirror.parametrized


def _lift_stage(
    job: JobSpec,
    datum: RootDatum,
    mirror: Optional[MirrorData],
    settings: Settings,
    tracer: StageTracer,
) -> Tuple[Optional[LiftSection], Optional[WeylOut], bool]:
    """Returns (lift section, weyl section, budget_exceeded)."""
    try:
        presentation, I = _lift_ideal(job, datum, mirror, settings)
    except GroebnerBudgetExceeded as e:
        logger.warning("lift_ideal_budget_exceeded", steps=e.steps, bound=e.bound)
        return None, None, True

    weyl: Optional[WeylInvarianceReport] = None
    with tracer.trace("weyl"):
        weyl_ideal: Optional[PolyIdeal] = I if presentation != "parametrized" else None
        if weyl_ideal is None and mirror is not None:
            try:
                weyl_ideal = mirror.image_ideal(settings.budget)
            except GroebnerBudgetExceeded as e:
                weyl = WeylInvarianceReport("INCONCLUSIVE", 0, reason=f"budget: {e}")
        if weyl_ideal is not None:
            weyl = weyl_invariance(weyl_ideal, datum, settings.budget)

    with tracer.trace("lift"):
        certificates = lift_check(I, datum, job.options.assume_reduced, settings.budget, settings.seed)
        budget_hit = any((c.reason or "").startswith("budget") for c in certificates)
        try:
            codim2 = codim2_check(I, datum, settings.budget)
        except GroebnerBudgetExceeded as e:
            logger.warning("codim2_budget_exceeded", steps=e.steps, bound=e.bound)
            codim2, budget_hit = [], True
        poisson = [poisson_nondegeneracy(datum, pair) for pair in combinations(datum.simple_indices, 2)]
        smooth = all(c.reducedness == "evidenced" for c in certificates) if certificates else None
        summary = lift_report(certificates, codim2, poisson, weyl, smooth)
        blowup = blowup_presentation(datum)
        try:
            groebner_info: Dict[str, Any] = dict(I.groebner(settings.budget).certificate())
            groebner_info["basis"] = [str(g) for g in I.groebner(settings.budget).to_laurent()]
        except GroebnerBudgetExceeded:
            groebner_info, budget_hit = {}, True

    section = LiftSection(
        presentation=presentation,
        ideal=[str(g) for g in I.generators],
        groebner=groebner_info,
        verdict=summary.verdict,
        regular_on_Z=summary.regular_on_Z,
        normality=summary.normality,
        blowup=BlowupSection(
            algebra=blowup.text,
            relations=[g.describe() for g in blowup.generators],
            negative_roots=[
                RewriteOut(root=list(datum.roots[r.root_index]), rule=r.rule, verified=r.verified)
                for r in blowup.rewrites
            ],
            localizations=blowup.localizations,
        ),
        certificates=[
            CertificateOut(
                root=list(c.root),
                coroot=list(c.coroot),
                coroot_content=c.coroot_content,
                status=c.status,
                reason=c.reason,
                target=c.target,
                divisor=c.divisor,
                normal_form=c.normal_form,
                cofactor=c.cofactor,
                coroot_cofactor=c.coroot_cofactor,
                verified=c.verified,
                radical_membership=c.radical_membership,
                witnesses=[WitnessOut(**w) for w in c.witnesses],
                smoothness=SmoothnessOut(
                    samples=c.smoothness.samples,
                    ranks=c.smoothness.ranks,
                    expected_rank=c.smoothness.expected_rank,
                    dimension=c.smoothness.dimension,
                ),
                reducedness=c.reducedness,
                negative_root=c.negative_root,
            )
            for c in certificates
        ],
        codim2=[
            Codim2Out(roots=[list(a) for a in e.roots], dimension=e.dimension,
                      intersection_dimension=e.intersection_dimension, ok=e.ok)
            for e in codim2
        ],
        poisson=[
            PoissonOut(
                roots=[list(a) for a in p.roots],
                matrix=[[_fraction_text(x) for x in row] for row in p.matrix],
                determinant=_fraction_text(p.determinant),
                nondegenerate=p.nondegenerate,
            )
            for p in poisson
        ],
    )
    return section, (_weyl_out(weyl) if weyl else None), budget_hit


def _verify_stage(datum: RootDatum, mirror: MirrorData, settings: Settings) -> VerifySection:
    f, m = mirror.potential, mirror.teleman
    positive = datum.positive_indices

    critical = verification.solve_critical(f, m, seed=settings.seed)
    kernel: List[KernelOut] = []
    for i in positive:
        kernel += _kernel_out(verification.check_kernel(critical.points, datum, i), datum.roots[i])
    center = verification.check_center(critical.points, datum)
    critical_out = SolveOut(
        constraint=critical.constraint,
        status=critical.status,
        method=critical.method,
        seed=critical.seed,
        points=_points(critical),
        kernel=kernel,
        center=[CenterOut(point=c.point, in_center=c.in_center, worst_deviation=c.worst_deviation) for c in center],
        morse=_morse_out(verification.morse_check(f, m, critical.points)),
    )

    constrained: List[SolveOut] = []
    for i in positive:
        solve = verification.solve_constrained(f, m, datum, i, seed=settings.seed)
        constrained.append(SolveOut(
            constraint=solve.constraint,
            status=solve.status,
            method=solve.method,
            seed=solve.seed,
            points=_points(solve),
            kernel=_kernel_out(verification.check_kernel(solve.points, datum, i), datum.roots[i]),
            morse=_morse_out(verification.root_morse_check(f, m, datum, i, solve.points)),
        ))

    solves = [critical_out] + constrained
    failed = any(not k.ok for s in solves for k in s.kernel) or any(not c.in_center for c in critical_out.center)
    if failed:
        verdict = "fail"
    elif critical_out.status == "INCOMPLETE" or not critical_out.points:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    logger.info("verification_complete", verdict=verdict, critical_points=len(critical_out.points),
                families=len(constrained))
    return VerifySection(critical=critical_out, constrained=constrained, verdict=verdict)


# ============================================
# VERDICT
# ============================================

_FAILING = {"OBSTRUCTED", "NOT_INVARIANT", "fail"}
_UNDECIDED = {"INCONCLUSIVE", "inconclusive"}


def overall_verdict(
    weyl: Optional[str], lift: Optional[str], verify: Optional[str], budget_exceeded: bool = False
) -> VerdictSection:
    """Exit 0 when every requested verdict passes, 2 on a failure, 3 when undecided."""
    verdicts = [v for v in (weyl, lift, verify) if v is not None]
    if any(v in _FAILING for v in verdicts):
        overall = "OBSTRUCTED" if lift == "OBSTRUCTED" else "FAIL"
        code = EXIT_FAILED
    elif budget_exceeded or any(v in _UNDECIDED for v in verdicts):
        overall, code = "INCONCLUSIVE", EXIT_INCONCLUSIVE
    else:
        overall, code = "PASS", EXIT_OK
    return VerdictSection(weyl=weyl, lift=lift, verify=verify, overall=overall, exit_code=code)


# ============================================
# ENTRY POINT
# ============================================

def run(job: JobSpec, timing: bool = True, settings: Optional[Settings] = None) -> Report:
    """Run a validated job; the exit code is in report.verdict.exit_code."""
    settings = job_settings(job, settings)
    with use_settings(settings):
        return _run(job, settings, timing)


def _run(job: JobSpec, settings: Settings, timing: bool) -> Report:
    tracer = StageTracer(get_metrics())
    opts = job.options
    datum = resolve_group(job.group)
    log = logger.bind(group=datum.name, rank=datum.rank)

    mirror: Optional[MirrorData] = None
    mirror_section: Optional[MirrorSection] = None
    if job.toric is not None:
        with tracer.trace("mirror"):
            mirror = build_mirror(to_toric_input(job.toric), settings.novikov_mode)
            if opts.wants("mirror"):
                mirror_section = _mirror_stage(job, mirror, settings)

    lift_section: Optional[LiftSection] = None
    weyl_section: Optional[WeylOut] = None
    budget_exceeded = False
    if opts.wants("lift"):
        lift_section, weyl_section, budget_exceeded = _lift_stage(job, datum, mirror, settings, tracer)

    verify_section: Optional[VerifySection] = None
    if opts.wants("verify") and mirror is not None:
        with tracer.trace("verify"):
            verify_section = _verify_stage(datum, mirror, settings)

    verdict = overall_verdict(
        weyl_section.verdict if weyl_section else None,
        lift_section.verdict if lift_section else ("INCONCLUSIVE" if budget_exceeded else None),
        verify_section.verdict if verify_section else None,
        budget_exceeded,
    )
    log.info("job_complete", overall=verdict.overall, exit_code=verdict.exit_code)
    return Report(
        tool=ToolInfo(name=settings.app_name, version=settings.version),
        echo=_resolved_echo(job, settings),
        settings={name: getattr(settings, name) for name in REPORTED_SETTINGS},
        mirror=mirror_section,
        weyl=weyl_section,
        lift=lift_section,
        verify=verify_section,
        verdict=verdict,
        timing=dict(tracer.durations_ms) if timing else None,
    )
