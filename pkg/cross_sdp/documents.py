"""
JSON documents emitted by the command line; every rational is a "num/den" string
"""

from collections import Counter
from typing import Dict, List, Optional

from pydantic import BaseModel

from .certificate import Block, DualCertificate, Eps1Window, SlacknessReport
from .exactnum import QuadScalar, RationalLike, format_rational
from .hamming import Fact31Report
from .oracle import Classification, ExtremalReport, Family, classify


class QuadDocument(BaseModel):
    a: str
    b: str
    d: str


class BlockDocument(BaseModel):
    j: int
    u: str
    v: str
    margin_plus: str
    margin_minus: str
    ok: bool


class WindowDocument(BaseModel):
    upper: str
    attained_at_upper: bool
    binding: list[str]
    lower: str
    lower_inclusive: bool


class CertificateDocument(BaseModel):
    setting: str
    n: int
    k: Optional[int] = None
    p: Optional[str] = None
    alpha: str
    bound: str
    eps0: str
    eps1: str
    gamma0: str
    gamma1: str
    feasible: bool
    strict: bool
    min_margin: str
    eps1_window: Optional[WindowDocument] = None
    blocks: list[BlockDocument]
    notes: list[str] = []


class ScanRow(BaseModel):
    setting: str
    n: int
    k: Optional[int] = None
    p: Optional[str] = None
    window_upper: Optional[str] = None
    eps1: Optional[str] = None
    min_margin: Optional[str] = None
    feasible: bool
    error: Optional[str] = None
    error_kind: Optional[str] = None
    notes: list[str] = []


class ClassDocument(BaseModel):
    type: str
    witness_set: Optional[list[int]] = None
    count: int


class OracleReportDocument(BaseModel):
    setting: str
    n: int
    k: Optional[int] = None
    p: Optional[str] = None
    t: int
    optimum: str
    pair_count: int
    classes: list[ClassDocument]
    matches_theorem: Optional[bool] = None


class SingleFamilyDocument(BaseModel):
    setting: str
    n: int
    k: Optional[int] = None
    p: Optional[str] = None
    t: int
    maximum: str
    family_count: int
    classes: list[ClassDocument]
    matches_theorem: Optional[bool] = None


class Fact31Document(BaseModel):
    p: str
    n: int
    passed: bool
    items: Dict[str, bool]
    failures: Dict[str, list[list[int]]]


class SlacknessDocument(BaseModel):
    size_f: str
    size_g: str
    s_dot_x: QuadDocument
    z_dot_x: QuadDocument
    attains_bound: bool
    complementary: bool
    chain_holds: bool


class CrosscheckDocument(BaseModel):
    setting: str
    n: int
    k: Optional[int] = None
    p: Optional[str] = None
    psd: bool
    witness_value: Optional[str] = None
    trace_identity: bool
    z_support: bool
    optimum: Optional[str] = None
    slackness: list[SlacknessDocument] = []
    passed: bool
    notes: list[str] = []


def _optional(value) -> Optional[str]:
    return None if value is None else format_rational(value)


def _label(label) -> str:
    j, sign = label
    return sign if j is None else f"{j}{sign}"


def quad_document(value: QuadScalar) -> QuadDocument:
    return QuadDocument(**value.to_json())


def block_document(block: Block) -> BlockDocument:
    return BlockDocument(
        j=block.j,
        u=format_rational(block.u),
        v=format_rational(block.v),
        margin_plus=format_rational(block.margin_plus),
        margin_minus=format_rational(block.margin_minus),
        ok=block.ok,
    )


def window_document(window: Eps1Window) -> WindowDocument:
    return WindowDocument(
        lower=format_rational(window.lower),
        lower_inclusive=window.lower_inclusive,
        upper=format_rational(window.upper),
        attained_at_upper=window.attained_at_upper,
        binding=[_label(label) for label in window.binding_constraints],
    )


def certificate_document(cert: DualCertificate) -> CertificateDocument:
    return CertificateDocument(
        setting=cert.setting,
        n=cert.n,
        k=cert.k,
        p=_optional(cert.p),
        alpha=format_rational(cert.alpha),
        bound=format_rational(cert.alpha ** 2),
        eps0=format_rational(cert.eps0),
        eps1=format_rational(cert.eps1),
        gamma0=format_rational(cert.gamma0),
        gamma1=format_rational(cert.gamma1),
        feasible=cert.feasible,
        strict=cert.strict,
        min_margin=format_rational(cert.min_margin),
        eps1_window=window_document(cert.window) if cert.window is not None else None,
        blocks=[block_document(block) for block in cert.blocks],
        notes=list(cert.notes),
    )


def scan_row(cert: DualCertificate) -> ScanRow:
    return ScanRow(
        setting=cert.setting,
        n=cert.n,
        k=cert.k,
        p=_optional(cert.p),
        window_upper=_optional(cert.window.upper if cert.window else None),
        eps1=format_rational(cert.eps1),
        min_margin=format_rational(cert.min_margin),
        feasible=cert.feasible,
        notes=list(cert.notes),
    )


def _class_documents(counts: Dict[Classification, int]) -> list[ClassDocument]:
    return [
        ClassDocument(type=label.kind, witness_set=list(label.witness) if label.witness else None, count=count)
        for label, count in sorted(counts.items(), key=lambda item: (item[0].kind, item[0].witness or ()))
    ]


def oracle_document(report: ExtremalReport, matches: Optional[bool]) -> OracleReportDocument:
    classes = _class_documents(report.class_counts())
    return OracleReportDocument(
        setting=report.setting,
        n=report.n,
        k=report.k,
        p=_optional(report.p),
        t=report.t,
        optimum=format_rational(report.optimum),
        pair_count=report.pair_count,
        classes=classes,
        matches_theorem=matches,
    )


def fact31_document(report: Fact31Report) -> Fact31Document:
    return Fact31Document(
        p=format_rational(report.p),
        n=report.n,
        passed=report.passed,
        items={str(item): ok for item, ok in report.items.items()},
        failures={str(item): [list(pair) for pair in pairs] for item, pairs in report.failures.items() if pairs},
    )


def slackness_document(report: SlacknessReport) -> SlacknessDocument:
    return SlacknessDocument(
        size_f=format_rational(report.size_f),
        size_g=format_rational(report.size_g),
        s_dot_x=quad_document(report.s_dot_x),
        z_dot_x=quad_document(report.z_dot_x),
        attains_bound=report.attains_bound,
        complementary=report.complementary,
        chain_holds=report.chain_holds,
    )


def emit(document: BaseModel) -> str:
    """One JSON line, with unset optional fields dropped."""
    return document.model_dump_json(exclude_none=True)


def single_family_document(
    n: int,
    t: int,
    maximum: RationalLike,
    families: List[Family],
    k: Optional[int] = None,
    p: Optional[RationalLike] = None,
    matches: Optional[bool] = None,
) -> SingleFamilyDocument:
    """k set means the uniform setting, otherwise p gives the measure setting."""
    counts = Counter(classify((family, family), n, t, k=k) for family in families)
    return SingleFamilyDocument(
        setting='uniform' if k is not None else 'measure',
        n=n,
        k=k,
        p=None if p is None else format_rational(p),
        t=t,
        maximum=format_rational(maximum),
        family_count=len(families),
        classes=_class_documents(counts),
        matches_theorem=matches,
    )
