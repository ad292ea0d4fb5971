"""Human-editable study, scenario, basket and correlation files.

All formats are INI-style (``[section]`` headers, ``key = value`` lines,
``#`` comments) and carry ``format_version = 1`` in their main section.

Scenario::

    [scenario]
    format_version = 1
    name = Deal
    overshoot = 0.10
    samples = 1000000
    seed = 20180704
    include = brexit.correlations, cpi.basket     # optional, relative paths

    [quantiles]
    SoftDrinks = 0, 6, 26                          # q05, q50, q95

    [correlations]                                 # optional, inline
    Vegetables ~ Fruit = 0.75

    [basket:cpi]                                   # optional, inline
    total = 58.00
    SoftDrinks = 4.00

    [condition]                                    # optional
    category = Meat
    percentile = 0.05

Study::

    [study]
    format_version = 1
    experts = E1, E2

    [question:C1]
    kind = calibration
    units = %
    realization = 2.5
    E1 = 0, 2, 5
    E2 = 1, 3, 4
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

from .basket import ScenarioConfig
from .copula import DEFAULT_SAMPLES, DEFAULT_SEED
from .domain import (
    BasketSpec,
    CategorySet,
    CorrelationSpec,
    ElicitationStudy,
    validate_study,
)
from .errors import FileSyntaxError, InputError, FileValidationError, UnsupportedVersion
from .marginal import DEFAULT_OVERSHOOT

FORMAT_VERSION = 1
DATA_DIR = Path(__file__).with_name("data")

_PAIR_SEP = "~"
_QUESTION_KEYS = {"kind", "units", "realization"}
_BASKET_KEYS = {"total", "format_version"}


class _Source:
    """Parsed INI text plus a (section, key) -> line index for error messages."""

    def __init__(self, text: str, path):
        self.path = str(path)
        if not text.strip():
            raise FileSyntaxError(path, 1, "file is empty")
        cp = configparser.ConfigParser(
            interpolation=None,
            strict=True,
            inline_comment_prefixes=("#",),
            comment_prefixes=("#", ";"),
            default_section="\0defaults",
        )
        cp.optionxform = str
        try:
            cp.read_string(text, source=self.path)
        except configparser.MissingSectionHeaderError as e:
            raise FileSyntaxError(path, e.lineno, "expected a [section] header") from None
        except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
            raise FileSyntaxError(path, e.lineno or 1, e.message.splitlines()[0]) from None
        except configparser.ParsingError as e:
            lineno, line = e.errors[0]
            raise FileSyntaxError(path, lineno, f"cannot parse {line!r}") from None
        self.cp = cp
        self.lines = _index_lines(text)

    def line(self, section: str, key: str | None = None) -> int:
        return self.lines.get((section, key), self.lines.get((section, None), 1))

    def sections(self):
        return self.cp.sections()

    def require(self, section: str) -> configparser.SectionProxy:
        if not self.cp.has_section(section):
            raise FileValidationError(self.path, f"[{section}]", "section is missing")
        return self.cp[section]

    def number(self, section: str, key: str, cast=float, default=None):
        sec = self.cp[section] if self.cp.has_section(section) else {}
        if key not in sec:
            if default is None:
                raise FileValidationError(self.path, f"[{section}] {key}", "required field is missing")
            return default
        raw = sec[key]
        try:
            return cast(raw)
        except ValueError:
            raise FileSyntaxError(
                self.path, self.line(section, key), f"{key}: expected {cast.__name__}, got {raw!r}"
            ) from None

    def numbers(self, section: str, key: str, count: int | None = None) -> tuple[float, ...]:
        raw = self.cp[section][key]
        try:
            vals = tuple(float(v) for v in raw.split(","))
        except ValueError:
            vals = ()
        if not vals or (count is not None and len(vals) != count):
            want = f"{count} comma-separated numbers" if count else "numbers"
            raise FileSyntaxError(self.path, self.line(section, key), f"{key}: expected {want}, got {raw!r}")
        return vals

    def check_version(self, section: str) -> None:
        version = self.require(section).get("format_version")
        if version is None:
            raise FileValidationError(self.path, f"[{section}] format_version", "required field is missing")
        if version.strip() != str(FORMAT_VERSION):
            raise UnsupportedVersion(self.path, version.strip())

    def validation(self, entity: str, exc: InputError) -> FileValidationError:
        err = FileValidationError(self.path, entity, str(exc))
        err.__cause__ = exc
        return err


def _index_lines(text: str) -> dict:
    out, section = {}, None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[(.+)\]", s)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), n)
        elif section is not None and s and not s.startswith(("#", ";")):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            out.setdefault((section, key), n)
    return out


def _read(path) -> _Source:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise FileSyntaxError(p, 1, f"not valid UTF-8 ({e.reason})") from None
    return _Source(text, p)


def _csv(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _fmt(x: float) -> str:
    return repr(float(x))


# -- correlations ------------------------------------------------------------


def _correlations_from(src: _Source, section: str = "correlations") -> CorrelationSpec:
    pairs = []
    for key, _ in src.cp[section].items():
        if key == "format_version":
            continue
        names = [n.strip() for n in key.split(_PAIR_SEP)]
        if len(names) != 2 or not all(names):
            raise FileSyntaxError(
                src.path, src.line(section, key), f"expected 'CategoryA {_PAIR_SEP} CategoryB', got {key!r}"
            )
        pairs.append((names[0], names[1], src.number(section, key)))
    try:
        return CorrelationSpec(tuple(pairs))
    except InputError as e:
        raise src.validation(f"[{section}]", e) from None


def parse_correlations(path) -> CorrelationSpec:
    src = _read(path)
    src.check_version("correlations")
    return _correlations_from(src)


def serialize_correlations(spec: CorrelationSpec, header: bool = True) -> str:
    lines = ["[correlations]"]
    if header:
        lines.append(f"format_version = {FORMAT_VERSION}")
    lines += [f"{a} {_PAIR_SEP} {b} = {_fmt(r)}" for a, b, r in spec.pairs]
    return "\n".join(lines) + "\n"


# -- baskets -----------------------------------------------------------------


def _baskets_from(src: _Source) -> list[BasketSpec]:
    out = []
    for section in src.sections():
        if not section.startswith("basket:"):
            continue
        name = section.split(":", 1)[1].strip()
        costs = {k: src.number(section, k) for k in src.cp[section] if k not in _BASKET_KEYS}
        total = src.number(section, "total")
        try:
            out.append(BasketSpec(name, costs, total))
        except InputError as e:
            raise src.validation(f"[{section}]", e) from None
    return out


def parse_baskets(path) -> list[BasketSpec]:
    src = _read(path)
    baskets = [s for s in src.sections() if s.startswith("basket:")]
    if not baskets:
        raise FileValidationError(src.path, "[basket:NAME]", "no basket section found")
    for s in baskets:
        src.check_version(s)
    return _baskets_from(src)


def parse_basket(path) -> BasketSpec:
    baskets = parse_baskets(path)
    if len(baskets) != 1:
        raise FileValidationError(str(path), "[basket:NAME]", f"expected one basket, found {len(baskets)}")
    return baskets[0]


def serialize_basket(basket: BasketSpec, header: bool = True) -> str:
    lines = [f"[basket:{basket.name}]"]
    if header:
        lines.append(f"format_version = {FORMAT_VERSION}")
    lines.append(f"total = {_fmt(basket.total)}")
    lines += [f"{c} = {_fmt(v)}" for c, v in basket.costs.items()]
    return "\n".join(lines) + "\n"


# -- scenarios ---------------------------------------------------------------


def parse_scenario(path) -> ScenarioConfig:
    path = Path(path)
    src = _read(path)
    src.check_version("scenario")
    head = src.cp["scenario"]
    if not src.cp.has_section("quantiles"):
        raise FileValidationError(src.path, "[quantiles]", "section is missing")
    quantiles = {k: src.numbers("quantiles", k, 3) for k in src.cp["quantiles"]}

    correlations = CorrelationSpec()
    baskets: list[BasketSpec] = []
    for inc in _csv(head.get("include", "")):
        target = (path.parent / inc).resolve()
        if not target.exists():
            raise FileValidationError(src.path, f"include {inc!r}", "file not found")
        inc_src = _read(target)
        if inc_src.cp.has_section("correlations"):
            inc_src.check_version("correlations")
            correlations = _merge(src, correlations, _correlations_from(inc_src))
        for s in inc_src.sections():
            if s.startswith("basket:"):
                inc_src.check_version(s)
        baskets += _baskets_from(inc_src)
    if src.cp.has_section("correlations"):
        correlations = _merge(src, correlations, _correlations_from(src))
    baskets += _baskets_from(src)

    cond = None
    if src.cp.has_section("condition"):
        sec = src.cp["condition"]
        if "category" not in sec:
            raise FileValidationError(src.path, "[condition] category", "required field is missing")
        cond = (sec["category"].strip(), src.number("condition", "percentile"))

    cats = _csv(head.get("categories", "")) or list(quantiles)
    rank = head.get("rank_transform", "true").strip().lower()
    if rank not in ("true", "false"):
        raise FileSyntaxError(src.path, src.line("scenario", "rank_transform"), "rank_transform must be true or false")
    try:
        return ScenarioConfig(
            name=head.get("name", path.stem).strip(),
            quantiles=quantiles,
            correlations=correlations,
            baskets=tuple(baskets),
            categories=CategorySet(tuple(cats)),
            overshoot=src.number("scenario", "overshoot", float, DEFAULT_OVERSHOOT),
            n_samples=src.number("scenario", "samples", int, DEFAULT_SAMPLES),
            seed=src.number("scenario", "seed", int, DEFAULT_SEED),
            condition=cond,
            rank_transform=rank == "true",
        )
    except InputError as e:
        raise src.validation("scenario", e) from None


def _merge(src: _Source, a: CorrelationSpec, b: CorrelationSpec) -> CorrelationSpec:
    try:
        return CorrelationSpec(a.pairs + b.pairs)
    except InputError as e:
        raise src.validation("[correlations]", e) from None


def serialize_scenario(config: ScenarioConfig) -> str:
    """Self-contained scenario text (correlations and baskets inlined)."""
    lines = [
        "[scenario]",
        f"format_version = {FORMAT_VERSION}",
        f"name = {config.name}",
        f"categories = {', '.join(config.categories)}",
        f"overshoot = {_fmt(config.overshoot)}",
        f"samples = {config.n_samples}",
        f"seed = {config.seed}",
        f"rank_transform = {'true' if config.rank_transform else 'false'}",
        "",
        "[quantiles]",
    ]
    lines += [f"{c} = {_fmt(t.q05)}, {_fmt(t.q50)}, {_fmt(t.q95)}" for c, t in config.quantiles.items()]
    text = "\n".join(lines) + "\n"
    if len(config.correlations):
        text += "\n" + serialize_correlations(config.correlations, header=False)
    for b in config.baskets:
        text += "\n" + serialize_basket(b, header=False)
    if config.condition is not None:
        cat, p = config.condition
        text += f"\n[condition]\ncategory = {cat}\npercentile = {_fmt(p)}\n"
    return text


# -- studies -----------------------------------------------------------------


def parse_study(path) -> ElicitationStudy:
    src = _read(path)
    src.check_version("study")
    experts = _csv(src.cp["study"].get("experts", ""))
    questions, assessments = [], {e: {} for e in experts}
    for section in src.sections():
        if not section.startswith("question:"):
            continue
        qid = section.split(":", 1)[1].strip()
        sec = src.cp[section]
        rec = {"id": qid, "kind": sec.get("kind", "target").strip(), "units": sec.get("units", "").strip()}
        if "realization" in sec:
            rec["realization"] = src.number(section, "realization")
        questions.append(rec)
        for key in sec:
            if key in _QUESTION_KEYS:
                continue
            if key not in assessments:
                raise FileValidationError(src.path, f"[{section}] {key}", "expert is not listed in [study] experts")
            assessments[key][qid] = src.numbers(section, key, 3)
    try:
        return validate_study({"experts": experts, "questions": questions, "assessments": assessments})
    except InputError as e:
        raise src.validation("study", e) from None


def serialize_study(study: ElicitationStudy) -> str:
    lines = ["[study]", f"format_version = {FORMAT_VERSION}", f"experts = {', '.join(study.experts)}"]
    for q in study.questions:
        lines += ["", f"[question:{q.id}]", f"kind = {q.kind}"]
        if q.units:
            lines.append(f"units = {q.units}")
        if q.realization is not None:
            lines.append(f"realization = {_fmt(q.realization)}")
        for e in study.experts:
            t = study.assessments.get((e, q.id))
            if t is not None:
                lines.append(f"{e} = {_fmt(t.q05)}, {_fmt(t.q50)}, {_fmt(t.q95)}")
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def resolve_data(name: str) -> Path:
    """Path to ``name`` as given, or to the shipped data file of that name."""
    p = Path(name)
    if p.exists():
        return p
    for cand in (DATA_DIR / name, DATA_DIR / f"{name}.scenario", DATA_DIR / f"{name}.study"):
        if cand.exists():
            return cand
    return p
