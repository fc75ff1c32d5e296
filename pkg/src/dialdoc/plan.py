"""Experiment lineage plans: training stages, initializations, checkpoints.

A plan is a list of model nodes. Each node is initialized either from "base"
(the raw pretrained encoder) or from another node, and runs an ordered list
of PT/FT stages over named datasets. Checkpoints are the voting units the
ensemble consumes; the plan file may record either explicit checkpoint ids or
a bare count (seed multiplicity), which expands to "<node>#<k>".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ContractViolation, ParseError

BASE_INIT = "base"
STAGE_ROLES = ("PT", "FT")


@dataclass
class Stage:
    role: str  # "PT" | "FT"
    datasets: set[str]


@dataclass
class ModelNode:
    name: str
    init: str
    stages: list[Stage]
    checkpoints: list[str]


@dataclass
class Plan:
    nodes: list[ModelNode]
    known_datasets: set[str]

    def node_names(self) -> list[str]:
        return [n.name for n in self.nodes]


@dataclass
class Finding:
    code: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    def add(self, code: str, message: str):
        self.findings.append(Finding(code, message))

    @property
    def ok(self) -> bool:
        return not self.findings


def load_plan(path: str | Path) -> Plan:
    path = Path(path)
    if not path.exists():
        raise ParseError("plan file not found", file=str(path))
    with open(path, "rb") as f:
        try:
            raw = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"invalid plan file: {exc}", file=str(path)) from exc
    return _plan_from_dict(raw, file=str(path))


def shipped_plan_path() -> Path:
    """The committed lineage plan with per-node checkpoint counts."""
    return Path(str(resources.files("dialdoc").joinpath("data", "lineage_plan.toml")))


def _plan_from_dict(raw: dict, *, file: str) -> Plan:
    known = set(raw.get("known_datasets", []))
    nodes = []
    for i, node_raw in enumerate(raw.get("node", [])):
        name = node_raw.get("name")
        if not name:
            raise ParseError("node missing name", file=file, record=i, field="name")
        stages = []
        for stage_raw in node_raw.get("stages", []):
            stages.append(
                Stage(
                    role=stage_raw.get("role", ""),
                    datasets=set(stage_raw.get("datasets", [])),
                )
            )
        checkpoints = node_raw.get("checkpoints", [])
        if isinstance(checkpoints, int):
            checkpoints = [f"{name}#{k}" for k in range(1, checkpoints + 1)]
        nodes.append(
            ModelNode(
                name=name,
                init=node_raw.get("init", BASE_INIT),
                stages=stages,
                checkpoints=[str(c) for c in checkpoints],
            )
        )
    return Plan(nodes=nodes, known_datasets=known)


def validate_plan(plan: Plan) -> ValidationReport:
    """Collect every violation; never stops at the first finding."""
    report = ValidationReport()
    by_name: dict[str, ModelNode] = {}
    for node in plan.nodes:
        if node.name in by_name:
            report.add("duplicate-node", f"node name {node.name!r} appears more than once")
        by_name[node.name] = node

    for node in plan.nodes:
        if node.init != BASE_INIT and node.init not in by_name:
            report.add(
                "unknown-init",
                f"node {node.name!r} is initialized from unknown node {node.init!r}",
            )
        for stage in node.stages:
            if stage.role not in STAGE_ROLES:
                report.add(
                    "bad-stage-role",
                    f"node {node.name!r} has stage role {stage.role!r}, expected PT or FT",
                )
            missing = stage.datasets - plan.known_datasets
            if missing:
                report.add(
                    "unknown-dataset",
                    f"node {node.name!r} stage uses unknown datasets {sorted(missing)}",
                )

    _check_cycles(plan, by_name, report)
    _check_stage_order(plan, by_name, report)

    seen_ckpts: dict[str, str] = {}
    for node in plan.nodes:
        for ckpt in node.checkpoints:
            if ckpt in seen_ckpts:
                report.add(
                    "duplicate-checkpoint",
                    f"checkpoint {ckpt!r} appears in both {seen_ckpts[ckpt]!r} and {node.name!r}",
                )
            else:
                seen_ckpts[ckpt] = node.name
    return report


def _check_cycles(plan: Plan, by_name: dict, report: ValidationReport):
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(name: str, trail: list[str]):
        if name == BASE_INIT or name not in by_name:
            return
        if state.get(name) == 1:
            return
        if state.get(name) == 0:
            cycle = trail[trail.index(name) :] + [name]
            report.add("init-cycle", f"initialization cycle: {' -> '.join(cycle)}")
            return
        state[name] = 0
        visit(by_name[name].init, trail + [name])
        state[name] = 1

    for node in plan.nodes:
        if node.name not in state:
            visit(node.name, [])


def _lineage_stages(node: ModelNode, by_name: dict, seen: set[str]) -> list[tuple[str, Stage]]:
    """Stages along the init chain, oldest ancestor first. Cycles are cut."""
    if node.name in seen:
        return []
    seen.add(node.name)
    inherited: list[tuple[str, Stage]] = []
    if node.init != BASE_INIT and node.init in by_name:
        inherited = _lineage_stages(by_name[node.init], by_name, seen)
    return inherited + [(node.name, s) for s in node.stages]


def _check_stage_order(plan: Plan, by_name: dict, report: ValidationReport):
    for node in plan.nodes:
        sequence = _lineage_stages(node, by_name, set())
        ft_seen_at = None
        for owner, stage in sequence:
            if stage.role == "FT" and ft_seen_at is None:
                ft_seen_at = owner
            elif stage.role == "PT" and ft_seen_at is not None:
                report.add(
                    "pt-after-ft",
                    f"node {node.name!r}: PT stage of {owner!r} follows FT stage "
                    f"of {ft_seen_at!r} in its lineage",
                )
                break


def ensemble_members(plan: Plan, exclude: set[str]) -> list[str]:
    """Checkpoints of all non-excluded nodes, in plan order."""
    names = set(plan.node_names())
    unknown = exclude - names
    if unknown:
        raise ContractViolation(f"unknown node names in exclude set: {sorted(unknown)}")
    members = []
    for node in plan.nodes:
        if node.name not in exclude:
            members.extend(node.checkpoints)
    return members
