"""Compile and execute generated tests under the right launcher.

Serial and OpenMP binaries run directly; MPI binaries go through the MPI
launcher with ``-n <procs>``. A harness-level watchdog kills the whole
process group at ``timeout_seconds + 1`` and records a timeout verdict:
for MPI that launcher-level timeout is authoritative, because a deadlocked
rank cannot reliably self-report. Tests compile at -O0 so the memory
accesses that race-sensitive tests rely on stay observable.
"""

from __future__ import annotations

import gzip
import json
import os
import re
import shutil
import signal
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

GRACE_SECONDS = 1.0


class ToolchainMissing(Exception):
    def __init__(self, component):
        super().__init__(f"toolchain component missing: {component}")
        self.component = component


class LauncherMissing(Exception):
    pass


class CoverageToolMissing(Exception):
    pass


@dataclass
class ToolchainConfig:
    cxx: str | None = None
    mpicxx: str | None = None
    mpirun: str | None = None
    gcov: str | None = None
    openmp_flag: str = "-fopenmp"
    base_flags: tuple[str, ...] = ("-O0", "-g")
    mpirun_extra_args: tuple[str, ...] | None = None  # autodetected when None

    def resolve(self, name, env_var, candidates):
        configured = getattr(self, name)
        if configured:
            if shutil.which(configured) is None:
                raise ToolchainMissing(configured)
            return configured
        env = os.environ.get(env_var)
        if env and shutil.which(env):
            return env
        for cand in candidates:
            if shutil.which(cand):
                return cand
        raise ToolchainMissing(name)

    def resolve_cxx(self):
        return self.resolve("cxx", "CXX", ["g++", "clang++", "c++"])

    def resolve_mpicxx(self):
        return self.resolve("mpicxx", "MPICXX", ["mpicxx", "mpic++"])

    def resolve_mpirun(self):
        return self.resolve("mpirun", "MPIRUN", ["mpirun", "mpiexec"])

    def resolve_gcov(self):
        return self.resolve("gcov", "GCOV", ["gcov"])

    def launcher_extra_args(self):
        if self.mpirun_extra_args is not None:
            return list(self.mpirun_extra_args)
        extra = ["--oversubscribe"]
        # Open MPI refuses to run as root without an explicit opt-in.
        if hasattr(os, "geteuid") and os.geteuid() == 0:
            extra.append("--allow-run-as-root")
        return extra


@dataclass
class CompileResult:
    test_id: str
    success: bool
    command: list[str]
    diagnostics: str
    parsed_errors: list[tuple[str, int, str]]
    binary: Path | None = None

    def to_dict(self):
        return {
            "test_id": self.test_id,
            "success": self.success,
            "command": list(self.command),
            "diagnostics": self.diagnostics,
            "parsed_errors": [[f, l, m] for f, l, m in self.parsed_errors],
            "binary": str(self.binary) if self.binary else None,
        }


@dataclass
class RunResult:
    test_id: str
    verdict: str  # pass | assertion_failure | timeout_deadlock | setup_error | crash
    exit_codes: dict[str, int | None]
    wall_time_seconds: float
    output: str

    def to_dict(self):
        return {
            "test_id": self.test_id,
            "verdict": self.verdict,
            "exit_codes": dict(self.exit_codes),
            "wall_time_seconds": self.wall_time_seconds,
            "output": self.output,
        }


@dataclass
class FileCoverage:
    path: str
    lines_executed: int
    total_lines: int
    branches_executed: int
    total_branches: int

    @property
    def line_cov_pct(self):
        if self.total_lines == 0:
            return None
        return 100.0 * self.lines_executed / self.total_lines

    @property
    def branch_cov_pct(self):
        if self.total_branches == 0:
            return None
        return 100.0 * self.branches_executed / self.total_branches

    def to_dict(self):
        return {
            "path": self.path,
            "lines_executed": self.lines_executed,
            "total_lines": self.total_lines,
            "branches_executed": self.branches_executed,
            "total_branches": self.total_branches,
            "line_cov_pct": self.line_cov_pct,
            "branch_cov_pct": self.branch_cov_pct,
        }


@dataclass
class CoverageReport:
    files: list[FileCoverage] = field(default_factory=list)

    def to_dict(self):
        return {"files": [f.to_dict() for f in self.files]}


_DIAG_RE = re.compile(r"^(?P<file>[^:\s][^:]*):(?P<line>\d+):(?:\d+:)?\s*(?:fatal )?error:\s*(?P<msg>.*)$")


def parse_compiler_diagnostics(text):
    errors = []
    for line in text.splitlines():
        m = _DIAG_RE.match(line.strip())
        if m:
            errors.append((m.group("file"), int(m.group("line")), m.group("msg").strip()))
    return errors


def compile_test(test, toolchain=None, out_dir=".", coverage=False):
    """Compile one generated test into ``out_dir``; never raises on compiler
    diagnostics, only on a missing toolchain."""
    toolchain = toolchain or ToolchainConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = test.launch_spec.model

    source_path = out_dir / test.filename
    source_path.write_text(test.source_text)
    binary_path = out_dir / source_path.stem

    if model == "mpi":
        compiler = toolchain.resolve_mpicxx()
        cmd = [compiler, *toolchain.base_flags]
    elif model == "openmp":
        compiler = toolchain.resolve_cxx()
        cmd = [compiler, *toolchain.base_flags, toolchain.openmp_flag]
    else:
        compiler = toolchain.resolve_cxx()
        cmd = [compiler, *toolchain.base_flags]
    if coverage:
        cmd.append("--coverage")
    cmd += [str(source_path), "-o", str(binary_path)]

    proc = subprocess.run(cmd, capture_output=True, text=True)
    diagnostics = proc.stderr + proc.stdout
    success = proc.returncode == 0 and binary_path.exists()
    return CompileResult(
        test_id=test.recipe_id,
        success=success,
        command=cmd,
        diagnostics=diagnostics,
        parsed_errors=parse_compiler_diagnostics(diagnostics),
        binary=binary_path if success else None,
    )


_EXIT_CODE_VERDICTS = {0: "pass", 2: "assertion_failure", 3: "timeout_deadlock", 4: "setup_error"}


def run_test(binary, launch_spec, toolchain=None, test_id=""):
    """Execute a compiled test under its launcher with the watchdog armed."""
    toolchain = toolchain or ToolchainConfig()
    binary = Path(binary)
    env = dict(os.environ)

    if launch_spec.model == "mpi":
        try:
            launcher = toolchain.resolve_mpirun()
        except ToolchainMissing as exc:
            raise LauncherMissing(str(exc)) from exc
        procs = launch_spec.num_processes or 2
        cmd = [launcher, *toolchain.launcher_extra_args(), "-n", str(procs), str(binary)]
    else:
        cmd = [str(binary)]
        if launch_spec.model == "openmp" and launch_spec.num_threads:
            env["OMP_NUM_THREADS"] = str(launch_spec.num_threads)

    budget = launch_spec.timeout_seconds + GRACE_SECONDS
    started = time.monotonic()
    proc = subprocess.Popen(
        cmd,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
        env=env,
        cwd=str(binary.parent),
        start_new_session=True,
    )
    timed_out = False
    try:
        output, _ = proc.communicate(timeout=budget)
        wall = time.monotonic() - started
    except subprocess.TimeoutExpired:
        timed_out = True
        wall = time.monotonic() - started
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()
        output, _ = proc.communicate()

    if timed_out:
        verdict = "timeout_deadlock"
        exit_codes = {"launcher": None}
    else:
        code = proc.returncode
        verdict = _EXIT_CODE_VERDICTS.get(code, "crash")
        exit_codes = {"launcher": code}
    return RunResult(
        test_id=test_id,
        verdict=verdict,
        exit_codes=exit_codes,
        wall_time_seconds=wall,
        output=output or "",
    )


def collect_coverage(binary, toolchain=None, source_filter=None):
    """Parse gcov's JSON intermediate format for an instrumented binary.

    A line counts as executed when its count is positive; a branch counts as
    executed when it was taken at least once.
    """
    toolchain = toolchain or ToolchainConfig()
    try:
        gcov = toolchain.resolve_gcov()
    except ToolchainMissing as exc:
        raise CoverageToolMissing(str(exc)) from exc

    binary = Path(binary)
    work_dir = binary.parent
    gcda = list(work_dir.glob("*.gcda")) + list(work_dir.glob("*.gcno"))
    if not gcda:
        raise CoverageToolMissing("no coverage data (.gcda/.gcno) next to the binary")

    proc = subprocess.run(
        [gcov, "--json-format", "--branch-probabilities", binary.name + ".cpp"],
        cwd=str(work_dir),
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise CoverageToolMissing(f"gcov failed: {proc.stderr.strip()[:200]}")

    report = CoverageReport()
    for json_path in sorted(work_dir.glob("*.gcov.json.gz")):
        with gzip.open(json_path, "rt") as fh:
            doc = json.load(fh)
        for entry in doc.get("files", []):
            path = entry.get("file", "")
            if source_filter and source_filter not in path:
                continue
            lines = entry.get("lines", [])
            total_lines = len(lines)
            lines_executed = sum(1 for ln in lines if ln.get("count", 0) > 0)
            branches = [b for ln in lines for b in ln.get("branches", [])]
            total_branches = len(branches)
            branches_executed = sum(1 for b in branches if b.get("count", 0) > 0)
            report.files.append(
                FileCoverage(
                    path=path,
                    lines_executed=lines_executed,
                    total_lines=total_lines,
                    branches_executed=branches_executed,
                    total_branches=total_branches,
                )
            )
    return report
