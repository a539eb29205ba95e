import json
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

from polyhedra import get_logger, get_target, load_settings
from polyhedra.config import TARGETS
from polyhedra.errors import ConfigurationError
from polyhedra.targets import FAIL, NOT_CERTIFIED, PASS

logger = get_logger('suite_runner')

REPORTED_PACKAGES = ('numpy', 'scipy', 'mpmath', 'sympy', 'pandas')


@dataclass(frozen=True)
class CheckSuiteConfig:
    target: str = 'type1'
    mesh: str = None
    samples: int = None
    tolerance: float = None
    precision: int = None
    output_dir: str = None
    config_path: str = None
    log_level: str = None

    def settings(self):
        """Effective Settings: environment, then the config file, then these fields."""
        if self.target not in TARGETS:
            raise ConfigurationError(f"Unknown target: {self.target}. Available targets: {list(TARGETS)}")
        if self.target == 'custom' and not self.mesh:
            raise ConfigurationError("The custom target needs --mesh")
        if self.samples is not None and self.samples < 2:
            raise ConfigurationError(f"samples must be >= 2, got {self.samples}")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tolerance}")
        return load_settings(self.config_path, samples=self.samples, invariant_tolerance=self.tolerance,
                             dps=self.precision, output_dir=self.output_dir,
                             log_level=self.log_level)


@dataclass
class Report:
    target: str
    checks: list
    environment: dict
    description: str = ''
    artifacts: dict = field(default_factory=dict)

    def counts(self):
        out = {PASS: 0, FAIL: 0, NOT_CERTIFIED: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def exit_code(self):
        return 1 if any(c.status == FAIL for c in self.checks) else 0

    def to_dict(self):
        return {
            'target': self.target,
            'description': self.description,
            'environment': self.environment,
            'counts': self.counts(),
            'checks': [c.to_dict() for c in self.checks],
            'artifacts': self.artifacts,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=str)

    def write(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.target}.report.json"
        path.write_text(self.to_json() + "\n")
        return path

    def summary(self):
        lines = [f"{self.target}: {self.description}"]
        for c in self.checks:
            residual = '' if c.residual is None else f"  residual {c.residual:.3e} (tol {c.tolerance:.1e})"
            sample = '' if c.sample is None or c.status == PASS else f"  at sample {c.sample}"
            lines.append(f"  {c.status:<14}{c.check_id}{residual}{sample}")
        counts = self.counts()
        lines.append(f"  {counts[PASS]} passed, {counts[FAIL]} failed, {counts[NOT_CERTIFIED]} not certified")
        return "\n".join(lines)


def environment(settings):
    versions = {}
    for name in REPORTED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return {
        'precision': settings.dps,
        'seed': settings.seed,
        'samples': settings.samples,
        'tolerance': settings.invariant_tolerance,
        'angle_coefficient_bound': settings.angle_coefficient_bound,
        'pi_coefficient_bound': settings.pi_coefficient_bound,
        'functionals': settings.functionals,
        'versions': versions,
    }


def run_suite(config, write=True):
    """
    Run every check of one target.

    Args:
        config: CheckSuiteConfig
        write: Whether to write the JSON report to the output directory

    Returns:
        Report: Checks sorted by id, with the environment they ran in
    """
    settings = config.settings()
    target = get_target(config.target, config.mesh)
    logger.info(f"Running {target.target_id} checks with {settings.samples} samples at {settings.dps} digits")
    checks = sorted(target.checks_fn(settings, settings.samples), key=lambda c: c.check_id)
    report = Report(target.target_id, checks, environment(settings), target.description)
    for c in checks:
        if c.status == FAIL:
            logger.error(f"{c.check_id} failed at sample {c.sample}: residual {c.residual}, details {c.details}")
        elif c.status == NOT_CERTIFIED:
            logger.warning(f"{c.check_id} not certified")
    if write:
        path = report.write(settings.output_dir)
        report.artifacts['report'] = str(path)
        logger.info(f"Report written to {path}")
    return report


if __name__ == "__main__":
    # When run directly, check the type-1 octahedron with the configured defaults
    result = run_suite(CheckSuiteConfig(target='type1'))
    print(result.summary())
