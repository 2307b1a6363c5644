"""Seeded instances, property suites and reports."""

from .instances import (
    Caps,
    Instance,
    InstanceSpec,
    Template,
    draw_spec,
    gen_instance,
    instance_seed,
)
from .suites import CORE_SUITES, SCHEMA, SUITES, SuiteReport, run_suite
