"""Data-driven test automation: harness, XML test data, drivers, reporting
and combinatorial test-case reduction."""

from .datacontainer import TestDataMap, load_container, lookup_case_data, parse_container
from .drivers import DriverHandle, MockWebApp, dump_config, validate_config
from .harness import CaseResult, RunConfig, SuiteResult, execute_case, run_suite
from .reduction import (
    ParameterSpec,
    count_all,
    gen_all,
    gen_tway,
    parse_param_spec,
    verify_coverage,
)
from .suite import Priority, Suite, load_suite, parse_suite, select_runnable
from .testlib import CaseRegistry, MethodRegistry, TestCaseDefinition, data_driven_case

__version__ = "0.1.0"

__all__ = [
    "CaseRegistry",
    "CaseResult",
    "DriverHandle",
    "MethodRegistry",
    "MockWebApp",
    "ParameterSpec",
    "Priority",
    "RunConfig",
    "Suite",
    "SuiteResult",
    "TestCaseDefinition",
    "TestDataMap",
    "count_all",
    "data_driven_case",
    "dump_config",
    "execute_case",
    "gen_all",
    "gen_tway",
    "load_container",
    "load_suite",
    "lookup_case_data",
    "parse_container",
    "parse_param_spec",
    "parse_suite",
    "run_suite",
    "select_runnable",
    "validate_config",
    "verify_coverage",
]
