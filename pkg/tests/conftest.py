import pytest

from qcartier.checks import CheckEnv
from qcartier.report import RunConfig

ACCEPTANCE_SPLIT_PRIMES = (7, 13, 19, 31)


@pytest.fixture(scope="session")
def session_cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("qcartier-cache"))


@pytest.fixture(scope="session")
def residue_env(session_cache_dir):
    """One shared environment for the residue-backend pipeline at the
    acceptance primes; dictionaries and defects are built once per prime."""
    config = RunConfig(
        command="suite",
        primes=ACCEPTANCE_SPLIT_PRIMES,
        backend="residue",
        cache_dir=session_cache_dir,
    )
    return CheckEnv(config)


@pytest.fixture(scope="session")
def exact_env(session_cache_dir):
    config = RunConfig(
        command="suite",
        primes=(7,),
        backend="exact",
        cache_dir=session_cache_dir,
    )
    return CheckEnv(config)
