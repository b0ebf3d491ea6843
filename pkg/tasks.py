from invoke import task


@task
def test(c, k: str | None = None, acceptance: bool = False):
    """Run the test-suite (optionally filtered with -k)

    Args:
        k (str | None): pytest -k expression. Defaults to None.
        acceptance (bool): Only run the acceptance criteria. Defaults to False.
    """
    target = "tests/test_acceptance.py" if acceptance else "tests"
    c.run(f"pytest {target} {f'-k {k!r}' if k else ''}", pty=True)


@task
def lint(c, fix: bool = False):
    """Run ruff and isort (fixing in place with --fix)"""
    if fix:
        c.run("isort .")
        c.run("ruff format .")
    else:
        c.run("ruff format --check .")
        c.run("isort --check .")
        c.run("ruff check .")


@task
def local_prefect(c, port: int = 4200):
    """Start a local Prefect server (port 4200 by default)"""
    c.run("prefect server start")
    c.run(f"prefect config set PREFECT_API_URL=http://127.0.0.1:{port}/api")


@task
def run_plan(c, plan: str = "acceptance.json"):
    """Run a JSON check plan through the variability-checks flow

    Args:
        plan (str): Path to the plan, or the name of a shipped one.
            Defaults to acceptance.json.
    """
    c.run(f"python -m flows.langvar plan {plan}", pty=True)
