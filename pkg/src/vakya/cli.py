"""Command-line interface: a thin HTTP client of the service.

Without ``--server`` the commands talk to an in-process instance of the
app; with ``--server http://host:port`` they target a running ``vakya
serve`` elsewhere, so batch jobs and an always-on service share one code
path.
"""

from __future__ import annotations

import json
import sys

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    import warnings

    with warnings.catch_warnings():
        # starlette's in-process client warns about the pinned httpx major
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app, base_url="http://vakya.local", raise_server_exceptions=False)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True))


server_option = click.option(
    "--server", envvar="VAKYA_SERVER", default=None,
    help="Base URL of a running service; defaults to in-process execution.",
)


@click.group()
def main() -> None:
    """Classical-language NLU toolkit."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("vakya.service.app:app", host=host, port=port)


@main.command("build-index")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Index file path (overrides config index_path).")
@server_option
def build_index_cmd(config_path: str, out_path: str | None, server: str | None) -> None:
    """Chunk, lemmatize, and index the configured corpus."""
    overrides = {"index_path": out_path} if out_path else {}
    result = _post(server, "/v1/index/build", {"config_path": config_path, "overrides": overrides})
    _echo_json(result)


def _run_overrides(cache_dir, replay_only, mock, out):
    overrides: dict[str, str] = {}
    if cache_dir:
        overrides["cache_dir"] = cache_dir
    if replay_only:
        overrides["replay_only"] = "true"
    if mock:
        overrides["mock_script"] = mock
    if out:
        overrides["out_dir"] = out
    return overrides


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--replay-only", is_flag=True, default=False,
              help="Serve every LLM call from the cache; error on a miss.")
@click.option("--mock", default=None, type=click.Path(), help="Mock LLM script file.")
@click.option("--out", default=None, type=click.Path(), help="Report output directory.")
@server_option
def run(config_path, cache_dir, replay_only, mock, out, server) -> None:
    """Run the configured experiment and write its report."""
    result = _post(server, "/v1/experiment/run", {
        "config_path": config_path,
        "overrides": _run_overrides(cache_dir, replay_only, mock, out),
    })
    _echo_json(result)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--out", default=None, type=click.Path())
@server_option
def score(config_path, cache_dir, out, server) -> None:
    """Re-score cached raw outputs without re-calling any LLM."""
    result = _post(server, "/v1/experiment/score", {
        "config_path": config_path,
        "overrides": _run_overrides(cache_dir, False, None, out),
    })
    _echo_json(result)


@main.command()
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@server_option
def report(report_path, out, server) -> None:
    """Regenerate derived report files from a saved report.json."""
    result = _post(server, "/v1/report", {"report_path": report_path, "out_dir": out})
    _echo_json(result)


@main.command()
@click.argument("text")
@click.option("--from", "from_script", required=True,
              type=click.Choice(["devanagari", "iast", "canonical"]))
@click.option("--to", "to_script", required=True,
              type=click.Choice(["devanagari", "iast", "canonical"]))
@server_option
def transliterate(text, from_script, to_script, server) -> None:
    """Convert TEXT between scripts."""
    result = _post(server, "/v1/transliterate", {
        "text": text, "from_script": from_script, "to_script": to_script,
    })
    click.echo(result["text"])


@main.command()
@click.argument("query")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("-k", default=None, type=int, help="Number of chunks (default from config).")
@server_option
def search(query, config_path, k, server) -> None:
    """Retrieve the top chunks for QUERY from the configured corpus."""
    payload = {"config_path": config_path, "query": query}
    if k is not None:
        payload["k"] = k
    result = _post(server, "/v1/index/search", payload)
    for hit in result["results"]:
        click.echo(f"{hit['rank']:>2}. {hit['chunk_id']}  score={hit['score']:.6f}")
        click.echo("    " + hit["text"].replace("\n", "\n    "))


if __name__ == "__main__":
    sys.exit(main())
