"""Command-line entry points for the services, the wallet, and the bench."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import httpx
import uvicorn

from .authz import AuthzConfig, PipConfig, create_authz_app
from .bench import BenchPlan, TargetUnreachable, run as bench_run, write_reports
from .idm import IdmConfig, create_idm_app
from .identity import did_from_key, generate_keypair
from .pep import PepConfig, create_pep_app
from .stub import create_stub_app
from .wallet import PresentOutcome, WalletError, WalletStore, present, request_credential

EXIT_DENIED = 3
EXIT_TRANSPORT = 4
EXIT_LOCAL = 5


def _parse_listen(listen: str) -> tuple[str, int]:
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.BadParameter(f"listen address must be host:port, got {listen!r}")
    return host, int(port)


def _parse_seed(seed_hex: str) -> bytes:
    try:
        seed = bytes.fromhex(seed_hex)
    except ValueError as exc:
        raise click.BadParameter(f"seed must be hex: {exc}")
    if len(seed) != 32:
        raise click.BadParameter("seed must be 32 bytes (64 hex chars)")
    return seed


@click.group()
def main():
    """Decentralized IAM stack: identity manager, decision service,
    enforcement proxy, wallet, and load harness."""


# -- identity manager --


@main.group()
def idm():
    """Organization-side identity manager."""


@idm.command("serve")
@click.option("--listen", default="127.0.0.1:8100", show_default=True)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="Journal directory; omit for in-memory state.")
@click.option("--admin-token", required=True, envvar="CREDGATE_IDM_TOKEN")
@click.option("--issuer-seed", required=True, envvar="CREDGATE_ISSUER_SEED",
              help="32-byte hex seed for the issuing key.")
@click.option("--public-url", default=None,
              help="External base URL if it differs from the listen address.")
def idm_serve(listen, data_dir, admin_token, issuer_seed, public_url):
    """Run the identity manager."""
    host, port = _parse_listen(listen)
    app = create_idm_app(
        IdmConfig(
            listen=listen,
            data_dir=data_dir,
            admin_token=admin_token,
            issuer_seed=_parse_seed(issuer_seed),
            public_base_url=public_url,
        )
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


@idm.command("issuer-did")
@click.option("--issuer-seed", required=True, envvar="CREDGATE_ISSUER_SEED")
def idm_issuer_did(issuer_seed):
    """Print the DID an identity manager with this seed signs as."""
    click.echo(did_from_key(generate_keypair(_parse_seed(issuer_seed)).public_key))


# -- decision service --


@main.group()
def authz():
    """Policy administration and decision service."""


@authz.command("serve")
@click.option("--listen", default="127.0.0.1:8200", show_default=True)
@click.option("--admin-token", required=True, envvar="CREDGATE_AUTHZ_TOKEN")
@click.option("--trusted-issuer", "trusted_issuers", multiple=True, required=True,
              help="Issuer DID to accept; repeatable.")
@click.option("--idm-url", default="http://127.0.0.1:8100", show_default=True)
@click.option("--freshness-window", default=120, show_default=True,
              help="Presentation timestamp tolerance, seconds.")
@click.option("--cache/--no-cache", "cache_enabled", default=False, show_default=True,
              help="Cache DID documents and revocation status.")
@click.option("--cache-ttl", default=30, show_default=True)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.option("--metrics-path", default="/v1/metrics", show_default=True)
def authz_serve(listen, admin_token, trusted_issuers, idm_url, freshness_window,
                cache_enabled, cache_ttl, data_dir, metrics_path):
    """Run the decision service."""
    host, port = _parse_listen(listen)
    app = create_authz_app(
        AuthzConfig(
            listen=listen,
            admin_token=admin_token,
            pip=PipConfig(
                trusted_issuers=frozenset(trusted_issuers),
                idm_base_url=idm_url.rstrip("/"),
                freshness_window=freshness_window,
                cache_enabled=cache_enabled,
                cache_ttl=cache_ttl,
            ),
            data_dir=data_dir,
            metrics_path=metrics_path,
        )
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


# -- enforcement proxy --


@main.group()
def pep():
    """Enforcement proxy in front of protected resources."""


@pep.command("serve")
@click.option("--listen", default="127.0.0.1:8300", show_default=True)
@click.option("--routes", "routes_file", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--pdp-url", default="http://127.0.0.1:8200", show_default=True)
@click.option("--timeout", default=5.0, show_default=True,
              help="Decision call timeout, seconds.")
@click.option("--body-limit", default=1 << 20, show_default=True,
              help="Largest request body accepted, bytes.")
def pep_serve(listen, routes_file, pdp_url, timeout, body_limit):
    """Run the enforcement proxy."""
    host, port = _parse_listen(listen)
    app = create_pep_app(
        PepConfig(
            listen=listen,
            pdp_url=pdp_url.rstrip("/"),
            routes_file=routes_file,
            pdp_timeout=timeout,
            body_limit=body_limit,
        )
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


# -- stub resource --


@main.group()
def stub():
    """Stand-in protected resource for demos."""


@stub.command("serve")
@click.option("--listen", default="127.0.0.1:9000", show_default=True)
@click.option("--delay", default=0.0, show_default=True,
              help="Artificial response delay, seconds.")
def stub_serve(listen, delay):
    host, port = _parse_listen(listen)
    uvicorn.run(create_stub_app(delay), host=host, port=port, log_level="warning")


# -- wallet --


@main.group()
@click.option("--wallet", "wallet_dir", envvar="CREDGATE_WALLET",
              default=Path.home() / ".credgate-wallet", show_default=True,
              type=click.Path(path_type=Path))
@click.pass_context
def wallet(ctx, wallet_dir):
    """Holder-side key and credential storage."""
    ctx.obj = WalletStore(wallet_dir)


@wallet.command("keygen")
@click.option("--seed", default=None, help="32-byte hex seed for a deterministic key.")
@click.option("--force", is_flag=True, help="Replace an existing key.")
@click.pass_obj
def wallet_keygen(store: WalletStore, seed, force):
    """Create the wallet key and print its DID."""
    try:
        did = store.init_keypair(
            seed=_parse_seed(seed) if seed else None, force=force
        )
    except WalletError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_LOCAL)
    click.echo(did)


@wallet.command("request-vc")
@click.option("--idm", "idm_url", required=True)
@click.option("--token", required=True, help="Identity-manager admin token.")
@click.option("--attrs", required=True, help="Comma-separated attribute tags.")
@click.option("--ttl", default=30 * 24 * 3600, show_default=True,
              help="Credential lifetime, seconds.")
@click.pass_obj
def wallet_request_vc(store: WalletStore, idm_url, token, attrs, ttl):
    """Request a credential and store it after local verification."""
    try:
        vc = request_credential(
            store,
            idm_url.rstrip("/"),
            token,
            [a for a in attrs.split(",") if a],
            ttl,
        )
    except WalletError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_LOCAL)
    except httpx.HTTPError as exc:
        click.echo(f"transport error: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT)
    click.echo(f"stored {vc.id} with attributes: {', '.join(vc.attributes)}")


@wallet.command("present")
@click.option("--vc", "credential_id", default=None,
              help="Credential id; defaults to the only stored one.")
@click.option("--method", default="GET", show_default=True)
@click.option("--url", required=True)
@click.option("--body", "body_file", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--reuse-nonce", is_flag=True, hidden=True)
@click.pass_obj
def wallet_present(store: WalletStore, credential_id, method, url, body_file,
                   reuse_nonce):
    """Perform an HTTP call through the proxy with a fresh presentation."""
    body = body_file.read_bytes() if body_file else None
    try:
        outcome: PresentOutcome = present(
            store,
            method,
            url,
            credential_id=credential_id,
            body=body,
            reuse_nonce=reuse_nonce,
            warn=lambda msg: click.echo(f"warning: {msg}", err=True),
        )
    except WalletError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_LOCAL)
    except httpx.HTTPError as exc:
        click.echo(f"transport error: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT)
    click.echo(f"{outcome.status_code}")
    if outcome.body:
        click.echo(outcome.body)
    sys.exit(0 if outcome.ok else EXIT_DENIED)


@wallet.command("show")
@click.pass_obj
def wallet_show(store: WalletStore):
    """List the wallet's DID and stored credentials."""
    import time as time_mod

    if not store.initialized():
        click.echo("(empty wallet)")
        return
    click.echo(f"did: {store.did()}")
    now = int(time_mod.time())
    for vc in store.credentials():
        flag = "  [EXPIRED]" if now >= vc.expires_at else ""
        click.echo(
            f"{vc.id}  issuer={vc.issuer}  attrs={','.join(vc.attributes)}  "
            f"expires_at={vc.expires_at}{flag}"
        )


# -- bench --


@main.group()
def bench():
    """Virtual-user load harness."""


@bench.command("run")
@click.option("--target", "target_url", required=True)
@click.option("--method", default="GET", show_default=True)
@click.option("--wallet", "wallet_dir", required=True,
              type=click.Path(path_type=Path))
@click.option("--vc", "credential_id", default=None)
@click.option("--vu-levels", default="50,100,150,200,250,300,350,400,450,500",
              show_default=True, help="Comma-separated, strictly increasing.")
@click.option("--cycle-seconds", default=30.0, show_default=True)
@click.option("--cooldown-seconds", default=30.0, show_default=True)
@click.option("--out", "out_dir", default="bench-out", show_default=True,
              type=click.Path(path_type=Path))
def bench_run_cmd(target_url, method, wallet_dir, credential_id, vu_levels,
                  cycle_seconds, cooldown_seconds, out_dir):
    """Run the configured cycles and write bench.csv / bench.json."""
    try:
        levels = tuple(int(v) for v in vu_levels.split(","))
        plan = BenchPlan(
            target_url=target_url,
            wallet_dir=wallet_dir,
            method=method,
            vu_levels=levels,
            cycle_seconds=cycle_seconds,
            cooldown_seconds=cooldown_seconds,
            credential_id=credential_id,
        )
    except ValueError as exc:
        raise click.BadParameter(str(exc))
    try:
        reports = bench_run(plan, out_dir=out_dir, progress=click.echo)
    except TargetUnreachable as exc:
        write_reports(exc.partial, Path(out_dir))
        click.echo(f"aborted: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT)
    for report in reports:
        click.echo(
            f"vu={report.vu_count} requests={report.requests} "
            f"avg={report.avg_ms} p90={report.p90_ms} p95={report.p95_ms} "
            f"max={report.max_ms} rps={report.rps:.2f} errors={report.error_count}"
        )
    click.echo(f"reports written to {out_dir}")


if __name__ == "__main__":
    main()
