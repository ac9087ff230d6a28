"""Synchronous client for the pipeline service.

`make_client(None)` runs the app in-process over a private event loop,
so the CLI works with no server running; pass a URL to talk to a remote
instance instead.  Either way the caller sees a plain httpx.Client.
"""

from __future__ import annotations

import asyncio

import httpx

from .app import create_app


class InProcessTransport(httpx.BaseTransport):
    """Bridge a sync httpx.Client onto an ASGI app."""

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)
        self._loop = asyncio.new_event_loop()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call():
            response = await self._transport.handle_async_request(request)
            body = b"".join([part async for part in response.stream])
            await response.aclose()
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=body,
                request=request,
            )

        return self._loop.run_until_complete(call())

    def close(self) -> None:
        self._loop.run_until_complete(self._transport.aclose())
        self._loop.close()


def make_client(server_url: "str | None" = None, config_path: "str | None" = None) -> httpx.Client:
    """In-process client by default; HTTP client when server_url is given."""
    if server_url:
        return httpx.Client(base_url=server_url, timeout=None)
    return httpx.Client(
        transport=InProcessTransport(create_app(config_path)),
        base_url="http://cityrt.internal",
        timeout=None,
    )
