"""mcpdiag: protocol-driven network diagnostics.

Canonical CLI tools (ping, traceroute, dig) exposed as schema-validated
tools behind a mandatory human-authorization handshake, with deterministic
stdout-to-JSON translation and a hybrid synchronous-control /
asynchronous-stream transport.
"""

__version__ = "0.1.0"
