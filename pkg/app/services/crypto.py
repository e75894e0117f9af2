"""
Key generation, proving and pairing verification.

The verifier folds the public IO values (and the unit variable) into the
prover's internal-wire sums and accepts iff

    e(V, W) == e(Y, Q) * e(t(s)P, h(s)Q)
"""

from __future__ import annotations

import logging
import random
from typing import Any, Dict, List, Optional, Sequence, Tuple

from app.models.crypto import EvaluationKey, Proof, VerificationKey
from app.models.qap import QAP, WitnessVector
from app.services import field
from app.services.backend import BilinearBackend, get_backend
from app.services.errors import CryptoError, InvalidWitness, MalformedProof, NotDivisible, ParseError
from app.services.qap import compute_p, divide_by_t
from app.services.semantics import io_patterns


logger = logging.getLogger(__name__)

VK_MAGIC = "zkc-vk 1"
EK_MAGIC = "zkc-ek 1"
PROOF_MAGIC = "zkc-proof 1"


def keygen(qap: QAP, backend: BilinearBackend, rng: Optional[random.Random] = None
           ) -> Tuple[EvaluationKey, VerificationKey, int]:
    """Sample s with t(s) != 0 and encode every QAP polynomial at s."""
    if qap.field_modulus != backend.order:
        raise CryptoError(f"QAP field {qap.field_modulus} differs from the group order {backend.order}")
    rng = rng or random.SystemRandom()
    r = backend.order
    while True:
        s = rng.randrange(1, r)
        t_s = field.evaluate(qap.t, s)
        if t_s:
            break
    P, Q = backend.P, backend.Q
    vP = [backend.g1_mul(P, field.evaluate(poly, s)) for poly in qap.v]
    wQ = [backend.g2_mul(Q, field.evaluate(poly, s)) for poly in qap.w]
    yP = [backend.g1_mul(P, field.evaluate(poly, s)) for poly in qap.y]
    sQ_powers = [backend.g2_mul(Q, pow(s, i, r)) for i in range(qap.d + 1)]
    ek = EvaluationKey(
        backend=backend.name, modulus=r, n_io=qap.n_io, unit_index=qap.unit_index,
        vP=vP, wQ=wQ, yP=yP, sQ_powers=sQ_powers,
    )
    unit = qap.unit_index
    vk = VerificationKey(
        backend=backend.name, modulus=r, n_in=qap.n_in, n_out=qap.n_out,
        P=P, Q=Q, tP=backend.g1_mul(P, t_s),
        vP_io=vP[:qap.n_io], wQ_io=wQ[:qap.n_io], yP_io=yP[:qap.n_io],
        vP_one=vP[unit] if unit is not None else None,
        wQ_one=wQ[unit] if unit is not None else None,
        yP_one=yP[unit] if unit is not None else None,
        bit_width=qap.bit_width,
        signed_io=list(qap.signed_io),
    )
    logger.info("generated keys: %d variables, %d powers of s", len(vP), len(sQ_powers))
    return ek, vk, s


def prove(ek: EvaluationKey, qap: QAP, a: WitnessVector, backend: BilinearBackend) -> Proof:
    """Internal-wire sums and h(s)Q; the worker never sees s."""
    try:
        h = divide_by_t(compute_p(qap, a), qap.t)
    except NotDivisible as exc:
        raise InvalidWitness("witness does not satisfy the QAP (t does not divide p)") from exc
    internal = qap.internal_indices
    values = [a.a[i] for i in internal]
    proof = Proof(
        V_mid=backend.g1_sum([ek.vP[i] for i in internal], values),
        W_mid=backend.g2_sum([ek.wQ[i] for i in internal], values),
        Y_mid=backend.g1_sum([ek.yP[i] for i in internal], values),
        H=backend.g2_sum(ek.sQ_powers, h.coeffs),
    )
    logger.debug("proof over %d internal variables, deg h = %d", len(internal), h.degree)
    return proof


def normalize_io(vk: VerificationKey, io: Sequence[int]) -> List[int]:
    """IO values as the witness holds them: negative signed values in two's complement."""
    if vk.bit_width is None:
        return list(io)
    return io_patterns(io, vk.bit_width, vk.signed_io)


def verify(vk: VerificationKey, io: Sequence[int], proof: Proof, backend: BilinearBackend) -> bool:
    if len(io) != vk.n_io:
        raise CryptoError(f"expected {vk.n_io} IO values, got {len(io)}")
    io = normalize_io(vk, io)
    for label, element, member in (
        ("V_mid", proof.V_mid, backend.is_g1), ("W_mid", proof.W_mid, backend.is_g2),
        ("Y_mid", proof.Y_mid, backend.is_g1), ("H", proof.H, backend.is_g2),
    ):
        if not member(element):
            raise MalformedProof(f"{label} is not a group element")
    V = backend.g1_add(backend.g1_sum(vk.vP_io, io), proof.V_mid)
    W = backend.g2_add(backend.g2_sum(vk.wQ_io, io), proof.W_mid)
    Y = backend.g1_add(backend.g1_sum(vk.yP_io, io), proof.Y_mid)
    if vk.vP_one is not None:
        V = backend.g1_add(V, vk.vP_one)
        W = backend.g2_add(W, vk.wQ_one)
        Y = backend.g1_add(Y, vk.yP_one)
    accepted = backend.gt_equal(
        backend.pair(V, W),
        backend.gt_combine(backend.pair(Y, vk.Q), backend.pair(vk.tP, proof.H)),
    )
    logger.info("proof %s", "accepted" if accepted else "rejected")
    return accepted


# -- text form --------------------------------------------------------------

def _header(magic: str, backend: BilinearBackend) -> List[str]:
    return [magic, f"backend {backend.name} {backend.order:x}"]


def serialize_vk(vk: VerificationKey) -> str:
    backend = get_backend(vk.backend, vk.modulus)
    enc = backend.encode
    lines = _header(VK_MAGIC, backend)
    lines.append(f"io {vk.n_in} {vk.n_out}")
    if vk.bit_width is not None:
        lines.append(f"bitwidth {vk.bit_width}")
    if vk.signed_io:
        lines.append(" ".join(["signed"] + [str(i) for i in vk.signed_io]))
    lines.extend(f"{label} {enc(getattr(vk, label))}" for label in ("P", "Q", "tP"))
    for label in ("vP_io", "wQ_io", "yP_io"):
        lines.extend(f"{label}.{i} {enc(element)}" for i, element in enumerate(getattr(vk, label)))
    if vk.vP_one is not None:
        lines.extend(f"{label} {enc(getattr(vk, label))}" for label in ("vP_one", "wQ_one", "yP_one"))
    return "\n".join(lines) + "\n"


def serialize_ek(ek: EvaluationKey) -> str:
    backend = get_backend(ek.backend, ek.modulus)
    lines = _header(EK_MAGIC, backend)
    lines.append(f"io {ek.n_io}")
    lines.append(f"unit {'-' if ek.unit_index is None else ek.unit_index}")
    for label in ("vP", "wQ", "yP", "sQ_powers"):
        lines.extend(f"{label}.{i} {backend.encode(element)}" for i, element in enumerate(getattr(ek, label)))
    return "\n".join(lines) + "\n"


def serialize_proof(proof: Proof, backend: BilinearBackend) -> str:
    lines = _header(PROOF_MAGIC, backend)
    lines.extend(f"{label} {backend.encode(getattr(proof, label))}" for label in ("V_mid", "W_mid", "Y_mid", "H"))
    return "\n".join(lines) + "\n"


def _read(text: str, magic: str, error: type, path: str) -> Tuple[BilinearBackend, Dict[str, str]]:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != magic:
        raise error(f"expected '{magic}' header", path=path, line=1)
    fields: Dict[str, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        label, _, value = line.partition(" ")
        if not value or label in fields:
            raise error(f"malformed or repeated line '{line}'", path=path, line=lineno)
        fields[label] = value.strip()
    try:
        name, modulus = fields.pop("backend").split()
        backend = get_backend(name, int(modulus, 16))
    except (KeyError, ValueError) as exc:
        raise error("missing or malformed backend line", path=path) from exc
    return backend, fields


def _indexed(fields: Dict[str, str], label: str, backend: BilinearBackend) -> List[Any]:
    elements = []
    while f"{label}.{len(elements)}" in fields:
        elements.append(backend.decode(fields[f"{label}.{len(elements)}"]))
    return elements


def parse_vk(text: str, path: str = "<vk>") -> VerificationKey:
    backend, fields = _read(text, VK_MAGIC, ParseError, path)
    try:
        n_in, n_out = (int(x) for x in fields["io"].split())
        vk = VerificationKey(
            backend=backend.name, modulus=backend.order, n_in=n_in, n_out=n_out,
            P=backend.decode(fields["P"]), Q=backend.decode(fields["Q"]), tP=backend.decode(fields["tP"]),
            vP_io=_indexed(fields, "vP_io", backend),
            wQ_io=_indexed(fields, "wQ_io", backend),
            yP_io=_indexed(fields, "yP_io", backend),
            vP_one=backend.decode(fields["vP_one"]) if "vP_one" in fields else None,
            wQ_one=backend.decode(fields["wQ_one"]) if "wQ_one" in fields else None,
            yP_one=backend.decode(fields["yP_one"]) if "yP_one" in fields else None,
            bit_width=int(fields["bitwidth"]) if "bitwidth" in fields else None,
            signed_io=[int(i) for i in fields.get("signed", "").split()],
        )
    except (KeyError, ValueError, MalformedProof) as exc:
        raise ParseError(f"malformed verification key: {exc}", path=path) from exc
    if not len(vk.vP_io) == len(vk.wQ_io) == len(vk.yP_io) == vk.n_io:
        raise ParseError(f"verification key lists do not match io {n_in} {n_out}", path=path)
    return vk


def parse_ek(text: str, path: str = "<ek>") -> EvaluationKey:
    backend, fields = _read(text, EK_MAGIC, ParseError, path)
    try:
        unit = fields["unit"]
        return EvaluationKey(
            backend=backend.name, modulus=backend.order, n_io=int(fields["io"]),
            unit_index=None if unit == "-" else int(unit),
            vP=_indexed(fields, "vP", backend),
            wQ=_indexed(fields, "wQ", backend),
            yP=_indexed(fields, "yP", backend),
            sQ_powers=_indexed(fields, "sQ_powers", backend),
        )
    except (KeyError, ValueError, MalformedProof) as exc:
        raise ParseError(f"malformed evaluation key: {exc}", path=path) from exc


def parse_proof(text: str, backend: Optional[BilinearBackend] = None, path: str = "<proof>") -> Proof:
    """Raises MalformedProof for anything that is not a well-formed proof."""
    parsed_backend, fields = _read(text, PROOF_MAGIC, MalformedProof, path)
    backend = backend or parsed_backend
    if parsed_backend.name != backend.name or parsed_backend.order != backend.order:
        raise MalformedProof("proof was made for another backend", path=path)
    try:
        return Proof(**{label: backend.decode(fields[label]) for label in ("V_mid", "W_mid", "Y_mid", "H")})
    except KeyError as exc:
        raise MalformedProof(f"proof lacks {exc}", path=path) from exc
