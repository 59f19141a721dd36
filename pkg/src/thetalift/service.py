"""HTTP service over the core package, and the request handlers the CLI shares."""

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from thetalift import exactpoly as ep
from thetalift import lift as lf
from thetalift import modforms as mf
from thetalift import qforms as qf
from thetalift import traces as tr


class ServiceError(Exception):
    """A failed request; kind is usage, precondition or certification."""

    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind
        self.message = message


HTTP_STATUS = {"usage": 400, "precondition": 422, "certification": 503}
Precision = Literal["auto", "double", "extended"]


class NumericConfig(BaseModel):
    q_order: int = Field(mf.DEFAULT_ORDER, gt=0)
    quad_nodes: int = Field(tr.DEFAULT_NODES, gt=0)
    tol: float = Field(1e-8, gt=0, lt=1)
    reg_T: float = Field(tr.DEFAULT_T, gt=1)
    precision: Precision = "auto"


class ClassnumRequest(BaseModel):
    lo: int
    hi: int


class ClassnumRow(BaseModel):
    n: int
    H: str


class ClassnumResponse(BaseModel):
    rows: list[ClassnumRow]


class PolyRequest(BaseModel):
    family: Literal["P", "Q", "He", "Pi", "Omega", "E"]
    index: int


class PolyResponse(BaseModel):
    family: str
    index: int
    text: str


class TraceRequest(NumericConfig):
    kind: Literal["cm", "cycle", "square", "twisted"]
    d: Optional[int] = None
    delta: Optional[int] = None
    D: Optional[int] = None
    form: str = "J"


class TraceResponse(BaseModel):
    value: float
    value_im: float
    err: float
    regularization_T: Optional[float] = None


class LiftRequest(NumericConfig):
    theorem: Literal["cycjE2", "E2klift", "liftnoc0k"]
    d_max: int = Field(lf.DEFAULT_DMAX, gt=0)
    k: Optional[int] = None
    delta: Optional[int] = None
    form: Optional[str] = None


class LiftTermModel(BaseModel):
    d: int
    kind: str
    coeff_re: float
    coeff_im: float
    params: list[float]


class LiftResponse(BaseModel):
    theorem: str
    k: int
    delta: Optional[int] = None
    terms: list[LiftTermModel]
    meta: dict


# handlers ---------------------------------------------------------------------

def classnum(req):
    if req.lo < 0 or req.hi < req.lo:
        raise ServiceError("usage", f"bad range {req.lo}..{req.hi}: need 0 <= lo <= hi")
    rows = [ClassnumRow(n=n, H=str(qf.hurwitz(n))) for n in range(req.lo, req.hi + 1) if n % 4 in (0, 3)]
    return ClassnumResponse(rows=rows)


def poly(req):
    if req.index < 0 and req.family not in ("P", "Q"):
        raise ServiceError("usage", f"{req.family} needs a nonnegative index")
    p = ep.FAMILIES[req.family](req.index)
    return PolyResponse(family=req.family, index=req.index, text=p.to_str())


def _form(name, order):
    try:
        return mf.named_form(name, order)
    except (ValueError, OSError) as exc:
        raise ServiceError("usage", f"cannot load form {name!r}: {exc}") from exc


def _need(value, flag):
    if value is None:
        raise ServiceError("usage", f"{flag} is required")
    return value


def trace(req):
    f = _form(req.form, req.q_order)
    try:
        if req.kind == "cm":
            t = tr.trace_cm(f, _need(req.d, "--d"), tol=req.tol)
        elif req.kind == "cycle":
            d = _need(req.d, "--d")
            if d > 0 and qf.is_square(d):
                raise ServiceError("usage", f"d = {d} is a square; use `trace square --d {d}`")
            t = tr.trace_cycle(f, d, nodes=req.quad_nodes)
        elif req.kind == "square":
            t = tr.trace_square(f, _need(req.d, "--d"), T=req.reg_T, nodes=req.quad_nodes,
                                precision=req.precision)
        else:
            t = tr.twisted_trace(f, _need(req.delta, "--delta"), _need(req.D, "--D"), T=req.reg_T,
                                 nodes=req.quad_nodes, precision=req.precision)
    except tr.TraceError as exc:
        raise ServiceError("usage", str(exc)) from exc
    except mf.TruncationError as exc:
        raise ServiceError("certification", str(exc)) from exc
    value = complex(t.value)
    return TraceResponse(value=value.real, value_im=value.imag, err=float(t.err),
                         regularization_T=t.regularization_T)


def _build_lift(req):
    common = dict(T=req.reg_T, nodes=req.quad_nodes, precision=req.precision)
    if req.theorem == "cycjE2":
        return lf.lift_jE2(_need(req.delta, "--delta"), req.d_max, q_order=req.q_order, **common)
    if req.theorem == "E2klift":
        return lf.lift_e2k(_need(req.k, "--k"), req.d_max, q_order=req.q_order, **common)
    f = _form(_need(req.form, "--form"), req.q_order)
    if req.k is not None and f.weight != 2 * req.k:
        raise ServiceError("usage", f"form has weight {f.weight}, not 2k = {2 * req.k}")
    return lf.lift_nearly_hol(f, req.d_max, **common)


def lift(req):
    try:
        L = _build_lift(req)
        # certify the truncation at y = 1
        lf.evaluate_lift(L, 1j, tol=req.tol)
    except lf.PreconditionError as exc:
        raise ServiceError("precondition", str(exc)) from exc
    except (lf.CertificationError, mf.TruncationError) as exc:
        raise ServiceError("certification", str(exc)) from exc
    except (tr.TraceError, lf.LiftError) as exc:
        raise ServiceError("usage", str(exc)) from exc
    doc = L.to_json()
    doc["meta"]["tolerances"]["tail_tol"] = req.tol
    return LiftResponse(**doc)


# HTTP -------------------------------------------------------------------------

app = FastAPI(title="thetalift")


def _call(handler, req):
    try:
        return handler(req)
    except ServiceError as exc:
        raise HTTPException(status_code=HTTP_STATUS[exc.kind],
                            detail={"error": exc.kind, "message": exc.message}) from exc


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/classnum", response_model=ClassnumResponse)
def classnum_endpoint(req: ClassnumRequest):
    return _call(classnum, req)


@app.post("/poly", response_model=PolyResponse)
def poly_endpoint(req: PolyRequest):
    return _call(poly, req)


@app.post("/trace", response_model=TraceResponse)
def trace_endpoint(req: TraceRequest):
    return _call(trace, req)


@app.post("/lift", response_model=LiftResponse)
def lift_endpoint(req: LiftRequest):
    return _call(lift, req)
