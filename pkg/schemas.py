"""
JSON surfaces of the toolkit

Every file read or written by cli.py goes through one of these models;
`model_json_schema()` of each is the shipped schema (`cli.py schema NAME`).

NO GEOMETRY HERE - models only validate and describe data
"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


class PolygonModel(BaseModel):
    vertices: List[Tuple[float, float]] = Field(..., min_length=3, description="Polygon vertices in boundary order")


class BodyModel(BaseModel):
    vertices: List[Tuple[float, float, float]] = Field(..., min_length=4, description="Points whose hull is the body")


class HarmonicModel(BaseModel):
    lmax: int = Field(..., ge=0)
    coeffs: Dict[str, float] = Field(..., description='Real harmonic coefficients keyed "l,m"')

    @field_validator('coeffs')
    @classmethod
    def keys_are_degree_order(cls, value: Dict[str, float]) -> Dict[str, float]:
        for key in value:
            parts = key.split(',')
            if len(parts) != 2 or not all(p.strip().lstrip('-').isdigit() for p in parts):
                raise ValueError(f'coefficient key {key!r} is not "l,m"')
        return value


class FieldElementModel(BaseModel):
    coeffs: List[str] = Field(..., min_length=6, max_length=6,
                              description='Rationals "p/q" in the basis [1, u, u^2, v, uv, u^2 v]')


class ParallelogramModel(BaseModel):
    theta: float
    length: float
    chord_plus: List[Tuple[float, float]]
    chord_minus: List[Tuple[float, float]]
    area: float


class LatticeModel(BaseModel):
    t1: Tuple[float, float]
    t2: Tuple[float, float]
    inversion_center: Tuple[float, float]
    mean_area: float


class AdmissibilityModel(BaseModel):
    shells: int
    pairs_checked: int
    max_overlap: float
    admissible: bool


class DensityResultModel(BaseModel):
    polygon: str
    density: float = Field(..., gt=0, le=1 + 1e-9)
    delta: float = Field(..., gt=0)
    area: float = Field(..., gt=0)
    minimizing_direction: float
    parallelogram: ParallelogramModel
    lattice: Optional[LatticeModel] = None
    admissibility: Optional[AdmissibilityModel] = None


class CheckModel(BaseModel):
    name: str
    status: str = Field(..., pattern='^(pass|fail)$')
    residual: float
    tolerance: float
    detail: str = ''


class CertificateReportModel(BaseModel):
    passed: bool
    convention: str
    checks: List[CheckModel]


class DensityBoundModel(BaseModel):
    lam: float = Field(..., alias='lambda', ge=0, le=1)
    bound: float
    excess: float
    beta: float
    eta: float
    eta_lambda: float
    mean_width: float
    min_width_residual: float
    direct_mean_volume: Optional[float] = None

    model_config = {'populate_by_name': True}


class BallReportModel(BaseModel):
    body: str
    volume: float
    surface_area: float
    mean_width: float
    eta: float
    min_width_residual: float
    mean_volume: Optional[float] = None
    rotation_found: Optional[bool] = None
    eta_margin: Optional[float] = None
    bound: Optional[DensityBoundModel] = None


SCHEMAS = {
    'polygon': PolygonModel,
    'body': BodyModel,
    'harmonic': HarmonicModel,
    'field-element': FieldElementModel,
    'density': DensityResultModel,
    'certificate': CertificateReportModel,
    'ball': BallReportModel,
}
