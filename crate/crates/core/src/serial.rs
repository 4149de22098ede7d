//! JSON encoding of states, operators and coefficient tables.
//!
//! Every tensor is written as `{"shape": [..], "data": [[re, im], ..]}` with
//! the data in row-major order, first index slowest. Documents carry a
//! `schema` tag and the grid, truncation and model they belong to.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expansion::CoefficientTable;
use crate::fock::{FockOperator, FockSpace, FockState, Monomial, RapidityGrid, Side};
use crate::kinematics::{ModelParams, ScatteringFunction};
use crate::{Error, Result, C64};

pub const STATE_SCHEMA: &str = "zflab.state/1";
pub const OPERATOR_SCHEMA: &str = "zflab.operator/1";
pub const TABLE_SCHEMA: &str = "zflab.coefficients/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub shape: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

impl TensorJson {
    pub fn new(points: usize, rank: usize, values: &[C64]) -> Self {
        Self { shape: vec![points; rank], data: values.iter().map(|v| [v.re, v.im]).collect() }
    }

    pub fn values(&self) -> Result<Vec<C64>> {
        let len: usize = self.shape.iter().product();
        if len != self.data.len() {
            return Err(Error::Parse(format!("shape {:?} does not match {} entries", self.shape, self.data.len())));
        }
        Ok(self.data.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceJson {
    pub grid: RapidityGrid,
    pub n_max: usize,
    pub model: ModelParams,
}

impl SpaceJson {
    fn of(space: &FockSpace) -> Self {
        Self { grid: space.grid().clone(), n_max: space.n_max(), model: space.scattering().params }
    }

    pub fn build(&self) -> Result<Arc<FockSpace>> {
        FockSpace::new(self.grid.clone(), self.n_max, ScatteringFunction::new(self.model))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub schema: String,
    pub space: SpaceJson,
    pub sectors: Vec<TensorJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonomialJson {
    pub m: usize,
    pub n: usize,
    pub side: Side,
    pub coefficient: TensorJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub schema: String,
    pub space: SpaceJson,
    pub terms: Vec<MonomialJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderJson {
    pub m: usize,
    pub n: usize,
    pub coefficient: TensorJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub schema: String,
    pub grid: RapidityGrid,
    pub max_order: usize,
    pub orders: Vec<OrderJson>,
    pub unreliable: Vec<(usize, usize)>,
}

fn check_schema(found: &str, want: &str) -> Result<()> {
    if found == want {
        Ok(())
    } else {
        Err(Error::Parse(format!("expected schema {want}, found {found}")))
    }
}

pub fn state_to_json(state: &FockState) -> StateJson {
    let n = state.space().n();
    StateJson {
        schema: STATE_SCHEMA.into(),
        space: SpaceJson::of(state.space()),
        sectors: state.sectors().iter().enumerate().map(|(r, t)| TensorJson::new(n, r, t)).collect(),
    }
}

pub fn state_from_json(doc: &StateJson) -> Result<FockState> {
    check_schema(&doc.schema, STATE_SCHEMA)?;
    let space = doc.space.build()?;
    let sectors = doc.sectors.iter().map(|t| t.values()).collect::<Result<Vec<_>>>()?;
    FockState::from_sectors(&space, sectors)
}

/// Only operators that are plain sums of monomials have a compact encoding.
pub fn operator_to_json(op: &FockOperator) -> Result<OperatorJson> {
    let terms = op
        .monomials()
        .ok_or_else(|| Error::Parse("only sums of normal-ordered monomials can be serialized".into()))?;
    let n = op.space().n();
    Ok(OperatorJson {
        schema: OPERATOR_SCHEMA.into(),
        space: SpaceJson::of(op.space()),
        terms: terms
            .iter()
            .map(|t| {
                let (m, k) = t.order();
                MonomialJson { m, n: k, side: t.side(), coefficient: TensorJson::new(n, m + k, t.coeff()) }
            })
            .collect(),
    })
}

pub fn operator_from_json(doc: &OperatorJson) -> Result<FockOperator> {
    check_schema(&doc.schema, OPERATOR_SCHEMA)?;
    let space = doc.space.build()?;
    let terms = doc
        .terms
        .iter()
        .map(|t| Monomial::new(&space, t.m, t.n, t.side, t.coefficient.values()?))
        .collect::<Result<Vec<_>>>()?;
    Ok(FockOperator::from_monomials(&space, terms))
}

pub fn table_to_json(t: &CoefficientTable) -> TableJson {
    let n = t.grid.len();
    TableJson {
        schema: TABLE_SCHEMA.into(),
        grid: t.grid.clone(),
        max_order: t.max_order,
        orders: t
            .entries
            .iter()
            .map(|(&(m, k), v)| OrderJson { m, n: k, coefficient: TensorJson::new(n, m + k, v) })
            .collect(),
        unreliable: t.unreliable.clone(),
    }
}

pub fn table_from_json(doc: &TableJson) -> Result<CoefficientTable> {
    check_schema(&doc.schema, TABLE_SCHEMA)?;
    let mut t = CoefficientTable::new(doc.grid.clone(), doc.max_order);
    for o in &doc.orders {
        t.insert(o.m, o.n, o.coefficient.values()?)?;
    }
    t.unreliable = doc.unreliable.clone();
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::RapidityGrid;

    fn space() -> Arc<FockSpace> {
        let grid = RapidityGrid::symmetric(2.0, 4).unwrap();
        FockSpace::new(grid, 2, ScatteringFunction::new(ModelParams::sinh_gordon(1.0, 1.0).unwrap())).unwrap()
    }

    #[test]
    fn state_roundtrip() {
        let sp = space();
        let psi = FockState::random(&sp, 2, 3).unwrap();
        let text = serde_json::to_string(&state_to_json(&psi)).unwrap();
        let back = state_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(psi.sub(&back).norm(), 0.0);
    }

    #[test]
    fn table_and_operator_roundtrip() {
        let sp = space();
        let t = CoefficientTable::random_symmetric(&sp, 3, 1).unwrap();
        let text = serde_json::to_string(&table_to_json(&t)).unwrap();
        let back = table_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(t, back);
        let op = crate::expansion::assemble(&t, &sp).unwrap();
        let doc = operator_to_json(&op).unwrap();
        let op2 = operator_from_json(&serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap()).unwrap();
        let psi = FockState::random(&sp, 2, 4).unwrap();
        assert!(op.apply(&psi).unwrap().sub(&op2.apply(&psi).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn wrong_schema_rejected() {
        let sp = space();
        let mut doc = state_to_json(&FockState::vacuum(&sp));
        doc.schema = "other".into();
        assert!(matches!(state_from_json(&doc), Err(Error::Parse(_))));
    }
}
