//! Convergence of the mollified dynamics to the sharp-δ dynamics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_cfl, step_plan, Integrator};
use crate::energy::deviation_norm;
use crate::error::{Error, Result};
use crate::grid::FieldState;
use crate::impurity::ImpurityParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifiedRow {
    pub eps: f64,
    /// `H^1 x L^2` distance to the sharp run at the horizon.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifiedConvergence {
    pub q: f64,
    pub horizon: f64,
    pub dt: f64,
    pub rows: Vec<MollifiedRow>,
    /// `log2(dev_k / dev_{k+1}) / log2(eps_k / eps_{k+1})` for consecutive rows.
    pub orders: Vec<f64>,
    /// Mean of `orders`, `None` with fewer than two rows or zero deviations.
    pub order_estimate: Option<f64>,
    pub monotone: bool,
}

fn run(datum: &FieldState, params: &ImpurityParams, horizon: f64, dt: f64) -> Result<FieldState> {
    let (steps, dt) = step_plan(horizon, dt)?;
    let mut integ = Integrator::new(datum.grid(), params)?;
    let mut s = datum.clone();
    integ.advance(&mut s, dt, steps)?;
    Ok(s)
}

/// Distance between Mollified(ε) (pairing coupling) and Sharp solutions at
/// `horizon`, for each ε in the strictly decreasing list.
pub fn mollified_convergence(
    datum: &FieldState,
    q: f64,
    eps_list: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<MollifiedConvergence> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "mollifier widths must be given in strictly decreasing order".into(),
        ));
    }
    check_cfl(datum.grid(), dt)?;
    datum.check_finite()?;
    let params: Vec<ImpurityParams> = eps_list
        .iter()
        .map(|&e| ImpurityParams::mollified(q, e))
        .collect();
    for p in &params {
        p.discretize(datum.grid())?;
    }
    let sharp = run(datum, &ImpurityParams::sharp(q), horizon, dt)?;
    let rows = params
        .par_iter()
        .zip(eps_list)
        .map(|(p, &eps)| -> Result<MollifiedRow> {
            let s = run(datum, p, horizon, dt)?;
            Ok(MollifiedRow {
                eps,
                deviation: deviation_norm(&s, &sharp)?.total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[0].deviation > 0.0 && w[1].deviation > 0.0)
        .map(|w| (w[0].deviation / w[1].deviation).ln() / (w[0].eps / w[1].eps).ln())
        .collect();
    let order_estimate = if orders.is_empty() {
        None
    } else {
        Some(orders.iter().sum::<f64>() / orders.len() as f64)
    };
    let monotone = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    Ok(MollifiedConvergence {
        q,
        horizon,
        dt,
        rows,
        orders,
        order_estimate,
        monotone,
    })
}
