use phasebell::bell::{large_l_s, quantum_bell_s, LargeL, SignPattern};
use phasebell::grid::Axis;
use phasebell::state::{psi_l, Sign};
use serde_json::Value;
use std::f64::consts::SQRT_2;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{num, ExperimentReport, ReportBuilder, Table};

pub const CROSS_ROUTE_TOL: f64 = 1e-3;
/// Largest `L` at which the oscillatory momentum route is also evaluated.
pub const MOMENTUM_ROUTE_MAX_L: f64 = 1e2;
/// Grid box half-width as a multiple of `L`.
pub const GRID_BOX_RATIO: f64 = 24.0;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GridRoute {
    pub n: usize,
    pub half_width: f64,
    pub s: f64,
    pub operator_s: Option<f64>,
    pub norm_deficit: f64,
}

/// `S` for `Ψ±` from its sampled 2D marginals with the θ pattern.
pub fn grid_route(l: f64, sign: Sign, n: usize, half_width: f64) -> Result<GridRoute> {
    let a = Axis::symmetric(n, half_width)?;
    let psi = psi_l(l, sign, [a, a], false)?;
    let report = quantum_bell_s(&psi.state, &SignPattern::theta())?;
    Ok(GridRoute {
        n,
        half_width,
        s: report.s,
        operator_s: report.operator_check,
        norm_deficit: psi.norm_deficit(),
    })
}

struct Row {
    l: f64,
    position: std::result::Result<LargeL, String>,
    momentum: Option<std::result::Result<LargeL, String>>,
    grid: Option<std::result::Result<GridRoute, String>>,
    mirror: Option<f64>,
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new(config);
    let sign = config.sign;
    let mut ls = config.l_values.clone();
    ls.sort_by(f64::total_cmp);
    ls.dedup();

    let mut rows = Vec::new();
    for &l in &ls {
        let position = large_l_s(l, sign).map_err(|e| e.to_string());
        let other = match sign {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        let mirror = large_l_s(l, other).ok().map(|r| r.s);
        let momentum = (l <= MOMENTUM_ROUTE_MAX_L).then(|| LargeL::momentum(l, sign).map_err(|e| e.to_string()));
        let grid = (l <= config.grid_max_l).then(|| {
            let half_width = config.box_half_width.unwrap_or(GRID_BOX_RATIO * l);
            grid_route(l, sign, config.grid_n(), half_width).map_err(|e| e.to_string())
        });
        rows.push(Row {
            l,
            position,
            momentum,
            grid,
            mirror,
        });
    }

    let mut table = Table::new(
        "sweep",
        &[
            "L",
            "S_1d",
            "error_estimate",
            "S_momentum",
            "momentum_error_estimate",
            "S_grid",
            "S_grid_operator",
            "grid_n",
            "grid_box",
            "grid_minus_1d",
            "S_opposite_sign",
            "note",
        ],
    );
    for r in &rows {
        let pos = r.position.as_ref().ok();
        let mom = r.momentum.as_ref().and_then(|m| m.as_ref().ok());
        let grid = r.grid.as_ref().and_then(|g| g.as_ref().ok());
        let mut notes = Vec::new();
        if let Err(e) = &r.position {
            notes.push(format!("1d route failed: {e}"));
        }
        if let Some(Err(e)) = &r.momentum {
            notes.push(format!("momentum route failed: {e}"));
        }
        match &r.grid {
            None => notes.push(format!("grid route infeasible above L = {}", config.grid_max_l)),
            Some(Err(e)) => notes.push(format!("grid route failed: {e}")),
            Some(Ok(_)) => {}
        }
        table.push(vec![
            num(r.l),
            num(pos.map(|p| p.s)),
            num(pos.map(|p| p.error_estimate)),
            num(mom.map(|p| p.s)),
            num(mom.map(|p| p.error_estimate)),
            num(grid.map(|g| g.s)),
            num(grid.and_then(|g| g.operator_s)),
            grid.map_or(Value::Null, |g| g.n.into()),
            num(grid.map(|g| g.half_width)),
            num(grid.zip(pos).map(|(g, p)| g.s - p.s)),
            num(r.mirror),
            Value::String(notes.join("; ")),
        ]);
    }
    b.table(table);

    let sv = sign.value();
    let target = 2.0 * SQRT_2;
    let evaluated: Vec<(f64, &LargeL)> = rows
        .iter()
        .filter_map(|r| r.position.as_ref().ok().map(|p| (r.l, p)))
        .collect();
    for r in &rows {
        if let Err(e) = &r.position {
            b.error(&format!("L = {}: 1d route", r.l), e);
        }
    }
    if evaluated.len() >= 2 {
        let increasing = evaluated.windows(2).all(|w| sv * w[1].1.s > sv * w[0].1.s);
        let approaching = evaluated
            .windows(2)
            .all(|w| (target - sv * w[1].1.s).abs() < (target - sv * w[0].1.s).abs());
        b.flag("S strictly increasing in L", increasing, None);
        b.flag("|S - 2√2| decreasing in L", approaching, None);
    }
    match evaluated.iter().rev().find(|(_, p)| p.error_estimate <= 1e-3) {
        Some((l, p)) => {
            b.result("largest_reliable_L", l);
            b.gt("S beyond 2 at largest reliable L", sv * p.s, 2.0);
        }
        None => {
            b.flag("S beyond 2 at largest reliable L", false, Some("no L with error <= 1e-3".into()));
        }
    }
    let observed_max = evaluated.iter().map(|(_, p)| sv * p.s).fold(f64::NEG_INFINITY, f64::max);
    b.result("observed_max_abs_S", &observed_max);
    b.result("target_abs_S", &target);

    for r in &rows {
        let Ok(p) = &r.position else { continue };
        if let Some(m) = r.mirror {
            b.le(&format!("L = {}: opposite sign mirrors", r.l), (m + p.s).abs(), 1e-12);
        }
        match &r.momentum {
            Some(Ok(m)) => {
                b.le(&format!("L = {}: momentum vs 1d route", r.l), (m.s - p.s).abs(), CROSS_ROUTE_TOL);
            }
            Some(Err(e)) => {
                b.error(&format!("L = {}: momentum route", r.l), e);
            }
            None => {}
        }
        match &r.grid {
            Some(Ok(g)) => {
                b.le(&format!("L = {}: grid vs 1d route", r.l), (g.s - p.s).abs(), CROSS_ROUTE_TOL);
                if let Some(op) = g.operator_s {
                    b.le(&format!("L = {}: grid vs operator route", r.l), (op - g.s).abs(), 1e-6);
                }
            }
            Some(Err(e)) => {
                b.error(&format!("L = {}: grid route", r.l), e);
            }
            None => {}
        }
    }
    Ok(b.finish())
}
