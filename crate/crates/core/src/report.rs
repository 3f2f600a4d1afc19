//! Engine-independent test reports and their JSON form.

use serde_json::{json, Value};

use crate::beret::BeretReport;
use crate::binex::LambdaIndex;
use crate::multifit::{CuboidTest, MultiFitReport};

/// Version of the JSON layout emitted for reports and summaries.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum TestReport {
    MultiFit(MultiFitReport),
    Beret(BeretReport),
}

impl TestReport {
    pub fn global_p(&self) -> f64 {
        match self {
            TestReport::MultiFit(r) => r.global_p,
            TestReport::Beret(r) => r.global_p,
        }
    }

    pub fn rejected(&self) -> bool {
        match self {
            TestReport::MultiFit(r) => r.rejected,
            TestReport::Beret(r) => r.rejected,
        }
    }

    pub fn total_tests(&self) -> usize {
        match self {
            TestReport::MultiFit(r) => r.total_tests,
            TestReport::Beret(r) => r.total_tests,
        }
    }

    /// Report body as JSON; `full` adds every individual test.
    pub fn to_json(&self, full: bool) -> Value {
        match self {
            TestReport::MultiFit(r) => multifit_json(r, full),
            TestReport::Beret(r) => beret_json(r, full),
        }
    }
}

fn cuboid_json(t: &CuboidTest) -> Value {
    let c = &t.cuboid;
    json!({
        "margin_pair": [c.margin_pair.0, c.margin_pair.1],
        "depth": [c.k1, c.k2],
        "prefix": { "x": c.prefix_x_signs(), "y": c.prefix_y_signs() },
        "table": t.table.rows(),
        "p": t.p.value,
        "p_adjusted": t.p.effective(),
    })
}

pub fn multifit_json(r: &MultiFitReport, full: bool) -> Value {
    let mut v = json!({
        "method": "multifit",
        "global_p": r.global_p,
        "alpha": r.alpha,
        "rejected": r.rejected,
        "mode": r.mode,
        "correction": r.correction,
        "r_max": r.r_max,
        "n": r.n,
        "dims": [r.dims.0, r.dims.1],
        "total_tests": r.total_tests,
        "tested": r.tests.len(),
        "strongest": r.strongest().map(cuboid_json),
    });
    if full {
        v["tests"] = r.tests.iter().map(cuboid_json).collect();
    }
    v
}

fn lambda_json(l: LambdaIndex, depth: u32) -> Value {
    json!({
        "x_mask": LambdaIndex::mask_string(l.x_mask, depth),
        "y_mask": LambdaIndex::mask_string(l.y_mask, depth),
    })
}

pub fn beret_json(r: &BeretReport, full: bool) -> Value {
    let f = r.strongest();
    let pair = r.strongest_projection();
    let mut v = json!({
        "method": "beret",
        "global_p": r.global_p,
        "alpha": r.alpha,
        "rejected": r.rejected,
        "d_max": r.d_max,
        "m": r.projections.len(),
        "correction": r.correction,
        "n": r.n,
        "dims": [r.dims.0, r.dims.1],
        "total_tests": r.total_tests,
        "strongest": {
            "projection": f.projection,
            "s": pair.s,
            "t": pair.t,
            "lambda": lambda_json(f.stat.lambda, r.d_max),
            "s_sum": f.stat.s_sum,
            "s_bar": f.stat.s_bar,
            "p": f.p.value,
            "p_adjusted": f.p.effective(),
        },
    });
    if full {
        v["findings"] = r
            .findings
            .iter()
            .map(|f| {
                json!({
                    "projection": f.projection,
                    "lambda": lambda_json(f.stat.lambda, r.d_max),
                    "s_bar": f.stat.s_bar,
                    "p": f.p.value,
                    "p_adjusted": f.p.effective(),
                })
            })
            .collect();
    }
    v
}
