use std::f64::consts::PI;

use clap::Args;
use nlsphere::harmonics::{random_vector_spectrum, HarmonicMode, VectorSpectrum};
use nlsphere::kernels::eigen_tables;
use nlsphere::operators::Locality;
use nlsphere::stokes::{stokes_residual, Cap};
use serde::Serialize;

use crate::io::{csv_table, emit, json_bytes, num, VERSION};
use crate::verify::normal;
use crate::{kernel_params, CliResult, Format, OutputArgs};

#[derive(Args, Debug)]
pub struct StokesArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.5])]
    pub a: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.25])]
    pub deltas: Vec<f64>,
    /// Cap angles in radians; defaults to π/6, π/2, 3π/4.
    #[arg(long, value_delimiter = ',')]
    pub theta0: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub lmax: usize,
    /// Use `x × ∇_S Y_{1,0}` instead of a random field.
    #[arg(long)]
    pub zonal: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct Row {
    theta0: f64,
    a: f64,
    delta: f64,
    lmax: usize,
    lhs: f64,
    rhs: f64,
    residual: f64,
}

#[derive(Serialize)]
struct Report {
    version: &'static str,
    rows: Vec<Row>,
}

pub fn run(args: &StokesArgs) -> CliResult<()> {
    let thetas = if args.theta0.is_empty() { vec![PI / 6.0, PI / 2.0, 0.75 * PI] } else { args.theta0.clone() };
    let caps = thetas.iter().map(|&t| Ok(Cap::new(t)?)).collect::<CliResult<Vec<_>>>()?;
    let v = if args.zonal {
        VectorSpectrum::mode(args.lmax.max(1), HarmonicMode::CrossGradY, 1, 0)?
    } else {
        random_vector_spectrum(args.lmax, &mut normal(args.seed))
    };
    let mut rows = Vec::new();
    for &a in &args.a {
        for &d in &args.deltas {
            let tables = eigen_tables(&kernel_params(a, d)?, v.lmax)?;
            for cap in &caps {
                let r = stokes_residual(&v, cap, Locality::Nonlocal(&tables))?;
                rows.push(Row {
                    theta0: cap.theta0(),
                    a,
                    delta: d,
                    lmax: v.lmax,
                    lhs: r.lhs.re,
                    rhs: r.rhs.re,
                    residual: r.residual,
                });
            }
        }
    }
    let bytes = match args.out.format {
        Format::Json => json_bytes(&Report { version: VERSION, rows })?,
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![num(r.theta0), num(r.a), num(r.delta), r.lmax.to_string(), num(r.lhs), num(r.rhs), num(r.residual)]
                })
                .collect();
            csv_table(&["theta0", "a", "delta", "lmax", "lhs", "rhs", "residual"], &body)?
        }
    };
    emit(&args.out, &bytes)
}
