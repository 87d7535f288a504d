use clap::Args;
use nlsphere::harmonics::{
    random_scalar_spectrum, random_vector_spectrum, sobolev_norm, ScalarSpectrum, SpectrumRef, VectorSpectrum,
};
use nlsphere::kernels::eigen_tables;
use nlsphere::operators::{apply, OperatorKind, Selector, Spectrum};
use serde::Serialize;

use crate::io::{csv_table, emit, json_bytes, num, VERSION};
use crate::verify::normal;
use crate::{kernel_params, CliResult, Failure, Format, OutputArgs};

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 4)]
    pub lmax: usize,
    /// Comma-separated horizons, largest first.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.025])]
    pub deltas: Vec<f64>,
    /// Sobolev index of the operator distances.
    #[arg(long, default_value_t = 0.0)]
    pub sobolev: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `(kind, quantity, l, delta, value)`; slopes have no `delta`.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub kind: &'static str,
    pub quantity: String,
    pub l: Option<usize>,
    pub delta: Option<f64>,
    pub value: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'static str,
    a: f64,
    rows: &'a [Row],
}

/// Nonlocal operators and their local limits.
pub const PAIRS: [(&str, Selector, Selector); 7] = [
    ("surf-div", Selector::SurfDiv, Selector::SurfDiv),
    ("scalar-surf-curl", Selector::ScalarSurfCurl, Selector::ScalarSurfCurl),
    ("surf-grad", Selector::SurfGrad, Selector::SurfGrad),
    ("vector-surf-curl", Selector::VectorSurfCurl, Selector::VectorSurfCurl),
    ("laplacian", Selector::NonlocalLaplacian, Selector::LaplaceBeltrami),
    ("curl", Selector::Curl, Selector::Curl),
    ("curl-adjoint", Selector::CurlAdjoint, Selector::CurlAdjoint),
];

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `‖a − b‖_{H^s}`.
pub fn distance(a: &Spectrum, b: &Spectrum, s: f64) -> f64 {
    let sub = |p: &[nlsphere::Complex64], q: &[nlsphere::Complex64]| p.iter().zip(q).map(|(u, v)| u - v).collect();
    match (a, b) {
        (Spectrum::Scalar(x), Spectrum::Scalar(y)) => {
            sobolev_norm(SpectrumRef::Scalar(&ScalarSpectrum { lmax: x.lmax, coeffs: sub(&x.coeffs, &y.coeffs) }), s)
        }
        (Spectrum::Vector(x), Spectrum::Vector(y)) => {
            let d = VectorSpectrum { lmax: x.lmax, s: sub(&x.s, &y.s), t: sub(&x.t, &y.t), x: sub(&x.x, &y.x) };
            sobolev_norm(SpectrumRef::Vector(&d), s)
        }
        _ => f64::NAN,
    }
}

pub fn sweep(args: &ConvergenceArgs) -> CliResult<Vec<Row>> {
    if args.deltas.len() < 2 {
        return Err(Failure::Config("need at least two horizons".into()));
    }
    let tables = args
        .deltas
        .iter()
        .map(|&d| Ok(eigen_tables(&kernel_params(args.a, d)?, args.lmax)?))
        .collect::<CliResult<Vec<_>>>()?;
    let mut rows = Vec::new();
    let quantities: [(&'static str, &dyn Fn(usize, usize) -> f64); 2] = [
        ("lambda", &|k, l| (tables[k].lambda[l] - 1.0).abs()),
        ("theta", &|k, l| (tables[k].theta[l] - 1.0).abs()),
    ];
    for (name, q) in quantities {
        for l in 0..=args.lmax {
            let vals: Vec<f64> = (0..args.deltas.len()).map(|k| q(k, l)).collect();
            for (&d, &v) in args.deltas.iter().zip(&vals) {
                rows.push(Row { kind: name, quantity: format!("abs_{name}_minus_1"), l: Some(l), delta: Some(d), value: v });
            }
            if l > 0 {
                let slope = log_log_slope(&args.deltas, &vals);
                rows.push(Row { kind: "slope", quantity: format!("abs_{name}_minus_1"), l: Some(l), delta: None, value: slope });
            }
        }
    }
    let mut n = normal(args.seed);
    let u = random_scalar_spectrum(args.lmax, &mut n);
    let v = random_vector_spectrum(args.lmax, &mut n);
    for (name, nl, loc) in PAIRS {
        let input = if nl.takes_vector() { SpectrumRef::Vector(&v) } else { SpectrumRef::Scalar(&u) };
        let local = apply(&OperatorKind::local(loc), input)?;
        let mut vals = Vec::new();
        for (t, &d) in tables.iter().zip(&args.deltas) {
            let dist = distance(&apply(&OperatorKind::nonlocal(nl, t), input)?, &local, args.sobolev);
            rows.push(Row { kind: "distance", quantity: name.into(), l: None, delta: Some(d), value: dist });
            vals.push(dist);
        }
        rows.push(Row {
            kind: "slope",
            quantity: name.into(),
            l: None,
            delta: None,
            value: log_log_slope(&args.deltas, &vals),
        });
    }
    Ok(rows)
}

pub fn run(args: &ConvergenceArgs) -> CliResult<()> {
    let rows = sweep(args)?;
    let bytes = match args.out.format {
        Format::Json => json_bytes(&Report { version: VERSION, a: args.a, rows: &rows })?,
        Format::Csv => {
            let opt = |x: Option<String>| x.unwrap_or_default();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.kind.to_string(),
                        r.quantity.clone(),
                        opt(r.l.map(|l| l.to_string())),
                        opt(r.delta.map(num)),
                        num(r.value),
                    ]
                })
                .collect();
            csv_table(&["kind", "quantity", "l", "delta", "value"], &body)?
        }
    };
    emit(&args.out, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|d: &f64| 3.0 * d.powi(2)).collect();
        assert!((log_log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
